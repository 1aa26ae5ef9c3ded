//! Finite-data tests for (Stepanov) almost periodicity and almost
//! automorphy: Bohr ε-period scans, Bochner shift tests, and the sign of
//! two sines example with the logarithmic exponent.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::function_model::VectorFunction;
use crate::interval::Interval;
use crate::modular_norm::{modular_with, ModularResult, NormOptions};
use crate::quadrature::QuadOptions;
use crate::report::{ext, TestReport, Verdict};
use crate::stepanov::{c0_decay_test, window_norm_with};

#[derive(Debug, Clone)]
pub struct ScanOptions {
    /// Spacing of candidate shifts; default ε/20.
    pub tau_step: Option<f64>,
    /// Length of the t-range on which defects are measured.
    pub t_span: f64,
    /// Spacing of t for pointwise (sup-norm) defects.
    pub t_step: f64,
    /// Spacing of window starts for Stepanov defects.
    pub window_step: f64,
    pub norm: NormOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            tau_step: None,
            t_span: 100.0,
            t_step: 0.05,
            window_step: 0.5,
            norm: NormOptions::default(),
        }
    }
}

/// sup_t of ‖f(· + τ) − f‖ in sup norm or in Stepanov windows, sampled.
struct Defect<'a> {
    f: &'a VectorFunction,
    p: Option<&'a ExponentFunction>,
    ts: Vec<f64>,
    coarse: Vec<f64>,
    norm: &'a NormOptions,
}

impl<'a> Defect<'a> {
    fn new(f: &'a VectorFunction, p: Option<&'a ExponentFunction>, opts: &'a ScanOptions) -> Self {
        let step = if p.is_some() { opts.window_step } else { opts.t_step };
        let n = (opts.t_span / step).round().max(1.0) as usize;
        let ts: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
        let stride = (ts.len() / 48).max(1);
        let coarse = ts.iter().step_by(stride).copied().collect();
        Defect {
            f,
            p,
            ts,
            coarse,
            norm: &opts.norm,
        }
    }

    fn at(&self, tau: f64, t: f64) -> f64 {
        match self.p {
            None => {
                let a = self.f.evaluate(t + tau);
                let b = self.f.evaluate(t);
                match (a, b) {
                    (Ok(a), Ok(b)) => a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
                    _ => f64::INFINITY,
                }
            }
            Some(p) => match self.f.translate(tau).sub(self.f) {
                Ok(d) => window_norm_with(&d, p, t, self.norm).unwrap_or(f64::INFINITY),
                Err(_) => f64::INFINITY,
            },
        }
    }

    /// Max over `pts`, stopping as soon as it reaches `stop`.
    fn max_until(&self, tau: f64, pts: &[f64], stop: f64) -> f64 {
        let mut m = 0.0f64;
        for t in pts {
            m = m.max(self.at(tau, *t));
            if m >= stop {
                break;
            }
        }
        m
    }

    fn full(&self, tau: f64) -> f64 {
        self.max_until(tau, &self.ts, f64::INFINITY)
    }
}

/// Outcome of the search for an ε-period inside one window of shifts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeriodWindow {
    pub window_start: f64,
    /// First shift with defect below ε, if any.
    pub tau: Option<f64>,
    /// Defect of `tau`, or of the most promising candidate when none passed.
    #[serde(with = "ext")]
    pub defect: f64,
}

fn search_window(d: &Defect, lo: f64, hi: f64, eps: f64, step: f64) -> PeriodWindow {
    let n = ((hi - lo) / step).ceil() as usize;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=n {
        let tau = (lo + i as f64 * step).min(hi);
        let coarse = d.max_until(tau, &d.coarse, best.0.max(eps));
        if coarse < best.0 {
            best = (coarse, tau);
        }
        if coarse < eps {
            let full = d.max_until(tau, &d.ts, eps);
            if full < eps {
                return PeriodWindow {
                    window_start: lo,
                    tau: Some(tau),
                    defect: full,
                };
            }
        }
    }
    PeriodWindow {
        window_start: lo,
        tau: None,
        defect: d.full(best.1),
    }
}

fn check_scan_domain(f: &VectorFunction, reach: f64) -> Result<()> {
    f.domain().check("scan start", 0.0)?;
    f.domain().check("scan reach", reach)
}

/// Bohr test: does every window [jL, (j+1)L] ⊂ [0, horizon] of shifts contain
/// an ε-period? With `p = None` defects are sup norms of f(· + τ) − f,
/// otherwise sups of Stepanov window norms.
pub fn epsilon_period_scan(
    f: &VectorFunction,
    p: Option<&ExponentFunction>,
    eps: f64,
    interval_length: f64,
    horizon: f64,
) -> Result<TestReport> {
    epsilon_period_scan_with(f, p, eps, interval_length, horizon, &ScanOptions::default())
}

pub fn epsilon_period_scan_with(
    f: &VectorFunction,
    p: Option<&ExponentFunction>,
    eps: f64,
    interval_length: f64,
    horizon: f64,
    opts: &ScanOptions,
) -> Result<TestReport> {
    if !(eps > 0.0) || !(interval_length > 0.0) || !(horizon >= interval_length) {
        return Err(Error::Config(format!(
            "need eps > 0 and 0 < interval length <= horizon, got {eps}, {interval_length}, {horizon}"
        )));
    }
    check_scan_domain(f, horizon + opts.t_span + 1.0)?;
    let d = Defect::new(f, p, opts);
    let step = opts.tau_step.unwrap_or(eps / 20.0);
    let count = (horizon / interval_length).floor() as usize;
    let windows: Vec<PeriodWindow> = (0..count)
        .into_par_iter()
        .map(|j| {
            let lo = j as f64 * interval_length;
            search_window(&d, lo, lo + interval_length, eps, step)
        })
        .collect();
    let all = windows.iter().all(|w| w.tau.is_some());
    let worst = windows.iter().map(|w| w.defect).fold(0.0, f64::max);
    let mut r = TestReport::new("epsilon_period_scan", Verdict::from_bool(all), worst, eps);
    r.series = windows.iter().map(|w| (w.window_start, w.defect)).collect();
    for w in &windows {
        match w.tau {
            Some(t) => r.notes.push(format!("[{}, {}]: tau = {t}", w.window_start, w.window_start + interval_length)),
            None => r.notes.push(format!(
                "[{}, {}]: no eps-period, best defect {}",
                w.window_start,
                w.window_start + interval_length,
                w.defect
            )),
        }
    }
    Ok(r)
}

/// For each ε in `eps_list` (in order), the smallest shift τ ≥ `tau_min`
/// with defect below ε, continuing the search from the previous hit.
/// Decreasing ε gives shifts along which f(· + τ) → f.
pub fn epsilon_period_sequence(
    f: &VectorFunction,
    p: Option<&ExponentFunction>,
    eps_list: &[f64],
    tau_min: f64,
    tau_max: f64,
    opts: &ScanOptions,
) -> Result<Vec<f64>> {
    check_scan_domain(f, tau_max + opts.t_span + 1.0)?;
    let d = Defect::new(f, p, opts);
    let mut from = tau_min;
    let mut out = Vec::new();
    for eps in eps_list {
        let step = opts.tau_step.unwrap_or(eps / 20.0);
        let w = search_window(&d, from, tau_max, *eps, step);
        match w.tau {
            Some(t) => {
                out.push(t);
                from = t + 1.0;
            }
            None => break,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BochnerOptions {
    /// Residuals of the tail of the chosen subsequence must stay below this.
    pub tolerance: f64,
    /// Share of the chosen subsequence averaged into the candidate limit.
    pub tail_fraction: f64,
    pub norm: NormOptions,
    /// Spacing of the samples of the candidate limit kept in the report.
    pub sample_step: f64,
}

impl Default for BochnerOptions {
    fn default() -> Self {
        BochnerOptions {
            tolerance: 5e-2,
            tail_fraction: 0.25,
            norm: NormOptions {
                quad: QuadOptions::default().with_rel_tol(1e-9),
                rel_tol: 1e-8,
                ..NormOptions::default()
            },
            sample_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftTestReport {
    pub sequence: Vec<f64>,
    /// Indices into `sequence` of the kept subsequence.
    pub chosen_subsequence: Vec<usize>,
    /// Indices into `chosen_subsequence` averaged into the limit.
    pub tail: Vec<usize>,
    /// Pointwise average of the tail copies f(a + ·).
    #[serde(skip)]
    pub candidate_limit: Option<VectorFunction>,
    /// Samples (x, g(x)) of the limit over the tested windows.
    pub candidate_limit_samples: Vec<(f64, Vec<f64>)>,
    pub t_grid: Vec<f64>,
    /// ‖f(a_k + · + t) − g(· + t)‖ per kept shift k and grid t.
    pub forward_residuals: Vec<Vec<f64>>,
    /// ‖g(t + · − a_k) − f(t + ·)‖ per kept shift k and grid t.
    pub backward_residuals: Vec<Vec<f64>>,
    /// Largest residual over the tail, both families, all t.
    #[serde(with = "ext")]
    pub tail_residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// sup over the grid of ‖f(a + · + t) − f(b + · + t)‖.
fn copy_distance(f: &VectorFunction, p: &ExponentFunction, a: f64, b: f64, t_grid: &[f64], opts: &NormOptions) -> f64 {
    let d = match f.translate(a).sub(&f.translate(b)) {
        Ok(d) => d,
        Err(_) => return f64::INFINITY,
    };
    t_grid
        .iter()
        .map(|t| window_norm_with(&d, p, *t, opts).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

/// Bochner-type test along a finite list of shifts.
///
/// Shifts are kept greedily while the distance from each new copy to the
/// previously kept one does not increase. The candidate limit g is the
/// average of the last `tail_fraction` of kept copies (at least two), and the
/// verdict is true iff every forward and backward residual of those tail
/// copies is below the tolerance at every grid t. Fewer than three usable
/// shifts, or a kept chain shorter than three, is inconclusive.
pub fn bochner_shift_test(f: &VectorFunction, p: &ExponentFunction, shifts: &[f64], t_grid: &[f64]) -> Result<ShiftTestReport> {
    bochner_shift_test_with(f, p, shifts, t_grid, &BochnerOptions::default())
}

pub fn bochner_shift_test_with(
    f: &VectorFunction,
    p: &ExponentFunction,
    shifts: &[f64],
    t_grid: &[f64],
    opts: &BochnerOptions,
) -> Result<ShiftTestReport> {
    if t_grid.is_empty() {
        return Err(Error::Config("empty t grid".into()));
    }
    let dom = f.domain();
    let t_lo = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let t_hi = t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let usable_shift = |a: f64| dom.contains_interval(&Interval { lo: a + t_lo, hi: a + t_hi }) && dom.contains_interval(&Interval { lo: t_lo - a, hi: t_hi - a });
    let usable: Vec<usize> = (0..shifts.len()).filter(|i| usable_shift(shifts[*i])).collect();
    let mut report = ShiftTestReport {
        sequence: shifts.to_vec(),
        chosen_subsequence: vec![],
        tail: vec![],
        candidate_limit: None,
        candidate_limit_samples: vec![],
        t_grid: t_grid.to_vec(),
        forward_residuals: vec![],
        backward_residuals: vec![],
        tail_residual: f64::NAN,
        tolerance: opts.tolerance,
        verdict: Verdict::Inconclusive,
        notes: vec![],
    };
    if usable.len() < 3 {
        report.notes.push(format!("only {} usable shifts; need 3", usable.len()));
        return Ok(report);
    }
    let mut kept = vec![usable[0]];
    let mut threshold = f64::INFINITY;
    let floor = 1e-3 * opts.tolerance;
    for &j in &usable[1..] {
        let last = *kept.last().unwrap();
        let dist = copy_distance(f, p, shifts[last], shifts[j], t_grid, &opts.norm);
        // Differences below the noise floor count as equal.
        if dist <= threshold || dist <= floor {
            kept.push(j);
            threshold = dist.max(floor);
        }
    }
    report.chosen_subsequence = kept.clone();
    if kept.len() < 3 {
        report.notes.push(format!("kept chain has only {} shifts; need 3", kept.len()));
        return Ok(report);
    }
    let tail_len = ((kept.len() as f64 * opts.tail_fraction).ceil() as usize).clamp(2, kept.len());
    let tail: Vec<usize> = (kept.len() - tail_len..kept.len()).collect();
    let copies: Vec<VectorFunction> = tail.iter().map(|k| f.translate(shifts[kept[*k]])).collect();
    let g = VectorFunction::average(&copies)?;
    let residuals = |a: f64| -> (Vec<f64>, Vec<f64>) {
        let fwd_diff = f.translate(a).sub(&g);
        let bwd_diff = g.translate(-a).sub(f);
        let eval = |d: &Result<VectorFunction>| -> Vec<f64> {
            t_grid
                .iter()
                .map(|t| match d {
                    Ok(d) => window_norm_with(d, p, *t, &opts.norm).unwrap_or(f64::INFINITY),
                    Err(_) => f64::INFINITY,
                })
                .collect()
        };
        (eval(&fwd_diff), eval(&bwd_diff))
    };
    let res: Vec<(Vec<f64>, Vec<f64>)> = kept.par_iter().map(|k| residuals(shifts[*k])).collect();
    let (fwd, bwd): (Vec<Vec<f64>>, Vec<Vec<f64>>) = res.into_iter().unzip();
    let tail_residual = tail
        .iter()
        .flat_map(|k| fwd[*k].iter().chain(&bwd[*k]))
        .copied()
        .fold(0.0, f64::max);
    let n = ((t_hi - t_lo) / opts.sample_step).round() as usize;
    report.candidate_limit_samples = (0..=n)
        .map(|i| {
            let x = t_lo + (t_hi - t_lo) * i as f64 / n.max(1) as f64;
            (x, g.evaluate(x).map(|v| v.to_vec()).unwrap_or_default())
        })
        .collect();
    report.verdict = Verdict::from_bool(tail_residual <= opts.tolerance);
    report.tail = tail;
    report.candidate_limit = Some(g);
    report.forward_residuals = fwd;
    report.backward_residuals = bwd;
    report.tail_residual = tail_residual;
    Ok(report)
}

/// The modular of (F(· + a) − F(· + b))/λ on [0, 1] with exponent 1 − ln x,
/// F the sign of sin t + sin √2 t.
pub fn counterexample_divergence(lambda: f64, a: f64, b: f64) -> Result<ModularResult> {
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
    }
    let sf = VectorFunction::sign_of_two_sine();
    let diff = sf.translate(a).sub(&sf.translate(b))?.scale(1.0 / lambda);
    modular_with(&diff, &ExponentFunction::one_minus_log(), Interval::UNIT, &NormOptions::default())
}

/// Shifts 2π·n_k for the Pell denominators n_k = 1, 2, 5, 12, 29, … (with
/// |n_k√2 − m_k| = 1/(n_k√2 + m_k)), skipping the first `skip`. They are
/// exact near-periods of sin t + sin √2 t whose defect decays like 1/n_k.
pub fn pell_shifts(skip: usize, count: usize) -> Vec<f64> {
    let mut n = vec![1u64, 2];
    while n.len() < skip + count {
        let k = n.len();
        n.push(2 * n[k - 1] + n[k - 2]);
    }
    n[skip..skip + count].iter().map(|k| 2.0 * std::f64::consts::PI * *k as f64).collect()
}

/// Default λ sweep around the threshold 2/e.
pub const LAMBDA_SWEEP: [f64; 5] = [0.5, 0.6, 0.7, 0.7358, 0.8];

/// Shifts a_{2n−1} = t_n, a_{2n} = t_n + n (n = 1..=count) where t_n is a
/// zero of the two-sine function at which F(t_n + ·) and F(t_n + n + ·)
/// have opposite signs just to the right of 0, so that their difference
/// has modulus 2 near 0 and the 1 − ln x modular of the difference over λ
/// diverges for every λ ≤ 2/e.
pub fn counterexample_shifts(count: usize) -> Vec<f64> {
    let f = VectorFunction::two_sine();
    let mut out = Vec::with_capacity(2 * count);
    for n in 1..=count {
        let n_f = n as f64;
        // Starting each search at 10n keeps the t_n distinct.
        let mut lo = 10.0 * n_f;
        let t = loop {
            let found = f.roots(lo, lo + 10.0).into_iter().find(|r| {
                let h = 1e-6;
                let s0 = f.scalar(r + h).signum();
                let s1 = f.scalar(r + n_f + h).signum();
                s0 != 0.0 && s1 != 0.0 && s0 != s1
            });
            if let Some(t) = found {
                break t;
            }
            lo += 10.0;
        };
        out.push(t);
        out.push(t + n_f);
    }
    out
}

/// f = g + w on [0, ∞) with w decaying in Stepanov windows and g passing the
/// shift test.
pub fn asymptotic_decompose(
    f: &VectorFunction,
    p: &ExponentFunction,
    g_candidate: &VectorFunction,
    shifts: &[f64],
    t_grid: &[f64],
    horizon: f64,
) -> Result<TestReport> {
    let half = Interval {
        lo: 0.0,
        hi: f.domain().hi.min(g_candidate.domain().hi),
    };
    if f.domain().lo > 0.0 {
        return Err(Error::Contract("f must be defined on [0, inf)".into()));
    }
    let w = f.restrict(half)?.sub(&g_candidate.restrict(half)?)?;
    let decay = c0_decay_test(&w, p, horizon)?;
    let shift = bochner_shift_test(g_candidate, p, shifts, t_grid)?;
    let verdict = decay.verdict.and(shift.verdict);
    let mut r = TestReport::new("asymptotic_decompose", verdict, decay.statistic, decay.tolerance);
    r.series = decay.series.clone();
    r.fit = decay.fit;
    r.notes.push(format!("perturbation decay: {}", decay.verdict));
    r.notes.push(format!("shift test of the candidate: {} (tail residual {})", shift.verdict, shift.tail_residual));
    Ok(r)
}

/// Tail residuals of the shift test for each exponent in `exponents`, with
/// no verdict. The question whether membership for every exponent in D₊
/// follows from membership for one is left to the reader of the table.
pub fn exponent_sweep(
    f: &VectorFunction,
    exponents: &[ExponentFunction],
    shifts: &[f64],
    t_grid: &[f64],
) -> Result<Vec<(String, f64)>> {
    exponents
        .iter()
        .map(|p| Ok((p.describe(), bochner_shift_test(f, p, shifts, t_grid)?.tail_residual)))
        .collect()
}
