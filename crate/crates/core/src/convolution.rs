//! Convolutions with resolvent kernels: the infinite-line product
//! G(t) = ∫_{−∞}^t R(t−s) g(s) ds, the finite product H(t) = ∫_0^t R(t−s) f(s) ds,
//! the tail constants M and m_t that control their truncation, and the mild
//! solution of the fractional relaxation problem.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::fractional::{FamilyKind, ResolventFamily};
use crate::function_model::{Value, VectorFunction};
use crate::interval::Interval;
use crate::modular_norm::NormOptions;
use crate::quadrature::{integrate, QuadOptions};
use crate::report::{ext, fit_power_law, LineFit, TestReport};
use crate::stepanov::{c0_decay_test, stepanov_norm_with, window_norm_with};

#[derive(Debug, Clone)]
pub struct ConvolutionOptions {
    /// Per-t target for the certified truncation remainder.
    pub tolerance: f64,
    /// Largest truncation index tried when the target cannot be met.
    pub k_max: usize,
    pub quad: QuadOptions,
    pub norm: NormOptions,
    /// Spacing of the window positions used to estimate Stepanov norms.
    pub stepanov_step: f64,
}

impl Default for ConvolutionOptions {
    fn default() -> Self {
        ConvolutionOptions {
            tolerance: 1e-8,
            k_max: 2000,
            quad: QuadOptions::default().with_rel_tol(1e-12),
            norm: NormOptions::default(),
            stepanov_step: 0.25,
        }
    }
}

/// The G, F₁, F₂ split of a finite convolution with f = g + w on [0, ∞).
#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub g: Vec<Vec<f64>>,
    /// F₁(t) = ∫_0^t R(t−s) w(s) ds.
    pub f1: Vec<Vec<f64>>,
    /// F₂(t) = −∫_t^∞ R(s) g(t−s) ds.
    pub f2: Vec<Vec<f64>>,
    /// max_t ‖H − (G + F₁ + F₂)‖.
    pub residual: f64,
    /// 2‖ǧ‖_S m_t, the Hölder bound for ‖F₂(t)‖.
    #[serde(serialize_with = "ext::vec")]
    pub f2_bound: Vec<f64>,
    pub f2_bound_holds: bool,
    /// Estimated Stepanov norm of ǧ(s) = g(−s).
    pub reflected_stepanov_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvolutionResult {
    pub t_grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Certified truncation remainder (line convolutions) or quadrature
    /// error estimate (finite convolutions) per t.
    #[serde(serialize_with = "ext::vec")]
    pub tail_bound_series: Vec<f64>,
    pub truncation_k: usize,
    pub decomposition: Option<Decomposition>,
    pub notes: Vec<String>,
}

impl ConvolutionResult {
    /// Writes `t, u1..ud, tail_bound` rows.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let d = self.values.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("u{i}")));
        header.push("tail_bound".into());
        out.write_record(&header)?;
        for ((t, v), b) in self.t_grid.iter().zip(&self.values).zip(&self.tail_bound_series) {
            let mut row = vec![ext::cell(*t)];
            row.extend(v.iter().map(|x| ext::cell(*x)));
            row.push(ext::cell(*b));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// One point of the m_t series with its certified enclosure.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MtPoint {
    pub t: f64,
    /// Σ_{k ≤ K} of the window norms.
    #[serde(with = "ext")]
    pub partial: f64,
    #[serde(with = "ext")]
    pub lower: f64,
    #[serde(with = "ext")]
    pub upper: f64,
}

impl MtPoint {
    pub fn estimate(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MtSeries {
    pub points: Vec<MtPoint>,
    pub truncation_k: usize,
    /// Log-log fit of the enclosure midpoints over t ≥ 1.
    pub fit: Option<LineFit>,
    /// For Mittag-Leffler kernels, the supremum γ/(1+γ) of the admissible
    /// ν with (1−ν)(1+γ) > 1, and the bound exponent −γ it implies.
    pub nu_sup: Option<f64>,
    pub reference_slope: Option<f64>,
}

/// ‖R(t)‖ as a scalar function on [0, ∞), for window norms.
pub fn kernel_norm_function(rf: &ResolventFamily) -> VectorFunction {
    let sing = if rf.is_singular_at_zero() { vec![0.0] } else { vec![] };
    let r = rf.clone();
    VectorFunction::from_singular_fn("kernel norm", Interval::HALF_LINE, sing, move |t| r.norm(t))
}

fn kernel_windows(rf: &ResolventFamily, q: &ExponentFunction, positions: &[f64], opts: &ConvolutionOptions) -> Result<Vec<f64>> {
    let kf = kernel_norm_function(rf);
    positions
        .par_iter()
        .map(|x| window_norm_with(&kf, q, *x, &opts.norm))
        .collect()
}

/// M = Σ_{k ≥ 0} ‖R(· + k)‖_{L^{q(x)}[0,1]}: the partial sum to K and a
/// certified bound on the rest.
pub fn tail_constant_m(rf: &ResolventFamily, q: &ExponentFunction, k: usize) -> Result<(f64, f64)> {
    let s = m_t_series_with(rf, q, &[0.0], k, &ConvolutionOptions::default())?;
    let p = s.points[0];
    Ok((p.partial, p.upper - p.partial))
}

/// m_t = Σ_{k ≥ 0} ‖R(· + t + k)‖_{L^{q(x)}[0,1]} on a grid.
pub fn m_t_series(rf: &ResolventFamily, q: &ExponentFunction, t_grid: &[f64], k: usize) -> Result<MtSeries> {
    m_t_series_with(rf, q, t_grid, k, &ConvolutionOptions::default())
}

pub fn m_t_series_with(
    rf: &ResolventFamily,
    q: &ExponentFunction,
    t_grid: &[f64],
    k: usize,
    opts: &ConvolutionOptions,
) -> Result<MtSeries> {
    rf.decay_model()?;
    if t_grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::Contract("m_t needs t >= 0".into()));
    }
    // Grids with integer spacing share most windows; evaluate each distinct
    // window start once.
    let mut positions: Vec<f64> = t_grid.iter().flat_map(|t| (0..=k).map(move |j| t + j as f64)).collect();
    positions.sort_by(f64::total_cmp);
    positions.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    let norms = kernel_windows(rf, q, &positions, opts)?;
    let lookup = |x: f64| -> f64 {
        let i = positions.partition_point(|p| *p < x - 1e-12 * x.abs().max(1.0));
        norms[i.min(norms.len() - 1)]
    };
    let mut points = Vec::with_capacity(t_grid.len());
    for t in t_grid {
        let ws: Vec<f64> = (0..=k).map(|j| lookup(t + j as f64)).collect();
        let partial: f64 = ws.iter().sum();
        let (lo, hi) = rf.tail_enclosure(*t, k, ws[k])?;
        points.push(MtPoint {
            t: *t,
            partial,
            lower: partial + lo,
            upper: partial + hi,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().filter(|p| p.t >= 1.0).map(|p| (p.t, p.estimate())).unzip();
    let fit = fit_power_law(&xs, &ys);
    let ml = rf.kind == FamilyKind::Resolvent && rf.gamma < 1.0;
    let nu_sup = ml.then(|| rf.gamma / (1.0 + rf.gamma));
    Ok(MtSeries {
        points,
        truncation_k: k,
        fit,
        nu_sup,
        reference_slope: nu_sup.map(|nu| -nu * (1.0 + rf.gamma)),
    })
}

/// ∫_a^b R_ii(s) h(s) ds with 0 ≤ a. A t^{γ−1} singularity at 0 is removed
/// by s = w^{1/γ}, under which R(s) ds = E_{γ,γ}(−a w) dw/γ.
#[allow(clippy::too_many_arguments)]
fn kernel_integral<H: Fn(f64) -> f64>(
    rf: &ResolventFamily,
    smooth: &ResolventFamily,
    i: usize,
    a: f64,
    b: f64,
    h: H,
    h_breaks: &[f64],
    opts: &QuadOptions,
) -> (f64, f64) {
    if !(b > a) {
        return (0.0, 0.0);
    }
    let mut value = 0.0;
    let mut error = 0.0;
    let mut lo = a;
    if a == 0.0 && rf.is_singular_at_zero() {
        let g = rf.gamma;
        let c = b.min(1.0);
        let wb: Vec<f64> = h_breaks.iter().filter(|s| **s > 0.0 && **s < c).map(|s| s.powf(g)).collect();
        let r = integrate(
            |w| {
                let s = w.powf(1.0 / g);
                smooth.entry_at(i, s) * h(s)
            },
            0.0,
            c.powf(g),
            &wb,
            &[],
            opts,
        );
        value += r.value / g;
        error += r.error / g;
        lo = c;
    }
    if lo < b {
        let br: Vec<f64> = h_breaks.iter().copied().filter(|s| *s > lo && *s < b).collect();
        let r = integrate(|s| rf.entry_at(i, s) * h(s), lo, b, &br, &[], opts);
        value += r.value;
        error += r.error;
    }
    (value, error)
}

fn check_dims(rf: &ResolventFamily, d: usize) -> Result<()> {
    if rf.dim() != 1 && rf.dim() != d {
        return Err(Error::Contract(format!(
            "generator has {} entries but the function has {d} components",
            rf.dim()
        )));
    }
    Ok(())
}

/// ∫_a^b R(r) g(t − r) dr for every component.
fn convolve_at(
    rf: &ResolventFamily,
    smooth: &ResolventFamily,
    g: &VectorFunction,
    t: f64,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> (Vec<f64>, f64) {
    let br: Vec<f64> = g.breakpoints(t - b, t - a).into_iter().map(|x| t - x).collect();
    let mut err = 0.0;
    let vals = (0..g.dim())
        .map(|i| {
            let comp = |r: f64| {
                let mut v: Value = smallvec::smallvec![0.0; g.dim()];
                g.eval_into(t - r, &mut v);
                v[i]
            };
            let (v, e) = kernel_integral(rf, smooth, i, a, b, comp, &br, opts);
            err += e;
            v
        })
        .collect();
    (vals, err)
}

fn smooth_part(rf: &ResolventFamily) -> ResolventFamily {
    rf.with_kind(FamilyKind::TwoParameter)
}

/// sup_x ‖ǧ(· + x)‖_{L^{p(x)}[0,1]} over x ∈ [lo, hi], ǧ(s) = g(−s), by a
/// window scan with golden-section refinement.
fn reflected_stepanov(g: &VectorFunction, p: &ExponentFunction, lo: f64, hi: f64, opts: &ConvolutionOptions) -> Result<f64> {
    let gr = g.reflect()?;
    let n = (((hi - lo) / opts.stepanov_step).ceil() as usize).max(1);
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let s = stepanov_norm_with(&gr, p, &grid, &opts.norm)?;
    Ok(s.refined_sup.max(s.sup_estimate))
}

/// Smallest K ≤ k_max whose certified remainder `scale`·upper(K) meets the
/// tolerance, with the window norms w_0..w_K.
fn adaptive_k(
    rf: &ResolventFamily,
    q: &ExponentFunction,
    t: f64,
    scale: f64,
    opts: &ConvolutionOptions,
) -> Result<(usize, Vec<f64>, f64)> {
    let mut ws = Vec::new();
    let mut block = 16usize;
    loop {
        let from = ws.len();
        let to = (from + block).min(opts.k_max + 1);
        let pos: Vec<f64> = (from..to).map(|j| t + j as f64).collect();
        ws.extend(kernel_windows(rf, q, &pos, opts)?);
        for k in from..to {
            let (_, hi) = rf.tail_enclosure(t, k, ws[k])?;
            if scale * hi <= opts.tolerance || k == opts.k_max {
                ws.truncate(k + 1);
                return Ok((k, ws, scale * hi));
            }
        }
        block *= 2;
    }
}

/// G(t) = Σ_{k=0}^{K} ∫_0^1 R(s + k) g(t − s − k) ds on `t_grid`, with the
/// Hölder remainder 2‖ǧ‖_{S^{p(x)}} Σ_{k>K} ‖R(· + k)‖_{L^{p'(x)}[0,1]}.
///
/// `k = None` picks K adaptively from the decay model.
pub fn line_convolution(
    rf: &ResolventFamily,
    g: &VectorFunction,
    p: &ExponentFunction,
    t_grid: &[f64],
    k: Option<usize>,
) -> Result<ConvolutionResult> {
    line_convolution_with(rf, g, p, t_grid, k, &ConvolutionOptions::default())
}

pub fn line_convolution_with(
    rf: &ResolventFamily,
    g: &VectorFunction,
    p: &ExponentFunction,
    t_grid: &[f64],
    k: Option<usize>,
    opts: &ConvolutionOptions,
) -> Result<ConvolutionResult> {
    check_dims(rf, g.dim())?;
    rf.decay_model()?;
    if t_grid.is_empty() {
        return Err(Error::Config("empty t grid".into()));
    }
    if g.domain() != Interval::REAL_LINE {
        return Err(Error::Contract("line convolution needs g defined on the whole line".into()));
    }
    let q = p.conjugate();
    let t_min = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Windows of ǧ that enter: ǧ(· + k − t), k ≤ K.
    let probe_k = k.unwrap_or(64.min(opts.k_max)) as f64;
    let s_norm = reflected_stepanov(g, p, -t_max, probe_k + 1.0 - t_min, opts)?;
    let (kk, ws, bound) = match k {
        Some(kk) => {
            let pos: Vec<f64> = (0..=kk).map(|j| j as f64).collect();
            let ws = kernel_windows(rf, &q, &pos, opts)?;
            let (_, hi) = rf.tail_enclosure(0.0, kk, ws[kk])?;
            (kk, ws, 2.0 * s_norm * hi)
        }
        None => adaptive_k(rf, &q, 0.0, 2.0 * s_norm, opts)?,
    };
    let _ = ws;
    let mut notes = vec![format!("estimated Stepanov norm of the reflected forcing: {s_norm}")];
    if bound > opts.tolerance {
        notes.push(format!("truncation bound {bound:e} exceeds the tolerance {:e} at K = {kk}", opts.tolerance));
    }
    let smooth = smooth_part(rf);
    let upper = kk as f64 + 1.0;
    let values: Vec<Vec<f64>> = t_grid
        .par_iter()
        .map(|t| convolve_at(rf, &smooth, g, *t, 0.0, upper, &opts.quad).0)
        .collect();
    Ok(ConvolutionResult {
        t_grid: t_grid.to_vec(),
        values,
        tail_bound_series: vec![bound; t_grid.len()],
        truncation_k: kk,
        decomposition: None,
        notes,
    })
}

/// H(t) = ∫_0^t R(t − s) f(s) ds on `t_grid`.
pub fn finite_convolution(rf: &ResolventFamily, f: &VectorFunction, t_grid: &[f64]) -> Result<ConvolutionResult> {
    finite_convolution_with(rf, f, t_grid, &ConvolutionOptions::default())
}

pub fn finite_convolution_with(
    rf: &ResolventFamily,
    f: &VectorFunction,
    t_grid: &[f64],
    opts: &ConvolutionOptions,
) -> Result<ConvolutionResult> {
    check_dims(rf, f.dim())?;
    let dom = f.domain();
    for t in t_grid {
        if !(*t >= 0.0) {
            return Err(Error::domain("finite convolution time", *t, 0.0, f64::INFINITY));
        }
        if dom.lo > 0.0 || !dom.contains(*t) {
            return Err(Error::domain("finite convolution time", *t, dom.lo.max(0.0), dom.hi));
        }
    }
    let smooth = smooth_part(rf);
    let out: Vec<(Vec<f64>, f64)> = t_grid
        .par_iter()
        .map(|t| convolve_at(rf, &smooth, f, *t, 0.0, *t, &opts.quad))
        .collect();
    let (values, errs) = out.into_iter().unzip();
    Ok(ConvolutionResult {
        t_grid: t_grid.to_vec(),
        values,
        tail_bound_series: errs,
        truncation_k: 0,
        decomposition: None,
        notes: vec![],
    })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Finite convolution of f = g|_{[0,∞)} + w, together with G, F₁, F₂ and a
/// check of H = G + F₁ + F₂ and of ‖F₂(t)‖ ≤ 2‖ǧ‖_{S^{p(x)}} m_t.
pub fn finite_convolution_decomposed(
    rf: &ResolventFamily,
    g: &VectorFunction,
    w: &VectorFunction,
    p: &ExponentFunction,
    t_grid: &[f64],
) -> Result<ConvolutionResult> {
    finite_convolution_decomposed_with(rf, g, w, p, t_grid, &ConvolutionOptions::default())
}

pub fn finite_convolution_decomposed_with(
    rf: &ResolventFamily,
    g: &VectorFunction,
    w: &VectorFunction,
    p: &ExponentFunction,
    t_grid: &[f64],
    opts: &ConvolutionOptions,
) -> Result<ConvolutionResult> {
    if g.dim() != w.dim() {
        return Err(Error::Contract("g and w must have the same number of components".into()));
    }
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let half = Interval { lo: 0.0, hi: w.domain().hi };
    let f = VectorFunction::linear(vec![(1.0, g.restrict(half)?), (1.0, w.clone())])?;
    let mut h = finite_convolution_with(rf, &f, t_grid, opts)?;
    let gl = line_convolution_with(rf, g, p, t_grid, None, opts)?;
    let f1 = finite_convolution_with(rf, w, t_grid, opts)?;
    let q = p.conjugate();
    let smooth = smooth_part(rf);
    // F₂ uses windows [t + k, t + k + 1], k ≤ K, with the same certified tail.
    let s_norm = reflected_stepanov(g, p, -t_max - gl.truncation_k as f64 - 1.0, 0.0, opts)?;
    let k = gl.truncation_k;
    let ms = m_t_series_with(rf, &q, t_grid, k, opts)?;
    let f2: Vec<(Vec<f64>, f64)> = t_grid
        .par_iter()
        .zip(&ms.points)
        .map(|(t, m)| {
            let (v, _) = convolve_at(rf, &smooth, g, *t, *t, t + k as f64 + 1.0, &opts.quad);
            let tail = 2.0 * s_norm * (m.upper - m.partial);
            (v.into_iter().map(|x| -x).collect(), tail)
        })
        .collect();
    let (f2, f2_tail): (Vec<Vec<f64>>, Vec<f64>) = f2.into_iter().unzip();
    let mut residual = 0.0f64;
    for (i, f2i) in f2.iter().enumerate() {
        let sum: Vec<f64> = (0..g.dim()).map(|c| gl.values[i][c] + f1.values[i][c] + f2i[c]).collect();
        residual = residual.max(sup_diff(&h.values[i], &sum));
    }
    let f2_bound: Vec<f64> = ms.points.iter().map(|m| 2.0 * s_norm * m.upper).collect();
    let f2_bound_holds = f2.iter().zip(&f2_bound).all(|(v, b)| euclid(v) <= b * (1.0 + 1e-8) + 1e-8);
    for (i, b) in h.tail_bound_series.iter_mut().enumerate() {
        *b = (*b).max(gl.tail_bound_series[i] + f2_tail[i]);
    }
    h.truncation_k = k;
    h.notes.extend(gl.notes);
    h.decomposition = Some(Decomposition {
        g: gl.values,
        f1: f1.values,
        f2,
        residual,
        f2_bound,
        f2_bound_holds,
        reflected_stepanov_norm: s_norm,
    });
    Ok(h)
}

/// Mild solution u(t) = S_γ(t)x₀ + ∫_0^t R_γ(t − s) f(s) ds. Only the
/// generator and γ of `rf` are used.
pub fn solve_dfp(rf: &ResolventFamily, x0: &[f64], f: &VectorFunction, t_grid: &[f64]) -> Result<ConvolutionResult> {
    solve_dfp_with(rf, x0, f, t_grid, &ConvolutionOptions::default())
}

pub fn solve_dfp_with(
    rf: &ResolventFamily,
    x0: &[f64],
    f: &VectorFunction,
    t_grid: &[f64],
    opts: &ConvolutionOptions,
) -> Result<ConvolutionResult> {
    if x0.len() != f.dim() {
        return Err(Error::Contract(format!(
            "initial value has {} components but the forcing has {}",
            x0.len(),
            f.dim()
        )));
    }
    check_dims(rf, x0.len())?;
    let s = rf.with_kind(FamilyKind::Relaxation);
    let r = rf.with_kind(FamilyKind::Resolvent);
    let mut res = finite_convolution_with(&r, f, t_grid, opts)?;
    for (t, v) in t_grid.iter().zip(res.values.iter_mut()) {
        for (i, x) in v.iter_mut().enumerate() {
            *x += s.entry_at(i, *t) * x0[i];
        }
    }
    Ok(res)
}

/// Uniform grid spacing, if `t` is one.
fn uniform_step(t: &[f64]) -> Option<f64> {
    if t.len() < 2 {
        return None;
    }
    let h = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    let ok = h > 0.0 && t.iter().enumerate().all(|(i, x)| (x - (t[0] + h * i as f64)).abs() <= 1e-9 * h.max(x.abs()));
    ok.then_some(h)
}

/// Desk-scale test of the decomposition H ∈ AA + S₀^{r₁} + S₀^{r₂}:
/// condition (i) is c0 decay of t ↦ ‖F₁(· + t)‖ in r₁, condition (ii) is c0
/// decay of the F₂ bound 2‖ǧ‖_S m_t in r₂.
pub fn ergodic_component_classify(
    result: &ConvolutionResult,
    r1: &ExponentFunction,
    r2: &ExponentFunction,
) -> Result<TestReport> {
    let dec = result
        .decomposition
        .as_ref()
        .ok_or_else(|| Error::Contract("classification needs a decomposed convolution result".into()))?;
    let h = uniform_step(&result.t_grid)
        .ok_or_else(|| Error::Contract("classification needs a uniform t grid with at least two points".into()))?;
    let t0 = result.t_grid[0];
    let horizon = result.t_grid[result.t_grid.len() - 1] - 1.0;
    let d = dec.f1.first().map_or(1, Vec::len);
    let f1 = VectorFunction::grid(t0, h, d, dec.f1.iter().flatten().copied().collect())?;
    let bound = VectorFunction::grid(t0, h, 1, dec.f2_bound.clone())?;
    let c1 = c0_decay_test(&f1, r1, horizon)?;
    let c2 = c0_decay_test(&bound, r2, horizon)?;
    let verdict = c1.verdict.and(c2.verdict);
    let mut r = TestReport::new("ergodic_components", verdict, c1.statistic, c1.tolerance);
    r.series = c1.series.clone();
    r.fit = c1.fit;
    r.notes.push(format!("condition (i), F1 windows in r1: {}", c1.verdict));
    r.notes.push(format!("condition (ii), m_t-weighted F2 bound in r2: {}", c2.verdict));
    r.notes.push(format!("decomposition residual {:e}", dec.residual));
    Ok(r)
}
