//! Stepanov window norms t ↦ ‖f(· + t)‖_{L^{p(x)}[0,1]} and the decay and
//! ergodic-mean tests built on them.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::function_model::VectorFunction;
use crate::interval::Interval;
use crate::modular_norm::{luxemburg_norm_with, NormOptions};
use crate::quadrature::{integrate, QuadOptions};
use crate::report::{ext, fit_power_law, TestReport, Verdict};

#[derive(Debug, Clone, Serialize)]
pub struct WindowNormSeries {
    pub base_points: Vec<f64>,
    #[serde(serialize_with = "ext::vec")]
    pub values: Vec<f64>,
    #[serde(skip)]
    pub exponent: Option<ExponentFunction>,
    pub exponent_label: String,
    /// Largest value on the grid.
    #[serde(with = "ext")]
    pub sup_estimate: f64,
    pub argmax: f64,
    /// Grid sup improved by golden-section search next to the argmax.
    #[serde(with = "ext")]
    pub refined_sup: f64,
}

/// ‖f(· + t)‖ on [0, 1].
pub fn window_norm(f: &VectorFunction, p: &ExponentFunction, t: f64) -> Result<f64> {
    window_norm_with(f, p, t, &NormOptions::default())
}

/// Constant exponents use the closed form (∫‖f‖^{p₀})^{1/p₀} (or the
/// sampled sup for p₀ = ∞); other exponents go through the Luxemburg
/// bisection.
pub fn window_norm_with(f: &VectorFunction, p: &ExponentFunction, t: f64, opts: &NormOptions) -> Result<f64> {
    let window = Interval { lo: t, hi: t + 1.0 };
    if !f.domain().contains_interval(&window) {
        return Err(Error::domain("window start", t, f.domain().lo, f.domain().hi - 1.0));
    }
    let g = f.translate(t);
    match p.as_constant() {
        Some(p0) if p0.is_infinite() => Ok(g.sampled_sup(0.0, 1.0, opts.sup_samples)),
        Some(p0) => {
            let breaks = g.breakpoints(0.0, 1.0);
            let sing = g.singular_points();
            let mut quad = opts.quad.clone();
            quad.abs_tol = quad.abs_tol.max(opts.abs_floor.powf(p0));
            let r = integrate(|x| g.norm_at(x).powf(p0), 0.0, 1.0, &breaks, &sing, &quad);
            Ok(if r.divergent { f64::INFINITY } else { r.value.powf(1.0 / p0) })
        }
        None => Ok(luxemburg_norm_with(&g, p, Interval::UNIT, opts)?.value),
    }
}

/// Window norms over `t_grid` with the sup refined near the grid argmax.
pub fn stepanov_norm(f: &VectorFunction, p: &ExponentFunction, t_grid: &[f64]) -> Result<WindowNormSeries> {
    stepanov_norm_with(f, p, t_grid, &NormOptions::default())
}

pub fn stepanov_norm_with(f: &VectorFunction, p: &ExponentFunction, t_grid: &[f64], opts: &NormOptions) -> Result<WindowNormSeries> {
    if t_grid.is_empty() {
        return Err(Error::Config("empty t grid".into()));
    }
    let values = t_grid
        .par_iter()
        .map(|t| window_norm_with(f, p, *t, opts))
        .collect::<Result<Vec<f64>>>()?;
    let (imax, sup) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(i, m), (j, v)| if *v > m { (j, *v) } else { (i, m) });
    let mut refined = sup;
    if sup.is_finite() && t_grid.len() >= 2 {
        let lo = t_grid[imax.saturating_sub(1)];
        let hi = t_grid[(imax + 1).min(t_grid.len() - 1)];
        let eval = |t: f64| window_norm_with(f, p, t, opts).unwrap_or(f64::NEG_INFINITY);
        refined = refined.max(golden_max(eval, lo, hi, 40));
    }
    Ok(WindowNormSeries {
        base_points: t_grid.to_vec(),
        values,
        exponent: Some(p.clone()),
        exponent_label: p.describe(),
        sup_estimate: sup,
        argmax: t_grid[imax],
        refined_sup: refined,
    })
}

/// Golden-section search for a maximum on [a, b].
fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
    }
    best
}

#[derive(Debug, Clone)]
pub struct DecayOptions {
    /// Values at the horizon must fall below this.
    pub tolerance: f64,
    /// Fitted log-log slope must be below this to count as decaying.
    pub slope_threshold: f64,
    pub points: usize,
    pub norm: NormOptions,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions {
            tolerance: 1e-2,
            slope_threshold: -0.05,
            points: 64,
            norm: NormOptions::default(),
        }
    }
}

/// Reads a verdict off a positive series sampled at increasing abscissae.
///
/// True: last value below tolerance and the tail slope negative (or the
/// whole series is negligibly small). Inconclusive: decaying, not yet small.
/// False: not decaying.
fn decay_verdict(name: &str, xs: &[f64], ys: &[f64], opts: &DecayOptions) -> TestReport {
    let last = *ys.last().unwrap_or(&f64::INFINITY);
    let half = xs.len() / 2;
    let fit = fit_power_law(&xs[half..], &ys[half..]);
    let slope = fit.map_or(f64::NAN, |f| f.slope);
    let negligible = ys[half..].iter().all(|y| *y <= opts.tolerance * 1e-6);
    let verdict = if negligible || (last <= opts.tolerance && slope < 0.0) {
        Verdict::True
    } else if slope < opts.slope_threshold && last.is_finite() {
        Verdict::Inconclusive
    } else {
        Verdict::False
    };
    let mut r = TestReport::new(name, verdict, last, opts.tolerance);
    r.series = xs.iter().copied().zip(ys.iter().copied()).collect();
    r.fit = fit;
    if verdict == Verdict::Inconclusive {
        r.notes.push("decaying but still above tolerance at the horizon".into());
    }
    r
}

/// Whether t ↦ ‖w(· + t)‖_{p(x)} vanishes at infinity, judged up to `horizon`.
pub fn c0_decay_test(w: &VectorFunction, p: &ExponentFunction, horizon: f64) -> Result<TestReport> {
    c0_decay_test_with(w, p, horizon, &DecayOptions::default())
}

pub fn c0_decay_test_with(w: &VectorFunction, p: &ExponentFunction, horizon: f64, opts: &DecayOptions) -> Result<TestReport> {
    let dom = w.domain();
    if !(horizon > dom.lo) {
        return Err(Error::Contract(format!("horizon {horizon} must exceed the domain start {}", dom.lo)));
    }
    if dom.hi < horizon + 1.0 {
        let mut r = TestReport::new("c0_decay", Verdict::Inconclusive, f64::NAN, opts.tolerance);
        r.notes.push(format!("function known only up to {}, horizon needs {}", dom.hi, horizon + 1.0));
        return Ok(r);
    }
    let n = opts.points.max(8);
    let start = dom.lo.max(0.0);
    let ts: Vec<f64> = (0..n).map(|i| start + (horizon - start) * i as f64 / (n - 1) as f64).collect();
    let vals = ts
        .par_iter()
        .map(|t| window_norm_with(w, p, *t, &opts.norm))
        .collect::<Result<Vec<f64>>>()?;
    // Fit against 1 + t so that a series starting at t = 0 stays usable.
    let xs: Vec<f64> = ts.iter().map(|t| 1.0 + t - start).collect();
    let mut r = decay_verdict("c0_decay", &xs, &vals, opts);
    r.series = ts.into_iter().zip(vals).collect();
    Ok(r)
}

/// Whether M(r) = (1/2r)∫_{−r}^{r}‖Φ‖ tends to 0, on r = 1, 2, 4, … ≤ r_max.
pub fn ergodic_mean_test(phi: &VectorFunction, r_max: f64) -> Result<TestReport> {
    ergodic_mean_test_with(phi, r_max, &DecayOptions::default())
}

pub fn ergodic_mean_test_with(phi: &VectorFunction, r_max: f64, opts: &DecayOptions) -> Result<TestReport> {
    phi.domain().check("ergodic mean radius", r_max)?;
    phi.domain().check("ergodic mean radius", -r_max)?;
    if r_max < 4.0 {
        return Err(Error::Contract("ergodic mean test needs r_max >= 4".into()));
    }
    let quad = QuadOptions::default().with_rel_tol(1e-10);
    let shell = |a: f64, b: f64| {
        let br = phi.breakpoints(a, b);
        let sing = phi.singular_points();
        let r = integrate(|x| phi.norm_at(x), a, b, &br, &sing, &quad);
        r.value
    };
    let mut rs = vec![1.0];
    while rs.last().unwrap() * 2.0 <= r_max * (1.0 + 1e-12) {
        rs.push(rs.last().unwrap() * 2.0);
    }
    let mut acc = shell(-1.0, 1.0);
    let mut means = vec![acc / 2.0];
    for w in rs.windows(2) {
        acc += shell(w[0], w[1]) + shell(-w[1], -w[0]);
        means.push(acc / (2.0 * w[1]));
    }
    Ok(decay_verdict("ergodic_mean", &rs, &means, opts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> ExponentFunction {
        ExponentFunction::constant(v).unwrap()
    }

    #[test]
    fn window_norm_examples() {
        let v = window_norm(&VectorFunction::sin(), &c(2.0), 0.0).unwrap();
        assert!((v - (0.5 - 2f64.sin() / 4.0).sqrt()).abs() < 1e-12);
        let l = ExponentFunction::one_minus_log();
        let v = window_norm(&VectorFunction::constant(1.7), &l, 12.3).unwrap();
        assert!((v - 1.7).abs() < 1e-8);
        let bounded = VectorFunction::aa_exemplar();
        let p = ExponentFunction::sinusoidal(3.0, 1.5, 2.0, 0.3, Interval::UNIT).unwrap();
        for t in [0.0, 5.0, 17.5] {
            let n = window_norm(&bounded, &p, t).unwrap();
            let sup = bounded.sampled_sup(t, t + 1.0, 20_000);
            assert!(n <= sup * (1.0 + 1e-8));
        }
        let half = VectorFunction::identity().restrict(Interval { lo: 0.0, hi: 10.0 }).unwrap();
        assert!(matches!(window_norm(&half, &c(1.0), 9.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn stepanov_sin_sup_is_at_most_its_analytic_max() {
        // Window integral ∫_t^{t+1} sin² = 1/2 − sin(1)cos(2t+1)/2, maximal
        // value (1 + sin 1)/2.
        let grid: Vec<f64> = (0..=62).map(|i| 0.1 * i as f64).collect();
        let s = stepanov_norm(&VectorFunction::sin(), &c(2.0), &grid).unwrap();
        let exact = ((1.0 + 1f64.sin()) / 2.0).sqrt();
        assert!(s.sup_estimate <= exact + 1e-12);
        assert!((s.refined_sup - exact).abs() < 1e-9, "{}", s.refined_sup);
        assert!((s.sup_estimate - exact).abs() < 1e-2);
    }

    #[test]
    fn stepanov_identity_on_bounded_domain() {
        let f = VectorFunction::identity().restrict(Interval { lo: 0.0, hi: 10.0 }).unwrap();
        let grid: Vec<f64> = (0..=18).map(|i| 0.5 * i as f64).collect();
        let s = stepanov_norm(&f, &c(1.0), &grid).unwrap();
        assert!((s.sup_estimate - 9.5).abs() < 1e-10);
        assert_eq!(s.argmax, 9.0);
    }

    #[test]
    fn sign_function_is_stepanov_bounded() {
        let f = VectorFunction::sign_of_two_sine();
        let p = ExponentFunction::sinusoidal(2.0, 1.0, 1.0, 0.0, Interval::UNIT).unwrap();
        let grid: Vec<f64> = (0..40).map(|i| 0.5 * i as f64).collect();
        let s = stepanov_norm(&f, &p, &grid).unwrap();
        assert!(s.refined_sup <= 1.0 + 1e-9);
    }

    #[test]
    fn decay_examples() {
        let w = VectorFunction::rational_decay().restrict(Interval::HALF_LINE).unwrap();
        let r = c0_decay_test(&w, &c(2.0), 100.0).unwrap();
        assert_eq!(r.verdict, Verdict::True, "{r:?}");
        let one = VectorFunction::constant(1.0).restrict(Interval::HALF_LINE).unwrap();
        assert_eq!(c0_decay_test(&one, &c(2.0), 100.0).unwrap().verdict, Verdict::False);
        let e = VectorFunction::exp_decay(0.5).restrict(Interval::HALF_LINE).unwrap();
        let r = c0_decay_test(&e, &ExponentFunction::one_minus_log(), 60.0).unwrap();
        assert_eq!(r.verdict, Verdict::True);
        let short = w.restrict(Interval { lo: 0.0, hi: 50.0 }).unwrap();
        assert_eq!(c0_decay_test(&short, &c(2.0), 100.0).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn ergodic_examples() {
        let r = ergodic_mean_test(&VectorFunction::rational_decay(), 1024.0).unwrap();
        assert_eq!(r.verdict, Verdict::True);
        let (x, m) = *r.series.last().unwrap();
        assert!((m - x.atan() / x).abs() < 1e-9);
        let r = ergodic_mean_test(&VectorFunction::constant(1.0), 1024.0).unwrap();
        assert_eq!(r.verdict, Verdict::False);
        // The mean of |sin| tends to 2/π, not 0.
        let r = ergodic_mean_test(&VectorFunction::sin(), 1024.0).unwrap();
        assert_eq!(r.verdict, Verdict::False);
        assert!((r.statistic - 2.0 / std::f64::consts::PI).abs() < 1e-3);
    }
}
