//! The modular ρ(f) = ∫ φ_{p(x)}(‖f(x)‖) dx and the Luxemburg norm.
//!
//! φ_p(t) = t^p for finite p. On the infinite set of p the contribution is
//! 0 when ‖f‖ ≤ 1 there and ∞ otherwise, decided from a sampled supremum.
//! λ ↦ ρ(f/λ) is nonincreasing, so the norm is found by bisection.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::function_model::VectorFunction;
use crate::interval::Interval;
use crate::quadrature::{integrate, QuadOptions};
use crate::report::ext;

/// φ_{p}(t).
pub fn phi(p: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Contract(format!("phi needs t >= 0, got {t}")));
    }
    Ok(phi_unchecked(p, t))
}

#[inline]
fn phi_unchecked(p: f64, t: f64) -> f64 {
    if p.is_infinite() {
        if t <= 1.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else if t == 0.0 {
        0.0
    } else {
        t.powf(p)
    }
}

/// φ_{p(x)}(t) for an exponent function.
pub fn phi_at(p: &ExponentFunction, x: f64, t: f64) -> Result<f64> {
    phi(p.eval(x)?, t)
}

#[derive(Debug, Clone, Serialize)]
pub struct ModularResult {
    #[serde(with = "ext")]
    pub value: f64,
    pub quadrature_error_estimate: f64,
    pub divergent: bool,
    pub refinement_trace: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormResult {
    #[serde(with = "ext")]
    pub value: f64,
    pub bracket: (f64, f64),
    #[serde(with = "ext")]
    pub modular_at_value: f64,
    pub iterations: usize,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone)]
pub struct NormOptions {
    pub quad: QuadOptions,
    /// Relative bracket width at which bisection stops.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Sample count for sup estimates on the infinite set and for brackets.
    pub sup_samples: usize,
    /// Norms below this are resolved only in absolute terms; it keeps the
    /// quadrature from chasing rounding noise in differences of equal
    /// functions.
    pub abs_floor: f64,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            quad: QuadOptions::default().with_rel_tol(1e-13),
            rel_tol: 1e-10,
            max_iter: 200,
            sup_samples: 4096,
            abs_floor: 1e-14,
        }
    }
}

/// Everything about (f, p, Ω) that does not depend on the scale λ.
struct Prepared<'a> {
    f: &'a VectorFunction,
    p: &'a ExponentFunction,
    finite: Vec<Interval>,
    /// Sampled sup of ‖f‖ over the infinite set; −∞ when the set is null.
    sup_on_inf: f64,
    breaks: Vec<f64>,
    singular: Vec<f64>,
}

impl<'a> Prepared<'a> {
    fn new(f: &'a VectorFunction, p: &'a ExponentFunction, omega: &Interval, samples: usize) -> Result<Self> {
        if !omega.is_bounded() {
            return Err(Error::Contract("modular needs a bounded interval".into()));
        }
        if !f.domain().contains_interval(omega) {
            return Err(Error::domain("integration interval end", omega.hi, f.domain().lo, f.domain().hi));
        }
        if !p.domain().contains_interval(omega) {
            return Err(Error::domain("integration interval end", omega.hi, p.domain().lo, p.domain().hi));
        }
        let finite = p.finite_pieces(omega);
        let mut sup_on_inf = f64::NEG_INFINITY;
        for s in p.infinite_pieces(omega) {
            if s.length() > 0.0 {
                sup_on_inf = sup_on_inf.max(f.sampled_sup(s.lo, s.hi, samples));
            }
        }
        let mut breaks = f.breakpoints(omega.lo, omega.hi);
        breaks.extend(p.breakpoints());
        let mut singular = p.singular_points();
        singular.extend(f.singular_points());
        singular.retain(|x| omega.contains(*x));
        Ok(Prepared {
            f,
            p,
            finite,
            sup_on_inf,
            breaks,
            singular,
        })
    }

    /// ρ(scale·f).
    fn modular(&self, scale: f64, quad: &QuadOptions) -> ModularResult {
        if self.sup_on_inf * scale > 1.0 + 1e-12 {
            return ModularResult {
                value: f64::INFINITY,
                quadrature_error_estimate: 0.0,
                divergent: true,
                refinement_trace: vec![(0, f64::INFINITY)],
            };
        }
        let mut value = 0.0;
        let mut err = 0.0;
        let mut trace = Vec::new();
        let mut offset = 0usize;
        for piece in &self.finite {
            let (f, p) = (self.f, self.p);
            let r = integrate(
                |x| phi_unchecked(p.value(x), scale * f.norm_at(x)),
                piece.lo,
                piece.hi,
                &self.breaks,
                &self.singular,
                quad,
            );
            for (n, v) in &r.trace {
                trace.push((offset + n, value + v));
            }
            offset += r.trace.last().map_or(0, |e| e.0);
            if r.divergent {
                return ModularResult {
                    value: f64::INFINITY,
                    quadrature_error_estimate: f64::INFINITY,
                    divergent: true,
                    refinement_trace: trace,
                };
            }
            value += r.value;
            err += r.error;
        }
        if trace.is_empty() {
            trace.push((0, 0.0));
        }
        ModularResult {
            value,
            quadrature_error_estimate: err,
            divergent: false,
            refinement_trace: trace,
        }
    }

    fn l1_and_sup(&self, omega: &Interval, quad: &QuadOptions, samples: usize) -> (f64, f64) {
        let f = self.f;
        let l1 = integrate(|x| f.norm_at(x), omega.lo, omega.hi, &self.breaks, &self.singular, quad);
        let sup = f.sampled_sup(omega.lo, omega.hi, samples);
        (if l1.divergent { f64::INFINITY } else { l1.value }, sup)
    }
}

/// ρ(f) over Ω.
pub fn modular(f: &VectorFunction, p: &ExponentFunction, omega: Interval) -> Result<ModularResult> {
    modular_with(f, p, omega, &NormOptions::default())
}

pub fn modular_with(f: &VectorFunction, p: &ExponentFunction, omega: Interval, opts: &NormOptions) -> Result<ModularResult> {
    let prep = Prepared::new(f, p, &omega, opts.sup_samples)?;
    Ok(prep.modular(1.0, &opts.quad))
}

/// ‖f‖_{L^{p(x)}(Ω)} = inf{λ > 0 : ρ(f/λ) ≤ 1}.
pub fn luxemburg_norm(f: &VectorFunction, p: &ExponentFunction, omega: Interval) -> Result<NormResult> {
    luxemburg_norm_with(f, p, omega, &NormOptions::default())
}

pub fn luxemburg_norm_with(f: &VectorFunction, p: &ExponentFunction, omega: Interval, opts: &NormOptions) -> Result<NormResult> {
    let prep = Prepared::new(f, p, &omega, opts.sup_samples)?;
    let (l1, sup) = prep.l1_and_sup(&omega, &opts.quad, opts.sup_samples);
    if l1 == 0.0 && sup == 0.0 {
        return Ok(NormResult {
            value: 0.0,
            bracket: (0.0, 0.0),
            modular_at_value: 0.0,
            iterations: 0,
            diagnostic: None,
        });
    }
    let rho = |lambda: f64| prep.modular(1.0 / lambda, &opts.quad).value;

    // Upper bracket: ρ(f/hi) ≤ 1.
    let mut hi = 1.0 + if l1.is_finite() { l1 } else { 0.0 } + sup;
    let mut rho_hi = rho(hi);
    let mut iterations = 0;
    while !(rho_hi <= 1.0) {
        iterations += 1;
        if iterations > 200 || !hi.is_finite() {
            return Ok(NormResult {
                value: f64::INFINITY,
                bracket: (hi, f64::INFINITY),
                modular_at_value: f64::INFINITY,
                iterations,
                diagnostic: Some("modular exceeds 1 (or diverges) at every tested scale".into()),
            });
        }
        hi *= 2.0;
        rho_hi = rho(hi);
    }
    // Lower bracket: ρ(f/lo) > 1.
    let mut lo = hi;
    loop {
        iterations += 1;
        let cand = lo * 0.5;
        if iterations > 400 || cand == 0.0 {
            return Ok(NormResult {
                value: hi,
                bracket: (0.0, hi),
                modular_at_value: rho_hi,
                iterations,
                diagnostic: Some("modular stays below 1 at every tested scale".into()),
            });
        }
        let r = rho(cand);
        if r > 1.0 {
            lo = cand;
            break;
        }
        hi = cand;
        rho_hi = r;
        lo = cand;
    }
    let mut it = 0;
    while hi - lo > opts.rel_tol * hi && it < opts.max_iter {
        it += 1;
        let mid = 0.5 * (lo + hi);
        let r = rho(mid);
        if r <= 1.0 {
            hi = mid;
            rho_hi = r;
        } else {
            lo = mid;
        }
    }
    let diagnostic = (hi - lo > opts.rel_tol * hi).then(|| "bisection iteration budget exhausted".to_string());
    Ok(NormResult {
        value: hi,
        bracket: (lo, hi),
        modular_at_value: rho_hi,
        iterations: iterations + it,
        diagnostic,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub detail: Vec<(String, f64)>,
}

/// ‖uv‖_q against 2‖u‖_p‖v‖_r with 1/q = 1/p + 1/r.
pub fn holder_check(
    u: &VectorFunction,
    v: &VectorFunction,
    p: &ExponentFunction,
    r: &ExponentFunction,
    omega: Interval,
) -> Result<InequalityReport> {
    let q = ExponentFunction::harmonic(p, r)?;
    let uv = if u.dim() == 1 {
        u.times(v)?
    } else if v.dim() == 1 {
        v.times(u)?
    } else {
        return Err(Error::Contract("one factor of the product must be scalar".into()));
    };
    let opts = NormOptions::default();
    let nuv = luxemburg_norm_with(&uv, &q, omega, &opts)?.value;
    let nu = luxemburg_norm_with(u, p, omega, &opts)?.value;
    let nv = luxemburg_norm_with(v, r, omega, &opts)?.value;
    let rhs = 2.0 * nu * nv;
    Ok(InequalityReport {
        lhs: nuv,
        rhs,
        holds: nuv <= rhs * (1.0 + 1e-8),
        detail: vec![("norm_u_p".into(), nu), ("norm_v_r".into(), nv)],
    })
}

/// ‖f‖_q against (1 + m(Ω))‖f‖_p for q ≤ p.
///
/// φ_q(t) ≤ 1 + φ_p(t) gives ρ_q(f/λ) ≤ m(Ω) + 1 at λ = ‖f‖_p, and convexity
/// of the modular turns that into the constant 1 + m(Ω); it is 2 on unit
/// intervals. `detail` also carries the observed ratio.
pub fn embedding_check(f: &VectorFunction, p: &ExponentFunction, q: &ExponentFunction, omega: Interval) -> Result<InequalityReport> {
    if let Some(x) = q.pointwise_le(p, crate::exponent::DEFAULT_GRID_POINTS) {
        return Err(Error::Contract(format!(
            "embedding needs q <= p; at x = {x}: q = {}, p = {}",
            q.value(x),
            p.value(x)
        )));
    }
    let opts = NormOptions::default();
    let nq = luxemburg_norm_with(f, q, omega, &opts)?.value;
    let np = luxemburg_norm_with(f, p, omega, &opts)?.value;
    let c = 1.0 + omega.length();
    let ratio = if np > 0.0 { nq / np } else { 0.0 };
    Ok(InequalityReport {
        lhs: nq,
        rhs: c * np,
        holds: nq <= c * np * (1.0 + 1e-8),
        detail: vec![("constant".into(), c), ("observed_ratio".into(), ratio)],
    })
}

/// ‖f_k − f‖ for a sequence f_k → f, to observe dominated convergence.
pub fn convergence_series(
    f: &VectorFunction,
    seq: &[VectorFunction],
    p: &ExponentFunction,
    omega: Interval,
) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    seq.par_iter()
        .map(|fk| Ok(luxemburg_norm(&fk.sub(f)?, p, omega)?.value))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> ExponentFunction {
        ExponentFunction::constant(v).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(2.0, 3.0).unwrap(), 9.0);
        assert_eq!(phi(f64::INFINITY, 0.5).unwrap(), 0.0);
        assert!(phi(f64::INFINITY, 1.5).unwrap().is_infinite());
        assert!(phi(2.0, -1.0).is_err());
    }

    #[test]
    fn modular_examples() {
        let one = VectorFunction::constant(1.0);
        assert!((modular(&one, &c(2.0), Interval::UNIT).unwrap().value - 1.0).abs() < 1e-14);
        let l = ExponentFunction::one_minus_log();
        let m = modular(&VectorFunction::constant(2.0), &l, Interval::UNIT).unwrap();
        let exact = 2.0 / (1.0 - 2f64.ln());
        assert!(!m.divergent);
        assert!((m.value - exact).abs() < 1e-10 * exact, "{} vs {exact}", m.value);
        let d = modular(&VectorFunction::constant(4.0), &l, Interval::UNIT).unwrap();
        assert!(d.divergent && d.value.is_infinite());
    }

    #[test]
    fn trace_panel_counts_nondecreasing() {
        let l = ExponentFunction::one_minus_log();
        let m = modular(&VectorFunction::constant(2.5), &l, Interval::UNIT).unwrap();
        assert!(m.refinement_trace.windows(2).all(|w| w[0].0 <= w[1].0));
    }

    #[test]
    fn modular_on_infinite_set() {
        let p = ExponentFunction::grid(0.0, 0.5, vec![2.0, 2.0, 2.0], vec![Interval { lo: 0.5, hi: 1.0 }]).unwrap();
        let small = VectorFunction::constant(0.9);
        assert!((modular(&small, &p, Interval::UNIT).unwrap().value - 0.5 * 0.81).abs() < 1e-14);
        let big = VectorFunction::constant(1.1);
        assert!(modular(&big, &p, Interval::UNIT).unwrap().value.is_infinite());
    }

    #[test]
    fn norm_examples() {
        let n = luxemburg_norm(&VectorFunction::constant(3.0), &ExponentFunction::one_minus_log(), Interval::UNIT).unwrap();
        assert!((n.value - 3.0).abs() < 1e-9, "{}", n.value);
        let x = VectorFunction::identity();
        let n = luxemburg_norm(&x, &c(2.0), Interval::UNIT).unwrap();
        assert!((n.value - 1.0 / 3f64.sqrt()).abs() < 1e-9);
        assert!(n.bracket.0 <= n.value && n.value <= n.bracket.1);
        assert!(n.bracket.1 - n.bracket.0 <= 1e-10 * n.value.max(1.0));
        let n = luxemburg_norm(&VectorFunction::sin(), &ExponentFunction::infinite(), Interval::UNIT).unwrap();
        assert!((n.value - 1f64.sin()).abs() < 1e-9);
        let z = luxemburg_norm(&VectorFunction::zero(1), &c(2.0), Interval::UNIT).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn holder_examples() {
        let one = VectorFunction::constant(1.0);
        let r = holder_check(&one, &one, &c(2.0), &c(2.0), Interval::UNIT).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-9 && (r.rhs - 2.0).abs() < 1e-9 && r.holds);
        let r = holder_check(&VectorFunction::sin(), &VectorFunction::cos(), &c(2.0), &c(2.0), Interval::UNIT).unwrap();
        assert!(r.holds);
        let u = VectorFunction::power(-0.25);
        let r = holder_check(&u, &one, &c(2.0), &ExponentFunction::infinite(), Interval::UNIT).unwrap();
        assert!((r.detail[0].1 - 2f64.sqrt()).abs() < 1e-8, "{:?}", r.detail);
        assert!(r.holds);
    }

    #[test]
    fn embedding_examples() {
        let one = VectorFunction::constant(1.0);
        let r = embedding_check(&one, &c(2.0), &c(1.0), Interval::UNIT).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-9 && (r.rhs - 2.0).abs() < 1e-9 && r.holds);
        let f = VectorFunction::power(-1.0 / 3.0);
        let r = embedding_check(&f, &c(2.0), &c(1.0), Interval::UNIT).unwrap();
        assert!((r.lhs - 1.5).abs() < 1e-8, "{}", r.lhs);
        assert!((r.rhs / 2.0 - 3f64.sqrt()).abs() < 1e-8, "{}", r.rhs);
        assert!(r.holds);
        let p = ExponentFunction::sinusoidal(2.0, 1.0, 1.0, 0.0, Interval::UNIT).unwrap();
        let r = embedding_check(&VectorFunction::sign_of_two_sine(), &p, &c(1.0), Interval::UNIT).unwrap();
        assert!(r.holds);
        assert!(matches!(
            embedding_check(&one, &c(1.0), &c(2.0), Interval::UNIT),
            Err(Error::Contract(_))
        ));
    }
}
