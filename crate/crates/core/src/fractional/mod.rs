//! Fractional calculus kernels: g_ζ, Caputo and Weyl-Liouville derivatives,
//! and Mittag-Leffler resolvent families with their decay checks.

pub mod mittag_leffler;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function_model::{Value, VectorFunction};
use crate::quadrature::{integrate, QuadOptions};
use crate::report::{ext, fit_power_law, least_squares, Verdict};

pub use mittag_leffler::{mittag_leffler, rgamma, MlMethod, MlValue};

/// g_ζ(t) = t^{ζ−1}/Γ(ζ).
pub fn g_kernel(zeta: f64, t: f64) -> Result<f64> {
    if !(zeta > 0.0) || !(t > 0.0) {
        return Err(Error::Contract(format!("g kernel needs zeta > 0 and t > 0, got ({zeta}, {t})")));
    }
    Ok(t.powf(zeta - 1.0) * rgamma(zeta))
}

/// Which member of the family a `ResolventFamily` evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FamilyKind {
    /// E_γ(−a t^γ); the solution operator applied to initial data.
    Relaxation,
    /// E_{γ,γ}(−a t^γ).
    TwoParameter,
    /// t^{γ−1} E_{γ,γ}(−a t^γ); the kernel applied to forcing terms.
    Resolvent,
    /// e^{−a t}.
    Exponential,
    /// (1 + a t)^{−decay}.
    Algebraic { decay: f64 },
}

/// A scalar or diagonal kernel family t ↦ R(t) with generator −diag(a).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventFamily {
    pub generator: Vec<f64>,
    pub gamma: f64,
    /// Decay parameter of the S-estimate; only used by `decay_check`.
    pub beta: f64,
    pub kind: FamilyKind,
}

/// How the window norms of a family decay, for tail bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayModel {
    /// ‖R(t)‖ = max_i e^{−a_i t}: windows shrink by e^{−a_min} exactly.
    Exponential { rate: f64 },
    /// Completely monotone with ∫_T^∞ R = S(T)/a.
    MittagLeffler,
    /// (1 + a t)^{−κ}, κ > 1.
    Algebraic { decay: f64, scale: f64 },
}

impl ResolventFamily {
    pub fn new(generator: Vec<f64>, gamma: f64, beta: f64, kind: FamilyKind) -> Result<Self> {
        if generator.is_empty() || generator.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::Config("generator entries must be positive".into()));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Config(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::Config(format!("beta must lie in (0, 1], got {beta}")));
        }
        if let FamilyKind::Algebraic { decay } = kind {
            if !(decay > 0.0) {
                return Err(Error::Config(format!("algebraic decay must be positive, got {decay}")));
            }
        }
        Ok(ResolventFamily {
            generator,
            gamma,
            beta,
            kind,
        })
    }

    pub fn scalar(a: f64, gamma: f64, kind: FamilyKind) -> Result<Self> {
        Self::new(vec![a], gamma, 1.0, kind)
    }

    pub fn with_kind(&self, kind: FamilyKind) -> Self {
        ResolventFamily { kind, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.generator.len()
    }

    fn entry(&self, a: f64, t: f64) -> Result<f64> {
        let g = self.gamma;
        let ml = |beta: f64| -> Result<f64> { Ok(mittag_leffler(g, beta, -a * t.powf(g))?.value) };
        match self.kind {
            FamilyKind::Relaxation => ml(1.0),
            FamilyKind::TwoParameter => ml(g),
            FamilyKind::Resolvent => {
                if t == 0.0 && g < 1.0 {
                    return Ok(f64::INFINITY);
                }
                Ok(if g == 1.0 { (-a * t).exp() } else { t.powf(g - 1.0) * ml(g)? })
            }
            FamilyKind::Exponential => Ok((-a * t).exp()),
            FamilyKind::Algebraic { decay } => Ok((1.0 + a * t).powf(-decay)),
        }
    }

    /// Diagonal entries of R(t).
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        if !(t >= 0.0) {
            return Err(Error::domain("kernel time", t, 0.0, f64::INFINITY));
        }
        if t == 0.0 && self.kind == FamilyKind::Resolvent && self.gamma < 1.0 {
            return Err(Error::Contract(
                "the resolvent kernel is singular at t = 0 for gamma < 1; use it inside integrals only".into(),
            ));
        }
        self.generator.iter().map(|a| self.entry(*a, t)).collect()
    }

    /// Entries without checks; +∞ at a singular t = 0.
    pub fn eval_unchecked(&self, t: f64, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.generator) {
            *o = self.entry(*a, t).unwrap_or(f64::NAN);
        }
    }

    /// Operator norm max_i |R_ii(t)|.
    pub fn norm(&self, t: f64) -> f64 {
        self.generator
            .iter()
            .map(|a| self.entry(*a, t).map_or(f64::NAN, f64::abs))
            .fold(0.0, f64::max)
    }

    /// True when R(t) ~ t^{γ−1} near 0.
    pub fn is_singular_at_zero(&self) -> bool {
        self.kind == FamilyKind::Resolvent && self.gamma < 1.0
    }

    pub fn decay_model(&self) -> Result<DecayModel> {
        let amin = self.generator.iter().copied().fold(f64::INFINITY, f64::min);
        match self.kind {
            FamilyKind::Exponential => Ok(DecayModel::Exponential { rate: amin }),
            FamilyKind::Relaxation | FamilyKind::TwoParameter | FamilyKind::Resolvent if self.gamma == 1.0 => {
                Ok(DecayModel::Exponential { rate: amin })
            }
            FamilyKind::Resolvent => Ok(DecayModel::MittagLeffler),
            FamilyKind::Relaxation => Err(Error::Divergent(format!(
                "E_gamma(-a t^gamma) decays like t^-{}, which is not summable over unit windows",
                self.gamma
            ))),
            FamilyKind::TwoParameter => {
                if 2.0 * self.gamma <= 1.0 {
                    Err(Error::Divergent(format!(
                        "E_(gamma,gamma)(-a t^gamma) decays like t^-{}, which is not summable",
                        2.0 * self.gamma
                    )))
                } else {
                    Err(Error::Contract("no tail model for the two-parameter family; use the resolvent kernel".into()))
                }
            }
            FamilyKind::Algebraic { decay } => {
                if decay <= 1.0 {
                    Err(Error::Divergent(format!("kernel decays like t^-{decay}; exponent must exceed 1")))
                } else {
                    Ok(DecayModel::Algebraic { decay, scale: amin })
                }
            }
        }
    }

    /// Enclosure [lower, upper] of Σ_{k>K} ‖R(· + t + k)‖ over unit windows
    /// (any exponent), given the window norm `w_last` at k = K.
    ///
    /// A unit-window norm lies between the inf and the sup of ‖R‖ on the
    /// window, and ‖R‖ is decreasing, so the sum is squeezed between
    /// integrals of ‖R‖ over [t+K+1, ∞) and [t+K, ∞).
    pub fn tail_enclosure(&self, t: f64, k_last: usize, w_last: f64) -> Result<(f64, f64)> {
        let start = t + k_last as f64;
        Ok(match self.decay_model()? {
            DecayModel::Exponential { rate } => {
                let amax = self.generator.iter().copied().fold(0.0, f64::max);
                let geo = |a: f64| {
                    let r = (-a).exp();
                    w_last * r / (1.0 - r)
                };
                (geo(amax), geo(rate))
            }
            DecayModel::MittagLeffler => {
                let tail = |s: f64| -> Result<Vec<f64>> {
                    self.generator
                        .iter()
                        .map(|a| mittag_leffler(self.gamma, 1.0, -a * s.powf(self.gamma)).map(|m| m.value / a))
                        .collect()
                };
                let lo = tail(start + 1.0)?.into_iter().fold(0.0, f64::max);
                let hi = tail(start)?.into_iter().sum();
                (lo, hi)
            }
            DecayModel::Algebraic { decay, scale } => {
                let int = |s: f64| (1.0 + scale * s).powf(1.0 - decay) / (scale * (decay - 1.0));
                (int(start + 1.0), int(start))
            }
        })
    }

    /// Entry i of R(t), with a scalar generator broadcast to every i; NaN
    /// where the family is undefined.
    pub fn entry_at(&self, i: usize, t: f64) -> f64 {
        let a = self.generator[i.min(self.generator.len() - 1)];
        self.entry(a, t).unwrap_or(f64::NAN)
    }
}

/// A derivative value with its accuracy bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct Derivative {
    pub value: Vec<f64>,
    pub degraded: bool,
    /// Conservative analytic bound on the truncation error (Weyl only).
    #[serde(with = "ext")]
    pub tail_bound: f64,
    /// Observed change when the truncation length is doubled (Weyl only).
    pub tail_estimate: f64,
    pub notes: Vec<String>,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Contract(format!("fractional order must lie in (0, 1], got {gamma}")));
    }
    Ok(())
}

/// Five-point centred difference of a vector-valued map.
fn five_point<F: Fn(f64) -> Vec<f64>>(f: F, t: f64, h: f64) -> Vec<f64> {
    let (a, b, c, d) = (f(t - 2.0 * h), f(t - h), f(t + h), f(t + 2.0 * h));
    (0..a.len())
        .map(|i| (a[i] - 8.0 * b[i] + 8.0 * c[i] - d[i]) / (12.0 * h))
        .collect()
}

fn component(u: &VectorFunction, i: usize, t: f64) -> f64 {
    let mut v: Value = smallvec::smallvec![0.0; u.dim()];
    u.eval_into(t, &mut v);
    v[i]
}

/// ∫_0^τ (τ − s)^{−γ} h(s) ds via w = (τ − s)^{1−γ}, which removes the
/// endpoint singularity.
fn weakly_singular<F: Fn(f64) -> f64>(h: F, gamma: f64, tau: f64, breaks_s: &[f64], opts: &QuadOptions) -> (f64, bool) {
    let e = 1.0 - gamma;
    let upper = tau.powf(e);
    let breaks: Vec<f64> = breaks_s
        .iter()
        .filter(|s| **s > 0.0 && **s < tau)
        .map(|s| (tau - s).powf(e))
        .collect();
    let r = integrate(|w| h(tau - w.powf(1.0 / e)), 0.0, upper, &breaks, &[], opts);
    (r.value / e, r.converged)
}

/// Caputo derivative d/dt [g_{1−γ} ∗ (u − u(0))](t); γ = 1 gives u′(t).
pub fn caputo_derivative(u: &VectorFunction, gamma: f64, t: f64) -> Result<Derivative> {
    check_gamma(gamma)?;
    if !(t > 0.0) {
        return Err(Error::Contract(format!("Caputo derivative needs t > 0, got {t}")));
    }
    let h = (t / 8.0).min(0.01);
    u.domain().check("Caputo derivative window start", 0.0)?;
    u.domain().check("Caputo derivative window end", t + 2.0 * h)?;
    let mut notes = Vec::new();
    let mut degraded = false;
    if let Some(step) = u.resolution() {
        if step > h / 4.0 {
            degraded = true;
            notes.push(format!("sampling step {step} is coarse against the difference step {h}"));
        }
    }
    if gamma == 1.0 {
        let value = five_point(|s| u.evaluate(s).map(|v| v.to_vec()).unwrap_or_default(), t, h);
        return Ok(Derivative {
            value,
            degraded,
            tail_bound: 0.0,
            tail_estimate: 0.0,
            notes,
        });
    }
    let opts = QuadOptions::default().with_rel_tol(1e-13);
    let u0 = u.evaluate(0.0)?;
    let breaks = u.breakpoints(0.0, t + 2.0 * h);
    let scale = rgamma(1.0 - gamma);
    let all_converged = std::cell::Cell::new(true);
    let conv = |tau: f64| -> Vec<f64> {
        (0..u.dim())
            .map(|i| {
                let (v, ok) = weakly_singular(|s| component(u, i, s) - u0[i], gamma, tau, &breaks, &opts);
                if !ok {
                    all_converged.set(false);
                }
                v * scale
            })
            .collect()
    };
    let value = five_point(conv, t, h);
    if !all_converged.get() {
        degraded = true;
        notes.push("quadrature did not reach its tolerance".into());
    }
    Ok(Derivative {
        value,
        degraded,
        tail_bound: 0.0,
        tail_estimate: 0.0,
        notes,
    })
}

/// Smooth cutoff: 1 on [0, 1/2], 0 on [1, ∞), C^∞ in between.
fn taper(rho: f64) -> f64 {
    if rho <= 0.5 {
        return 1.0;
    }
    if rho >= 1.0 {
        return 0.0;
    }
    let x = (1.0 - rho) / 0.5;
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// Weyl-Liouville derivative d/dt ∫_{−∞}^t g_{1−γ}(t − s) u(s) ds; γ = 1
/// gives −u′(t).
///
/// The kernel is cut off smoothly over [T/2, T] with T = `truncation`. The
/// computation is repeated with 2T and the difference is reported as
/// `tail_estimate`; `degraded` is set when it exceeds 1e-6·max(1, |value|).
/// `tail_bound` is the crude a-priori bound 2‖u‖_∞ g_{1−γ}(T/2).
pub fn weyl_derivative(u: &VectorFunction, gamma: f64, t: f64, truncation: f64) -> Result<Derivative> {
    check_gamma(gamma)?;
    if !(truncation >= 2.0) {
        return Err(Error::Contract(format!("truncation length must be at least 2, got {truncation}")));
    }
    let h = 0.01;
    u.domain().check("Weyl derivative window end", t + 2.0 * h)?;
    if gamma == 1.0 {
        let value: Vec<f64> = five_point(|s| u.evaluate(s).map(|v| v.to_vec()).unwrap_or_default(), t, h)
            .into_iter()
            .map(|v| -v)
            .collect();
        return Ok(Derivative {
            value,
            degraded: false,
            tail_bound: 0.0,
            tail_estimate: 0.0,
            notes: vec![],
        });
    }
    u.domain().check("Weyl derivative window start", t - 2.0 * truncation - 2.0 * h)?;
    let opts = QuadOptions::default().with_rel_tol(1e-13);
    let e = 1.0 - gamma;
    let scale = rgamma(e);
    let tapered = |tau: f64, big_t: f64| -> Vec<f64> {
        (0..u.dim())
            .map(|i| {
                let near = integrate(|w| component(u, i, tau - w.powf(1.0 / e)), 0.0, 1.0, &[], &[], &opts).value / e;
                let br = u.breakpoints(tau - big_t, tau - 1.0);
                let br: Vec<f64> = br.iter().map(|s| tau - s).collect();
                let far = integrate(
                    |r| r.powf(-gamma) * taper(r / big_t) * component(u, i, tau - r),
                    1.0,
                    big_t,
                    &br,
                    &[],
                    &opts,
                )
                .value;
                (near + far) * scale
            })
            .collect()
    };
    let d1 = five_point(|s| tapered(s, truncation), t, h);
    let d2 = five_point(|s| tapered(s, 2.0 * truncation), t, h);
    let tail_estimate = d1.iter().zip(&d2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let sup = u.sampled_sup(t - truncation, t, (truncation * 50.0) as usize);
    let tail_bound = 2.0 * sup * g_kernel(e, truncation / 2.0)?;
    let mag = d2.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let degraded = tail_estimate > 1e-6 * mag.max(1.0);
    let mut notes = Vec::new();
    if degraded {
        notes.push("result still moves when the truncation length doubles".into());
    }
    Ok(Derivative {
        value: d2,
        degraded,
        tail_bound,
        tail_estimate,
        notes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub verdict: Verdict,
    /// sup ‖S(t)‖ t^{γ(1−β)} over the grid.
    #[serde(with = "ext")]
    pub m1: f64,
    /// sup_{t ≥ 1} ‖S(t)‖ t^γ.
    #[serde(with = "ext")]
    pub m2_relaxation: f64,
    /// sup_{t ≥ 1} ‖P(t)‖ t^{2γ}.
    #[serde(with = "ext")]
    pub m2_two_parameter: f64,
    /// Plain log-log slopes over the last half (in log t) of the grid.
    pub raw_slope_relaxation: f64,
    pub raw_slope_two_parameter: f64,
    /// Slopes with the leading t^{−γ}, t^{−2γ} corrections fitted out.
    pub slope_relaxation: f64,
    pub slope_two_parameter: f64,
    pub expected_slope_relaxation: f64,
    pub expected_slope_two_parameter: f64,
    /// (t, ‖S(t)‖, ‖P(t)‖)
    pub series: Vec<(f64, f64, f64)>,
}

/// Tail exponent of y(t) ≈ C t^{−κ}(1 + c₁t^{−γ} + c₂t^{−2γ}) by linear least
/// squares of ln y on (1, ln t, t^{−γ}, t^{−2γ}) over t ≥ t_min.
fn corrected_slope(ts: &[f64], ys: &[f64], gamma: f64, t_min: f64) -> Option<f64> {
    let rows: Vec<(Vec<f64>, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(t, y)| **t >= t_min && **y > 0.0)
        .map(|(t, y)| (vec![1.0, t.ln(), t.powf(-gamma), t.powf(-2.0 * gamma)], y.ln()))
        .collect();
    if rows.len() < 8 {
        return None;
    }
    let (a, y): (Vec<Vec<f64>>, Vec<f64>) = rows.into_iter().unzip();
    least_squares(&a, &y).map(|c| c[1])
}

/// Checks the bounds ‖S(t)‖ ≤ M₁ t^{γ(β−1)}, ‖S(t)‖ ≤ M₂ t^{−γ} and
/// ‖P(t)‖ ≤ M₂ t^{−2γ} on the grid and fits the tail exponents.
pub fn decay_check(rf: &ResolventFamily, t_grid: &[f64]) -> Result<DecayReport> {
    if t_grid.len() < 2 || t_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Config("decay check needs a grid of at least two positive times".into()));
    }
    let g = rf.gamma;
    let s_fam = rf.with_kind(FamilyKind::Relaxation);
    let p_fam = rf.with_kind(FamilyKind::TwoParameter);
    use rayon::prelude::*;
    let series: Vec<(f64, f64, f64)> = t_grid.par_iter().map(|t| (*t, s_fam.norm(*t), p_fam.norm(*t))).collect();
    let mut m1 = 0.0f64;
    let mut m2s = 0.0f64;
    let mut m2p = 0.0f64;
    for (t, s, p) in &series {
        m1 = m1.max(s * t.powf(g * (1.0 - rf.beta)));
        if *t >= 1.0 {
            m2s = m2s.max(s * t.powf(g));
            m2p = m2p.max(p * t.powf(2.0 * g));
        }
    }
    let ts: Vec<f64> = series.iter().map(|s| s.0).collect();
    let ss: Vec<f64> = series.iter().map(|s| s.1).collect();
    let ps: Vec<f64> = series.iter().map(|s| s.2).collect();
    let t_max = ts.iter().copied().fold(0.0, f64::max);
    let half = t_max.sqrt() * ts.iter().copied().fold(f64::INFINITY, f64::min).max(1e-300).sqrt();
    let tail = |ys: &[f64]| {
        let (x, y): (Vec<f64>, Vec<f64>) = ts.iter().zip(ys).filter(|(t, _)| **t >= half).map(|(t, y)| (*t, *y)).unzip();
        fit_power_law(&x, &y).map_or(f64::NAN, |f| f.slope)
    };
    let raw_s = tail(&ss);
    let raw_p = tail(&ps);
    let t_min = (t_max / 10.0).max(ts[0]);
    let (slope_s, slope_p, expected_s, expected_p, slopes_ok) = if g == 1.0 {
        // Exponential decay: the power-law bounds hold trivially.
        (raw_s, raw_p, -1.0, -2.0, raw_s < -1.0 && raw_p < -2.0)
    } else {
        let cs = corrected_slope(&ts, &ss, g, t_min).unwrap_or(raw_s);
        let cp = corrected_slope(&ts, &ps, g, t_min).unwrap_or(raw_p);
        (cs, cp, -g, -2.0 * g, (cs + g).abs() <= 0.1 && (cp + 2.0 * g).abs() <= 0.1)
    };
    let finite = m1.is_finite() && m2s.is_finite() && m2p.is_finite();
    Ok(DecayReport {
        verdict: Verdict::from_bool(finite && slopes_ok),
        m1,
        m2_relaxation: m2s,
        m2_two_parameter: m2p,
        raw_slope_relaxation: raw_s,
        raw_slope_two_parameter: raw_p,
        slope_relaxation: slope_s,
        slope_two_parameter: slope_p,
        expected_slope_relaxation: expected_s,
        expected_slope_two_parameter: expected_p,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    #[test]
    fn g_kernel_examples() {
        assert_eq!(g_kernel(1.0, 7.0).unwrap(), 1.0);
        assert!((g_kernel(2.0, 3.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((g_kernel(0.5, 1.0).unwrap() - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!(g_kernel(0.0, 1.0).is_err());
    }

    #[test]
    fn resolvent_examples() {
        let s = ResolventFamily::scalar(1.0, 1.0, FamilyKind::Relaxation).unwrap();
        assert!((s.eval(2.0).unwrap()[0] - (-2f64).exp()).abs() < 1e-16);
        let s = ResolventFamily::scalar(1.0, 0.5, FamilyKind::Relaxation).unwrap();
        assert!((s.eval(1.0).unwrap()[0] - 0.427_583_576_155_807).abs() < 1e-12);
        let r = ResolventFamily::scalar(1.0, 1.0, FamilyKind::Resolvent).unwrap();
        for t in [0.0, 0.5, 3.0, 20.0] {
            let v = r.eval(t).unwrap()[0];
            assert!((v - (-t).exp()).abs() <= 1e-12 * (-t).exp());
        }
        let r = ResolventFamily::scalar(1.0, 0.5, FamilyKind::Resolvent).unwrap();
        assert!(matches!(r.eval(0.0), Err(Error::Contract(_))));
        let p = r.with_kind(FamilyKind::TwoParameter);
        let t = 2.3f64;
        assert!((r.eval(t).unwrap()[0] - t.powf(-0.5) * p.eval(t).unwrap()[0]).abs() < 1e-15);
    }

    #[test]
    fn caputo_examples() {
        let half = Interval::HALF_LINE;
        let c = VectorFunction::constant(3.0).restrict(half).unwrap();
        assert!(caputo_derivative(&c, 0.5, 1.0).unwrap().value[0].abs() < 1e-12);
        let d = caputo_derivative(&VectorFunction::power(1.0), 0.5, 1.0).unwrap();
        assert!((d.value[0] - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-8, "{d:?}");
        let d = caputo_derivative(&VectorFunction::power(2.0), 0.5, 1.0).unwrap();
        assert!((d.value[0] - 8.0 / (3.0 * std::f64::consts::PI.sqrt())).abs() < 1e-8, "{d:?}");
        let d = caputo_derivative(&VectorFunction::power(2.0), 1.0, 1.5).unwrap();
        assert!((d.value[0] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn weyl_examples() {
        let d = weyl_derivative(&VectorFunction::sin(), 0.5, 0.0, 200.0).unwrap();
        assert!((d.value[0] - (std::f64::consts::PI / 4.0).sin()).abs() < 1e-6, "{d:?}");
        assert!(!d.degraded);
        let z = weyl_derivative(&VectorFunction::zero(1), 0.5, 0.0, 200.0).unwrap();
        assert_eq!(z.value[0], 0.0);
        let d = weyl_derivative(&VectorFunction::sin(), 1.0, 0.0, 200.0).unwrap();
        assert!((d.value[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn decay_check_examples() {
        let grid: Vec<f64> = (0..=40).map(|i| 10f64.powf(2.0 * i as f64 / 40.0)).collect();
        let r = decay_check(&ResolventFamily::scalar(1.0, 0.5, FamilyKind::Relaxation).unwrap(), &grid).unwrap();
        assert_eq!(r.verdict, Verdict::True, "{r:?}");
        assert!(r.m2_relaxation.is_finite() && r.m2_two_parameter.is_finite());
        let r = decay_check(&ResolventFamily::scalar(1.0, 1.0, FamilyKind::Relaxation).unwrap(), &grid).unwrap();
        assert_eq!(r.verdict, Verdict::True);
    }

    #[test]
    fn tail_models() {
        let e = ResolventFamily::scalar(1.0, 1.0, FamilyKind::Exponential).unwrap();
        assert!(matches!(e.decay_model().unwrap(), DecayModel::Exponential { .. }));
        let slow = ResolventFamily::scalar(1.0, 1.0, FamilyKind::Algebraic { decay: 0.5 }).unwrap();
        assert!(matches!(slow.decay_model(), Err(Error::Divergent(_))));
        let s = ResolventFamily::scalar(1.0, 0.5, FamilyKind::Relaxation).unwrap();
        assert!(matches!(s.decay_model(), Err(Error::Divergent(_))));
    }
}
