//! Variable exponents p: Ω → [1, ∞].
//!
//! The set where p = ∞ is carried explicitly as a union of intervals; the
//! finite formula is never asked to produce ∞ there. Closed forms with known
//! monotonicity report exact essential bounds, everything else is sampled.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Default number of evaluation points for sampled bounds and checks.
pub const DEFAULT_GRID_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Constant(f64),
    Infinite,
    /// 1 − ln x on a subset of [0, 1].
    OneMinusLog,
    Affine {
        intercept: f64,
        slope: f64,
    },
    /// mean + amplitude·sin(2π·frequency·x + phase)
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    Grid {
        start: f64,
        step: f64,
        samples: Vec<f64>,
    },
    Conjugate(ExponentFunction),
    Harmonic(ExponentFunction, ExponentFunction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFunction {
    domain: Interval,
    kind: Arc<Kind>,
    infinite_set: Vec<Interval>,
}

impl ExponentFunction {
    fn build(domain: Interval, kind: Kind, infinite_set: Vec<Interval>) -> Self {
        ExponentFunction {
            domain,
            kind: Arc::new(kind),
            infinite_set: normalize_set(infinite_set, &domain),
        }
    }

    pub fn constant(p: f64) -> Result<Self> {
        Self::constant_on(p, Interval::UNIT)
    }

    /// p ≡ c on `domain`; c = ∞ gives the all-infinite exponent.
    pub fn constant_on(p: f64, domain: Interval) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Config(format!("constant exponent {p} is below 1")));
        }
        if p.is_infinite() {
            return Ok(Self::build(domain, Kind::Infinite, vec![domain]));
        }
        Ok(Self::build(domain, Kind::Constant(p), vec![]))
    }

    pub fn infinite() -> Self {
        Self::build(Interval::UNIT, Kind::Infinite, vec![Interval::UNIT])
    }

    pub fn one_minus_log() -> Self {
        Self::build(Interval::UNIT, Kind::OneMinusLog, vec![])
    }

    pub fn one_minus_log_on(domain: Interval) -> Result<Self> {
        if domain.lo < 0.0 || domain.hi > 1.0 {
            return Err(Error::Config("1 - ln x needs a domain inside [0, 1]".into()));
        }
        Ok(Self::build(domain, Kind::OneMinusLog, vec![]))
    }

    pub fn affine(intercept: f64, slope: f64, domain: Interval) -> Result<Self> {
        let lo = (intercept + slope * domain.lo).min(intercept + slope * domain.hi);
        if !domain.is_bounded() || lo < 1.0 || !lo.is_finite() {
            return Err(Error::Config(format!(
                "affine exponent {intercept} + {slope}x drops below 1 on [{}, {}]",
                domain.lo, domain.hi
            )));
        }
        Ok(Self::build(domain, Kind::Affine { intercept, slope }, vec![]))
    }

    pub fn sinusoidal(mean: f64, amplitude: f64, frequency: f64, phase: f64, domain: Interval) -> Result<Self> {
        let kind = Kind::Sinusoidal {
            mean,
            amplitude,
            frequency,
            phase,
        };
        let e = Self::build(domain, kind, vec![]);
        let (lo, _) = e.essential_bounds();
        if !domain.is_bounded() || lo < 1.0 || !lo.is_finite() {
            return Err(Error::Config(format!(
                "sinusoidal exponent {mean} + {amplitude} sin(..) drops below 1"
            )));
        }
        Ok(e)
    }

    /// Piecewise-linear exponent through `samples` at start + i·step, with
    /// p = ∞ on `infinite_set`.
    pub fn grid(start: f64, step: f64, samples: Vec<f64>, infinite_set: Vec<Interval>) -> Result<Self> {
        if !(step > 0.0) || samples.len() < 2 {
            return Err(Error::Config("grid exponent needs step > 0 and at least 2 samples".into()));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite() || **v < 1.0) {
            return Err(Error::Config(format!(
                "grid exponent sample {bad} is not a finite value >= 1; use the infinite set for p = inf"
            )));
        }
        let domain = Interval {
            lo: start,
            hi: start + step * (samples.len() - 1) as f64,
        };
        Ok(Self::build(domain, Kind::Grid { start, step, samples }, infinite_set))
    }

    /// 1 + θ(p − 1) for θ ∈ [0, 1], which lies below p pointwise. Defined
    /// for the constant, affine, sinusoidal and grid kinds.
    pub fn shrink_toward_one(&self, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Config(format!("shrink factor {theta} is outside [0, 1]")));
        }
        let m = |v: f64| 1.0 + theta * (v - 1.0);
        let kind = match &*self.kind {
            Kind::Constant(c) => Kind::Constant(m(*c)),
            Kind::Affine { intercept, slope } => Kind::Affine {
                intercept: m(*intercept),
                slope: theta * slope,
            },
            Kind::Sinusoidal {
                mean,
                amplitude,
                frequency,
                phase,
            } => Kind::Sinusoidal {
                mean: m(*mean),
                amplitude: theta * amplitude,
                frequency: *frequency,
                phase: *phase,
            },
            Kind::Grid { start, step, samples } => Kind::Grid {
                start: *start,
                step: *step,
                samples: samples.iter().map(|v| m(*v)).collect(),
            },
            _ => return Err(Error::Contract(format!("cannot shrink the exponent {}", self.describe()))),
        };
        Ok(Self::build(self.domain, kind, self.infinite_set.clone()))
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn infinite_set(&self) -> &[Interval] {
        &self.infinite_set
    }

    /// Lebesgue measure of the set where p = ∞.
    pub fn infinite_measure(&self) -> f64 {
        self.infinite_set.iter().map(Interval::length).sum()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.domain.check("exponent argument", x)?;
        Ok(self.value(x))
    }

    /// p(x) without the domain check.
    pub fn value(&self, x: f64) -> f64 {
        if self.in_infinite_set(x) {
            return f64::INFINITY;
        }
        self.finite_formula(x)
    }

    fn in_infinite_set(&self, x: f64) -> bool {
        self.infinite_set.iter().any(|s| s.contains(x))
    }

    fn finite_formula(&self, x: f64) -> f64 {
        match &*self.kind {
            Kind::Constant(c) => *c,
            Kind::Infinite => f64::INFINITY,
            Kind::OneMinusLog => {
                if x <= 0.0 {
                    f64::INFINITY
                } else {
                    1.0 - x.ln()
                }
            }
            Kind::Affine { intercept, slope } => intercept + slope * x,
            Kind::Sinusoidal {
                mean,
                amplitude,
                frequency,
                phase,
            } => mean + amplitude * (2.0 * PI * frequency * x + phase).sin(),
            Kind::Grid { start, step, samples } => interpolate(*start, *step, samples, x),
            Kind::Conjugate(p) => conjugate_value(p.value(x)),
            Kind::Harmonic(p, r) => harmonic_value(p.value(x), r.value(x)),
        }
    }

    /// Some(c) when p ≡ c on the whole domain (c may be ∞).
    pub fn as_constant(&self) -> Option<f64> {
        match &*self.kind {
            Kind::Constant(c) if self.infinite_set.is_empty() => Some(*c),
            Kind::Infinite => Some(f64::INFINITY),
            _ => None,
        }
    }

    /// Points where p is unbounded in every neighbourhood.
    pub fn singular_points(&self) -> Vec<f64> {
        let mut pts = match &*self.kind {
            Kind::OneMinusLog if self.domain.lo <= 0.0 => vec![0.0],
            Kind::Conjugate(p) => {
                let mut v = Vec::new();
                for x in [self.domain.lo, self.domain.hi] {
                    if p.value(x) <= 1.0 + 1e-12 {
                        v.push(x);
                    }
                }
                v
            }
            Kind::Harmonic(p, r) => {
                let mut v = p.singular_points();
                v.extend(r.singular_points());
                v
            }
            _ => vec![],
        };
        pts.retain(|x| self.domain.contains(*x));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Boundaries of the infinite set inside the domain.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .infinite_set
            .iter()
            .flat_map(|s| [s.lo, s.hi])
            .filter(|x| *x > self.domain.lo && *x < self.domain.hi)
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Parts of `omega` where p is finite.
    pub fn finite_pieces(&self, omega: &Interval) -> Vec<Interval> {
        let mut pieces = vec![*omega];
        for s in &self.infinite_set {
            let mut next = Vec::new();
            for p in pieces {
                if s.hi <= p.lo || s.lo >= p.hi {
                    next.push(p);
                    continue;
                }
                if s.lo > p.lo {
                    next.push(Interval { lo: p.lo, hi: s.lo });
                }
                if s.hi < p.hi {
                    next.push(Interval { lo: s.hi, hi: p.hi });
                }
            }
            pieces = next;
        }
        pieces
    }

    /// Parts of `omega` where p = ∞.
    pub fn infinite_pieces(&self, omega: &Interval) -> Vec<Interval> {
        self.infinite_set.iter().filter_map(|s| s.intersect(omega)).collect()
    }

    /// Evaluation grid of n points spanning the domain.
    pub fn grid_points(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let (a, b) = (self.domain.lo, self.domain.hi);
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    /// (p⁻, p⁺) with the default grid density.
    pub fn essential_bounds(&self) -> (f64, f64) {
        self.essential_bounds_with(DEFAULT_GRID_POINTS)
    }

    pub fn essential_bounds_with(&self, n: usize) -> (f64, f64) {
        let inf_measure = self.infinite_measure();
        if inf_measure >= self.domain.length() && self.domain.length() > 0.0 {
            return (f64::INFINITY, f64::INFINITY);
        }
        let (a, b) = (self.domain.lo, self.domain.hi);
        let (mut lo, mut hi) = match &*self.kind {
            Kind::Constant(c) => (*c, *c),
            Kind::Infinite => (f64::INFINITY, f64::INFINITY),
            Kind::OneMinusLog => (self.finite_formula(b), self.finite_formula(a)),
            Kind::Affine { .. } => {
                let (u, v) = (self.finite_formula(a), self.finite_formula(b));
                (u.min(v), u.max(v))
            }
            Kind::Sinusoidal {
                amplitude,
                frequency,
                phase,
                ..
            } => {
                let mut xs = vec![a, b];
                if *frequency != 0.0 && *amplitude != 0.0 {
                    // Critical points: 2π f x + φ = π/2 + kπ.
                    let w = 2.0 * PI * frequency;
                    let k0 = ((w * a + phase - PI / 2.0) / PI).floor() as i64 - 1;
                    let k1 = ((w * b + phase - PI / 2.0) / PI).ceil() as i64 + 1;
                    let (k0, k1) = (k0.min(k1), k0.max(k1));
                    for k in k0..=k1 {
                        let x = (PI / 2.0 + k as f64 * PI - phase) / w;
                        if x > a && x < b {
                            xs.push(x);
                        }
                    }
                }
                let vals = xs.iter().map(|x| self.finite_formula(*x));
                vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)))
            }
            _ => {
                let mut l = f64::INFINITY;
                let mut h = f64::NEG_INFINITY;
                for x in self.grid_points(n) {
                    if self.in_infinite_set(x) {
                        continue;
                    }
                    let v = self.finite_formula(x);
                    l = l.min(v);
                    h = h.max(v);
                }
                if let Kind::Grid { samples, .. } = &*self.kind {
                    for v in samples {
                        l = l.min(*v);
                        h = h.max(*v);
                    }
                }
                (l, h)
            }
        };
        if inf_measure > 0.0 {
            hi = f64::INFINITY;
        }
        if lo > hi {
            lo = hi;
        }
        (lo, hi)
    }

    /// p⁺ < ∞.
    pub fn is_d_plus(&self) -> bool {
        self.essential_bounds().1.is_finite()
    }

    /// p⁺ < ∞ and p⁻ > 1.
    pub fn is_c_plus(&self) -> bool {
        let (lo, hi) = self.essential_bounds();
        hi.is_finite() && lo > 1.0
    }

    /// The pointwise conjugate q = p/(p − 1).
    pub fn conjugate(&self) -> ExponentFunction {
        match &*self.kind {
            Kind::Constant(c) if self.infinite_set.is_empty() => {
                if *c == 1.0 {
                    Self::build(self.domain, Kind::Infinite, vec![self.domain])
                } else {
                    Self::build(self.domain, Kind::Constant(c / (c - 1.0)), vec![])
                }
            }
            Kind::Infinite => Self::build(self.domain, Kind::Constant(1.0), vec![]),
            Kind::Conjugate(inner) if inner.domain == self.domain => inner.clone(),
            _ => {
                let ones = self.unit_set();
                Self::build(self.domain, Kind::Conjugate(self.clone()), ones)
            }
        }
    }

    /// Positive-measure set where p = 1, as intervals.
    fn unit_set(&self) -> Vec<Interval> {
        match &*self.kind {
            Kind::Constant(c) if *c == 1.0 => self.finite_pieces(&self.domain),
            Kind::Grid { start, step, samples } => {
                let mut out: Vec<Interval> = Vec::new();
                for (i, w) in samples.windows(2).enumerate() {
                    if w[0] == 1.0 && w[1] == 1.0 {
                        let lo = start + step * i as f64;
                        let hi = start + step * (i + 1) as f64;
                        match out.last_mut() {
                            Some(last) if last.hi == lo => last.hi = hi,
                            _ => out.push(Interval { lo, hi }),
                        }
                    }
                }
                out.into_iter()
                    .flat_map(|s| self.finite_pieces(&s))
                    .collect()
            }
            _ => vec![],
        }
    }

    /// q with 1/q = 1/p + 1/r pointwise.
    pub fn harmonic(p: &ExponentFunction, r: &ExponentFunction) -> Result<ExponentFunction> {
        if p.domain != r.domain {
            return Err(Error::Contract("exponents live on different domains".into()));
        }
        if let (Some(a), Some(b)) = (p.as_constant(), r.as_constant()) {
            return ExponentFunction::constant_on(harmonic_value(a, b), p.domain);
        }
        let mut inf = Vec::new();
        for s in &p.infinite_set {
            for t in &r.infinite_set {
                if let Some(i) = s.intersect(t) {
                    inf.push(i);
                }
            }
        }
        Ok(Self::build(p.domain, Kind::Harmonic(p.clone(), r.clone()), inf))
    }

    /// True when self(x) ≤ other(x) on the evaluation grid.
    pub fn pointwise_le(&self, other: &ExponentFunction, n: usize) -> Option<f64> {
        self.grid_points(n)
            .into_iter()
            .find(|x| self.value(*x) > other.value(*x) * (1.0 + 1e-12))
    }

    pub fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ExponentFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.kind {
            Kind::Constant(c) => write!(f, "{c}"),
            Kind::Infinite => write!(f, "inf"),
            Kind::OneMinusLog => write!(f, "1 - ln x"),
            Kind::Affine { intercept, slope } => write!(f, "{intercept} + {slope} x"),
            Kind::Sinusoidal {
                mean,
                amplitude,
                frequency,
                phase,
            } => write!(f, "{mean} + {amplitude} sin(2pi {frequency} x + {phase})"),
            Kind::Grid { samples, .. } => write!(f, "grid[{} samples]", samples.len()),
            Kind::Conjugate(p) => write!(f, "conj({p})"),
            Kind::Harmonic(p, r) => write!(f, "harm({p}, {r})"),
        }?;
        if !self.infinite_set.is_empty() && !matches!(&*self.kind, Kind::Infinite) {
            write!(f, " (inf on {} intervals)", self.infinite_set.len())?;
        }
        Ok(())
    }
}

fn interpolate(start: f64, step: f64, samples: &[f64], x: f64) -> f64 {
    let n = samples.len();
    let u = ((x - start) / step).clamp(0.0, (n - 1) as f64);
    let i = (u.floor() as usize).min(n - 2);
    let frac = u - i as f64;
    samples[i] + frac * (samples[i + 1] - samples[i])
}

/// p/(p − 1) with 1 ↦ ∞ and ∞ ↦ 1.
pub fn conjugate_value(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p <= 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// pr/(p + r) with the ∞ conventions.
pub fn harmonic_value(p: f64, r: f64) -> f64 {
    match (p.is_infinite(), r.is_infinite()) {
        (true, true) => f64::INFINITY,
        (true, false) => r,
        (false, true) => p,
        _ => p * r / (p + r),
    }
}

fn normalize_set(mut set: Vec<Interval>, domain: &Interval) -> Vec<Interval> {
    set = set.into_iter().filter_map(|s| s.intersect(domain).or_else(|| (s == *domain).then_some(s))).collect();
    set.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::new();
    for s in set {
        match out.last_mut() {
            Some(last) if s.lo <= last.hi => last.hi = last.hi.max(s.hi),
            _ => out.push(s),
        }
    }
    out
}

/// The exponent q = pr/(p + r) of the composition principle.
///
/// Requires r ≥ max(p, p/(p − 1)) on the evaluation grid; the result then
/// satisfies 1 ≤ q < p wherever r is finite, and q = p where r = ∞.
pub fn composition_exponent(p: &ExponentFunction, r: &ExponentFunction) -> Result<ExponentFunction> {
    composition_exponent_with(p, r, DEFAULT_GRID_POINTS)
}

pub fn composition_exponent_with(p: &ExponentFunction, r: &ExponentFunction, n: usize) -> Result<ExponentFunction> {
    for x in p.grid_points(n) {
        let pv = p.value(x);
        let rv = r.value(x);
        let need = pv.max(conjugate_value(pv));
        if rv < need * (1.0 - 1e-12) {
            return Err(Error::Contract(format!(
                "composition exponent needs r(x) >= max(p, p/(p-1)); at x = {x}: r = {rv}, required {need}"
            )));
        }
    }
    let q = ExponentFunction::harmonic(p, r)?;
    for x in q.grid_points(n) {
        let (pv, rv, qv) = (p.value(x), r.value(x), q.value(x));
        let ok = if rv.is_finite() {
            qv >= 1.0 - 1e-12 && qv < pv
        } else {
            qv == pv
        };
        if !ok {
            return Err(Error::Contract(format!(
                "composition exponent postcondition failed at x = {x}: p = {pv}, r = {rv}, q = {qv}"
            )));
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let p2 = ExponentFunction::constant(2.0).unwrap();
        assert_eq!(p2.eval(0.5).unwrap(), 2.0);
        let l = ExponentFunction::one_minus_log();
        assert_eq!(l.eval(1.0).unwrap(), 1.0);
        assert!((l.eval((-1f64).exp()).unwrap() - 2.0).abs() < 1e-15);
        assert!(l.eval(1.5).is_err());
        assert!(ExponentFunction::infinite().eval(0.3).unwrap().is_infinite());
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(ExponentFunction::constant(3.0).unwrap().essential_bounds(), (3.0, 3.0));
        assert_eq!(ExponentFunction::one_minus_log().essential_bounds(), (1.0, f64::INFINITY));
        let s = ExponentFunction::sinusoidal(2.0, 1.0, 1.0, 0.0, Interval::UNIT).unwrap();
        let (lo, hi) = s.essential_bounds();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
        assert!(s.is_d_plus() && !s.is_c_plus());
        assert!(!ExponentFunction::one_minus_log().is_d_plus());
    }

    #[test]
    fn grid_with_infinite_part() {
        let g = ExponentFunction::grid(0.0, 0.5, vec![2.0, 3.0, 4.0], vec![Interval { lo: 0.75, hi: 1.0 }]).unwrap();
        assert_eq!(g.value(0.25), 2.5);
        assert!(g.value(0.8).is_infinite());
        assert_eq!(g.essential_bounds(), (2.0, f64::INFINITY));
        assert_eq!(g.finite_pieces(&Interval::UNIT), vec![Interval { lo: 0.0, hi: 0.75 }]);
        assert!(ExponentFunction::grid(0.0, 0.5, vec![0.5, 2.0], vec![]).is_err());
    }

    #[test]
    fn conjugate_examples() {
        let q = ExponentFunction::constant(2.0).unwrap().conjugate();
        assert_eq!(q.as_constant(), Some(2.0));
        let q = ExponentFunction::constant(1.0).unwrap().conjugate();
        assert_eq!(q.as_constant(), Some(f64::INFINITY));
        assert_eq!(q.infinite_measure(), 1.0);
        assert_eq!(ExponentFunction::infinite().conjugate().as_constant(), Some(1.0));
        let l = ExponentFunction::one_minus_log();
        let c = l.conjugate();
        let x = 0.3f64;
        assert!((c.value(x) - (1.0 - x.ln()) / (-x.ln())).abs() < 1e-14);
        assert!(c.value(1.0).is_infinite());
        assert_eq!(c.conjugate(), l);
    }

    #[test]
    fn composition_examples() {
        let c = |v: f64| ExponentFunction::constant(v).unwrap();
        assert_eq!(composition_exponent(&c(2.0), &c(2.0)).unwrap().as_constant(), Some(1.0));
        assert_eq!(
            composition_exponent(&c(2.0), &ExponentFunction::infinite()).unwrap().as_constant(),
            Some(2.0)
        );
        let q = composition_exponent(&c(3.0), &c(6.0)).unwrap().as_constant().unwrap();
        assert!((q - 2.0).abs() < 1e-15);
        let err = composition_exponent(&c(3.0), &c(2.0)).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn variable_composition_exponent() {
        let p = ExponentFunction::affine(2.0, 1.0, Interval::UNIT).unwrap();
        let r = ExponentFunction::constant(4.0).unwrap();
        let q = composition_exponent(&p, &r).unwrap();
        for x in [0.0, 0.4, 1.0] {
            let pv = 2.0 + x;
            assert!((q.value(x) - pv * 4.0 / (pv + 4.0)).abs() < 1e-14);
        }
    }
}
