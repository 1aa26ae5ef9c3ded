//! Functions I → ℝ^d: registry closed forms, uniform grids, and combinators.
//!
//! A `VectorFunction` is an immutable expression tree behind an `Arc`, so
//! clones are cheap and values can be shared across threads. Every node
//! knows its domain, its jump points, and (for scalar nodes) how to locate
//! its zeros, which is what jump-aware quadrature needs.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};
use crate::interval::Interval;

pub type Value = SmallVec<[f64; 4]>;

type Closure = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;
type MapClosure = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub struct VectorFunction {
    node: Arc<Node>,
    domain: Interval,
    dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Closed {
    Sin,
    Cos,
    TwoSine,
    SignOfTwoSine,
    ExpDecay { rate: f64 },
    RationalDecay,
    Constant { value: Vec<f64> },
    Step { at: f64, before: f64, after: f64 },
    Indicator { lo: f64, hi: f64 },
    AaExemplar,
    Identity,
    Power { exponent: f64 },
}

struct GridData {
    start: f64,
    step: f64,
    len: usize,
    samples: Vec<f64>,
}

enum Node {
    Closed(Closed),
    Grid(GridData),
    Translate(VectorFunction, f64),
    Reflect(VectorFunction),
    Sign(VectorFunction),
    Linear(Vec<(f64, VectorFunction)>),
    Product(VectorFunction, VectorFunction),
    Stack(Vec<VectorFunction>),
    Custom { name: String, f: Closure, breaks: Vec<f64>, singular: Vec<f64> },
    // Pointwise map of the inner values; jumps and singularities are inherited.
    Map { name: String, inner: VectorFunction, f: MapClosure },
}

// Half-frequencies of the product form sin t + sin √2 t = 2 sin(c₊t) cos(c₋t).
const C_PLUS: f64 = (1.0 + SQRT_2) / 2.0;
const C_MINUS: f64 = (SQRT_2 - 1.0) / 2.0;

fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Closed {
    fn domain(&self) -> Interval {
        match self {
            Closed::Power { .. } => Interval::HALF_LINE,
            _ => Interval::REAL_LINE,
        }
    }

    fn dim(&self) -> usize {
        match self {
            Closed::Constant { value } => value.len(),
            _ => 1,
        }
    }

    fn eval(&self, t: f64, out: &mut [f64]) {
        let v = match self {
            Closed::Sin => t.sin(),
            Closed::Cos => t.cos(),
            Closed::TwoSine => t.sin() + (SQRT_2 * t).sin(),
            Closed::SignOfTwoSine => sign0((C_PLUS * t).sin()) * sign0((C_MINUS * t).cos()),
            Closed::ExpDecay { rate } => (-rate * t).exp(),
            Closed::RationalDecay => 1.0 / (1.0 + t * t),
            Closed::Constant { value } => {
                out.copy_from_slice(value);
                return;
            }
            Closed::Step { at, before, after } => {
                if t < *at {
                    *before
                } else {
                    *after
                }
            }
            Closed::Indicator { lo, hi } => {
                if t >= *lo && t <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            Closed::AaExemplar => (1.0 / (2.0 + t.cos() + (SQRT_2 * t).cos())).sin(),
            Closed::Identity => t,
            Closed::Power { exponent } => {
                if t == 0.0 {
                    if *exponent > 0.0 {
                        0.0
                    } else if *exponent == 0.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    t.powf(*exponent)
                }
            }
        };
        out[0] = v;
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            Closed::SignOfTwoSine => two_sine_roots(lo, hi),
            Closed::Step { at, .. } => vec![*at],
            Closed::Indicator { lo: a, hi: b } => vec![*a, *b],
            _ => vec![],
        }
    }

    /// Exact zeros when known in closed form.
    fn roots(&self, lo: f64, hi: f64) -> Option<Vec<f64>> {
        match self {
            Closed::Sin => Some(arithmetic_points(0.0, PI, lo, hi)),
            Closed::Cos => Some(arithmetic_points(PI / 2.0, PI, lo, hi)),
            Closed::TwoSine => Some(two_sine_roots(lo, hi)),
            Closed::ExpDecay { .. } | Closed::RationalDecay => Some(vec![]),
            Closed::Identity => Some(if lo <= 0.0 && hi >= 0.0 { vec![0.0] } else { vec![] }),
            _ => None,
        }
    }

    fn name(&self) -> String {
        match self {
            Closed::Sin => "sin".into(),
            Closed::Cos => "cos".into(),
            Closed::TwoSine => "two-sine".into(),
            Closed::SignOfTwoSine => "sign-of-two-sine".into(),
            Closed::ExpDecay { rate } => format!("exp-decay(a={rate})"),
            Closed::RationalDecay => "rational-decay".into(),
            Closed::Constant { value } => format!("constant{value:?}"),
            Closed::Step { at, before, after } => format!("step(at={at}, {before} -> {after})"),
            Closed::Indicator { lo, hi } => format!("indicator[{lo}, {hi}]"),
            Closed::AaExemplar => "aa-exemplar".into(),
            Closed::Identity => "identity".into(),
            Closed::Power { exponent } => format!("power({exponent})"),
        }
    }
}

/// Points offset + k·period inside [lo, hi].
fn arithmetic_points(offset: f64, period: f64, lo: f64, hi: f64) -> Vec<f64> {
    if !lo.is_finite() || !hi.is_finite() {
        return vec![];
    }
    let k0 = ((lo - offset) / period).ceil() as i64;
    let k1 = ((hi - offset) / period).floor() as i64;
    (k0..=k1).map(|k| offset + k as f64 * period).collect()
}

/// Zeros of sin t + sin √2 t in [lo, hi], from the product form.
fn two_sine_roots(lo: f64, hi: f64) -> Vec<f64> {
    let mut r = arithmetic_points(0.0, PI / C_PLUS, lo, hi);
    r.extend(arithmetic_points(PI / (2.0 * C_MINUS), PI / C_MINUS, lo, hi));
    r.sort_by(f64::total_cmp);
    r
}

impl VectorFunction {
    fn closed(c: Closed) -> Self {
        VectorFunction {
            domain: c.domain(),
            dim: c.dim(),
            node: Arc::new(Node::Closed(c)),
        }
    }

    pub fn sin() -> Self {
        Self::closed(Closed::Sin)
    }
    pub fn cos() -> Self {
        Self::closed(Closed::Cos)
    }
    /// sin t + sin √2 t.
    pub fn two_sine() -> Self {
        Self::closed(Closed::TwoSine)
    }
    /// sign(sin t + sin √2 t) with sign(0) = 0.
    pub fn sign_of_two_sine() -> Self {
        Self::closed(Closed::SignOfTwoSine)
    }
    /// e^{−rate·t} on ℝ.
    pub fn exp_decay(rate: f64) -> Self {
        Self::closed(Closed::ExpDecay { rate })
    }
    /// 1/(1 + t²).
    pub fn rational_decay() -> Self {
        Self::closed(Closed::RationalDecay)
    }
    pub fn constant(c: f64) -> Self {
        Self::closed(Closed::Constant { value: vec![c] })
    }
    pub fn constant_vec(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::Config("constant vector must be nonempty".into()));
        }
        Ok(Self::closed(Closed::Constant { value: v }))
    }
    pub fn zero(dim: usize) -> Self {
        Self::closed(Closed::Constant { value: vec![0.0; dim.max(1)] })
    }
    /// `before` for t < at, `after` for t ≥ at.
    pub fn step(at: f64, before: f64, after: f64) -> Self {
        Self::closed(Closed::Step { at, before, after })
    }
    /// 1 on [lo, hi], 0 elsewhere.
    pub fn indicator(lo: f64, hi: f64) -> Self {
        Self::closed(Closed::Indicator { lo, hi })
    }
    /// sin(1/(2 + cos t + cos √2 t)).
    pub fn aa_exemplar() -> Self {
        Self::closed(Closed::AaExemplar)
    }
    pub fn identity() -> Self {
        Self::closed(Closed::Identity)
    }
    /// t^exponent on [0, ∞).
    pub fn power(exponent: f64) -> Self {
        Self::closed(Closed::Power { exponent })
    }

    /// Linear interpolation through samples at start + i·step; `samples` is
    /// row-major with `dim` values per node.
    pub fn grid(start: f64, step: f64, dim: usize, samples: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !start.is_finite() {
            return Err(Error::Config(format!("grid step must be positive, got {step}")));
        }
        if dim == 0 || !samples.len().is_multiple_of(dim) || samples.len() / dim < 2 {
            return Err(Error::Config("grid needs at least two nodes of dimension >= 1".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("grid samples must be finite".into()));
        }
        let len = samples.len() / dim;
        let domain = Interval {
            lo: start,
            hi: start + step * (len - 1) as f64,
        };
        Ok(VectorFunction {
            node: Arc::new(Node::Grid(GridData {
                start,
                step,
                len,
                samples,
            })),
            domain,
            dim,
        })
    }

    /// Samples `self` on a uniform grid over [lo, hi].
    pub fn sample(&self, lo: f64, hi: f64, step: f64) -> Result<Self> {
        self.domain.check("sample start", lo)?;
        self.domain.check("sample end", hi)?;
        let n = ((hi - lo) / step).round() as usize + 1;
        let step = (hi - lo) / (n - 1).max(1) as f64;
        let mut samples = Vec::with_capacity(n * self.dim);
        let mut buf: Value = smallvec![0.0; self.dim];
        for i in 0..n {
            self.eval_into(lo + step * i as f64, &mut buf);
            samples.extend_from_slice(&buf);
        }
        Self::grid(lo, step, self.dim, samples)
    }

    /// Loads a grid from CSV with header `t, v1, ..., vd`.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path.as_ref())?;
        let width = rdr.headers()?.len();
        if width < 2 {
            return Err(Error::Config("grid CSV needs a t column and at least one value column".into()));
        }
        let mut ts = Vec::new();
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let mut it = rec.iter().map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("grid CSV: '{s}' is not a number")))
            });
            ts.push(it.next().unwrap()?);
            for v in it {
                samples.push(v?);
            }
        }
        if ts.len() < 2 {
            return Err(Error::Config("grid CSV needs at least two rows".into()));
        }
        let step = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
        for (i, t) in ts.iter().enumerate() {
            if (t - (ts[0] + step * i as f64)).abs() > 1e-9 * (1.0 + t.abs()) {
                return Err(Error::Config(format!("grid CSV: t values are not uniformly spaced at row {}", i + 1)));
            }
        }
        Self::grid(ts[0], step, width - 1, samples)
    }

    /// Wraps a closure writing f(t) into a slice of length `dim`.
    pub fn from_fn<F>(name: &str, domain: Interval, dim: usize, f: F) -> Self
    where
        F: Fn(f64, &mut [f64]) + Send + Sync + 'static,
    {
        VectorFunction {
            node: Arc::new(Node::Custom {
                name: name.to_string(),
                f: Arc::new(f),
                breaks: vec![],
                singular: vec![],
            }),
            domain,
            dim,
        }
    }

    /// Scalar closure with declared jump points.
    pub fn from_scalar_fn<F>(name: &str, domain: Interval, breaks: Vec<f64>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        VectorFunction {
            node: Arc::new(Node::Custom {
                name: name.to_string(),
                f: Arc::new(move |t, out: &mut [f64]| out[0] = f(t)),
                breaks,
                singular: vec![],
            }),
            domain,
            dim: 1,
        }
    }

    /// Scalar closure that may blow up at the points in `singular`.
    pub fn from_singular_fn<F>(name: &str, domain: Interval, singular: Vec<f64>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        VectorFunction {
            node: Arc::new(Node::Custom {
                name: name.to_string(),
                f: Arc::new(move |t, out: &mut [f64]| out[0] = f(t)),
                breaks: vec![],
                singular,
            }),
            domain,
            dim: 1,
        }
    }

    /// t ↦ g(t, f(t)) for a closure g writing `dim` components.
    pub fn map<F>(&self, name: &str, dim: usize, g: F) -> Self
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        VectorFunction {
            node: Arc::new(Node::Map {
                name: name.to_string(),
                inner: self.clone(),
                f: Arc::new(g),
            }),
            domain: self.domain,
            dim,
        }
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Same function on a smaller domain.
    pub fn restrict(&self, domain: Interval) -> Result<Self> {
        if !self.domain.contains_interval(&domain) {
            return Err(Error::domain("restriction bound", domain.lo, self.domain.lo, self.domain.hi));
        }
        let mut g = self.clone();
        g.domain = domain;
        Ok(g)
    }

    pub fn evaluate(&self, t: f64) -> Result<Value> {
        self.domain.check("function argument", t)?;
        let mut out: Value = smallvec![0.0; self.dim];
        self.eval_into(t, &mut out);
        Ok(out)
    }

    /// f(t) into `out` without the domain check.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        match &*self.node {
            Node::Closed(c) => c.eval(t, out),
            Node::Grid(g) => {
                let n = g.len;
                let d = self.dim;
                let u = ((t - g.start) / g.step).clamp(0.0, (n - 1) as f64);
                let i = (u.floor() as usize).min(n - 2);
                let w = u - i as f64;
                let (lo, hi) = (&g.samples[i * d..(i + 1) * d], &g.samples[(i + 1) * d..(i + 2) * d]);
                for ((o, a), b) in out.iter_mut().zip(lo).zip(hi) {
                    *o = a + w * (b - a);
                }
            }
            Node::Translate(f, tau) => f.eval_into(t + tau, out),
            Node::Reflect(f) => f.eval_into(-t, out),
            Node::Sign(f) => {
                f.eval_into(t, out);
                out[0] = sign0(out[0]);
            }
            Node::Linear(terms) => {
                out.iter_mut().for_each(|v| *v = 0.0);
                let mut buf: Value = smallvec![0.0; self.dim];
                for (c, f) in terms {
                    f.eval_into(t, &mut buf);
                    for (o, b) in out.iter_mut().zip(&buf) {
                        *o += c * b;
                    }
                }
            }
            Node::Product(s, f) => {
                let k = s.scalar(t);
                f.eval_into(t, out);
                out.iter_mut().for_each(|v| *v *= k);
            }
            Node::Stack(parts) => {
                for (o, f) in out.iter_mut().zip(parts) {
                    *o = f.scalar(t);
                }
            }
            Node::Custom { f, .. } => f(t, out),
            Node::Map { inner, f, .. } => {
                let mut buf: Value = smallvec![0.0; inner.dim];
                inner.eval_into(t, &mut buf);
                f(t, &buf, out);
            }
        }
    }

    /// First component at t, unchecked.
    pub fn scalar(&self, t: f64) -> f64 {
        if self.dim == 1 {
            let mut v = [0.0];
            self.eval_into(t, &mut v);
            v[0]
        } else {
            let mut v: Value = smallvec![0.0; self.dim];
            self.eval_into(t, &mut v);
            v[0]
        }
    }

    /// Euclidean norm of f(t), unchecked.
    pub fn norm_at(&self, t: f64) -> f64 {
        if self.dim == 1 {
            return self.scalar(t).abs();
        }
        let mut v: Value = smallvec![0.0; self.dim];
        self.eval_into(t, &mut v);
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// t ↦ f(t + τ).
    pub fn translate(&self, tau: f64) -> Self {
        if tau == 0.0 {
            return self.clone();
        }
        let (inner, total) = match &*self.node {
            Node::Translate(f, a) => (f.clone(), a + tau),
            _ => (self.clone(), tau),
        };
        if total == 0.0 {
            return inner;
        }
        VectorFunction {
            domain: inner.domain.shift(-total),
            dim: inner.dim,
            node: Arc::new(Node::Translate(inner, total)),
        }
    }

    /// t ↦ f(−t); the domain must be symmetric about 0.
    pub fn reflect(&self) -> Result<Self> {
        let d = self.domain;
        if d.lo != -d.hi {
            return Err(Error::domain("reflection needs a symmetric domain; lower end", d.lo, -d.hi, -d.hi));
        }
        if let Node::Reflect(f) = &*self.node {
            return Ok(f.clone());
        }
        Ok(VectorFunction {
            domain: d,
            dim: self.dim,
            node: Arc::new(Node::Reflect(self.clone())),
        })
    }

    /// Pointwise sign with sign(0) = 0.
    pub fn sign_of(&self) -> Result<Self> {
        if self.dim != 1 {
            return Err(Error::Contract(format!("sign_of needs a scalar function, got dimension {}", self.dim)));
        }
        if let Node::Closed(Closed::TwoSine) = &*self.node {
            return Self::sign_of_two_sine().restrict(self.domain);
        }
        Ok(VectorFunction {
            domain: self.domain,
            dim: 1,
            node: Arc::new(Node::Sign(self.clone())),
        })
    }

    /// Σ cᵢ fᵢ on the common domain.
    pub fn linear(terms: Vec<(f64, VectorFunction)>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Contract("empty linear combination".into()))?;
        let dim = first.1.dim;
        let mut domain = first.1.domain;
        for (_, f) in &terms {
            if f.dim != dim {
                return Err(Error::Contract(format!("dimension mismatch {} vs {}", f.dim, dim)));
            }
            domain = common_domain(&domain, &f.domain)?;
        }
        Ok(VectorFunction {
            domain,
            dim,
            node: Arc::new(Node::Linear(terms)),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::linear(vec![(c, self.clone())]).expect("single term")
    }

    pub fn add(&self, other: &VectorFunction) -> Result<Self> {
        Self::linear(vec![(1.0, self.clone()), (1.0, other.clone())])
    }

    pub fn sub(&self, other: &VectorFunction) -> Result<Self> {
        Self::linear(vec![(1.0, self.clone()), (-1.0, other.clone())])
    }

    /// Pointwise mean of the given functions.
    pub fn average(fs: &[VectorFunction]) -> Result<Self> {
        let w = 1.0 / fs.len().max(1) as f64;
        Self::linear(fs.iter().map(|f| (w, f.clone())).collect())
    }

    /// Scalar `self` times (possibly vector) `other`.
    pub fn times(&self, other: &VectorFunction) -> Result<Self> {
        if self.dim != 1 {
            return Err(Error::Contract("left factor of a product must be scalar".into()));
        }
        Ok(VectorFunction {
            domain: common_domain(&self.domain, &other.domain)?,
            dim: other.dim,
            node: Arc::new(Node::Product(self.clone(), other.clone())),
        })
    }

    /// Vector function whose components are the given scalar functions.
    pub fn stack(parts: Vec<VectorFunction>) -> Result<Self> {
        if parts.is_empty() || parts.iter().any(|p| p.dim != 1) {
            return Err(Error::Contract("stack needs one or more scalar functions".into()));
        }
        let mut domain = parts[0].domain;
        for p in &parts {
            domain = common_domain(&domain, &p.domain)?;
        }
        Ok(VectorFunction {
            domain,
            dim: parts.len(),
            node: Arc::new(Node::Stack(parts)),
        })
    }

    /// Jump points of f inside [lo, hi], sorted.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut v = match &*self.node {
            Node::Closed(c) => c.breakpoints(lo, hi),
            Node::Grid(_) => vec![],
            Node::Translate(f, tau) => f.breakpoints(lo + tau, hi + tau).into_iter().map(|x| x - tau).collect(),
            Node::Reflect(f) => f.breakpoints(-hi, -lo).into_iter().map(|x| -x).collect(),
            Node::Sign(f) => {
                let mut v = f.roots(lo, hi);
                v.extend(f.breakpoints(lo, hi));
                v
            }
            Node::Linear(terms) => terms.iter().flat_map(|(_, f)| f.breakpoints(lo, hi)).collect(),
            Node::Product(a, b) => {
                let mut v = a.breakpoints(lo, hi);
                v.extend(b.breakpoints(lo, hi));
                v
            }
            Node::Stack(parts) => parts.iter().flat_map(|f| f.breakpoints(lo, hi)).collect(),
            Node::Custom { breaks, .. } => breaks.clone(),
            Node::Map { inner, .. } => inner.breakpoints(lo, hi),
        };
        v.retain(|x| *x >= lo && *x <= hi);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Zeros of a scalar function in [lo, hi]: exact for closed forms that
    /// know them, otherwise by sign-change scan and bisection.
    pub fn roots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let exact = match &*self.node {
            Node::Closed(c) => c.roots(lo, hi),
            Node::Translate(f, tau) => Some(f.roots(lo + tau, hi + tau).into_iter().map(|x| x - tau).collect()),
            Node::Reflect(f) => Some(f.roots(-hi, -lo).into_iter().map(|x| -x).collect()),
            Node::Linear(terms) if terms.len() == 1 && terms[0].0 != 0.0 => Some(terms[0].1.roots(lo, hi)),
            _ => None,
        };
        exact.unwrap_or_else(|| scan_roots(|t| self.scalar(t), lo, hi))
    }

    /// Points where f may be unbounded.
    pub fn singular_points(&self) -> Vec<f64> {
        match &*self.node {
            Node::Closed(Closed::Power { exponent }) if *exponent < 0.0 => vec![0.0],
            Node::Translate(f, tau) => f.singular_points().into_iter().map(|x| x - tau).collect(),
            Node::Reflect(f) => f.singular_points().into_iter().map(|x| -x).collect(),
            Node::Sign(_) => vec![],
            Node::Linear(terms) => terms.iter().flat_map(|(_, f)| f.singular_points()).collect(),
            Node::Product(a, b) => {
                let mut v = a.singular_points();
                v.extend(b.singular_points());
                v
            }
            Node::Stack(parts) => parts.iter().flat_map(|f| f.singular_points()).collect(),
            Node::Custom { singular, .. } => singular.clone(),
            Node::Map { inner, .. } => inner.singular_points(),
            _ => vec![],
        }
    }

    /// Finest sampling step among grid leaves, if any.
    pub fn resolution(&self) -> Option<f64> {
        let min = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        };
        match &*self.node {
            Node::Grid(g) => Some(g.step),
            Node::Translate(f, _) | Node::Reflect(f) | Node::Sign(f) => f.resolution(),
            Node::Map { inner, .. } => inner.resolution(),
            Node::Linear(terms) => terms.iter().fold(None, |acc, (_, f)| min(acc, f.resolution())),
            Node::Product(a, b) => min(a.resolution(), b.resolution()),
            Node::Stack(parts) => parts.iter().fold(None, |acc, f| min(acc, f.resolution())),
            _ => None,
        }
    }

    /// True for a grid leaf (possibly translated or reflected).
    pub fn is_sampled(&self) -> bool {
        self.resolution().is_some()
    }

    /// Largest finite ‖f‖ over `n` equispaced points of [lo, hi] plus its
    /// jump points. Isolated infinite values are null sets and are skipped.
    pub fn sampled_sup(&self, lo: f64, hi: f64, n: usize) -> f64 {
        let n = n.max(2);
        let mut m = 0.0f64;
        let mut take = |v: f64| {
            if v.is_finite() {
                m = m.max(v);
            }
        };
        for i in 0..n {
            take(self.norm_at(lo + (hi - lo) * i as f64 / (n - 1) as f64));
        }
        for b in self.breakpoints(lo, hi) {
            take(self.norm_at(b));
        }
        m
    }

    pub fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for VectorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            Node::Closed(c) => write!(f, "{}", c.name()),
            Node::Grid(g) => write!(f, "grid[{} nodes, step {}]", g.len, g.step),
            Node::Translate(g, tau) => write!(f, "{g}(. + {tau})"),
            Node::Reflect(g) => write!(f, "{g}(-.)"),
            Node::Sign(g) => write!(f, "sign({g})"),
            Node::Linear(terms) => {
                write!(f, "(")?;
                for (i, (c, g)) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{c}*{g}")?;
                }
                write!(f, ")")
            }
            Node::Product(a, b) => write!(f, "{a}*{b}"),
            Node::Stack(parts) => {
                write!(f, "[")?;
                for (i, g) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, "]")
            }
            Node::Custom { name, .. } | Node::Map { name, .. } => write!(f, "{name}"),
        }
    }
}

impl fmt::Debug for VectorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorFunction({self} on [{}, {}], d={})", self.domain.lo, self.domain.hi, self.dim)
    }
}

fn common_domain(a: &Interval, b: &Interval) -> Result<Interval> {
    if a == b {
        return Ok(*a);
    }
    a.intersect(b)
        .ok_or_else(|| Error::Contract(format!("domains [{}, {}] and [{}, {}] do not overlap", a.lo, a.hi, b.lo, b.hi)))
}

/// Sign-change scan with step ≤ 1e-3 followed by bisection.
fn scan_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return vec![];
    }
    let n = ((hi - lo) / 1e-3).ceil().max(1.0) as usize;
    let h = (hi - lo) / n as f64;
    let mut roots = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    if fa == 0.0 {
        roots.push(a);
    }
    for i in 1..=n {
        let b = if i == n { hi } else { lo + h * i as f64 };
        let fb = f(b);
        if fb == 0.0 {
            roots.push(b);
        } else if fa != 0.0 && fa.signum() != fb.signum() {
            let (mut x0, mut x1, mut f0) = (a, b, fa);
            for _ in 0..200 {
                let m = 0.5 * (x0 + x1);
                if m <= x0 || m >= x1 {
                    break;
                }
                let fm = f(m);
                if fm == 0.0 {
                    x0 = m;
                    x1 = m;
                    break;
                }
                if fm.signum() == f0.signum() {
                    x0 = m;
                    f0 = fm;
                } else {
                    x1 = m;
                }
            }
            roots.push(0.5 * (x0 + x1));
        }
        a = b;
        fa = fb;
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(f: &VectorFunction, t: f64) -> f64 {
        f.evaluate(t).unwrap()[0]
    }

    #[test]
    fn evaluate_examples() {
        assert!((s(&VectorFunction::sin(), PI / 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(s(&VectorFunction::two_sine(), 0.0), 0.0);
        let g = VectorFunction::grid(0.0, 1.0, 1, vec![1.0, 3.0]).unwrap();
        assert_eq!(s(&g, 0.5), 2.0);
        assert!(g.evaluate(1.5).is_err());
        assert!(VectorFunction::power(0.5).evaluate(-1.0).is_err());
    }

    #[test]
    fn translate_examples() {
        let f = VectorFunction::sin();
        let g = f.translate(2.0 * PI);
        for i in 0..200 {
            let t = -10.0 + 0.1 * i as f64;
            assert!((s(&f, t) - s(&g, t)).abs() < 1e-12);
        }
        let sg = VectorFunction::sign_of_two_sine();
        assert!(Arc::ptr_eq(&sg.translate(0.0).node, &sg.node));
        let grid = VectorFunction::grid(0.0, 1.0, 1, (0..=10).map(f64::from).collect()).unwrap();
        let shifted = grid.translate(3.0);
        assert_eq!(shifted.domain(), Interval { lo: -3.0, hi: 7.0 });
        assert_eq!(s(&shifted, -3.0), 0.0);
        assert_eq!(s(&shifted, 7.0), 10.0);
        assert!(shifted.evaluate(7.5).is_err());
    }

    #[test]
    fn translate_composes_exactly_for_closed_forms() {
        let f = VectorFunction::two_sine();
        let a = f.translate(0.3).translate(1.1);
        let b = f.translate(0.3 + 1.1);
        for i in 0..50 {
            let t = 0.37 * i as f64;
            assert_eq!(s(&a, t), s(&b, t));
        }
    }

    #[test]
    fn reflect_examples() {
        let f = VectorFunction::sin().reflect().unwrap();
        assert!((s(&f, 0.7) + 0.7f64.sin()).abs() < 1e-15);
        let c = VectorFunction::cos().reflect().unwrap();
        assert_eq!(s(&c, 0.7), 0.7f64.cos());
        let e = VectorFunction::exp_decay(1.0).reflect().unwrap();
        assert!((s(&e, 2.0) - 2f64.exp()).abs() < 1e-12);
        let grid = VectorFunction::grid(0.0, 1.0, 1, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(grid.reflect(), Err(Error::Domain { .. })));
        let sym = VectorFunction::grid(-1.0, 1.0, 1, vec![0.0, 1.0, 5.0]).unwrap();
        assert_eq!(s(&sym.reflect().unwrap(), -1.0), 5.0);
        assert!(Arc::ptr_eq(&sym.reflect().unwrap().reflect().unwrap().node, &sym.node));
    }

    #[test]
    fn sign_examples() {
        let f = VectorFunction::two_sine().sign_of().unwrap();
        assert_eq!(s(&f, 0.0), 0.0);
        let g = VectorFunction::sin().sign_of().unwrap();
        assert_eq!(s(&g, PI / 2.0), 1.0);
        assert_eq!(s(&g, 3.0 * PI / 2.0), -1.0);
        let v = VectorFunction::constant_vec(vec![1.0, 2.0]).unwrap();
        assert!(matches!(v.sign_of(), Err(Error::Contract(_))));
    }

    #[test]
    fn two_sine_roots_match_sign_changes() {
        let f = VectorFunction::two_sine();
        let roots = f.roots(0.0, 30.0);
        let scanned = scan_roots(|t| f.scalar(t), 0.0, 30.0);
        assert_eq!(roots.len(), scanned.len());
        for (a, b) in roots.iter().zip(&scanned) {
            assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
        assert!((roots[1] - 2.0 * PI / (1.0 + SQRT_2)).abs() < 1e-14);
        let sg = VectorFunction::sign_of_two_sine();
        for w in roots.windows(2) {
            let m = 0.5 * (w[0] + w[1]);
            assert_eq!(sg.scalar(m), f.scalar(m).signum());
        }
    }

    #[test]
    fn breakpoints_follow_translation() {
        let f = VectorFunction::sign_of_two_sine().translate(2.0);
        let b = f.breakpoints(0.0, 1.0);
        assert_eq!(b.len(), 1);
        assert!((b[0] - (2.0 * PI / (1.0 + SQRT_2) - 2.0)).abs() < 1e-14);
        let d = VectorFunction::sign_of_two_sine()
            .translate(0.5)
            .sub(&VectorFunction::sign_of_two_sine().translate(3.0))
            .unwrap();
        assert!(d.breakpoints(0.0, 1.0).is_empty());
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(d.scalar(x), 2.0);
        }
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        std::fs::write(&p, "t,v1,v2\n0,1,2\n0.5,3,4\n1,5,6\n").unwrap();
        let g = VectorFunction::from_csv(&p).unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.evaluate(0.25).unwrap().as_slice(), &[2.0, 3.0]);
        std::fs::write(&p, "t,v\n0,1\n0.5,3\n2,5\n").unwrap();
        assert!(VectorFunction::from_csv(&p).is_err());
    }
}
