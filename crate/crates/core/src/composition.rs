//! Superposition u ↦ f(·, u(·)): Lipschitz window estimates, the exponent
//! q = pr/(p + r), and shift-test membership of the composed function.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::almost_auto::{bochner_shift_test, ShiftTestReport};
use crate::error::{Error, Result};
use crate::exponent::{composition_exponent, ExponentFunction};
use crate::function_model::{Value, VectorFunction};
use crate::interval::Interval;
use crate::report::{fit_power_law, TestReport, Verdict};
use crate::stepanov::{c0_decay_test, stepanov_norm, WindowNormSeries};

type Map = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;
type Bound = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A map (t, y) ↦ f(t, y) ∈ ℝ^d for y ∈ ℝ^m with |y|_∞ ≤ `y_bound`.
#[derive(Clone)]
pub struct TwoParameterFunction {
    name: String,
    y_dim: usize,
    out_dim: usize,
    y_bound: f64,
    map: Map,
    lipschitz: Option<Bound>,
}

impl fmt::Debug for TwoParameterFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TwoParameterFunction({}, {} -> {})", self.name, self.y_dim, self.out_dim)
    }
}

impl TwoParameterFunction {
    pub fn new<F>(name: &str, y_dim: usize, out_dim: usize, y_bound: f64, f: F) -> Self
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        TwoParameterFunction {
            name: name.to_string(),
            y_dim,
            out_dim,
            y_bound,
            map: Arc::new(f),
            lipschitz: None,
        }
    }

    /// Attaches a known Lipschitz function L_f(t) in y.
    pub fn with_lipschitz<L: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, l: L) -> Self {
        self.lipschitz = Some(Arc::new(l));
        self
    }

    /// f(t, y) = y.
    pub fn identity(d: usize) -> Self {
        Self::new("y", d, d, f64::INFINITY, |_, y, out| out.copy_from_slice(y)).with_lipschitz(|_| 1.0)
    }

    /// f(t, y) = s(t)·y for a scalar s.
    pub fn scaled_by(s: VectorFunction, d: usize) -> Self {
        let name = format!("{s}*y");
        let s2 = s.clone();
        Self::new(&name, d, d, f64::INFINITY, move |t, y, out| {
            let k = s.scalar(t);
            for (o, v) in out.iter_mut().zip(y) {
                *o = k * v;
            }
        })
        .with_lipschitz(move |t| s2.scalar(t).abs())
    }

    /// f(t, y) = s(t)·tanh(y), scalar.
    pub fn modulated_tanh(s: VectorFunction) -> Self {
        let name = format!("{s}*tanh(y)");
        let s2 = s.clone();
        Self::new(&name, 1, 1, f64::INFINITY, move |t, y, out| out[0] = s.scalar(t) * y[0].tanh())
            .with_lipschitz(move |t| s2.scalar(t).abs())
    }

    /// f(t, y) = y² on |y| ≤ 1.
    pub fn square() -> Self {
        Self::new("y^2", 1, 1, 1.0, |_, y, out| out[0] = y[0] * y[0]).with_lipschitz(|_| 2.0)
    }

    /// f(t, y) = c.
    pub fn constant(c: Vec<f64>, y_dim: usize) -> Self {
        let name = format!("{c:?}");
        let d = c.len();
        Self::new(&name, y_dim, d, f64::INFINITY, move |_, _, out| out.copy_from_slice(&c)).with_lipschitz(|_| 0.0)
    }

    pub fn zero(y_dim: usize, out_dim: usize) -> Self {
        Self::constant(vec![0.0; out_dim], y_dim)
    }

    /// Pointwise sum; Lipschitz functions add when both are known.
    pub fn add(&self, other: &TwoParameterFunction) -> Result<Self> {
        if self.y_dim != other.y_dim || self.out_dim != other.out_dim {
            return Err(Error::Contract(format!("cannot add {} and {}", self.name, other.name)));
        }
        let (a, b) = (self.map.clone(), other.map.clone());
        let d = self.out_dim;
        let mut s = Self::new(
            &format!("({} + {})", self.name, other.name),
            self.y_dim,
            d,
            self.y_bound.min(other.y_bound),
            move |t, y, out| {
                let mut tmp: Value = smallvec::smallvec![0.0; d];
                a(t, y, out);
                b(t, y, &mut tmp);
                for (o, v) in out.iter_mut().zip(&tmp) {
                    *o += v;
                }
            },
        );
        if let (Some(la), Some(lb)) = (self.lipschitz.clone(), other.lipschitz.clone()) {
            s.lipschitz = Some(Arc::new(move |t| la(t) + lb(t)));
        }
        Ok(s)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn y_dim(&self) -> usize {
        self.y_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn y_bound(&self) -> f64 {
        self.y_bound
    }

    pub fn declared_lipschitz(&self, t: f64) -> Option<f64> {
        self.lipschitz.as_ref().map(|l| l(t))
    }

    fn in_range(&self, y: &[f64]) -> bool {
        y.iter().all(|v| v.abs() <= self.y_bound)
    }

    pub fn eval(&self, t: f64, y: &[f64]) -> Result<Value> {
        if y.len() != self.y_dim {
            return Err(Error::Contract(format!("{} expects {} components, got {}", self.name, self.y_dim, y.len())));
        }
        if !self.in_range(y) {
            let worst = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
            return Err(Error::domain("second argument", worst, -self.y_bound, self.y_bound));
        }
        let mut out: Value = smallvec::smallvec![0.0; self.out_dim];
        (self.map)(t, y, &mut out);
        Ok(out)
    }
}

/// The exact composition t ↦ f(t, u(t)); out-of-range values of u evaluate
/// to NaN.
pub fn composed_function(f: &TwoParameterFunction, u: &VectorFunction) -> Result<VectorFunction> {
    if u.dim() != f.y_dim {
        return Err(Error::Contract(format!("{} expects {} components, u has {}", f.name, f.y_dim, u.dim())));
    }
    let f2 = f.clone();
    Ok(u.map(&format!("{}[u = {u}]", f.name), f.out_dim, move |t, y, out| {
        if f2.in_range(y) {
            (f2.map)(t, y, out);
        } else {
            out.iter_mut().for_each(|o| *o = f64::NAN);
        }
    }))
}

/// Samples t ↦ f(t, u(t)) on a uniform grid.
pub fn compose(f: &TwoParameterFunction, u: &VectorFunction, t_grid: &[f64]) -> Result<VectorFunction> {
    if t_grid.len() < 2 {
        return Err(Error::Config("composition grid needs at least two points".into()));
    }
    let h = (t_grid[t_grid.len() - 1] - t_grid[0]) / (t_grid.len() - 1) as f64;
    let mut samples = Vec::with_capacity(t_grid.len() * f.out_dim);
    for (i, t) in t_grid.iter().enumerate() {
        if (t - (t_grid[0] + h * i as f64)).abs() > 1e-9 * h.max(t.abs()) {
            return Err(Error::Config("composition grid must be uniform".into()));
        }
        let y = u.evaluate(*t)?;
        samples.extend(f.eval(*t, &y)?);
    }
    VectorFunction::grid(t_grid[0], h, f.out_dim, samples)
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub window_norms: WindowNormSeries,
    pub bounded: Verdict,
    /// Max of L̂_f − L_f over the sampled t, when L_f is declared.
    pub declared_excess: Option<f64>,
    pub notes: Vec<String>,
}

/// L̂_f(t) = max over sample pairs with |y_i − y_j| ≥ 1e-6 of
/// ‖f(t, y_i) − f(t, y_j)‖/|y_i − y_j|.
pub fn empirical_lipschitz(f: &TwoParameterFunction, y_samples: &[Vec<f64>]) -> Result<VectorFunction> {
    let ys: Vec<Vec<f64>> = y_samples.iter().filter(|y| f.in_range(y)).cloned().collect();
    if ys.len() < 2 {
        return Err(Error::Config("need at least two in-range y samples".into()));
    }
    if ys.iter().any(|y| y.len() != f.y_dim) {
        return Err(Error::Contract("y samples have the wrong dimension".into()));
    }
    let f2 = f.clone();
    Ok(VectorFunction::from_scalar_fn("empirical Lipschitz", Interval::REAL_LINE, vec![], move |t| {
        let vals: Vec<Value> = ys
            .iter()
            .map(|y| {
                let mut o: Value = smallvec::smallvec![0.0; f2.out_dim];
                (f2.map)(t, y, &mut o);
                o
            })
            .collect();
        let mut best = 0.0f64;
        for i in 0..ys.len() {
            for j in 0..ys.len() {
                if i == j {
                    continue;
                }
                let dy = ys[i].iter().zip(&ys[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                if dy < 1e-6 {
                    continue;
                }
                let df = vals[i].iter().zip(&vals[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                best = best.max(df / dy);
            }
        }
        best
    }))
}

/// Stepanov r(x) window norms of L̂_f on `t_grid` and a boundedness
/// verdict: false if a window norm is infinite, inconclusive if the norms
/// trend upward over the grid, true otherwise.
pub fn lipschitz_window_check(
    f: &TwoParameterFunction,
    r: &ExponentFunction,
    t_grid: &[f64],
    y_samples: &[Vec<f64>],
) -> Result<LipschitzReport> {
    let l = empirical_lipschitz(f, y_samples)?;
    let series = stepanov_norm(&l, r, t_grid)?;
    let finite = series.values.iter().all(|v| v.is_finite());
    let pos: Vec<(f64, f64)> = t_grid
        .iter()
        .zip(&series.values)
        .filter(|(t, v)| **t > 0.0 && **v > 0.0)
        .map(|(t, v)| (*t, *v))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pos.into_iter().unzip();
    let growing = fit_power_law(&xs, &ys).is_some_and(|fit| fit.slope > 0.05);
    let bounded = if !finite {
        Verdict::False
    } else if growing {
        Verdict::Inconclusive
    } else {
        Verdict::True
    };
    let mut notes = vec!["L is estimated from finitely many sample pairs and may underestimate the true constant".to_string()];
    let declared_excess = f.lipschitz.as_ref().map(|decl| {
        let lo = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let n = 2000;
        (0..=n)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / n as f64;
                l.scalar(t) - decl(t)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    });
    if let Some(e) = declared_excess {
        notes.push(format!("largest excess of the estimate over the declared L_f: {e:e}"));
    }
    Ok(LipschitzReport {
        window_norms: series,
        bounded,
        declared_excess,
        notes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CompositionReport {
    #[serde(skip)]
    pub q_exponent: Option<ExponentFunction>,
    pub q_label: String,
    pub lipschitz_window_norms: Option<LipschitzReport>,
    #[serde(skip)]
    pub composed: Option<VectorFunction>,
    pub membership: TestReport,
    pub input_shift_test: Option<ShiftTestReport>,
    pub composed_shift_test: Option<ShiftTestReport>,
    /// For a non-constant p, the composed function is also tested at the
    /// constant exponent p⁻ = ess inf p.
    pub constant_exponent_shift_test: Option<ShiftTestReport>,
}

fn inconclusive(q_label: String, cause: String) -> CompositionReport {
    CompositionReport {
        q_exponent: None,
        q_label,
        lipschitz_window_norms: None,
        composed: None,
        membership: TestReport::new("composition_membership", Verdict::Inconclusive, f64::NAN, f64::NAN).note(cause),
        input_shift_test: None,
        composed_shift_test: None,
        constant_exponent_shift_test: None,
    }
}

/// Sample points spanning the range of u over [lo, hi], per component.
fn range_samples(u: &VectorFunction, lo: f64, hi: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let n = 4000;
    let d = u.dim();
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    let mut v: Value = smallvec::smallvec![0.0; d];
    for i in 0..=n {
        u.eval_into(lo + (hi - lo) * i as f64 / n as f64, &mut v);
        for k in 0..d {
            min[k] = min[k].min(v[k]);
            max[k] = max[k].max(v[k]);
        }
    }
    (0..per_axis)
        .map(|j| {
            let s = j as f64 / (per_axis - 1).max(1) as f64;
            (0..d).map(|k| min[k] + s * (max[k] - min[k])).collect()
        })
        .collect()
}

/// Shift-test membership of f(·, u(·)) in the class with exponent
/// q = pr/(p + r), given that u passes at p.
///
/// Relative compactness of the range of u is replaced by boundedness of its
/// sampled range, which is equivalent in ℝ^m.
pub fn composition_membership_test(
    f: &TwoParameterFunction,
    u: &VectorFunction,
    p: &ExponentFunction,
    r: &ExponentFunction,
    shifts: &[f64],
    t_grid: &[f64],
) -> Result<CompositionReport> {
    let q = composition_exponent(p, r)?;
    let q_label = q.describe();
    let input = bochner_shift_test(u, p, shifts, t_grid)?;
    if input.verdict != Verdict::True {
        let cause = format!("u does not pass the shift test at p (verdict {})", input.verdict);
        let mut rep = inconclusive(q_label, cause);
        rep.input_shift_test = Some(input);
        return Ok(rep);
    }
    let t_lo = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let t_hi = t_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let reach = shifts.iter().map(|s| s.abs()).fold(0.0, f64::max);
    let (lo, hi) = (
        (t_lo - reach).max(u.domain().lo),
        (t_hi + reach).min(u.domain().hi),
    );
    let samples = range_samples(u, lo, hi, 9);
    if samples.iter().flatten().any(|v| !v.is_finite()) {
        let mut rep = inconclusive(q_label, "sampled range of u is unbounded".into());
        rep.input_shift_test = Some(input);
        return Ok(rep);
    }
    if samples.iter().any(|y| !f.in_range(y)) {
        return Err(Error::domain("range of u", f64::NAN, -f.y_bound, f.y_bound));
    }
    let lip = lipschitz_window_check(f, r, t_grid, &samples)?;
    let composed = composed_function(f, u)?;
    let shift = bochner_shift_test(&composed, &q, shifts, t_grid)?;
    let constant = match p.as_constant() {
        Some(_) => None,
        None => {
            let pm = ExponentFunction::constant(p.essential_bounds().0)?;
            let qm = composition_exponent(&pm, r).unwrap_or(pm);
            Some(bochner_shift_test(&composed, &qm, shifts, t_grid)?)
        }
    };
    let mut membership = TestReport::new("composition_membership", shift.verdict, shift.tail_residual, shift.tolerance);
    membership.notes.push(format!("exponent q = {q_label}"));
    membership.notes.push(format!("Lipschitz window norms bounded: {}", lip.bounded));
    membership.notes.push("range of u checked for boundedness only (sampled)".into());
    if let Some(c) = &constant {
        membership.notes.push(format!("at the constant exponent p-: {} (tail residual {})", c.verdict, c.tail_residual));
    }
    Ok(CompositionReport {
        q_exponent: Some(q),
        q_label,
        lipschitz_window_norms: Some(lip),
        composed: Some(composed),
        membership,
        input_shift_test: Some(input),
        composed_shift_test: Some(shift),
        constant_exponent_shift_test: constant,
    })
}

/// Membership of f(·, u(·)) in the asymptotic class for f = g + q̂ and
/// u = v + ω: (g, v) must pass the membership test and the residual
/// f(·, u(·)) − g(·, v(·)) must decay in q-windows on [0, ∞).
#[allow(clippy::too_many_arguments)]
pub fn asymptotic_composition_test(
    g: &TwoParameterFunction,
    v: &VectorFunction,
    q_part: &TwoParameterFunction,
    omega: &VectorFunction,
    p: &ExponentFunction,
    r: &ExponentFunction,
    shifts: &[f64],
    t_grid: &[f64],
    horizon: f64,
) -> Result<CompositionReport> {
    let mut rep = composition_membership_test(g, v, p, r, shifts, t_grid)?;
    let q = match &rep.q_exponent {
        Some(q) => q.clone(),
        None => return Ok(rep),
    };
    let half = Interval {
        lo: 0.0,
        hi: v.domain().hi.min(omega.domain().hi),
    };
    let f = g.add(q_part)?;
    let u = v.restrict(half)?.add(&omega.restrict(half)?)?;
    let residual = composed_function(&f, &u)?.sub(&composed_function(g, &v.restrict(half)?)?)?;
    let decay = c0_decay_test(&residual, &q, horizon)?;
    let verdict = rep.membership.verdict.and(decay.verdict);
    let mut m = TestReport::new("asymptotic_composition", verdict, decay.statistic, decay.tolerance);
    m.series = decay.series.clone();
    m.fit = decay.fit;
    m.notes.push(format!("membership of g(., v(.)): {}", rep.membership.verdict));
    m.notes.push(format!("residual decay: {}", decay.verdict));
    rep.membership = m;
    Ok(rep)
}
