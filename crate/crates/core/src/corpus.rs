//! Seeded random functions and exponents on [0, 1] for the inequality
//! suites. Everything is reproducible from the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::exponent::{conjugate_value, ExponentFunction};
use crate::function_model::VectorFunction;
use crate::interval::Interval;
use crate::modular_norm::{embedding_check, holder_check, InequalityReport};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coefficients of c₀ + Σ a_k sin(ω_k x + φ_k), k = 1..=3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrigSum {
    pub offset: f64,
    pub terms: [(f64, f64, f64); 3],
}

impl TrigSum {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let mut terms = [(0.0, 0.0, 0.0); 3];
        for t in &mut terms {
            *t = (rng.gen_range(-2.0..2.0), rng.gen_range(0.5..12.0), rng.gen_range(0.0..std::f64::consts::TAU));
        }
        TrigSum {
            offset: rng.gen_range(-1.0..1.0),
            terms,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.offset + self.terms.iter().map(|(a, w, ph)| a * (w * x + ph).sin()).sum::<f64>()
    }

    pub fn function(&self) -> VectorFunction {
        let s = *self;
        VectorFunction::from_scalar_fn(&format!("{s:?}"), Interval::REAL_LINE, vec![], move |x| s.value(x))
    }
}

/// A constant, affine or sinusoidal exponent on [0, 1] with values in
/// [`min`, `max`], min ≥ 1.
pub fn random_exponent<R: Rng>(rng: &mut R, min: f64, max: f64) -> ExponentFunction {
    let unit = Interval::UNIT;
    match rng.gen_range(0..3) {
        0 => ExponentFunction::constant(rng.gen_range(min..max)).unwrap(),
        1 => {
            let (a, b) = (rng.gen_range(min..max), rng.gen_range(min..max));
            ExponentFunction::affine(a, b - a, unit).unwrap()
        }
        _ => {
            let amp = rng.gen_range(0.0..(max - min) / 2.0);
            let mean = rng.gen_range(min + amp..max - amp);
            ExponentFunction::sinusoidal(mean, amp, rng.gen_range(0.5..3.0), rng.gen_range(0.0..std::f64::consts::TAU), unit)
                .unwrap()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteCase {
    pub index: usize,
    pub u: TrigSum,
    pub v: Option<TrigSum>,
    pub p: String,
    pub r: String,
    pub report: InequalityReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub cases: usize,
    pub failures: usize,
    /// Largest lhs/rhs over the cases.
    pub worst_ratio: f64,
    pub detail: Vec<SuiteCase>,
}

fn summarize(seed: u64, detail: Vec<SuiteCase>) -> SuiteReport {
    let failures = detail.iter().filter(|c| !c.report.holds).count();
    let worst_ratio = detail
        .iter()
        .map(|c| c.report.lhs / c.report.rhs)
        .filter(|r| r.is_finite())
        .fold(0.0, f64::max);
    SuiteReport {
        seed,
        cases: detail.len(),
        failures,
        worst_ratio,
        detail,
    }
}

/// `n` random cases of ‖uv‖_q ≤ 2‖u‖_p‖v‖_r on [0, 1]. The exponent r is
/// drawn above the conjugate of ess inf p so that q ≥ 1.
pub fn holder_suite(seed: u64, n: usize) -> Result<SuiteReport> {
    let mut g = rng(seed);
    let cases: Vec<_> = (0..n)
        .map(|_| {
            let (u, v) = (TrigSum::random(&mut g), TrigSum::random(&mut g));
            let p = random_exponent(&mut g, 1.25, 8.0);
            let r_min = conjugate_value(p.essential_bounds().0);
            let r = random_exponent(&mut g, r_min, r_min + 7.0);
            (u, v, p, r)
        })
        .collect();
    let detail = cases
        .into_par_iter()
        .enumerate()
        .map(|(index, (u, v, p, r))| {
            let report = holder_check(&u.function(), &v.function(), &p, &r, Interval::UNIT)?;
            Ok(SuiteCase {
                index,
                u,
                v: Some(v),
                p: p.describe(),
                r: r.describe(),
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(seed, detail))
}

/// `n` random cases of ‖f‖_q ≤ 2‖f‖_p on [0, 1] with q ≤ p.
pub fn embedding_suite(seed: u64, n: usize) -> Result<SuiteReport> {
    let mut g = rng(seed);
    let cases = (0..n)
        .map(|_| {
            let f = TrigSum::random(&mut g);
            let p = random_exponent(&mut g, 1.0, 8.0);
            let q = p.shrink_toward_one(g.gen_range(0.0..1.0))?;
            Ok((f, p, q))
        })
        .collect::<Result<Vec<_>>>()?;
    let detail = cases
        .into_par_iter()
        .enumerate()
        .map(|(index, (f, p, q))| {
            let report = embedding_check(&f.function(), &p, &q, Interval::UNIT)?;
            Ok(SuiteCase {
                index,
                u: f,
                v: None,
                p: p.describe(),
                r: q.describe(),
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(seed, detail))
}
