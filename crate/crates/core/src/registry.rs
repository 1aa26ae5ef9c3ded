//! Named constructors addressable from JSON, e.g.
//! `{"name": "one-minus-log", "domain": [0, 1]}`.

use serde::{Deserialize, Serialize};

use crate::composition::TwoParameterFunction;
use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::fractional::{FamilyKind, ResolventFamily};
use crate::function_model::VectorFunction;
use crate::interval::{Grid, Interval};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Sin,
    Cos,
    TwoSine,
    SignOfTwoSine,
    ExpDecay { rate: f64 },
    RationalDecay,
    Constant { value: f64 },
    ConstantVec { values: Vec<f64> },
    Zero {
        #[serde(default = "one")]
        dim: usize,
    },
    Step { at: f64, before: f64, after: f64 },
    Indicator { lo: f64, hi: f64 },
    AaExemplar,
    Identity,
    Power { exponent: f64 },
    /// Grid samples from a CSV file with header t, v1, ..., vd.
    Csv { path: String },
    Translate { of: Box<FunctionSpec>, by: f64 },
    Reflect { of: Box<FunctionSpec> },
    SignOf { of: Box<FunctionSpec> },
    Scale { of: Box<FunctionSpec>, by: f64 },
    Sum { terms: Vec<FunctionSpec> },
    Product { factor: Box<FunctionSpec>, of: Box<FunctionSpec> },
    Stack { parts: Vec<FunctionSpec> },
    Restrict { of: Box<FunctionSpec>, domain: Interval },
}

fn one() -> usize {
    1
}

impl FunctionSpec {
    pub fn build(&self) -> Result<VectorFunction> {
        use FunctionSpec as S;
        Ok(match self {
            S::Sin => VectorFunction::sin(),
            S::Cos => VectorFunction::cos(),
            S::TwoSine => VectorFunction::two_sine(),
            S::SignOfTwoSine => VectorFunction::sign_of_two_sine(),
            S::ExpDecay { rate } => VectorFunction::exp_decay(*rate),
            S::RationalDecay => VectorFunction::rational_decay(),
            S::Constant { value } => VectorFunction::constant(*value),
            S::ConstantVec { values } => VectorFunction::constant_vec(values.clone())?,
            S::Zero { dim } => VectorFunction::zero(*dim),
            S::Step { at, before, after } => VectorFunction::step(*at, *before, *after),
            S::Indicator { lo, hi } => VectorFunction::indicator(*lo, *hi),
            S::AaExemplar => VectorFunction::aa_exemplar(),
            S::Identity => VectorFunction::identity(),
            S::Power { exponent } => VectorFunction::power(*exponent),
            S::Csv { path } => VectorFunction::from_csv(path)?,
            S::Translate { of, by } => of.build()?.translate(*by),
            S::Reflect { of } => of.build()?.reflect()?,
            S::SignOf { of } => of.build()?.sign_of()?,
            S::Scale { of, by } => of.build()?.scale(*by),
            S::Sum { terms } => {
                let fs = terms.iter().map(|t| Ok((1.0, t.build()?))).collect::<Result<Vec<_>>>()?;
                VectorFunction::linear(fs)?
            }
            S::Product { factor, of } => factor.build()?.times(&of.build()?)?,
            S::Stack { parts } => VectorFunction::stack(parts.iter().map(|p| p.build()).collect::<Result<_>>()?)?,
            S::Restrict { of, domain } => of.build()?.restrict(*domain)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExponentSpec {
    Constant {
        value: f64,
        #[serde(default)]
        domain: Option<Interval>,
    },
    Infinite,
    OneMinusLog {
        #[serde(default = "unit")]
        domain: Interval,
    },
    Affine { intercept: f64, slope: f64, domain: Interval },
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        domain: Interval,
    },
    Grid {
        start: f64,
        step: f64,
        samples: Vec<f64>,
        #[serde(default)]
        infinite_set: Vec<Interval>,
    },
}

fn unit() -> Interval {
    Interval::UNIT
}

impl ExponentSpec {
    pub fn build(&self) -> Result<ExponentFunction> {
        use ExponentSpec as S;
        match self {
            S::Constant { value, domain: None } => ExponentFunction::constant(*value),
            S::Constant { value, domain: Some(d) } => ExponentFunction::constant_on(*value, *d),
            S::Infinite => Ok(ExponentFunction::infinite()),
            S::OneMinusLog { domain } => ExponentFunction::one_minus_log_on(*domain),
            S::Affine { intercept, slope, domain } => ExponentFunction::affine(*intercept, *slope, *domain),
            S::Sinusoidal {
                mean,
                amplitude,
                frequency,
                phase,
                domain,
            } => ExponentFunction::sinusoidal(*mean, *amplitude, *frequency, *phase, *domain),
            S::Grid {
                start,
                step,
                samples,
                infinite_set,
            } => ExponentFunction::grid(*start, *step, samples.clone(), infinite_set.clone()),
        }
    }
}

/// A scalar generator or the diagonal of a diagonal one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Generator {
    Scalar(f64),
    Diagonal(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindName {
    Relaxation,
    TwoParameter,
    Resolvent,
    Exponential,
    Algebraic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub a: Generator,
    pub gamma: f64,
    #[serde(default = "one_f")]
    pub beta: f64,
    pub kind: KindName,
    /// Decay power of the algebraic kernel.
    #[serde(default)]
    pub decay: Option<f64>,
}

fn one_f() -> f64 {
    1.0
}

impl KernelSpec {
    pub fn build(&self) -> Result<ResolventFamily> {
        let kind = match self.kind {
            KindName::Relaxation => FamilyKind::Relaxation,
            KindName::TwoParameter => FamilyKind::TwoParameter,
            KindName::Resolvent => FamilyKind::Resolvent,
            KindName::Exponential => FamilyKind::Exponential,
            KindName::Algebraic => FamilyKind::Algebraic {
                decay: self
                    .decay
                    .ok_or_else(|| Error::Config("kernel.decay is required for an algebraic kernel".into()))?,
            },
        };
        let generator = match &self.a {
            Generator::Scalar(a) => vec![*a],
            Generator::Diagonal(v) => v.clone(),
        };
        ResolventFamily::new(generator, self.gamma, self.beta, kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TwoParameterSpec {
    Identity {
        #[serde(default = "one")]
        dim: usize,
    },
    ScaledBy {
        s: FunctionSpec,
        #[serde(default = "one")]
        dim: usize,
    },
    ModulatedTanh { s: FunctionSpec },
    Square,
    Constant {
        values: Vec<f64>,
        #[serde(default = "one")]
        y_dim: usize,
    },
    Zero {
        #[serde(default = "one")]
        y_dim: usize,
        #[serde(default = "one")]
        out_dim: usize,
    },
    Sum { terms: Vec<TwoParameterSpec> },
}

impl TwoParameterSpec {
    pub fn build(&self) -> Result<TwoParameterFunction> {
        use TwoParameterSpec as S;
        Ok(match self {
            S::Identity { dim } => TwoParameterFunction::identity(*dim),
            S::ScaledBy { s, dim } => TwoParameterFunction::scaled_by(s.build()?, *dim),
            S::ModulatedTanh { s } => TwoParameterFunction::modulated_tanh(s.build()?),
            S::Square => TwoParameterFunction::square(),
            S::Constant { values, y_dim } => TwoParameterFunction::constant(values.clone(), *y_dim),
            S::Zero { y_dim, out_dim } => TwoParameterFunction::zero(*y_dim, *out_dim),
            S::Sum { terms } => {
                let mut it = terms.iter();
                let first = it.next().ok_or_else(|| Error::Config("empty sum of two-parameter functions".into()))?;
                it.try_fold(first.build()?, |acc, t| acc.add(&t.build()?))?
            }
        })
    }
}

/// A grid as "start:stop:step", {"start", "stop", "step"}, or an explicit
/// list of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Text(String),
    Uniform(Grid),
    Points(Vec<f64>),
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            GridSpec::Text(s) => Grid::parse(s)?.points(),
            GridSpec::Uniform(g) => Grid::new(g.start, g.stop, g.step)?.points(),
            GridSpec::Points(v) => v.clone(),
        };
        if pts.is_empty() || pts.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("grid must be a nonempty list of finite points".into()));
        }
        Ok(pts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_specs() {
        let f: FunctionSpec = serde_json::from_str(
            r#"{"name": "sum", "terms": [{"name": "sin"}, {"name": "translate", "of": {"name": "cos"}, "by": 1.0}]}"#,
        )
        .unwrap();
        let v = f.build().unwrap();
        assert!((v.scalar(0.3) - (0.3f64.sin() + 1.3f64.cos())).abs() < 1e-15);
        let p: ExponentSpec = serde_json::from_str(r#"{"name": "one-minus-log", "domain": [0, 1]}"#).unwrap();
        assert_eq!(p.build().unwrap(), ExponentFunction::one_minus_log());
        let k: KernelSpec = serde_json::from_str(r#"{"a": 1, "gamma": 0.5, "kind": "resolvent"}"#).unwrap();
        assert_eq!(k.build().unwrap().generator, vec![1.0]);
        let g: GridSpec = serde_json::from_str(r#""0:1:0.25""#).unwrap();
        assert_eq!(g.points().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn rejects_unknown_names() {
        let e = serde_json::from_str::<FunctionSpec>(r#"{"name": "tan"}"#).unwrap_err();
        assert!(e.to_string().contains("tan"));
        let k: KernelSpec = serde_json::from_str(r#"{"a": 1, "gamma": 1, "kind": "algebraic"}"#).unwrap();
        assert!(k.build().unwrap_err().is_config());
    }
}
