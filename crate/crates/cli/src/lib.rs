//! Batch front end: JSON job configs in, JSON reports and CSV series out.
//!
//! Exit status is 0 for a completed run (whatever the verdicts), 2 for a
//! malformed config and 3 for a numerical failure.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod jobs;
pub mod reproduce;

use std::fmt;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use varlex::almost_auto::{
    asymptotic_decompose, bochner_shift_test, counterexample_divergence, counterexample_shifts, epsilon_period_scan,
    epsilon_period_sequence, exponent_sweep, pell_shifts, ScanOptions,
};
use varlex::composition::{
    asymptotic_composition_test, compose, composition_membership_test, lipschitz_window_check,
};
use varlex::convolution::{
    ergodic_component_classify, finite_convolution, finite_convolution_decomposed, line_convolution, m_t_series,
    solve_dfp, tail_constant_m, ConvolutionResult,
};
use varlex::exponent::composition_exponent;
use varlex::fractional::mittag_leffler::mittag_leffler;
use varlex::fractional::{caputo_derivative, decay_check, g_kernel, weyl_derivative, FamilyKind, ResolventFamily};
use varlex::function_model::VectorFunction;
use varlex::modular_norm::{
    convergence_series, embedding_check, holder_check, luxemburg_norm_with, modular, phi_at, NormOptions,
};
use varlex::registry::{ExponentSpec, FunctionSpec, Generator};
use varlex::stepanov::{c0_decay_test, ergodic_mean_test, stepanov_norm, window_norm};

use jobs::*;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<varlex::Error> for Failure {
    fn from(e: varlex::Error) -> Self {
        match e {
            varlex::Error::Config(_) | varlex::Error::Json(_) | varlex::Error::Csv(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

/// A finished run: a JSON result plus an optional CSV series.
#[derive(Debug, Clone)]
pub struct Output {
    pub operation: String,
    pub result: Value,
    pub csv: Option<Vec<u8>>,
}

impl Output {
    fn json<T: Serialize>(operation: &str, v: &T) -> Outcome<Self> {
        Ok(Output {
            operation: operation.to_string(),
            result: to_value(v)?,
            csv: None,
        })
    }

    fn with_csv(mut self, csv: Vec<u8>) -> Self {
        self.csv = Some(csv);
        self
    }
}

fn to_value<T: Serialize>(v: &T) -> Outcome<Value> {
    serde_json::to_value(v).map_err(|e| Failure::Numerical(format!("cannot serialize result: {e}")))
}

/// The JSON document written for every command.
pub fn envelope(command: &str, seed: u64, out: &Output) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "operation": out.operation,
        "seed": seed,
        "result": out.result,
    })
}

/// Deserializes a job. For commands with operations, `{"operation": op,
/// ...}` (with `default_op` when absent) is read as the enum variant `op`.
/// Errors carry the path of the offending field.
pub fn parse_job<T: DeserializeOwned>(config: Value, default_op: Option<&str>) -> Outcome<T> {
    let (config, op) = match (default_op, config) {
        (Some(default), Value::Object(mut map)) => {
            let op = match map.remove("operation") {
                None => default.to_string(),
                Some(Value::String(s)) => s,
                Some(other) => return Err(Failure::Config(format!("field `operation`: expected a string, got {other}"))),
            };
            (json!({ op.clone(): Value::Object(map) }), Some(op))
        }
        (_, v) => (v, None),
    };
    serde_path_to_error::deserialize(config).map_err(|e| {
        let path = e.path().to_string();
        let path = match &op {
            Some(_) if path == "." => "operation".to_string(),
            Some(op) => path.strip_prefix(op.as_str()).map_or(path.clone(), |p| p.trim_start_matches('.').to_string()),
            None => path,
        };
        Failure::Config(format!("field `{path}`: {}", e.inner()))
    })
}

/// One row of the dispatch table: a command, one of its operations, and the
/// library operations it reaches.
#[derive(Debug, Clone, Copy)]
pub struct Route {
    pub command: &'static str,
    pub operation: &'static str,
    pub reaches: &'static [&'static str],
}

pub const DISPATCH: &[Route] = &[
    Route { command: "norm", operation: "luxemburg", reaches: &["luxemburg_norm"] },
    Route { command: "norm", operation: "holder", reaches: &["holder_check"] },
    Route { command: "norm", operation: "embedding", reaches: &["embedding_check"] },
    Route { command: "norm", operation: "holder-suite", reaches: &["holder_check"] },
    Route { command: "norm", operation: "embedding-suite", reaches: &["embedding_check"] },
    Route { command: "norm", operation: "convergence", reaches: &["convergence_series"] },
    Route {
        command: "norm",
        operation: "exponent",
        reaches: &["eval", "essential_bounds", "conjugate", "composition_exponent"],
    },
    Route { command: "norm", operation: "evaluate", reaches: &["evaluate", "translate", "reflect", "sign_of"] },
    Route { command: "modular", operation: "modular", reaches: &["modular"] },
    Route { command: "modular", operation: "phi", reaches: &["phi"] },
    Route { command: "stepanov", operation: "norm", reaches: &["stepanov_norm"] },
    Route { command: "stepanov", operation: "window", reaches: &["window_norm"] },
    Route { command: "stepanov", operation: "c0-decay", reaches: &["c0_decay_test"] },
    Route { command: "stepanov", operation: "ergodic-mean", reaches: &["ergodic_mean_test"] },
    Route { command: "aa-test", operation: "bochner", reaches: &["bochner_shift_test"] },
    Route { command: "aa-test", operation: "asymptotic-decompose", reaches: &["asymptotic_decompose"] },
    Route { command: "aa-test", operation: "exponent-sweep", reaches: &["bochner_shift_test"] },
    Route { command: "ap-scan", operation: "scan", reaches: &["epsilon_period_scan"] },
    Route { command: "counterexample", operation: "divergence", reaches: &["counterexample_divergence"] },
    Route { command: "convolve", operation: "line", reaches: &["line_convolution"] },
    Route { command: "convolve", operation: "finite", reaches: &["finite_convolution"] },
    Route {
        command: "convolve",
        operation: "decomposed",
        reaches: &["finite_convolution", "ergodic_component_classify"],
    },
    Route { command: "convolve", operation: "m-t", reaches: &["m_t_series"] },
    Route { command: "convolve", operation: "tail-constant", reaches: &["tail_constant_M"] },
    Route { command: "convolve", operation: "kernel", reaches: &["resolvent_eval"] },
    Route { command: "solve-dfp", operation: "solve", reaches: &["solve_dfp"] },
    Route { command: "ml", operation: "mittag-leffler", reaches: &["mittag_leffler"] },
    Route { command: "ml", operation: "g-kernel", reaches: &["g_kernel"] },
    Route { command: "ml", operation: "caputo", reaches: &["caputo_derivative"] },
    Route { command: "ml", operation: "weyl", reaches: &["weyl_derivative"] },
    Route { command: "ml", operation: "decay-check", reaches: &["decay_check"] },
    Route { command: "compose-test", operation: "membership", reaches: &["composition_membership_test"] },
    Route { command: "compose-test", operation: "asymptotic", reaches: &["asymptotic_composition_test"] },
    Route { command: "compose-test", operation: "lipschitz", reaches: &["lipschitz_window_check"] },
    Route { command: "compose-test", operation: "compose", reaches: &["compose"] },
    Route { command: "reproduce", operation: "reproduce", reaches: &["reproduce"] },
];

/// Operation used when a config has no `operation` field.
pub fn default_operation(command: &str) -> Option<&'static str> {
    Some(match command {
        "norm" => "luxemburg",
        "modular" => "modular",
        "stepanov" => "norm",
        "aa-test" => "bochner",
        "convolve" => "line",
        "ml" => "mittag-leffler",
        "compose-test" => "membership",
        _ => return None,
    })
}

/// Runs a config-driven command.
pub fn run_config(command: &str, config: Value, seed: u64) -> Outcome<Output> {
    let op = default_operation(command);
    match command {
        "norm" => run_norm(parse_job(config, op)?, seed),
        "modular" => run_modular(parse_job(config, op)?),
        "stepanov" => run_stepanov(parse_job(config, op)?),
        "aa-test" => run_aa(parse_job(config, op)?),
        "ap-scan" => run_ap_scan(parse_job(config, None)?),
        "convolve" => run_convolve(parse_job(config, op)?),
        "solve-dfp" => run_solve_dfp(parse_job(config, None)?),
        "ml" => run_ml(parse_job(config, op)?),
        "compose-test" => run_compose(parse_job(config, op)?),
        other => Err(Failure::Config(format!("command `{other}` takes no config"))),
    }
}

/// A function spec given on the command line: a bare registry name or a
/// JSON object.
pub fn function_arg(s: &str) -> Outcome<FunctionSpec> {
    let v = if s.trim_start().starts_with('{') {
        serde_json::from_str(s).map_err(|e| Failure::Config(format!("field `f`: {e}")))?
    } else {
        json!({ "name": s })
    };
    parse_job(v, None).map_err(|e| match e {
        Failure::Config(m) => Failure::Config(format!("field `f`: {m}")),
        other => other,
    })
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Outcome<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Numerical(format!("cannot write CSV: {e}"));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|v| varlex::report::ext::cell(*v))).map_err(io)?;
    }
    w.into_inner().map_err(|e| Failure::Numerical(format!("cannot write CSV: {e}")))
}

fn convolution_output(operation: &str, r: &ConvolutionResult) -> Outcome<Output> {
    let mut buf = Vec::new();
    r.write_csv(&mut buf)?;
    Ok(Output::json(operation, r)?.with_csv(buf))
}

fn run_norm(job: NormJob, seed: u64) -> Outcome<Output> {
    match job {
        NormJob::Luxemburg {
            function,
            exponent,
            omega,
            rel_tol,
        } => {
            let mut opts = NormOptions::default();
            if let Some(t) = rel_tol {
                if !(t > 0.0) {
                    return Err(Failure::Config("field `rel_tol`: must be positive".into()));
                }
                opts.rel_tol = t;
            }
            let r = luxemburg_norm_with(&function.build()?, &exponent.build()?, omega, &opts)?;
            Output::json("luxemburg", &r)
        }
        NormJob::Holder { u, v, p, r, omega } => Output::json(
            "holder",
            &holder_check(&u.build()?, &v.build()?, &p.build()?, &r.build()?, omega)?,
        ),
        NormJob::Embedding { function, p, q, omega } => Output::json(
            "embedding",
            &embedding_check(&function.build()?, &p.build()?, &q.build()?, omega)?,
        ),
        NormJob::HolderSuite { cases } => Output::json("holder-suite", &varlex::corpus::holder_suite(seed, cases)?),
        NormJob::EmbeddingSuite { cases } => {
            Output::json("embedding-suite", &varlex::corpus::embedding_suite(seed, cases)?)
        }
        NormJob::Convergence {
            function,
            sequence,
            exponent,
            omega,
        } => {
            let seq = sequence.iter().map(|s| s.build()).collect::<varlex::Result<Vec<_>>>()?;
            let d = convergence_series(&function.build()?, &seq, &exponent.build()?, omega)?;
            Output::json("convergence", &json!({ "distances": d }))
        }
        NormJob::Exponent { p, r, points } => {
            let p = p.build()?;
            let values = points.iter().map(|x| p.eval(*x)).collect::<varlex::Result<Vec<_>>>()?;
            let conj = p.conjugate();
            let conjugate = points.iter().map(|x| conj.value(*x)).collect::<Vec<_>>();
            let composed = match r {
                Some(r) => {
                    let q = composition_exponent(&p, &r.build()?)?;
                    Some(points.iter().map(|x| q.value(*x)).collect::<Vec<_>>())
                }
                None => None,
            };
            let (lo, hi) = p.essential_bounds();
            Output::json(
                "exponent",
                &json!({
                    "exponent": p.describe(),
                    "points": points,
                    "values": ext_vec(&values),
                    "essential_bounds": ext_vec(&[lo, hi]),
                    "conjugate": ext_vec(&conjugate),
                    "composition_exponent": composed.map(|v| ext_vec(&v)),
                }),
            )
        }
        NormJob::Evaluate {
            function,
            points,
            translate,
        } => {
            let f = function.build()?;
            let shifted = f.translate(translate);
            let reflected = f.reflect().ok();
            let sign = f.sign_of().ok();
            let mut rows = Vec::new();
            for t in &points {
                rows.push(json!({
                    "t": t,
                    "value": f.evaluate(*t)?.to_vec(),
                    "translated": shifted.evaluate(*t).ok().map(|v| v.to_vec()),
                    "reflected": reflected.as_ref().and_then(|g| g.evaluate(*t).ok()).map(|v| v.to_vec()),
                    "sign": sign.as_ref().and_then(|g| g.evaluate(*t).ok()).map(|v| v.to_vec()),
                }));
            }
            Output::json("evaluate", &json!({ "function": f.describe(), "translate": translate, "rows": rows }))
        }
    }
}

/// Non-finite values as the strings "inf", "-inf", "nan".
fn ext_vec(v: &[f64]) -> Vec<Value> {
    v.iter()
        .map(|x| {
            if x.is_finite() {
                json!(x)
            } else {
                json!(varlex::report::ext::label(*x))
            }
        })
        .collect()
}

fn run_modular(job: ModularJob) -> Outcome<Output> {
    match job {
        ModularJob::Modular {
            function,
            exponent,
            omega,
        } => Output::json("modular", &modular(&function.build()?, &exponent.build()?, omega)?),
        ModularJob::Phi { exponent, x, t } => {
            let v = phi_at(&exponent.build()?, x, t)?;
            Output::json("phi", &json!({ "value": ext_vec(&[v])[0] }))
        }
    }
}

fn run_stepanov(job: StepanovJob) -> Outcome<Output> {
    match job {
        StepanovJob::Norm {
            function,
            exponent,
            grid,
        } => {
            let s = stepanov_norm(&function.build()?, &exponent.build()?, &grid.points()?)?;
            let csv = csv_rows(&["t", "norm"], s.base_points.iter().zip(&s.values).map(|(t, v)| vec![*t, *v]))?;
            Ok(Output::json("norm", &s)?.with_csv(csv))
        }
        StepanovJob::Window { function, exponent, t } => {
            let v = window_norm(&function.build()?, &exponent.build()?, t)?;
            Output::json("window", &json!({ "t": t, "value": ext_vec(&[v])[0] }))
        }
        StepanovJob::C0Decay {
            function,
            exponent,
            horizon,
        } => Output::json("c0-decay", &c0_decay_test(&function.build()?, &exponent.build()?, horizon)?),
        StepanovJob::ErgodicMean { function, r_max } => {
            Output::json("ergodic-mean", &ergodic_mean_test(&function.build()?, r_max)?)
        }
    }
}

fn shifts_for(spec: &ShiftSpec, f: &VectorFunction) -> Outcome<Vec<f64>> {
    Ok(match spec {
        ShiftSpec::List(v) => v.clone(),
        ShiftSpec::Recipe(ShiftRecipe::Pell { skip, count }) => pell_shifts(*skip, *count),
        ShiftSpec::Recipe(ShiftRecipe::Counterexample { count }) => counterexample_shifts(*count),
        ShiftSpec::Recipe(ShiftRecipe::Epsilon {
            eps,
            tau_min,
            tau_max,
            exponent,
        }) => {
            let p = exponent.as_ref().map(ExponentSpec::build).transpose()?;
            epsilon_period_sequence(f, p.as_ref(), eps, *tau_min, *tau_max, &ScanOptions::default())?
        }
    })
}

fn run_aa(job: AaJob) -> Outcome<Output> {
    match job {
        AaJob::Bochner {
            function,
            exponent,
            shifts,
            grid,
        } => {
            let f = function.build()?;
            let s = shifts_for(&shifts, &f)?;
            Output::json("bochner", &bochner_shift_test(&f, &exponent.build()?, &s, &grid.points()?)?)
        }
        AaJob::AsymptoticDecompose {
            function,
            exponent,
            candidate,
            shifts,
            grid,
            horizon,
        } => {
            let g = candidate.build()?;
            let s = shifts_for(&shifts, &g)?;
            let r = asymptotic_decompose(&function.build()?, &exponent.build()?, &g, &s, &grid.points()?, horizon)?;
            Output::json("asymptotic-decompose", &r)
        }
        AaJob::ExponentSweep {
            function,
            exponents,
            shifts,
            grid,
        } => {
            let f = function.build()?;
            let s = shifts_for(&shifts, &f)?;
            let ps = exponents.iter().map(ExponentSpec::build).collect::<varlex::Result<Vec<_>>>()?;
            let rows: Vec<Value> = exponent_sweep(&f, &ps, &s, &grid.points()?)?
                .into_iter()
                .map(|(p, res)| json!({ "exponent": p, "tail_residual": ext_vec(&[res])[0] }))
                .collect();
            Output::json("exponent-sweep", &json!({ "rows": rows, "verdict": null }))
        }
    }
}

fn run_ap_scan(job: ApScanJob) -> Outcome<Output> {
    let p = job.exponent.as_ref().map(ExponentSpec::build).transpose()?;
    let r = epsilon_period_scan(&job.function.build()?, p.as_ref(), job.eps, job.interval_length, job.horizon)?;
    Output::json("scan", &r)
}

/// The counterexample modular for each λ, with the refinement traces.
pub fn run_counterexample(lambdas: &[f64], a: f64, b: f64) -> Outcome<Output> {
    let mut cases = Vec::new();
    let mut trace = Vec::new();
    for &lambda in lambdas {
        let r = counterexample_divergence(lambda, a, b)?;
        for (level, v) in &r.refinement_trace {
            trace.push(vec![lambda, *level as f64, *v]);
        }
        cases.push(json!({
            "lambda": lambda,
            "verdict": if r.divergent { "divergent" } else { "convergent" },
            "modular": r,
        }));
    }
    let csv = csv_rows(&["lambda", "level", "value"], trace)?;
    let result = json!({
        "a": a,
        "b": b,
        "threshold": 2.0 / std::f64::consts::E,
        "cases": cases,
    });
    Ok(Output {
        operation: "divergence".into(),
        result,
        csv: Some(csv),
    })
}

fn kernel(spec: &varlex::registry::KernelSpec) -> Outcome<ResolventFamily> {
    Ok(spec.build()?)
}

fn run_convolve(job: ConvolveJob) -> Outcome<Output> {
    match job {
        ConvolveJob::Line {
            kernel: k,
            function,
            exponent,
            grid,
            k: truncation,
        } => {
            let r = line_convolution(&kernel(&k)?, &function.build()?, &exponent.build()?, &grid.points()?, truncation)?;
            convolution_output("line", &r)
        }
        ConvolveJob::Finite {
            kernel: k,
            function,
            grid,
        } => convolution_output("finite", &finite_convolution(&kernel(&k)?, &function.build()?, &grid.points()?)?),
        ConvolveJob::Decomposed {
            kernel: k,
            g,
            w,
            exponent,
            grid,
            classify,
        } => {
            let r = finite_convolution_decomposed(&kernel(&k)?, &g.build()?, &w.build()?, &exponent.build()?, &grid.points()?)?;
            let mut out = convolution_output("decomposed", &r)?;
            if let Some((r1, r2)) = classify {
                let c = ergodic_component_classify(&r, &r1.build()?, &r2.build()?)?;
                out.result = json!({ "convolution": out.result, "classification": to_value(&c)? });
            }
            Ok(out)
        }
        ConvolveJob::MtSeries {
            kernel: k,
            exponent,
            grid,
            k: terms,
        } => {
            let s = m_t_series(&kernel(&k)?, &exponent.build()?, &grid.points()?, terms)?;
            let csv = csv_rows(
                &["t", "partial", "lower", "upper"],
                s.points.iter().map(|p| vec![p.t, p.partial, p.lower, p.upper]),
            )?;
            Ok(Output::json("m-t", &s)?.with_csv(csv))
        }
        ConvolveJob::TailConstant {
            kernel: k,
            exponent,
            k: terms,
        } => {
            let (partial, remainder) = tail_constant_m(&kernel(&k)?, &exponent.build()?, terms)?;
            Output::json(
                "tail-constant",
                &json!({ "partial": partial, "remainder_bound": ext_vec(&[remainder])[0], "k": terms }),
            )
        }
        ConvolveJob::Kernel { kernel: k, points } => {
            let rf = kernel(&k)?;
            let values = points.iter().map(|t| rf.eval(*t)).collect::<varlex::Result<Vec<_>>>()?;
            let csv = csv_rows(
                &["t", "value"],
                points.iter().zip(&values).map(|(t, v)| vec![*t, v[0]]),
            )?;
            Ok(Output::json("kernel", &json!({ "kernel": rf, "points": points, "values": values }))?.with_csv(csv))
        }
    }
}

/// u(t) = S(t)x₀ + ∫₀ᵗ R(t − s)f(s) ds for the scalar or diagonal generator.
pub fn run_solve_dfp(job: SolveDfpJob) -> Outcome<Output> {
    let generator = match job.a {
        Generator::Scalar(a) => vec![a],
        Generator::Diagonal(v) => v,
    };
    let rf = ResolventFamily::new(generator, job.gamma, 1.0, FamilyKind::Relaxation)?;
    let r = solve_dfp(&rf, &job.x0, &job.f.build()?, &job.grid.points()?)?;
    convolution_output("solve", &r)
}

fn run_ml(job: MlJob) -> Outcome<Output> {
    match job {
        MlJob::MittagLeffler { alpha, beta, z } => Output::json("mittag-leffler", &mittag_leffler(alpha, beta, z)?),
        MlJob::GKernel { zeta, t } => Output::json("g-kernel", &json!({ "value": g_kernel(zeta, t)? })),
        MlJob::Caputo {
            function,
            gamma,
            points,
        } => {
            let f = function.build()?;
            let d = points
                .iter()
                .map(|t| caputo_derivative(&f, gamma, *t))
                .collect::<varlex::Result<Vec<_>>>()?;
            Output::json("caputo", &json!({ "points": points, "derivatives": to_value(&d)? }))
        }
        MlJob::Weyl {
            function,
            gamma,
            points,
            truncation,
        } => {
            let f = function.build()?;
            let d = points
                .iter()
                .map(|t| weyl_derivative(&f, gamma, *t, truncation))
                .collect::<varlex::Result<Vec<_>>>()?;
            Output::json("weyl", &json!({ "points": points, "derivatives": to_value(&d)? }))
        }
        MlJob::DecayCheck { kernel: k, grid } => Output::json("decay-check", &decay_check(&kernel(&k)?, &grid.points()?)?),
    }
}

fn run_compose(job: ComposeJob) -> Outcome<Output> {
    match job {
        ComposeJob::Membership {
            f,
            u,
            p,
            r,
            shifts,
            grid,
        } => {
            let u = u.build()?;
            let s = shifts_for(&shifts, &u)?;
            let rep = composition_membership_test(&f.build()?, &u, &p.build()?, &r.build()?, &s, &grid.points()?)?;
            Output::json("membership", &rep)
        }
        ComposeJob::Asymptotic {
            g,
            v,
            q_part,
            omega,
            p,
            r,
            shifts,
            grid,
            horizon,
        } => {
            let v = v.build()?;
            let s = shifts_for(&shifts, &v)?;
            let rep = asymptotic_composition_test(
                &g.build()?,
                &v,
                &q_part.build()?,
                &omega.build()?,
                &p.build()?,
                &r.build()?,
                &s,
                &grid.points()?,
                horizon,
            )?;
            Output::json("asymptotic", &rep)
        }
        ComposeJob::Lipschitz {
            f,
            r,
            grid,
            y_samples,
        } => Output::json(
            "lipschitz",
            &lipschitz_window_check(&f.build()?, &r.build()?, &grid.points()?, &y_samples)?,
        ),
        ComposeJob::Compose { f, u, grid } => {
            let pts = grid.points()?;
            let c = compose(&f.build()?, &u.build()?, &pts)?;
            let rows: Vec<Vec<f64>> = pts
                .iter()
                .map(|t| {
                    let mut row = vec![*t];
                    row.extend(c.evaluate(*t).map(|v| v.to_vec()).unwrap_or_default());
                    row
                })
                .collect();
            let values: Vec<Vec<f64>> = rows.iter().map(|r| r[1..].to_vec()).collect();
            let mut header = vec!["t".to_string()];
            header.extend((1..=c.dim()).map(|i| format!("v{i}")));
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            let csv = csv_rows(&h, rows)?;
            Ok(Output::json("compose", &json!({ "composed": c.describe(), "t_grid": pts, "values": values }))?
                .with_csv(csv))
        }
    }
}
