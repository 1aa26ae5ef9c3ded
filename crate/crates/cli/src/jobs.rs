//! JSON job configurations, one tagged enum per command. The `operation`
//! field selects the library call; each command has a default operation.

use serde::Deserialize;
use varlex::interval::Interval;
use varlex::registry::{ExponentSpec, FunctionSpec, GridSpec, KernelSpec, TwoParameterSpec};

fn unit() -> Interval {
    Interval::UNIT
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum NormJob {
    Luxemburg {
        function: FunctionSpec,
        exponent: ExponentSpec,
        #[serde(default = "unit")]
        omega: Interval,
        #[serde(default)]
        rel_tol: Option<f64>,
    },
    Holder {
        u: FunctionSpec,
        v: FunctionSpec,
        p: ExponentSpec,
        r: ExponentSpec,
        #[serde(default = "unit")]
        omega: Interval,
    },
    Embedding {
        function: FunctionSpec,
        p: ExponentSpec,
        q: ExponentSpec,
        #[serde(default = "unit")]
        omega: Interval,
    },
    HolderSuite {
        cases: usize,
    },
    EmbeddingSuite {
        cases: usize,
    },
    Convergence {
        function: FunctionSpec,
        sequence: Vec<FunctionSpec>,
        exponent: ExponentSpec,
        #[serde(default = "unit")]
        omega: Interval,
    },
    /// Values, essential bounds, conjugate and (with r) the composition
    /// exponent at the given points.
    Exponent {
        p: ExponentSpec,
        #[serde(default)]
        r: Option<ExponentSpec>,
        points: Vec<f64>,
    },
    /// Values of f, of its translate by `translate`, its reflection and
    /// its sign at the given points.
    Evaluate {
        function: FunctionSpec,
        points: Vec<f64>,
        #[serde(default)]
        translate: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModularJob {
    Modular {
        function: FunctionSpec,
        exponent: ExponentSpec,
        #[serde(default = "unit")]
        omega: Interval,
    },
    Phi {
        exponent: ExponentSpec,
        x: f64,
        t: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum StepanovJob {
    Norm {
        function: FunctionSpec,
        exponent: ExponentSpec,
        grid: GridSpec,
    },
    Window {
        function: FunctionSpec,
        exponent: ExponentSpec,
        t: f64,
    },
    C0Decay {
        function: FunctionSpec,
        exponent: ExponentSpec,
        horizon: f64,
    },
    ErgodicMean {
        function: FunctionSpec,
        r_max: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShiftRecipe {
    /// 2π times Pell denominators.
    Pell { skip: usize, count: usize },
    /// The two-zero construction for the sign of the two-sine function.
    Counterexample { count: usize },
    /// One ε-period per ε from a decreasing list.
    Epsilon {
        eps: Vec<f64>,
        tau_min: f64,
        tau_max: f64,
        #[serde(default)]
        exponent: Option<ExponentSpec>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ShiftSpec {
    List(Vec<f64>),
    Recipe(ShiftRecipe),
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum AaJob {
    Bochner {
        function: FunctionSpec,
        exponent: ExponentSpec,
        shifts: ShiftSpec,
        grid: GridSpec,
    },
    AsymptoticDecompose {
        function: FunctionSpec,
        exponent: ExponentSpec,
        candidate: FunctionSpec,
        shifts: ShiftSpec,
        grid: GridSpec,
        horizon: f64,
    },
    /// Shift-test residuals for several exponents, with no verdict.
    ExponentSweep {
        function: FunctionSpec,
        exponents: Vec<ExponentSpec>,
        shifts: ShiftSpec,
        grid: GridSpec,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApScanJob {
    pub function: FunctionSpec,
    #[serde(default)]
    pub exponent: Option<ExponentSpec>,
    pub eps: f64,
    pub interval_length: f64,
    pub horizon: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConvolveJob {
    Line {
        kernel: KernelSpec,
        function: FunctionSpec,
        exponent: ExponentSpec,
        grid: GridSpec,
        #[serde(default)]
        k: Option<usize>,
    },
    Finite {
        kernel: KernelSpec,
        function: FunctionSpec,
        grid: GridSpec,
    },
    /// Decomposition H = G + F₁ + F₂ for f = g|[0,∞) + w, optionally
    /// classified with exponents r1, r2.
    Decomposed {
        kernel: KernelSpec,
        g: FunctionSpec,
        w: FunctionSpec,
        exponent: ExponentSpec,
        grid: GridSpec,
        #[serde(default)]
        classify: Option<(ExponentSpec, ExponentSpec)>,
    },
    #[serde(rename = "m-t")]
    MtSeries {
        kernel: KernelSpec,
        exponent: ExponentSpec,
        grid: GridSpec,
        k: usize,
    },
    TailConstant {
        kernel: KernelSpec,
        exponent: ExponentSpec,
        k: usize,
    },
    Kernel {
        kernel: KernelSpec,
        points: Vec<f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveDfpJob {
    pub gamma: f64,
    pub a: varlex::registry::Generator,
    pub x0: Vec<f64>,
    pub f: FunctionSpec,
    pub grid: GridSpec,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum MlJob {
    MittagLeffler {
        alpha: f64,
        beta: f64,
        z: f64,
    },
    GKernel {
        zeta: f64,
        t: f64,
    },
    Caputo {
        function: FunctionSpec,
        gamma: f64,
        points: Vec<f64>,
    },
    Weyl {
        function: FunctionSpec,
        gamma: f64,
        points: Vec<f64>,
        truncation: f64,
    },
    DecayCheck {
        kernel: KernelSpec,
        grid: GridSpec,
    },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ComposeJob {
    Membership {
        f: TwoParameterSpec,
        u: FunctionSpec,
        p: ExponentSpec,
        r: ExponentSpec,
        shifts: ShiftSpec,
        grid: GridSpec,
    },
    Asymptotic {
        g: TwoParameterSpec,
        v: FunctionSpec,
        q_part: TwoParameterSpec,
        omega: FunctionSpec,
        p: ExponentSpec,
        r: ExponentSpec,
        shifts: ShiftSpec,
        grid: GridSpec,
        horizon: f64,
    },
    Lipschitz {
        f: TwoParameterSpec,
        r: ExponentSpec,
        grid: GridSpec,
        y_samples: Vec<Vec<f64>>,
    },
    Compose {
        f: TwoParameterSpec,
        u: FunctionSpec,
        grid: GridSpec,
    },
}
