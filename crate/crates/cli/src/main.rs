use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use varlex_cli::jobs::SolveDfpJob;
use varlex_cli::{envelope, function_arg, reproduce::reproduce, run_config, run_counterexample, run_solve_dfp, Failure, Outcome, Output};

#[derive(Parser)]
#[command(name = "varlex", version, about = "Variable-exponent norms, almost automorphy tests and fractional convolutions")]
struct Cli {
    /// Output file; `.csv` receives the CSV series, anything else the JSON report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized corpora.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Format written to stdout when there is no `--out`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Luxemburg norm, inequality checks, exponent and function queries.
    Norm(ConfigArg),
    /// Modular ρ_p(f) and φ_p.
    Modular(ConfigArg),
    /// Stepanov window norms and decay/mean tests; CSV (t, norm).
    Stepanov(ConfigArg),
    /// Bochner shift test and related almost automorphy checks.
    AaTest(ConfigArg),
    /// ε-period scan.
    ApScan(ConfigArg),
    /// Divergence of the 1 - ln x modular for the sign of the two-sine function.
    Counterexample {
        /// λ values; default is the sweep 0.5, 0.6, 0.7, 0.7358, 0.8.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long, default_value_t = 3.0)]
        b: f64,
    },
    /// Infinite and finite convolutions with resolvent kernels; CSV (t, u1..ud, tail_bound).
    Convolve(ConfigArg),
    /// Mild solution u = S x0 + R * f; CSV (t, u1..ud, tail_bound).
    SolveDfp {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Scalar generator a (the operator is -a).
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        x0: Vec<f64>,
        /// Forcing: a registry name or a JSON function spec.
        #[arg(long)]
        f: Option<String>,
        /// start:stop:step
        #[arg(long)]
        grid: Option<String>,
    },
    /// Mittag-Leffler function and fractional derivatives.
    Ml {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<f64>,
    },
    /// Composition membership tests.
    ComposeTest(ConfigArg),
    /// Canned example runs compared with their oracles.
    Reproduce { id: String },
}

#[derive(clap::Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

fn read_config(path: &Path) -> Outcome<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("config {} is not JSON: {e}", path.display())))
}

fn missing(flag: &str) -> Failure {
    Failure::Config(format!("field `{flag}`: required without --config"))
}

fn dispatch(command: &Command, seed: u64) -> Outcome<(&'static str, Output)> {
    Ok(match command {
        Command::Norm(c) => ("norm", run_config("norm", read_config(&c.config)?, seed)?),
        Command::Modular(c) => ("modular", run_config("modular", read_config(&c.config)?, seed)?),
        Command::Stepanov(c) => ("stepanov", run_config("stepanov", read_config(&c.config)?, seed)?),
        Command::AaTest(c) => ("aa-test", run_config("aa-test", read_config(&c.config)?, seed)?),
        Command::ApScan(c) => ("ap-scan", run_config("ap-scan", read_config(&c.config)?, seed)?),
        Command::Convolve(c) => ("convolve", run_config("convolve", read_config(&c.config)?, seed)?),
        Command::ComposeTest(c) => ("compose-test", run_config("compose-test", read_config(&c.config)?, seed)?),
        Command::Counterexample { lambda, a, b } => {
            let lambdas = if lambda.is_empty() {
                varlex::almost_auto::LAMBDA_SWEEP.to_vec()
            } else {
                lambda.clone()
            };
            ("counterexample", run_counterexample(&lambdas, *a, *b)?)
        }
        Command::SolveDfp {
            config: Some(path),
            ..
        } => ("solve-dfp", run_config("solve-dfp", read_config(path)?, seed)?),
        Command::SolveDfp {
            config: None,
            gamma,
            a,
            x0,
            f,
            grid,
        } => {
            let f = function_arg(f.as_deref().ok_or_else(|| missing("f"))?)?;
            let x0 = if x0.is_empty() { vec![0.0] } else { x0.clone() };
            let job = SolveDfpJob {
                gamma: gamma.ok_or_else(|| missing("gamma"))?,
                a: varlex::registry::Generator::Scalar(a.ok_or_else(|| missing("a"))?),
                x0,
                f,
                grid: varlex::registry::GridSpec::Text(grid.clone().ok_or_else(|| missing("grid"))?),
            };
            ("solve-dfp", run_solve_dfp(job)?)
        }
        Command::Ml { config: Some(path), .. } => ("ml", run_config("ml", read_config(path)?, seed)?),
        Command::Ml {
            config: None,
            alpha,
            beta,
            z,
        } => {
            let v = serde_json::json!({
                "operation": "mittag-leffler",
                "alpha": alpha.ok_or_else(|| missing("alpha"))?,
                "beta": beta.unwrap_or(1.0),
                "z": z.ok_or_else(|| missing("z"))?,
            });
            ("ml", run_config("ml", v, seed)?)
        }
        Command::Reproduce { id } => ("reproduce", reproduce(id)?),
    })
}

fn default_format(command: &str) -> Format {
    match command {
        "stepanov" | "convolve" | "solve-dfp" => Format::Csv,
        _ => Format::Json,
    }
}

fn emit(cli: &Cli, command: &str, out: &Output) -> std::io::Result<()> {
    let doc = serde_json::to_string_pretty(&envelope(command, cli.seed, out)).expect("JSON values serialize") + "\n";
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    match &cli.out {
        Some(path) if path.extension().is_some_and(|e| e == "csv") => {
            std::fs::write(path, out.csv.as_deref().unwrap_or(doc.as_bytes()))?;
            stdout.write_all(doc.as_bytes())
        }
        Some(path) => std::fs::write(path, doc.as_bytes()),
        None => {
            let fmt = cli.format.unwrap_or_else(|| default_format(command));
            match (&out.csv, fmt) {
                (Some(csv), Format::Csv) => stdout.write_all(csv),
                _ => stdout.write_all(doc.as_bytes()),
            }
        }
    }
}

fn configure_threads() -> Outcome<()> {
    if let Ok(v) = std::env::var("VARLEX_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Failure::Config(format!("VARLEX_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot configure threads: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| dispatch(&cli.command, cli.seed));
    match result {
        Ok((command, out)) => match emit(&cli, command, &out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("varlex: cannot write output: {e}");
                ExitCode::from(3)
            }
        },
        Err(e) => {
            eprintln!("varlex: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
