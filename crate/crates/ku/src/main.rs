#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use ku::experiments::{self, CustomProblem, Fig3Variant, Settings};
use ku::mm;
use ku::plans::{parse_function, PlanError, PoleSpec};
use ku_core::bounds::DEFAULT_ETA_SAMPLES;
use ku_core::{DenseMatrix, SylvesterProblem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Experiment {
    #[value(name = "fig1-invsqrt-single-pole")]
    Fig1,
    #[value(name = "fig2-invsqrt-quasiopt")]
    Fig2,
    #[value(name = "fig3-sign")]
    Fig3,
    Custom,
    Sylvester,
}

impl Experiment {
    fn default_m_max(self) -> usize {
        match self {
            Experiment::Fig1 => 200,
            Experiment::Fig2 => 80,
            Experiment::Fig3 | Experiment::Custom | Experiment::Sylvester => 100,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Experiment::Fig1 => "fig1-invsqrt-single-pole",
            Experiment::Fig2 => "fig2-invsqrt-quasiopt",
            Experiment::Fig3 => "fig3-sign",
            Experiment::Custom => "custom",
            Experiment::Sylvester => "sylvester",
        }
    }
}

/// Low-rank matrix function updates by rational Krylov projection.
#[derive(Debug, Parser)]
#[command(name = "ku", version)]
struct Cli {
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// Size of synthetic instances.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Absolute stopping tolerance; 0 runs to --m-max.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    /// Defaults: 200 (fig1), 80 (fig2), 100 otherwise.
    #[arg(long)]
    m_max: Option<usize>,
    /// Lag of the difference estimator.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Pole file or strategy: inf, single, quasi:<m>, zolo-sign:<deg>,
    /// zolo-invsqrt:<deg>, exp:<m>, extended.
    #[arg(long)]
    poles: Option<String>,
    /// exp, invsqrt, sqrt, log1p-over-z, inv-power:<g>, sign, inverse.
    #[arg(long)]
    function: Option<String>,
    /// A (custom) or A1 (sylvester).
    #[arg(long)]
    matrix_a: Option<PathBuf>,
    /// B (custom) or B1 (sylvester).
    #[arg(long)]
    matrix_b: Option<PathBuf>,
    /// C (custom) or C2 (sylvester).
    #[arg(long)]
    matrix_c: Option<PathBuf>,
    /// Hermitian J of the update B J B^* (custom; identity when omitted).
    #[arg(long)]
    matrix_j: Option<PathBuf>,
    /// A2 (sylvester).
    #[arg(long)]
    matrix_a2: Option<PathBuf>,
    /// CSV path; fig3 appends `_<variant>` to the stem.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Samples used when maximizing Blaschke products.
    #[arg(long, env = "KU_NUM_SAMPLES_ETA", hide = true)]
    eta_samples: Option<usize>,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

const CONFIG: u8 = 2;
const FILE: u8 = 3;
const NUMERIC: u8 = 4;

trait Classify<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code,
            error: e.into(),
        })
    }
}

fn config_error<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure {
        code: CONFIG,
        error: anyhow::anyhow!(msg.into()),
    })
}

fn plan_code(e: &PlanError) -> u8 {
    match e {
        PlanError::Io { .. } | PlanError::Parse { .. } => FILE,
        PlanError::Core(_) => NUMERIC,
        _ => CONFIG,
    }
}

fn read_matrix(path: &Option<PathBuf>, flag: &str) -> Result<DenseMatrix, Failure> {
    match path {
        Some(p) => mm::read(p)
            .with_context(|| format!("reading {flag}"))
            .code(FILE),
        None => config_error(format!("{flag} is required")),
    }
}

fn read_optional(path: &Option<PathBuf>, flag: &str) -> Result<Option<DenseMatrix>, Failure> {
    path.as_ref().map(|_| read_matrix(path, flag)).transpose()
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .code(FILE)
}

/// `dir/stem<suffix>.ext`
fn sibling(out: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn run(cli: &Cli) -> Result<Vec<String>, Failure> {
    if cli.d == 0 {
        return config_error("--d must be at least 1");
    }
    if !(cli.tol >= 0.0) {
        return config_error("--tol must be non-negative");
    }
    let settings = Settings {
        n: cli.n,
        seed: cli.seed,
        m_max: cli.m_max.unwrap_or(cli.experiment.default_m_max()),
        tol: cli.tol,
        d: cli.d,
        eta_samples: cli.eta_samples.unwrap_or(DEFAULT_ETA_SAMPLES),
    };
    if settings.m_max < settings.d {
        return config_error("--m-max must be at least --d");
    }
    if settings.eta_samples == 0 {
        return config_error("KU_NUM_SAMPLES_ETA must be positive");
    }
    let synthetic = matches!(
        cli.experiment,
        Experiment::Fig1 | Experiment::Fig2 | Experiment::Fig3
    );
    if synthetic && settings.n < 2 {
        return config_error("--n must be at least 2");
    }
    if synthetic && (cli.poles.is_some() || cli.function.is_some()) {
        eprintln!(
            "note: {} uses its own poles and function; --poles/--function ignored",
            cli.experiment.name()
        );
    }
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", cli.experiment.name())));
    let spec: PoleSpec = cli.poles.as_deref().unwrap_or("inf").parse().code(CONFIG)?;

    let summaries = match cli.experiment {
        Experiment::Fig1 => {
            let r = experiments::fig1(&settings).code(NUMERIC)?;
            eprintln!(
                "predicted_rate={:.4} fitted_rate={} departure={}",
                r.predicted_rate,
                r.fitted_rate.map_or("none".into(), |v| format!("{v:.4}")),
                r.departure.map_or("none".into(), |v| v.to_string())
            );
            write_file(&out, &r.run.to_csv())?;
            vec![r.run.summary.to_string()]
        }
        Experiment::Fig2 => {
            let r = experiments::fig2(&settings).code(NUMERIC)?;
            if let Some(c) = r.cycle_check(1e-10) {
                eprintln!(
                    "cycles={} measured_factor={:.3e} predicted_factor={:.3e}",
                    c.cycles, c.measured, c.predicted
                );
            }
            write_file(&out, &r.run.to_csv())?;
            vec![r.run.summary.to_string()]
        }
        Experiment::Fig3 => {
            let mut lines = Vec::new();
            for variant in Fig3Variant::ALL {
                let label = variant.label();
                let r = experiments::fig3(&settings, variant).code(NUMERIC)?;
                write_file(&sibling(&out, &format!("_{label}"), "csv"), &r.to_csv())?;
                lines.push(format!("{} variant={label}", r.summary));
            }
            lines
        }
        Experiment::Custom => {
            let a = read_matrix(&cli.matrix_a, "--matrix-a")?;
            let b = read_matrix(&cli.matrix_b, "--matrix-b")?;
            let c = read_optional(&cli.matrix_c, "--matrix-c")?;
            let j = read_optional(&cli.matrix_j, "--matrix-j")?;
            let f = parse_function(cli.function.as_deref().unwrap_or("invsqrt")).code(CONFIG)?;
            let problem = CustomProblem::new(a, b, c, j, f).code(CONFIG)?;
            let plan = spec.resolve(&problem.plan_context()).map_err(|e| Failure {
                code: plan_code(&e),
                error: e.into(),
            })?;
            let r = experiments::custom(&problem, &plan, &settings).code(NUMERIC)?;
            write_file(&out, &r.to_csv())?;
            vec![r.summary.to_string()]
        }
        Experiment::Sylvester => {
            let a1 = read_matrix(&cli.matrix_a, "--matrix-a")?;
            let a2 = read_matrix(&cli.matrix_a2, "--matrix-a2")?;
            let b1 = read_matrix(&cli.matrix_b, "--matrix-b")?;
            let c2 = read_matrix(&cli.matrix_c, "--matrix-c")?;
            let problem = SylvesterProblem::new(a1, a2, b1, c2).code(CONFIG)?;
            let plan = spec.resolve(&Default::default()).map_err(|e| Failure {
                code: plan_code(&e),
                error: e.into(),
            })?;
            let (sol, report) = experiments::sylvester(&problem, &plan, &settings).code(NUMERIC)?;
            mm::write(&sibling(&out, "_left", "mtx"), &sol.left).code(FILE)?;
            mm::write(&sibling(&out, "_right", "mtx"), &sol.right).code(FILE)?;
            write_file(&out, &experiments::sylvester_csv(&report))?;
            vec![experiments::sylvester_summary(&report).to_string()]
        }
    };
    Ok(summaries)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
