//! `gensic`: construct IC measurements, classify them, evaluate scaled MSE
//! formulas, simulate tomography and audit the balancedness criteria.
//!
//! Exit codes: 0 success, 1 statistical soft failure, 2 usage error,
//! 3 invalid input, 4 audit verdicts inconsistent.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gensic::io::{read_fiducial, read_povm, read_state, write_povm};
use gensic::lie::{antisymmetry_audit_with, antisymmetry_violation_with, structure_constants};
use gensic::measurements::{
    cube_qubit, depolarize_to_purity, generalized_sic_depolarized, generalized_sic_simplex,
    mub_complete, purity_report, random_minimal_ic, sic_rank_one,
};
use gensic::sim::{haar_state, run, Experiment, PurityClass, Reconstruction, SweepRow};
use gensic::tomo::{
    average_scaled_mse, balance_audit_with, bound_audit_with, canonical_reconstruction,
    classify_with, optimal_mse, scaled_mse, ClassifyOptions, TomoDiagnostics,
};
use gensic::{tol, DensityState, Error, Povm};

#[derive(Parser)]
#[command(
    name = "gensic",
    version,
    about = "Informationally complete measurements and tomographic efficiency"
)]
struct Cli {
    /// Verdict threshold for classification and audits. Defaults to
    /// $GENSIC_TOLERANCE, then 1e-8.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a measurement and write it as JSON.
    Construct(ConstructArgs),
    /// Classify a measurement: IC, tight IC, quasi-balanced, balanced, generalized SIC.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the scaled MSE formulas at a state.
    Mse {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        state: StateArgs,
    },
    /// Monte Carlo tomography against the analytic scaled MSE.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        shots: ShotArgs,
        /// Use the state-dependent optimal reconstruction operators.
        #[arg(long)]
        optimal: bool,
        /// Emit a CSV row instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Simulate over a parameter grid and emit CSV.
    Sweep(SweepArgs),
    /// Structure constants of the outcomes and their antisymmetry.
    LieCheck {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also write the full tensor as JSON.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Run a consistency audit; exit 0 iff the verdicts agree.
    Audit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        theorem: AuditKind,
        /// State purity tr(ρ²) used by the average-MSE bound.
        #[arg(long, default_value_t = 1.0)]
        purity: f64,
    },
}

/// `1`, `2` and `4` are accepted as short names.
#[derive(Clone, Copy, ValueEnum)]
enum AuditKind {
    /// Average-MSE lower bound, saturated iff tight IC.
    #[value(alias = "1")]
    MseBound,
    /// Balanced iff generalized SIC, for minimal IC measurements.
    #[value(alias = "2")]
    Balanced,
    /// Antisymmetric structure constants iff generalized SIC.
    #[value(alias = "4")]
    Antisymmetry,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Sic,
    GenSicDepol,
    GenSicSimplex,
    Mub,
    Cube,
    Random,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    dim: Option<usize>,
    /// Depolarization strength for gen-sic-depol, in (0, 1].
    #[arg(long)]
    x: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fiducial ket JSON for sic in dimensions without a built-in fiducial.
    #[arg(long)]
    fiducial: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StateKind {
    Pure,
    Mixed,
    File,
}

#[derive(Args)]
struct StateArgs {
    /// pure: Haar-random pure state from --state-seed; mixed: 1/d; file: --state-file.
    #[arg(long, value_enum, default_value = "pure")]
    state: StateKind,
    #[arg(long)]
    state_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    state_seed: u64,
}

#[derive(Args)]
struct ShotArgs {
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepFamily {
    /// Depolarized SIC, grid over x.
    GenSicDepol,
    /// Random minimal IC depolarized to a target purity, grid over the purity.
    Random,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    family: SweepFamily,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long, default_value_t = 5)]
    steps: usize,
    /// Seed of the random measurement (random family only).
    #[arg(long, default_value_t = 0)]
    povm_seed: u64,
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    shots: ShotArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnsupportedDimension { .. } | Error::InvalidParameter(_) => {
                Failure::Usage(e.to_string())
            }
            Error::Json(_) | Error::Format(_) | Error::Io(_) => Failure::Usage(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        if let csv::ErrorKind::Io(io) = e.kind() {
            exit_if_closed(io);
        }
        Failure::Invalid(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        exit_if_closed(&e);
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<ExitCode, Failure>;

/// `println!` that exits quietly once the reader of stdout has gone away.
macro_rules! out {
    ($($arg:tt)*) => {
        if let Err(e) = writeln!(std::io::stdout(), $($arg)*) {
            exit_if_closed(&e);
            panic!("failed writing to stdout: {e}");
        }
    };
}

fn exit_if_closed(e: &std::io::Error) {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        std::process::exit(0);
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threshold = match resolve_threshold(cli.tolerance) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let opts = ClassifyOptions {
        threshold,
        ..ClassifyOptions::default()
    };
    let result = match cli.command {
        Command::Construct(args) => construct(&args),
        Command::Classify { input, json } => classify_cmd(&input, json, &opts),
        Command::Mse { input, state } => mse_cmd(&input, &state),
        Command::Simulate {
            input,
            state,
            shots,
            optimal,
            csv,
        } => simulate_cmd(&input, &state, &shots, optimal, csv),
        Command::Sweep(args) => sweep_cmd(&args),
        Command::LieCheck { input, export } => lie_cmd(&input, export.as_deref(), threshold),
        Command::Audit {
            input,
            theorem,
            purity,
        } => audit_cmd(&input, theorem, purity, &opts),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn resolve_threshold(flag: Option<f64>) -> Result<f64, String> {
    let value = match flag {
        Some(v) => v,
        None => match std::env::var(tol::VERDICT_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| format!("{} is not a number: {s:?}", tol::VERDICT_ENV))?,
            Err(_) => tol::VERDICT,
        },
    };
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(format!("tolerance must be positive, got {value}"))
    }
}

/// Shortest decimal that survives a 12-digit round trip, e.g. `0.625`.
fn trimmed(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    out!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn load_valid(path: &Path) -> Result<Povm, Failure> {
    let p = read_povm(path)?;
    p.ensure_valid()
        .map_err(|e| Failure::Invalid(e.to_string()))?;
    Ok(p)
}

fn require<T>(value: Option<T>, flag: &str, family: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("--{flag} is required for family {family}")))
}

fn construct(args: &ConstructArgs) -> Outcome {
    let dim = |name| require(args.dim, "dim", name);
    let p = match args.family {
        Family::Sic => {
            let fid = args.fiducial.as_deref().map(read_fiducial).transpose()?;
            let d = match (&fid, args.dim) {
                (Some(f), _) => f.len(),
                (None, d) => require(d, "dim", "sic")?,
            };
            sic_rank_one(d, fid.as_ref())?
        }
        Family::GenSicDepol => {
            let d = dim("gen-sic-depol")?;
            let x = require(args.x, "x", "gen-sic-depol")?;
            generalized_sic_depolarized(&sic_rank_one(d, None)?, x)?
        }
        Family::GenSicSimplex => generalized_sic_simplex(dim("gen-sic-simplex")?, args.seed)?,
        Family::Mub => mub_complete(dim("mub")?)?,
        Family::Cube => {
            if args.dim.is_some_and(|d| d != 2) {
                return Err(Failure::Usage(
                    "the cube measurement is defined for d = 2 only".into(),
                ));
            }
            cube_qubit()
        }
        Family::Random => random_minimal_ic(dim("random")?, args.seed)?,
    };
    let report = p.ensure_valid()?;
    write_povm(&args.out, &p)?;
    let purity = purity_report(&p, None)?;
    out!(
        "wrote {}: {} outcomes in dimension {} ({})",
        args.out.display(),
        p.len(),
        p.dim(),
        p.label()
    );
    out!(
        "completeness deviation {:.2e}",
        report.completeness_deviation
    );
    out!("average purity {}", trimmed(purity.average_purity));
    let per: Vec<String> = purity
        .per_outcome_purity
        .iter()
        .map(|x| trimmed(*x))
        .collect();
    out!("outcome purities {}", per.join(" "));
    Ok(ExitCode::SUCCESS)
}

fn print_diagnostics(diag: &TomoDiagnostics) {
    let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
    let res = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.2e}"));
    let r = &diag.residuals;
    out!("dimension            {}", diag.dim);
    out!("outcomes             {}", diag.outcomes);
    out!("average purity       {}", trimmed(diag.average_purity));
    out!(
        "ic                   {} (frame condition {:.2e})",
        diag.is_ic,
        r.frame_condition
    );
    out!("minimal              {}", diag.is_minimal);
    out!(
        "tight_ic             {} (residual {})",
        diag.is_tight_ic,
        res(r.tight_ic)
    );
    out!(
        "  alpha, beta        {}, {}",
        opt(diag.tight_alpha),
        opt(diag.tight_beta)
    );
    out!(
        "quasi_balanced       {} ({:?}, spread {})",
        diag.is_quasi_balanced,
        diag.quasi_balance_method,
        res(r.quasi_balance)
    );
    out!("balanced             {}", diag.is_balanced);
    out!(
        "generalized_sic      {} (residual {})",
        diag.is_generalized_sic,
        res(r.generalized_sic)
    );
    out!("implications_hold    {}", diag.implications_hold);
}

fn classify_cmd(input: &Path, json: bool, opts: &ClassifyOptions) -> Outcome {
    let p = load_valid(input)?;
    let diag = classify_with(&p, opts)?;
    if json {
        print_json(&diag)?;
    } else {
        print_diagnostics(&diag);
    }
    Ok(ExitCode::SUCCESS)
}

fn resolve_state(args: &StateArgs, d: usize) -> Result<DensityState, Failure> {
    let rho = match args.state {
        StateKind::Pure => haar_state(d, &PurityClass::Pure, args.state_seed)?,
        StateKind::Mixed => DensityState::maximally_mixed(d),
        StateKind::File => {
            let path = args
                .state_file
                .as_deref()
                .ok_or_else(|| Failure::Usage("--state file needs --state-file".into()))?;
            read_state(path)?
        }
    };
    if rho.dim() != d {
        return Err(Failure::Invalid(format!(
            "state has dimension {}, measurement has {d}",
            rho.dim()
        )));
    }
    Ok(rho)
}

#[derive(Serialize)]
struct MseReport {
    state_purity: f64,
    scaled_mse: f64,
    orbit_average_scaled_mse: f64,
    optimal_scaled_mse: Option<f64>,
}

fn mse_cmd(input: &Path, state: &StateArgs) -> Outcome {
    let p = load_valid(input)?;
    let rho = resolve_state(state, p.dim())?;
    let theta = canonical_reconstruction(&p)?;
    let report = MseReport {
        state_purity: rho.purity(),
        scaled_mse: scaled_mse(&p, &theta, &rho)?.value,
        orbit_average_scaled_mse: average_scaled_mse(&p, &theta, rho.purity())?,
        // Undefined when some outcome has zero probability.
        optimal_scaled_mse: optimal_mse(&p, &rho).ok().map(|m| m.value),
    };
    print_json(&report)?;
    Ok(ExitCode::SUCCESS)
}

fn experiment(
    p: Povm,
    rho: DensityState,
    shots: &ShotArgs,
    optimal: bool,
) -> Result<Experiment, Failure> {
    let e = Experiment::new(p, rho, shots.shots, shots.reps, shots.seed)?;
    Ok(if optimal {
        e.with_reconstruction(Reconstruction::Optimal)
    } else {
        e
    })
}

fn simulate_cmd(
    input: &Path,
    state: &StateArgs,
    shots: &ShotArgs,
    optimal: bool,
    csv: bool,
) -> Outcome {
    let p = load_valid(input)?;
    let rho = resolve_state(state, p.dim())?;
    let result = run(&experiment(p, rho, shots, optimal)?)?;
    if csv {
        let mut w = csv::Writer::from_writer(std::io::stdout());
        w.serialize(SweepRow::from(&result))?;
        w.flush()?;
    } else {
        print_json(&result)?;
    }
    if !result.within_3_sigma {
        eprintln!(
            "empirical {:.4} ± {:.4} is {:.1} standard errors from analytic {:.4}",
            result.empirical_scaled_mse,
            result.standard_error,
            result.z_score,
            result.analytic_scaled_mse
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep_cmd(args: &SweepArgs) -> Outcome {
    if args.steps == 0 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    let grid: Vec<f64> = if args.steps == 1 {
        vec![args.from]
    } else {
        (0..args.steps)
            .map(|i| args.from + (args.to - args.from) * i as f64 / (args.steps - 1) as f64)
            .collect()
    };
    let d = args.dim;
    let rho = resolve_state(&args.state, d)?;
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let mut soft_fail = false;
    for v in grid {
        let p = match args.family {
            SweepFamily::GenSicDepol => generalized_sic_depolarized(&sic_rank_one(d, None)?, v)?,
            SweepFamily::Random => {
                depolarize_to_purity(&random_minimal_ic(d, args.povm_seed)?, v)?.with_label(
                    format!("random-ic-d{d}-s{}-purity{}", args.povm_seed, trimmed(v)),
                )
            }
        };
        let r = run(&experiment(p, rho.clone(), &args.shots, false)?)?;
        soft_fail |= !r.within_3_sigma;
        w.serialize(SweepRow::from(&r))?;
    }
    w.flush()?;
    Ok(if soft_fail {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(Serialize)]
struct LieReport {
    n: usize,
    expansion_residual: f64,
    max_real_part: f64,
    antisymmetry: gensic::lie::AntisymmetryReport,
}

fn lie_cmd(input: &Path, export: Option<&Path>, threshold: f64) -> Outcome {
    let p = load_valid(input)?;
    let t = structure_constants(p.outcomes())?;
    if let Some(path) = export {
        std::fs::write(path, serde_json::to_string(&t.to_export())?)?;
    }
    print_json(&LieReport {
        n: t.n(),
        expansion_residual: t.expansion_residual,
        max_real_part: t.max_real_part,
        antisymmetry: antisymmetry_violation_with(&t, threshold),
    })?;
    Ok(ExitCode::SUCCESS)
}

fn audit_cmd(input: &Path, theorem: AuditKind, purity: f64, opts: &ClassifyOptions) -> Outcome {
    let p = load_valid(input)?;
    let consistent = match theorem {
        AuditKind::MseBound => {
            let a = bound_audit_with(&p, purity, opts)?;
            print_json(&a)?;
            a.consistent
        }
        AuditKind::Balanced => {
            let a = balance_audit_with(&p, opts)?;
            print_json(&a)?;
            a.consistent
        }
        AuditKind::Antisymmetry => {
            let a = antisymmetry_audit_with(&p, opts.threshold)?;
            print_json(&a)?;
            a.consistent
        }
    };
    Ok(if consistent {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    })
}
