//! The `gibbs-anneal` command line: `estimate`, `schedule` and `verify`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::annealer::{anneal, estimate_ratio_boosted, AnnealConfig, Branch, SamplingMode};
use crate::beta::InverseTemperature;
use crate::error::{Error, Result};
use crate::estimate::{CostMetrics, RatioEstimate};
use crate::histogram::HamiltonianHistogram;
use crate::models::{enumerate_histogram, reduce_model, Graph, GraphModel, ModelBackend, ModelKind};
use crate::oracle::{HistogramBackend, SampleBackend};
use crate::schedule::{build_schedule, truncate_schedule, ScheduleParameters};
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: u8 = 0;
pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_UNSUPPORTED: u8 = 4;
pub const EXIT_VERIFY: u8 = 5;

const EXIT_CODES: &str = "Exit codes:
  0  success
  1  runtime failure (sampler budget exhausted, estimate collapsed to zero)
  2  usage error (bad flags or parameter values)
  3  input error (unreadable or malformed graph/histogram file, empty ground state, enumeration budget)
  4  unsupported parameterization (Ising with lambda != 1, hard-core with lambda > 1)
  5  verification failure";

#[derive(Debug, Parser)]
#[command(name = "gibbs-anneal", version, about = "Estimate Gibbs partition-function ratios by parallel annealing", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate Z(beta_max)/Z(beta_min) for a histogram, or Z for a model.
    Estimate(EstimateArgs),
    /// Print the cooling schedule for (q_bar, h) as JSON.
    Schedule(ScheduleArgs),
    /// Run the self-check battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Ising,
    Hardcore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SamplerChoice {
    /// Exact sampling from the enumerated histogram (n <= 24).
    #[default]
    Exact,
    /// Single-site Glauber dynamics.
    Glauber,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    /// Histogram JSON file {"counts": [c_0, ..., c_h]}.
    #[arg(long, conflicts_with_all = ["model", "graph"])]
    pub histogram: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    pub model: Option<ModelChoice>,
    /// Edge-list file: "n m" then m lines "u v".
    #[arg(long, requires = "model")]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Histogram input only; default 0.
    #[arg(long)]
    pub beta_min: Option<InverseTemperature>,
    /// Histogram input only; default inf.
    #[arg(long)]
    pub beta_max: Option<InverseTemperature>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Failure probability; enables median boosting.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SamplingMode::Eager)]
    pub mode: SamplingMode,
    #[arg(long, value_enum, default_value_t = SamplerChoice::Exact)]
    pub sampler: SamplerChoice,
    /// Glauber steps per sample; default 50 n ceil(ln n + 1).
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Upper bound on ln|Omega|; default n ln 2 for models, exact for histograms.
    #[arg(long)]
    pub q_bar: Option<f64>,
    /// Worker threads; default all cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    #[arg(long = "q")]
    pub q_bar: f64,
    #[arg(long)]
    pub h: u64,
    #[arg(long)]
    pub beta_min: Option<InverseTemperature>,
    #[arg(long)]
    pub beta_max: Option<InverseTemperature>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Cases per suite; each suite has its own default.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
}

/// The JSON object `estimate` prints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub log_q_hat: f64,
    /// `exp(log_q_hat)` when finite and non-zero in `f64`.
    pub q_hat: Option<f64>,
    /// `ln Z` of the model, for model inputs.
    pub log_z_model: Option<f64>,
    pub metrics: CostMetrics,
    /// Estimator combination of a single run; absent for boosted runs.
    pub branch: Option<Branch>,
    pub config: ConfigEcho,
    pub seed: u64,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub input: String,
    pub model: Option<ModelChoice>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub beta_min: InverseTemperature,
    pub beta_max: InverseTemperature,
    pub eps: f64,
    pub delta: Option<f64>,
    pub mode: SamplingMode,
    pub sampler: SamplerChoice,
    pub burn_in: Option<u64>,
    pub q_bar: f64,
    pub h: u64,
    pub workers: Option<usize>,
}

impl RunReport {
    fn new(estimate: RatioEstimate, branch: Option<Branch>, log_z_model: Option<f64>, config: ConfigEcho, seed: u64, started: Instant) -> Self {
        let q = estimate.q_hat();
        Self {
            log_q_hat: estimate.log_q_hat,
            q_hat: (q.is_finite() && q > 0.0).then_some(q),
            log_z_model,
            metrics: estimate.metrics,
            branch,
            config,
            seed,
            wall_time_ms: started.elapsed().as_millis() as u64,
        }
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) | Error::InvalidRange { .. } => EXIT_USAGE,
        Error::InvalidHistogram(_)
        | Error::EmptyGroundState
        | Error::EnumerationBudget { .. }
        | Error::Parse { .. }
        | Error::Io { .. }
        | Error::Json { .. } => EXIT_INPUT,
        Error::UnsupportedParameterization(_) => EXIT_UNSUPPORTED,
        Error::OverlappingStreams(_)
        | Error::TemperatureIndex { .. }
        | Error::SamplerBudget { .. }
        | Error::VanishingEstimate { .. } => EXIT_RUNTIME,
    }
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidParameter("--workers must be at least 1".into())),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("cannot start {w} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn run_with<B: SampleBackend>(config: &AnnealConfig, backend: &B) -> Result<(RatioEstimate, Option<Branch>)> {
    if config.boost_delta.is_some() {
        Ok((estimate_ratio_boosted(config, backend)?, None))
    } else {
        let run = anneal(config, backend, 0)?;
        Ok((run.estimate, Some(run.branch)))
    }
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<RunReport> {
    let started = Instant::now();
    let mut echo = ConfigEcho {
        input: String::new(),
        model: args.model,
        gamma: args.gamma,
        lambda: args.lambda,
        beta_min: InverseTemperature::ZERO,
        beta_max: InverseTemperature::INFINITY,
        eps: args.eps,
        delta: args.delta,
        mode: args.mode,
        sampler: args.sampler,
        burn_in: args.burn_in,
        q_bar: 0.0,
        h: 0,
        workers: args.workers,
    };

    if let Some(path) = &args.histogram {
        if args.gamma.is_some() || args.lambda.is_some() {
            return Err(Error::InvalidParameter("--gamma/--lambda apply to --model inputs only".into()));
        }
        if args.sampler == SamplerChoice::Glauber || args.burn_in.is_some() {
            return Err(Error::InvalidParameter("histogram inputs are always sampled exactly".into()));
        }
        let hist = HamiltonianHistogram::load(path)?;
        echo.input = path.display().to_string();
        echo.beta_min = args.beta_min.unwrap_or(InverseTemperature::ZERO);
        echo.beta_max = args.beta_max.unwrap_or(InverseTemperature::INFINITY);
        if echo.beta_max.is_infinite() && hist.ground_count() == 0.0 {
            return Err(Error::EmptyGroundState);
        }
        echo.q_bar = args.q_bar.unwrap_or(hist.q());
        echo.h = if hist.is_ground_only() { 0 } else { hist.max_hamiltonian() as u64 };
        let config = AnnealConfig::new(echo.beta_min, echo.beta_max, args.eps, echo.q_bar, echo.h)
            .with_mode(args.mode)
            .with_seed(args.seed)
            .with_boost(args.delta);
        let backend = HistogramBackend::new(hist);
        let (estimate, branch) = with_workers(args.workers, || run_with(&config, &backend))??;
        return Ok(RunReport::new(estimate, branch, None, echo, args.seed, started));
    }

    let (Some(choice), Some(path)) = (args.model, &args.graph) else {
        return Err(Error::InvalidParameter("give exactly one of --histogram FILE or --model KIND --graph FILE".into()));
    };
    if args.beta_min.is_some() || args.beta_max.is_some() {
        return Err(Error::InvalidParameter("--beta-min/--beta-max are fixed by the model reduction".into()));
    }
    let graph = Graph::load(path)?;
    echo.input = path.display().to_string();
    let kind = match choice {
        ModelChoice::Ising => ModelKind::Ising {
            gamma: args.gamma.ok_or_else(|| Error::InvalidParameter("--model ising needs --gamma".into()))?,
            lambda: args.lambda.unwrap_or(1.0),
        },
        ModelChoice::Hardcore => {
            if args.gamma.is_some() {
                return Err(Error::InvalidParameter("--gamma applies to --model ising only".into()));
            }
            ModelKind::HardCore {
                lambda: args.lambda.ok_or_else(|| Error::InvalidParameter("--model hardcore needs --lambda".into()))?,
            }
        }
    };
    let n = graph.vertex_count();
    let model = GraphModel::new(graph, kind)?;
    if !model.uniqueness_ok() {
        eprintln!("note: parameters lie outside the uniqueness regime; Glauber mixing may be slow");
    }
    let reduction = reduce_model(&model)?;
    echo.beta_min = reduction.beta_min;
    echo.beta_max = reduction.beta_max;
    echo.q_bar = args.q_bar.unwrap_or(n as f64 * std::f64::consts::LN_2);
    echo.h = reduction.h as u64;
    if reduction.is_trivial() {
        let estimate = RatioEstimate { log_q_hat: 0.0, metrics: CostMetrics::default() };
        return Ok(RunReport::new(estimate, Some(Branch::Trivial), Some(reduction.log_z_model(0.0)), echo, args.seed, started));
    }
    let config = AnnealConfig::new(echo.beta_min, echo.beta_max, args.eps, echo.q_bar, echo.h)
        .with_mode(args.mode)
        .with_seed(args.seed)
        .with_boost(args.delta);
    let (estimate, branch) = match args.sampler {
        SamplerChoice::Exact => {
            if args.burn_in.is_some() {
                return Err(Error::InvalidParameter("--burn-in applies to --sampler glauber only".into()));
            }
            let backend = HistogramBackend::new(enumerate_histogram(&model)?);
            with_workers(args.workers, || run_with(&config, &backend))??
        }
        SamplerChoice::Glauber => {
            let backend = ModelBackend::new(model, args.burn_in);
            echo.burn_in = Some(backend.burn_in());
            with_workers(args.workers, || run_with(&config, &backend))??
        }
    };
    let log_z = reduction.log_z_model(estimate.log_q_hat);
    Ok(RunReport::new(estimate, branch, Some(log_z), echo, args.seed, started))
}

pub fn cmd_schedule(args: &ScheduleArgs) -> Result<String> {
    let params = ScheduleParameters::new(args.q_bar, args.h)?;
    let mut schedule = build_schedule(&params);
    if args.beta_min.is_some() || args.beta_max.is_some() {
        let lo = args.beta_min.unwrap_or(InverseTemperature::ZERO);
        let hi = args.beta_max.unwrap_or(InverseTemperature::INFINITY);
        schedule = truncate_schedule(&schedule, lo, hi)?;
    }
    Ok(schedule.to_json())
}

/// Runs the battery; `Ok(false)` when any suite failed.
pub fn cmd_verify(args: &VerifyArgs) -> Result<(String, bool)> {
    let reports = with_workers(args.workers, || run_suite(args.suite, args.trials, args.seed))??;
    let passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        eprintln!("{:<12} {}  ({} failures / {} cases)", format!("{:?}", r.suite).to_lowercase(), if r.passed { "PASS" } else { "FAIL" }, r.failures, r.cases);
    }
    let json = serde_json::json!({ "passed": passed, "suites": reports });
    Ok((serde_json::to_string_pretty(&json).expect("report serializes"), passed))
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let outcome = match &cli.command {
        Command::Estimate(args) => cmd_estimate(args).map(|report| {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            EXIT_OK
        }),
        Command::Schedule(args) => cmd_schedule(args).map(|json| {
            println!("{json}");
            EXIT_OK
        }),
        Command::Verify(args) => cmd_verify(args).map(|(json, passed)| {
            println!("{json}");
            if passed {
                EXIT_OK
            } else {
                EXIT_VERIFY
            }
        }),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("gibbs-anneal").chain(args.iter().copied()))
    }

    #[test]
    fn parses_inf_and_modes() {
        let cli = parse(&["estimate", "--histogram", "h.json", "--beta-max", "inf", "--mode", "lazy"]).unwrap();
        let Command::Estimate(args) = cli.command else { panic!() };
        assert_eq!(args.beta_max, Some(InverseTemperature::INFINITY));
        assert_eq!(args.mode, SamplingMode::Lazy);
        assert!(parse(&["estimate", "--histogram", "h.json", "--model", "ising", "--graph", "g"]).is_err());
        assert!(parse(&["estimate", "--model", "ising"]).is_err());
        assert!(parse(&["schedule", "--q", "2"]).is_err());
        assert!(parse(&["verify", "--suite", "moments", "--trials", "5"]).is_ok());
    }

    #[test]
    fn exit_codes_are_distinct() {
        assert_eq!(exit_code(&Error::UnsupportedParameterization(String::new())), EXIT_UNSUPPORTED);
        assert_eq!(exit_code(&Error::EmptyGroundState), EXIT_INPUT);
        assert_eq!(exit_code(&Error::InvalidParameter(String::new())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::SamplerBudget { attempts: 1 }), EXIT_RUNTIME);
    }
}
