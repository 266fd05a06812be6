//! `bigrank` — command-line front end for the two-option ranking toolkit.
//!
//! Subcommands emit plot-ready CSV files plus a JSON run manifest alongside
//! every output, so a result can be reproduced byte-for-byte from its
//! manifest. Exit codes: 0 on success, 2 on usage errors, 1 on data errors.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use bigrank_core::fit::{
    bootstrap_errors, fit_params, goodness_of_fit, likelihood_ratio_test, Restriction,
};
use bigrank_core::inference::mle_quality;
use bigrank_core::io::{
    read_choice_csv, read_guess_csv, read_ledger_csv, write_experiment_csv, write_fit_report_csv,
    write_inference_csv, write_phase_csv, write_stats_csv, ExperimentRow, FitReport,
};
use bigrank_core::normalize::{clean_guesses, fit_stats};
use bigrank_core::seed::derive_seed;
use bigrank_core::simulate::{run_experiment, ExperimentConfig, RankingPolicy};
use bigrank_core::stability::phase_diagram;
use bigrank_core::ModelParams;

#[derive(Parser)]
#[command(name = "bigrank", version, about = "Two-option crowdsourced ranking toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo comparison of ranking policies over sequential votes
    Simulate(SimulateArgs),
    /// Stability map of popularity ranking over (position bias, quality gap)
    PhaseDiagram(PhaseDiagramArgs),
    /// Infer answer quality from position-conditioned vote ledgers
    Infer(InferArgs),
    /// Fit the decision-model parameters to observed choices
    Fit(FitArgs),
    /// Clean raw guesses and report log-scale normalization statistics
    Normalize(NormalizeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Ranking policy: popularity, recency, or quality
    #[arg(long)]
    policy: String,
    /// Worst-answer values, comma separated (best answer fixed by --a-best)
    #[arg(long, value_delimiter = ',', required = true)]
    a_worst: Vec<f64>,
    /// Best-answer value
    #[arg(long, default_value_t = 0.0)]
    a_best: f64,
    /// True position bias of the simulated voters
    #[arg(long)]
    p: f64,
    /// True random-choice rate of the simulated voters
    #[arg(long)]
    r: f64,
    /// Vote head start for the worst answer (popularity policy only)
    #[arg(long, default_value_t = 0)]
    advantage: u64,
    /// Position bias assumed by the quality policy (defaults to --p)
    #[arg(long)]
    assumed_p: Option<f64>,
    /// Random-choice rate assumed by the quality policy (defaults to --r)
    #[arg(long)]
    assumed_r: Option<f64>,
    /// Votes per trial
    #[arg(long, default_value_t = 20_000)]
    votes: u64,
    /// Checkpoints (vote counts) to report, comma separated; the final vote
    /// count is always included
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<u64>,
    /// Independent trials per grid point
    #[arg(long, default_value_t = 500)]
    trials: u64,
    /// Master seed; per-cell and per-trial seeds derive from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(long, default_value = "simulate.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct PhaseDiagramArgs {
    #[arg(long, default_value_t = 0.0)]
    p_min: f64,
    #[arg(long, default_value_t = 0.5)]
    p_max: f64,
    #[arg(long, default_value_t = 0.0)]
    a_min: f64,
    #[arg(long, default_value_t = 2.0)]
    a_max: f64,
    /// Grid points per axis
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Output CSV path
    #[arg(long, default_value = "phase.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct InferArgs {
    /// Assumed position bias
    #[arg(long)]
    p: f64,
    /// Assumed random-choice rate
    #[arg(long)]
    r: f64,
    /// Output CSV path
    #[arg(long, default_value = "infer.csv")]
    out: PathBuf,
    /// Ledger CSV (answer_id,n_t,N_t,n_b,N_b)
    ledger: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Bootstrap resamples for parameter errors
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    /// Master seed for bootstrap and goodness-of-fit resampling
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run the parametric-bootstrap goodness-of-fit check
    #[arg(long)]
    gof: bool,
    /// Refit each goodness-of-fit resample instead of scoring at the fitted
    /// parameters (slower, nearly identical)
    #[arg(long)]
    gof_refit: bool,
    /// Goodness-of-fit resamples
    #[arg(long, default_value_t = 1000)]
    gof_resamples: usize,
    /// Output CSV path
    #[arg(long, default_value = "fit.csv")]
    out: PathBuf,
    /// JSON-lines log of bootstrap iterations (default: <out>.bootstrap.jsonl)
    #[arg(long)]
    log: Option<PathBuf>,
    /// Choice CSV (a_first,a_last,chose_first with 0/1 booleans)
    choices: PathBuf,
}

#[derive(Args)]
struct NormalizeArgs {
    /// Center every question on this raw value instead of the mean log guess
    #[arg(long)]
    center: Option<f64>,
    /// Output CSV path
    #[arg(long, default_value = "stats.csv")]
    out: PathBuf,
    /// Guess CSV (question_id,guess)
    guesses: PathBuf,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl From<bigrank_core::Error> for CliError {
    fn from(err: bigrank_core::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Reproducibility record written next to every output file.
#[derive(Serialize)]
struct RunManifest {
    artifact_version: &'static str,
    subcommand: &'static str,
    master_seed: u64,
    parameters: BTreeMap<String, serde_json::Value>,
    outputs: Vec<String>,
}

impl RunManifest {
    fn new(subcommand: &'static str, master_seed: u64) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION"),
            subcommand,
            master_seed,
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    fn param(mut self, key: &str, value: impl Serialize) -> Self {
        let value = serde_json::to_value(value).expect("serializable parameter");
        self.parameters.insert(key.to_string(), value);
        self
    }

    fn output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    fn write(&self) -> Result<(), CliError> {
        let first = self
            .outputs
            .first()
            .expect("manifest must reference at least one output");
        let path = format!("{first}.manifest.json");
        let mut file = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut file, self).map_err(|e| CliError::Data(e.to_string()))?;
        writeln!(file)?;
        Ok(())
    }
}

fn probability_flag(name: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(usage(format!("--{name} must be in [0, 1], got {value}")))
    }
}

fn create_out(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let p = probability_flag("p", args.p)?;
    let r = probability_flag("r", args.r)?;
    let true_params = ModelParams::new(p, r).map_err(|e| usage(e.to_string()))?;
    let assumed_p = probability_flag("assumed-p", args.assumed_p.unwrap_or(p))?;
    let assumed_r = probability_flag("assumed-r", args.assumed_r.unwrap_or(r))?;
    let assumed = ModelParams::new(assumed_p, assumed_r).map_err(|e| usage(e.to_string()))?;

    let policy = match args.policy.as_str() {
        "popularity" => RankingPolicy::Popularity {
            initial_advantage: args.advantage,
        },
        "recency" => RankingPolicy::Recency,
        "quality" => RankingPolicy::Quality { assumed },
        other => {
            return Err(usage(format!(
                "--policy must be popularity, recency, or quality, got {other:?}"
            )))
        }
    };
    if args.votes < 1 {
        return Err(usage("--votes must be at least 1"));
    }
    if args.trials < 1 {
        return Err(usage("--trials must be at least 1"));
    }
    if args.a_worst.is_empty() {
        return Err(usage("--a-worst needs at least one value"));
    }
    for &a in &args.a_worst {
        if !a.is_finite() || a == args.a_best {
            return Err(usage(format!(
                "--a-worst values must be finite and differ from --a-best, got {a}"
            )));
        }
    }
    let mut checkpoints = args.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if checkpoints.iter().any(|&c| c < 1 || c > args.votes) {
        return Err(usage("--checkpoints must lie within 1..=votes"));
    }
    if checkpoints.last() != Some(&args.votes) {
        checkpoints.push(args.votes);
    }

    let mut rows = Vec::new();
    for (cell, &a_worst) in args.a_worst.iter().enumerate() {
        let config = ExperimentConfig {
            a_best: args.a_best,
            a_worst,
            true_params,
            policy,
            num_trials: args.trials,
            checkpoints: checkpoints.clone(),
            master_seed: derive_seed(args.seed, cell as u64),
        };
        for estimate in run_experiment(&config) {
            rows.push(ExperimentRow {
                policy: policy.label(),
                a_worst,
                estimate,
            });
        }
    }
    write_experiment_csv(create_out(&args.out)?, &rows)?;

    RunManifest::new("simulate", args.seed)
        .param("policy", &args.policy)
        .param("a_worst", &args.a_worst)
        .param("a_best", args.a_best)
        .param("p", p)
        .param("r", r)
        .param("advantage", args.advantage)
        .param("assumed_p", assumed_p)
        .param("assumed_r", assumed_r)
        .param("votes", args.votes)
        .param("checkpoints", &checkpoints)
        .param("trials", args.trials)
        .output(&args.out)
        .write()
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn run_phase_diagram(args: PhaseDiagramArgs) -> Result<(), CliError> {
    if args.steps < 2 {
        return Err(usage("--steps must be at least 2"));
    }
    if !(0.0..=1.0).contains(&args.p_min) || !(0.0..=1.0).contains(&args.p_max) {
        return Err(usage("--p-min/--p-max must lie in [0, 1]"));
    }
    if args.p_min >= args.p_max || args.a_min >= args.a_max {
        return Err(usage("grid bounds must satisfy min < max"));
    }
    if args.a_min < 0.0 || !args.a_max.is_finite() {
        return Err(usage("--a-min/--a-max must be non-negative and finite"));
    }
    let p_grid = linspace(args.p_min, args.p_max, args.steps);
    let a_grid = linspace(args.a_min, args.a_max, args.steps);
    let points = phase_diagram(&p_grid, &a_grid);
    write_phase_csv(create_out(&args.out)?, &points)?;

    RunManifest::new("phase-diagram", 0)
        .param("p_min", args.p_min)
        .param("p_max", args.p_max)
        .param("a_min", args.a_min)
        .param("a_max", args.a_max)
        .param("steps", args.steps)
        .output(&args.out)
        .write()
}

fn run_infer(args: InferArgs) -> Result<(), CliError> {
    let p = probability_flag("p", args.p)?;
    let r = probability_flag("r", args.r)?;
    let assumed = ModelParams::new(p, r).map_err(|e| usage(e.to_string()))?;
    let ledgers = read_ledger_csv(File::open(&args.ledger)?)?;
    let rows: Vec<_> = ledgers
        .into_iter()
        .map(|(id, ledger)| (id, mle_quality(&ledger, &assumed)))
        .collect();
    write_inference_csv(create_out(&args.out)?, &rows)?;

    RunManifest::new("infer", 0)
        .param("p", p)
        .param("r", r)
        .param("ledger", args.ledger.display().to_string())
        .output(&args.out)
        .write()
}

fn run_fit(args: FitArgs) -> Result<(), CliError> {
    if args.bootstrap < 1 {
        return Err(usage("--bootstrap must be at least 1"));
    }
    if args.gof_resamples < 1 {
        return Err(usage("--gof-resamples must be at least 1"));
    }
    let records = read_choice_csv(File::open(&args.choices)?)?;

    let mut fit = fit_params(&records)?;
    let bootstrap_seed = derive_seed(args.seed, 0);
    let gof_seed = derive_seed(args.seed, 1);
    let errors = bootstrap_errors(&records, args.bootstrap, bootstrap_seed)?;
    fit.p_err = errors.p_err;
    fit.r_err = errors.r_err;

    let report = FitReport {
        fit,
        lr_position_bias_zero: likelihood_ratio_test(&records, Restriction::PositionBiasZero)?,
        lr_random_choice_zero: likelihood_ratio_test(&records, Restriction::RandomChoiceZero)?,
        lr_both_zero: likelihood_ratio_test(&records, Restriction::Both)?,
        goodness_of_fit: if args.gof {
            Some(goodness_of_fit(
                &records,
                &fit,
                args.gof_resamples,
                gof_seed,
                args.gof_refit,
            )?)
        } else {
            None
        },
    };
    write_fit_report_csv(create_out(&args.out)?, &report)?;

    let log_path = args
        .log
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.bootstrap.jsonl", args.out.display())));
    let mut log = BufWriter::new(File::create(&log_path)?);
    for (i, estimate) in errors.estimates.iter().enumerate() {
        let line = serde_json::json!({
            "iteration": i,
            "p_hat": estimate.p_hat,
            "r_hat": estimate.r_hat,
            "log_likelihood": estimate.log_likelihood,
        });
        writeln!(log, "{line}")?;
    }

    RunManifest::new("fit", args.seed)
        .param("choices", args.choices.display().to_string())
        .param("bootstrap", args.bootstrap)
        .param("gof", args.gof)
        .param("gof_refit", args.gof_refit)
        .param("gof_resamples", args.gof_resamples)
        .param("log", log_path.display().to_string())
        .output(&args.out)
        .output(&log_path)
        .write()
}

fn run_normalize(args: NormalizeArgs) -> Result<(), CliError> {
    if let Some(center) = args.center {
        if !center.is_finite() || center < 1.0 {
            return Err(usage(format!(
                "--center must be a finite value of at least 1, got {center}"
            )));
        }
    }
    let raw = read_guess_csv(File::open(&args.guesses)?)?;
    // group by question in first-appearance order
    let mut order: Vec<String> = Vec::new();
    let mut grouped: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (id, guess) in raw {
        if !grouped.contains_key(&id) {
            order.push(id.clone());
        }
        grouped.entry(id).or_default().push(guess);
    }
    if order.is_empty() {
        return Err(CliError::Data("guess file has no data rows".to_string()));
    }
    let mut rows = Vec::new();
    for id in order {
        let sample = clean_guesses(&id, &grouped[&id])?;
        let mut stats = fit_stats(&sample)?;
        if let Some(center) = args.center {
            stats = stats.with_mean_log(center.ln());
        }
        rows.push((id, stats));
    }
    write_stats_csv(create_out(&args.out)?, &rows)?;

    RunManifest::new("normalize", 0)
        .param("guesses", args.guesses.display().to_string())
        .param("center", args.center)
        .output(&args.out)
        .write()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::PhaseDiagram(args) => run_phase_diagram(args),
        Command::Infer(args) => run_infer(args),
        Command::Fit(args) => run_fit(args),
        Command::Normalize(args) => run_normalize(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("BIGRANK_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => bigrank_core::configure_threads(n),
            _ => eprintln!("warning: ignoring invalid BIGRANK_THREADS={threads:?}"),
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
