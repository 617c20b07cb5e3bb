//! `mermin`: file-based front end to mermin-core.
//!
//! Every command prints a JSON run report on stdout (or a CSV table with
//! `--csv`). Exit codes: 0 success, 2 invalid input, 3 size cap exceeded,
//! 4 failed precondition (e.g. `extract` on a state that is not a maximal
//! violator).

mod commands;
mod error;
mod formats;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Failure;
use crate::report::{RunReport, REPORT_SCHEMA};

#[derive(Parser, Debug)]
#[command(name = "mermin", version, about = "Bell-Mermin operators, bounds and GHZ characterization")]
struct Cli {
    /// Worker threads for parallel sections; results do not depend on it.
    #[arg(long, global = true, env = "MERMIN_THREADS")]
    threads: Option<usize>,

    /// Print the numeric outputs as a CSV table instead of the JSON report.
    #[arg(long, global = true)]
    csv: bool,

    /// Also write the JSON run report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a settings file (sigma_x/sigma_y by default).
    GenSettings(GenSettingsArgs),
    /// Write a GHZ, W or random state file.
    GenState(GenStateArgs),
    /// Build the dense Mermin operator for a settings file.
    Build(BuildArgs),
    /// Spectral norm and extreme eigenvalues of an operator file.
    Norm(NormArgs),
    /// Exhaustive local-hidden-variable maximum.
    Lhv(LhvArgs),
    /// Largest eigenvalue of the Mermin operator and its eigenvector.
    QuantumMax(QuantumMaxArgs),
    /// Optimize settings for a fixed state by see-saw with restarts.
    Seesaw(SeesawArgs),
    /// Recover local unitaries taking GHZ to a maximally violating state.
    Extract(ExtractArgs),
    /// Finite-shot estimate of the Mermin expectation.
    Sample(SampleArgs),
    /// Check the squared-operator identity and builder agreement on random settings.
    VerifyIdentities(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SettingsKind {
    Xy,
    Random,
    Orthogonal,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Ghz,
    W,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Product,
    Expansion,
}

#[derive(Args, Debug, Serialize)]
pub struct GenSettingsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "xy")]
    pub kind: SettingsKind,
    /// Seed for the random kinds.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct GenStateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "ghz")]
    pub kind: StateKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct BuildArgs {
    #[arg(long)]
    pub settings: PathBuf,
    #[arg(long, value_enum, default_value = "product")]
    pub form: Form,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct NormArgs {
    #[arg(long)]
    pub operator: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct LhvArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct QuantumMaxArgs {
    #[arg(long)]
    pub settings: PathBuf,
    /// Write the top eigenvector as a state file.
    #[arg(long)]
    pub state_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SeesawArgs {
    #[arg(long)]
    pub state: PathBuf,
    /// Starting settings for restart 0 (sigma_x/sigma_y if omitted).
    #[arg(long)]
    pub settings: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_sweeps: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the best settings found.
    #[arg(long)]
    pub settings_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ExtractArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub settings: PathBuf,
    /// Tolerance on |a_j . a'_j|.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_orth: f64,
    /// Allowed shortfall of <M_n> below 2^(n-1).
    #[arg(long, default_value_t = 1e-6)]
    pub tol_viol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_coeff: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_phase: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub settings: PathBuf,
    /// Shots per term, or `exact` for exact outcome probabilities.
    #[arg(long, value_parser = parse_shots)]
    pub shots: mermin_core::Shots,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include the raw outcome counts in the report.
    #[arg(long)]
    pub records: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

fn parse_shots(s: &str) -> Result<mermin_core::Shots, String> {
    if s.eq_ignore_ascii_case("exact") {
        return Ok(mermin_core::Shots::Exact);
    }
    s.parse::<u64>()
        .map(mermin_core::Shots::Finite)
        .map_err(|_| format!("expected a shot count or `exact`, got `{s}`"))
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GenSettings(_) => "gen-settings",
            Command::GenState(_) => "gen-state",
            Command::Build(_) => "build",
            Command::Norm(_) => "norm",
            Command::Lhv(_) => "lhv",
            Command::QuantumMax(_) => "quantum-max",
            Command::Seesaw(_) => "seesaw",
            Command::Extract(_) => "extract",
            Command::Sample(_) => "sample",
            Command::VerifyIdentities(_) => "verify-identities",
        }
    }

    fn parameters(&self) -> serde_json::Value {
        let v = match self {
            Command::GenSettings(a) => serde_json::to_value(a),
            Command::GenState(a) => serde_json::to_value(a),
            Command::Build(a) => serde_json::to_value(a),
            Command::Norm(a) => serde_json::to_value(a),
            Command::Lhv(a) => serde_json::to_value(a),
            Command::QuantumMax(a) => serde_json::to_value(a),
            Command::Seesaw(a) => serde_json::to_value(a),
            Command::Extract(a) => serde_json::to_value(a),
            Command::Sample(a) => serde_json::to_value(a),
            Command::VerifyIdentities(a) => serde_json::to_value(a),
        };
        v.unwrap_or(serde_json::Value::Null)
    }

    fn run(&self) -> Result<commands::Outcome, Failure> {
        match self {
            Command::GenSettings(a) => commands::gen_settings(a),
            Command::GenState(a) => commands::gen_state(a),
            Command::Build(a) => commands::build(a),
            Command::Norm(a) => commands::norm(a),
            Command::Lhv(a) => commands::lhv(a),
            Command::QuantumMax(a) => commands::quantum_max(a),
            Command::Seesaw(a) => commands::seesaw(a),
            Command::Extract(a) => commands::extract(a),
            Command::Sample(a) => commands::sample(a),
            Command::VerifyIdentities(a) => commands::verify_identities(a),
        }
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), Failure> {
    let Some(t) = threads else {
        return Ok(());
    };
    if t == 0 {
        return Err(Failure::validation("--threads must be >= 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(t)
        .build_global()
        .map_err(|e| Failure::validation(format!("thread pool: {e}")))
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    configure_threads(cli.threads)?;
    let start = Instant::now();
    let outcome = cli.command.run()?;
    let sources: Vec<&formats::Source> = outcome.inputs.iter().collect();
    let report = RunReport {
        schema: REPORT_SCHEMA.into(),
        command: cli.command.name().into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        inputs_digest: report::inputs_digest(&sources),
        parameters: cli.command.parameters(),
        outputs: outcome.outputs,
        seeds: outcome.seeds,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    if let Some(path) = &cli.report {
        formats::write_json(path, &report, true)?;
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if cli.csv {
        outcome
            .table
            .write(&mut out)
            .map_err(|e| Failure::validation(format!("writing CSV: {e}")))?;
    } else {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::validation(e.to_string()))?;
        let _ = writeln!(out, "{text}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
