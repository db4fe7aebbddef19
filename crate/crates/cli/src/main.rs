//! `spectral-gibbs`: batch driver for the Monte-Carlo experiments.
//!
//! Exit codes: 0 success, 1 a checked identity or bound was violated, 2 bad
//! configuration (nothing is written), 3 the computation failed.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use commands::Outcome;
use config::Params;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(String),
}

impl From<spectral_gibbs::Error> for CliError {
    fn from(e: spectral_gibbs::Error) -> Self {
        use spectral_gibbs::Error as E;
        match e {
            E::DegenerateEnsemble | E::Unstable { .. } | E::WeightOverflow(_) => Self::Run(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Run(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "spectral-gibbs", version, about = "Monte-Carlo checks for truncated Gibbs measures on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML file with parameters; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Free-field draws: per-mode covariance, Wick mass, field dumps.
    Sample(Common),
    /// Partition function of the local Gibbs measure.
    Partition(Common),
    /// Tail of the interaction energy on the mass ball.
    Tail(Common),
    /// (Local) KMS residuals for randomized test-function pairs.
    KmsCheck(Common),
    /// Liouville residuals for randomized test functions.
    LiouvilleCheck(Common),
    /// Gaussian integration by parts under the free measure.
    IbpCheck(Common),
    /// One trajectory of the truncated flow.
    Flow(Common),
    /// Invariance of the Gibbs measure under the flow.
    Invariance(Common),
    /// Empirical tails against the concentration inequalities.
    Concentration(Common),
    /// Lower confidence bounds on the free-measure mass of |M| <= R.
    Positivity(Common),
}

impl Command {
    fn split(self) -> (&'static str, Common) {
        match self {
            Self::Sample(c) => ("sample", c),
            Self::Partition(c) => ("partition", c),
            Self::Tail(c) => ("tail", c),
            Self::KmsCheck(c) => ("kms-check", c),
            Self::LiouvilleCheck(c) => ("liouville-check", c),
            Self::IbpCheck(c) => ("ibp-check", c),
            Self::Flow(c) => ("flow", c),
            Self::Invariance(c) => ("invariance", c),
            Self::Concentration(c) => ("concentration", c),
            Self::Positivity(c) => ("positivity", c),
        }
    }
}

fn dispatch(name: &str, p: &mut Params) -> Result<Outcome, CliError> {
    match name {
        "sample" => commands::sample(p),
        "partition" => commands::partition(p),
        "tail" => commands::tail(p),
        "kms-check" => commands::kms_check(p),
        "liouville-check" => commands::liouville_check(p),
        "ibp-check" => commands::ibp_check(p),
        "flow" => commands::flow(p),
        "invariance" => commands::invariance(p),
        "concentration" => commands::concentration(p),
        "positivity" => commands::positivity(p),
        _ => unreachable!("clap only yields known subcommands"),
    }
}

fn write_outputs(dir: &Path, name: &str, summary: &serde_json::Value, files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Run(format!("writing to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| CliError::Run(e.to_string()))?;
    text.push('\n');
    std::fs::write(dir.join(format!("{name}.json")), text).map_err(io)?;
    for (file, bytes) in files {
        std::fs::write(dir.join(file), bytes).map_err(io)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (name, common) = cli.command.split();
    let file = match &common.config {
        Some(path) => Params::load(path)?,
        None => Params::default(),
    };
    let mut params = file.overlay(&common.params)?;
    if let Some(t) = params.threads {
        if t == 0 {
            return Err(config::config_err("threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Run(e.to_string()))?;
    }
    let out = params.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let outcome = dispatch(name, &mut params)?;
    let summary = json!({
        "schema": SCHEMA_VERSION,
        "command": name,
        "config": params.echo()?,
        "result": outcome.result,
        "violation": outcome.violation,
    });
    write_outputs(&out, name, &summary, &outcome.files)?;
    if let Some(msg) = outcome.failure {
        return Err(CliError::Run(msg));
    }
    Ok(u8::from(outcome.violation))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let (kind, msg) = match &e {
                CliError::Config(m) => ("configuration error", m),
                CliError::Run(m) => ("error", m),
            };
            eprintln!("spectral-gibbs: {kind}: {msg}");
            ExitCode::from(e.code())
        }
    }
}
