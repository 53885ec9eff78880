use std::path::PathBuf;
use std::process::ExitCode;

use chainvalue_cli::{CliError, Overrides, Pipeline, PipelineConfig, StageName};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "chainvalue",
    version,
    about = "Possession-chain player valuation pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML config file; relative paths inside it resolve against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    open_data: Option<PathBuf>,
    #[arg(long, global = true)]
    market: Option<PathBuf>,
    #[arg(long, global = true)]
    window_start: Option<NaiveDate>,
    #[arg(long, global = true)]
    window_end: Option<NaiveDate>,
    /// Measure shot distance to (120, 80) rather than the goal centre.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    paper_distance_formula: Option<bool>,
    /// Drop the remaining-actions feature from the scorer model.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    ablate_leakage_feature: Option<bool>,
    /// Zero the shooter's own delta into the shot.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    suppress_shooter_delta: Option<bool>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Parse events, lineups and market data; link players.
    Ingest,
    /// Cut events into shot-ending possession chains.
    Chains,
    /// Train the expected-goals models.
    TrainXg,
    /// Train the scoring-probability models.
    TrainScorer,
    /// Credit actions and aggregate player scores.
    ScorePlayers,
    /// Train the market-value change regressors.
    TrainTransfer,
    /// Write the player valuation report.
    Predict,
    /// Select the 4-3-3 symbolic team.
    Team,
    /// Run every stage in order.
    ReportAll,
}

fn stage(c: Command) -> Option<StageName> {
    Some(match c {
        Command::Ingest => StageName::Ingest,
        Command::Chains => StageName::Chains,
        Command::TrainXg => StageName::TrainXg,
        Command::TrainScorer => StageName::TrainScorer,
        Command::ScorePlayers => StageName::ScorePlayers,
        Command::TrainTransfer => StageName::TrainTransfer,
        Command::Predict => StageName::Predict,
        Command::Team => StageName::Team,
        Command::ReportAll => return None,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let c = cli.common;
    let mut config = match &c.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    Overrides {
        seed: c.seed,
        open_data: c.open_data,
        market: c.market,
        window_start: c.window_start,
        window_end: c.window_end,
        paper_distance_formula: c.paper_distance_formula,
        ablate_leakage_feature: c.ablate_leakage_feature,
        suppress_shooter_delta: c.suppress_shooter_delta,
    }
    .apply(&mut config)?;
    if let Some(jobs) = c.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Stage(format!("thread pool: {e}")))?;
    }
    let pipeline = Pipeline::new(config, c.out_dir)?;
    let manifests = match stage(cli.command) {
        Some(s) => vec![pipeline.run(s)?],
        None => pipeline.run_all()?,
    };
    for m in manifests {
        let outputs: Vec<&str> = m.outputs.iter().map(|o| o.name.as_str()).collect();
        println!("{}: {}", m.stage, outputs.join(", "));
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
