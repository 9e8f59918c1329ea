//! Command-line driver.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};
use crate::pipeline::{Pipeline, Stage};

#[derive(Debug, Parser)]
#[command(name = "cyborg", version, about = "Find accounts that switch between bot-like and human-like behaviour")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Each one overrides the matching
/// configuration key.
#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Input archive; repeat for monthly snapshots.
    #[arg(long = "input", global = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub percentile: Option<f64>,
    #[arg(long, global = true)]
    pub bot_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub min_flips: Option<u32>,
    #[arg(long, global = true)]
    pub min_mean_delta: Option<f64>,
    /// Classify with the calibrated thresholds instead of the configured ones.
    #[arg(long, global = true)]
    pub use_calibration: bool,
    /// Built-in lexicon name or path to a lexicon file.
    #[arg(long, global = true)]
    pub lexicon: Option<String>,
    /// Agents in the synthetic population.
    #[arg(long, global = true)]
    pub agents: Option<usize>,
    /// CSV of `agent_id,suspended`.
    #[arg(long, global = true)]
    pub suspensions: Option<PathBuf>,
    /// CSV of `agent_id,class,...` compared against in the report.
    #[arg(long, global = true)]
    pub ground_truth: Option<PathBuf>,
    /// Reference date for lifespans, `YYYY-MM-DD`.
    #[arg(long, global = true)]
    pub analysis_date: Option<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Parse archives and keep agents present in every snapshot.
    Ingest,
    /// Daily bot-likelihood per agent.
    Score,
    /// Flip events and per-agent flip statistics.
    Flips,
    /// Flip-count and delta distributions and percentile thresholds.
    Calibrate,
    /// Label agents bot, human or cyborg.
    Classify,
    /// Centrality and cyborg versus non-cyborg comparison.
    Network,
    /// Hashtag stance propagation.
    Stance,
    /// Topic models per stance and class.
    Topics,
    /// Suspension and lifespan by class.
    Cohort,
    /// Generate a synthetic archive with known labels.
    Synth,
    /// Collect results into summary tables.
    Report,
    /// Run every stage; generates synthetic input when none is given.
    All,
}

impl GlobalArgs {
    pub fn apply(&self, c: &mut PipelineConfig) {
        if let Some(v) = &self.out {
            c.output.dir = v.clone();
        }
        if !self.inputs.is_empty() {
            c.input.paths = self.inputs.clone();
        }
        if let Some(v) = self.seed {
            c.run.seed = v;
        }
        if let Some(v) = self.jobs {
            c.run.jobs = v;
        }
        if let Some(v) = self.percentile {
            c.thresholds.percentile = v;
        }
        if let Some(v) = self.bot_threshold {
            c.thresholds.bot_threshold = v;
        }
        if let Some(v) = self.min_flips {
            c.thresholds.min_flips = v;
        }
        if let Some(v) = self.min_mean_delta {
            c.thresholds.min_mean_delta = v;
        }
        if self.use_calibration {
            c.thresholds.use_calibration = true;
        }
        if let Some(v) = &self.lexicon {
            c.stance.lexicon = v.clone();
        }
        if let Some(v) = self.agents {
            c.synth.agents = v;
        }
        if let Some(v) = &self.suspensions {
            c.input.suspensions = Some(v.clone());
        }
        if let Some(v) = &self.ground_truth {
            c.input.ground_truth = Some(v.clone());
        }
        if let Some(v) = &self.analysis_date {
            c.cohort.analysis_date = Some(v.clone());
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let mut config = match &cli.global.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    cli.global.apply(&mut config);
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.run.jobs)
        .build()
        .map_err(|e| CliError::config("run.jobs", e.to_string()))?;
    let mut pipeline = Pipeline::new(config);
    pool.install(|| match cli.command {
        Command::All => pipeline.run_all(),
        other => pipeline.run(stage_of(other)),
    })
}

fn stage_of(command: Command) -> Stage {
    match command {
        Command::Ingest => Stage::Ingest,
        Command::Score => Stage::Score,
        Command::Flips => Stage::Flips,
        Command::Calibrate => Stage::Calibrate,
        Command::Classify => Stage::Classify,
        Command::Network => Stage::Network,
        Command::Stance => Stage::Stance,
        Command::Topics => Stage::Topics,
        Command::Cohort => Stage::Cohort,
        Command::Synth => Stage::Synth,
        Command::Report => Stage::Report,
        Command::All => unreachable!("handled by the caller"),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
