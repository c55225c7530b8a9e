mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Failure;

/// Early warning for digital dermatitis from daily sensor data.
#[derive(Debug, Parser)]
#[command(name = "ddwarn", version)]
struct Cli {
    /// Flat `key = value` config file (see `ddwarn defaults`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads: 1 runs sequentially, 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Daily sensor CSV; overrides `data.behavior`
    #[arg(long)]
    behavior: Option<PathBuf>,
    /// Lesion observation CSV; overrides `data.lesions`
    #[arg(long)]
    lesions: Option<PathBuf>,
    /// Cow profile CSV; overrides `data.profiles`
    #[arg(long)]
    profiles: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic herd (behavior, lesions, profiles, planted day 0s).
    Synth,
    /// Parse the three input files and report episodes and rejections.
    Validate(DataArgs),
    /// Pearson correlations of the detection features and the label.
    Correlate(DataArgs),
    /// Search, fit and score a day-0 detection pipeline.
    Detect(DataArgs),
    /// Per-channel importance by dropping each channel's features.
    Importance {
        #[command(flatten)]
        data: DataArgs,
        /// Take the pipeline from a detection report instead of the default.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Accuracy over the lag x window grid.
    Sweep(DataArgs),
    /// Print every config key with its default.
    Defaults,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Command::Defaults = cli.command {
        print!("{}", config::RunConfig::defaults_text());
        return Ok(());
    }
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())).in_file(path))?;
            config::RunConfig::parse(&text).map_err(|e| Failure::config(e, path))?
        }
        None => config::RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(cfg.seed);
    cfg = cfg.with_seed(seed);
    let exec = ddwarn_core::par::Execution::from_jobs(cli.jobs);
    if cli.jobs > 1 {
        ddwarn_core::par::init_threads(cli.jobs).map_err(Failure::usage)?;
    }
    let ctx = commands::Context { cfg, out: cli.out, exec };
    match cli.command {
        Command::Synth => commands::synth(&ctx),
        Command::Validate(d) => commands::validate(&ctx, &d),
        Command::Correlate(d) => commands::correlate(&ctx, &d),
        Command::Detect(d) => commands::detect(&ctx, &d),
        Command::Importance { data, report } => commands::importance(&ctx, &data, report.as_deref()),
        Command::Sweep(d) => commands::sweep(&ctx, &d),
        Command::Defaults => unreachable!(),
    }
}
