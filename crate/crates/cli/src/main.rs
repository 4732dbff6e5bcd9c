use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use holostab_cli::{input_digest, run_experiment, write_outcome, CliError, ExperimentConfig, Summary};
use log::info;

#[derive(Parser)]
#[command(name = "holostab", version, about = "Holonomic gate stability experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the configuration.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Only report errors.
        #[arg(long)]
        quiet: bool,
        /// Worker threads for grid evaluation (default: available parallelism).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a configuration without computing anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
}

fn load(path: &Path) -> Result<(ExperimentConfig, serde_json::Value), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
}

fn run(config: &Path, output: Option<PathBuf>, threads: Option<usize>) -> Result<(), CliError> {
    let (cfg, raw) = load(config)?;
    let dir = output
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("output"));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;

    let start = Instant::now();
    let outcome = pool.install(|| run_experiment(&cfg))?;
    let summary = Summary {
        experiment: cfg.experiment.name().to_string(),
        input_digest: input_digest(&raw),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        results: outcome.results.clone(),
    };
    write_outcome(&dir, &outcome, &summary)?;
    info!("wrote results to {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = match &cli.command {
        Command::Run { quiet, .. } | Command::Validate { quiet, .. } => *quiet,
    };
    let level = if quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Run { config, output, threads, .. } => run(&config, output, threads),
        Command::Validate { config, .. } => load(&config).and_then(|(cfg, _)| cfg.validate()).map(|()| {
            info!("{} is valid", config.display());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
