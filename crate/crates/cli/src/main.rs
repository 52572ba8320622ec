use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use novelty_harness::campaign::{parse_campaign, to_canonical_json, CampaignConfig};
use novelty_harness::metrics::render_table;
use novelty_harness::novelty::{catalog, NoveltyLevel};
use novelty_harness::runner::{recompute_report, run_experiment, RunOptions};
use novelty_harness::Error;

#[derive(Parser)]
#[command(name = "novelty-harness", version, about = "Run and score open-world novelty campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every battle of a campaign and write results, report and manifest.
    Run {
        #[arg(long)]
        campaign: PathBuf,
        #[arg(long)]
        agent: String,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: NOVELTY_HARNESS_PARALLEL or the CPU count).
        #[arg(long)]
        parallel: Option<usize>,
        /// Write per-battle tick traces.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Recompute the metric report of a finished run.
    Metrics {
        #[arg(long = "in")]
        dir: PathBuf,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// List built-in novelties.
    Catalog {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        level: Option<u8>,
    },
    /// Parse and check a campaign without running it.
    Validate {
        #[arg(long)]
        campaign: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<CampaignConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let config = parse_campaign(&text)?;
    config.validate()?;
    Ok(config)
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run { campaign, agent, out, parallel, trace, json } => {
            let config = load(&campaign)?;
            let report = run_experiment(&config, &agent, &out, &RunOptions { parallel, trace })?;
            if json {
                print!("{}", to_canonical_json(&report)?);
            } else {
                print!("{}", render_table(&report));
            }
        }
        Command::Metrics { dir, window, json } => {
            let report = recompute_report(&dir, window)?;
            if json {
                print!("{}", to_canonical_json(&report)?);
            } else {
                print!("{}", render_table(&report));
            }
        }
        Command::Catalog { level } => {
            let level = level.map(NoveltyLevel::try_from).transpose()?;
            for spec in catalog().iter().filter(|s| level.is_none_or(|l| s.level == l)) {
                println!("{:<24} {:<18} {:<12} {}", spec.id, spec.level.to_string(), spec.target.to_string(), spec.description);
            }
        }
        Command::Validate { campaign } => {
            let config = load(&campaign)?;
            println!("{}: ok ({} trials x {} battles)", config.name, config.trials, config.battles);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
