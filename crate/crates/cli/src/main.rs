mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;
use config::{CommonArgs, FileConfig, RunConfig};
use fbmwalk::HurstIndex;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "fbmwalk", version, about = "Weighted random walks approximating fractional Brownian motion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write walk paths as `t,x` CSV or JSONL, with a metadata sidecar
    Generate(CommonArgs),
    /// Check the walk's identities and error bounds; JSON report
    Verify(CommonArgs),
    /// Compare walk moments with exact fBm; JSON report. Moments always use c_H
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        /// Grid sizes for the rate study (empty to skip)
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        ns: Option<Vec<u64>>,
    },
    /// Print K_H, c_H and the zeta values they use
    Constants {
        #[arg(long)]
        hurst: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// JSON instead of text
        #[arg(long)]
        json: bool,
    },
}

fn config_error(e: anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::from(EXIT_CONFIG)
}

fn finish(outcome: Outcome) -> ExitCode {
    match outcome {
        Outcome::Pass => ExitCode::SUCCESS,
        Outcome::ChecksFailed => ExitCode::from(EXIT_CHECK_FAILED),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(args) => match RunConfig::resolve(&args, None).and_then(|c| commands::generate(&c)) {
            Ok(outcome) => finish(outcome),
            Err(e) => config_error(e),
        },
        Command::Verify(args) => match RunConfig::resolve(&args, None).and_then(|c| commands::verify(&c)) {
            Ok((outcome, failing)) => {
                if outcome == Outcome::ChecksFailed {
                    eprintln!("failed checks:\n{failing}");
                }
                finish(outcome)
            }
            Err(e) => config_error(e),
        },
        Command::Converge { common, ns } => {
            match RunConfig::resolve(&common, ns).and_then(|c| commands::converge(&c)) {
                Ok((outcome, warnings)) => {
                    for w in warnings {
                        eprintln!("warning: {w}");
                    }
                    finish(outcome)
                }
                Err(e) => config_error(e),
            }
        }
        Command::Constants { hurst, config, json } => {
            let resolved = (|| {
                let file = match &config {
                    Some(path) => FileConfig::load(path)?,
                    None => FileConfig::default(),
                };
                let h = hurst
                    .or(file.hurst)
                    .ok_or_else(|| anyhow::anyhow!("--hurst is required (0 < H < 1)"))?;
                let hurst = HurstIndex::new(h).map_err(|e| anyhow::anyhow!("--hurst: {e}"))?;
                commands::constants(hurst, json)
            })();
            match resolved {
                Ok(outcome) => finish(outcome),
                Err(e) => config_error(e),
            }
        }
    }
}
