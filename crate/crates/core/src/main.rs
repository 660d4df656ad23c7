use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pulsed_qubit::harness::{self, AtlasConfig, RunConfig};
use pulsed_qubit::Error;

/// Simulate a pulse-driven two-level system and compare closed-form
/// regimes against exact propagation.
#[derive(Parser)]
#[command(name = "pulsed-qubit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate and write a time series plus summary.
    Evolve(RunArgs),
    /// Compare closed-form propagators with the numerical reference.
    Compare(RunArgs),
    /// Build the regime atlas over a grid of map coordinates.
    Atlas {
        #[command(flatten)]
        run: RunArgs,
        /// Worker threads (default: number of processors).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print map coordinates and the regime report as JSON.
    Classify(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the output directory from the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn load_run(args: &RunArgs) -> pulsed_qubit::Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(dir) = &args.out_dir {
        cfg.output.dir = dir.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> pulsed_qubit::Result<()> {
    let written = match &cli.command {
        Command::Evolve(args) => harness::cmd_evolve(&load_run(args)?)?,
        Command::Compare(args) => harness::cmd_compare(&load_run(args)?)?,
        Command::Atlas { run, jobs } => {
            let mut cfg = AtlasConfig::load(&run.config)?;
            if let Some(dir) = &run.out_dir {
                cfg.output.dir = dir.clone();
            }
            let jobs = match jobs {
                Some(0) => return Err(Error::Config("--jobs must be >= 1".into())),
                Some(n) => *n,
                None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            };
            harness::cmd_atlas(&cfg, jobs)?
        }
        Command::Classify(args) => {
            return harness::cmd_classify(&load_run(args)?, &mut std::io::stdout().lock());
        }
    };
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", harness::error_json(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
