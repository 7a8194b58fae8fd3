use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spopo_cli::{run, Command};

#[derive(Parser)]
#[command(name = "spopo", version, about = "Quantum noise of synchronously pumped OPOs below threshold")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Io {
    /// Scenario configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Recorded in the output metadata; no stage is stochastic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Sub {
    /// Supermode gains and mode functions.
    Supermodes(Io),
    /// Squeezing spectra of the frequency combs.
    Squeezing(Io),
    /// Pulse covariance, minimum variance and Duan sums.
    Pulses(Io),
    /// Time-delay estimation bounds and optimal probe.
    Metrology(Io),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, io) = match cli.command {
        Sub::Supermodes(io) => (Command::Supermodes, io),
        Sub::Squeezing(io) => (Command::Squeezing, io),
        Sub::Pulses(io) => (Command::Pulses, io),
        Sub::Metrology(io) => (Command::Metrology, io),
    };
    match run(command, &io.config, &io.out, io.seed) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
