use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lattice_wiretap_cli::{run, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "lwt", version, about = "Lattice wiretap coding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment configuration (JSON).
    #[arg(long, global = true, default_value = "configs/default.json")]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Volume, minima, dual and flatness checks for the configured field.
    AnalyzeLattice,
    /// Build the nested code and report its parameters.
    DesignCode,
    /// Error-rate sweep over Bob's SNR grid and the leakage decomposition.
    Simulate,
    /// Per-draw bound versus measurement tables.
    Bounds,
    /// Full invariant suite; exits nonzero on any failure.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.output.dir = o;
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let cmd = match cli.command {
        Cmd::AnalyzeLattice => Command::AnalyzeLattice,
        Cmd::DesignCode => Command::DesignCode,
        Cmd::Simulate => Command::Simulate,
        Cmd::Bounds => Command::Bounds,
        Cmd::Verify => Command::Verify,
    };
    match run(cmd, &cfg) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}: some checks failed", cmd.name());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
