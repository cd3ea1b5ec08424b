use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use menshov_cli::{execute, Command, Overrides};

/// Numerical checks for Menshov's correction theorem over finite Borel
/// measures.
#[derive(Parser)]
#[command(name = "menshov", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fourier-Stieltjes coefficients, Cesàro averages and the index set Λ̃.
    WienerScan(Args),
    /// M-set masses along Λ̃ against τμ(I).
    MsetLimit(Args),
    /// Corrector layout, ψ and its property checks.
    Corrector(Args),
    /// One run of the Claim with certification of μ(E).
    Claim(Args),
    /// One Claim round for a target function, with partial-sum diagnostics.
    Demo(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON run config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: menshov-out/<subcommand>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Worker threads for the parallel scans.
    #[arg(long)]
    workers: Option<usize>,
    /// Override a config field, e.g. `--set claim.nu=20`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::WienerScan(a) => (Command::WienerScan, a),
        Cmd::MsetLimit(a) => (Command::MsetLimit, a),
        Cmd::Corrector(a) => (Command::Corrector, a),
        Cmd::Claim(a) => (Command::Claim, a),
        Cmd::Demo(a) => (Command::Demo, a),
    };
    let overrides = Overrides {
        out: args.out,
        plot: args.plot,
        workers: args.workers,
        set: args.set,
    };
    match execute(command, &args.config, &overrides) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("menshov {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
