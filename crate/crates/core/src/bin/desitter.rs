use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use desitter::scenario::commands::{execute, exit_status, Command, Options};

/// Perturbations of dust FLRW with a cosmological constant and their approach
/// to De Sitter. The output root defaults to $DESITTER_OUT.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Scenario TOML file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the grid size.
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    /// Override the random-mode seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Exit with status 4 when a recorded verdict fails.
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    Background,
    FirstOrder,
    SecondOrder,
    Diagnose,
    /// Run a figure preset (figure1, figure2), or with --from extract a
    /// series (theta2, phi2_asymptote) from a run directory.
    Figures {
        name: String,
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Run the acceptance criteria (all, or the listed ids).
    Check {
        ids: Vec<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.cmd {
        Cmd::Background => Command::Background,
        Cmd::FirstOrder => Command::FirstOrder,
        Cmd::SecondOrder => Command::SecondOrder,
        Cmd::Diagnose => Command::Diagnose,
        Cmd::Figures { name, from } => Command::Figures { name, from },
        Cmd::Check { ids } => Command::Check { ids },
    };
    let opts = Options {
        config: cli.config,
        out: cli.out,
        grid_n: cli.grid_n,
        seed: cli.seed,
        check: cli.check,
    };
    match execute(&cmd, &opts) {
        Ok(report) => {
            for l in &report.lines {
                println!("{l}");
            }
            if let Some(d) = &report.out_dir {
                println!("output: {}", d.display());
            }
            for (k, v) in &report.verdicts {
                println!("{k}: {}", if *v { "pass" } else { "FAIL" });
            }
            ExitCode::from(exit_status(&cmd, &opts, &report))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
