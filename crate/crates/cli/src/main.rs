use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mehpp_cli::{execute, Command};

#[derive(Parser)]
#[command(
    name = "mehpp",
    version,
    about = "Magneto-elastic hysteresis pump models"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Pressure profiles, stationary points and the critical coefficient.
    Analyze(Common),
    /// Quasi-static hysteresis loop of a single membrane.
    Cycle(Common),
    /// Time-resolved flow through a chain of cells.
    Pump(Common),
    /// One metric over a parameter grid.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Analyze(a) => (Command::Analyze, a),
        Sub::Cycle(a) => (Command::Cycle, a),
        Sub::Pump(a) => (Command::Pump, a),
        Sub::Sweep(a) => (Command::Sweep, a),
    };
    match execute(command, &args.config, args.out.as_deref(), args.svg) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
