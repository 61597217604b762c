//! Config parsing, result files and the `mehpp` command surface.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

pub use commands::{cmd_analyze, cmd_cycle, cmd_pump, cmd_sweep, evaluate_metric};
pub use config::{parse_config, serialize_config, RunConfig, SweepSpec};
pub use error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Cycle,
    Pump,
    Sweep,
}

/// Reads `config_path`, runs `command` and returns the files written.
///
/// `out` overrides `output.dir`; `svg` adds plots on top of `output.svg`.
pub fn execute(
    command: Command,
    config_path: &Path,
    out: Option<&Path>,
    svg: bool,
) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(config_path).map_err(|e| {
        CliError::invalid(
            "config",
            format!("cannot read {}: {e}", config_path.display()),
        )
    })?;
    let cfg = parse_config(&text)?;
    let out = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let svg = svg || cfg.output.svg;
    match command {
        Command::Analyze => cmd_analyze(&cfg, &out, svg),
        Command::Cycle => cmd_cycle(&cfg, &out, svg),
        Command::Pump => cmd_pump(&cfg, &out, svg),
        Command::Sweep => cmd_sweep(&cfg, &out, svg),
    }
}
