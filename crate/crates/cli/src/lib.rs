//! Experiment driver: configuration, CSV/SVG artifacts and the
//! `pspin | train | analyze | sweep` subcommands.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod manifest;
pub mod svg;

use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};

/// Environment variable that overrides `--out-dir`.
pub const OUT_ENV: &str = "QUENCHLAB_OUT";
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Pspin,
    Train,
    Analyze,
    Sweep,
}

/// `QUENCHLAB_OUT` if set and non-empty, else the flag, else `out`.
pub fn resolve_out_dir(flag: Option<PathBuf>, env: Option<String>) -> PathBuf {
    match env.filter(|v| !v.is_empty()) {
        Some(v) => PathBuf::from(v),
        None => flag.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
    }
}

/// Runs one subcommand and returns the files it wrote.
pub fn execute(command: Command, config: &Path, out: &Path) -> CliResult<Vec<PathBuf>> {
    let cfg = ExperimentConfig::load(config)?;
    match command {
        Command::Pspin => commands::cmd_pspin(&cfg, out),
        Command::Train => commands::cmd_train(&cfg, out).map(|o| o.files),
        Command::Analyze => commands::cmd_analyze(&cfg, out).map(|o| o.files),
        Command::Sweep => {
            commands::cmd_sweep(&cfg, out)?;
            Ok(vec![out.join(commands::SWEEP_FILE)])
        }
    }
}

/// Sizes the global worker pool. Has no effect without the `parallel`
/// feature.
pub fn set_threads(n: usize) -> CliResult<()> {
    if n == 0 {
        return Err(CliError::Config("--threads must be >= 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    Ok(())
}
