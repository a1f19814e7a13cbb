//! Benchmark presets, run loop, output writers and the refinement-study driver
//! behind the `geovar` binary.

pub mod config;
pub mod convergence;
pub mod init;
pub mod presets;
pub mod run;

pub use config::RunConfig;
pub use convergence::{convergence_study, ConvergenceTable};
pub use presets::{load_preset, PRESETS};
pub use run::{run, Simulation};

use geovar::GeovarError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver failed at step {step}: {source}")]
    Solver { step: usize, source: GeovarError },
    #[error(transparent)]
    Geovar(#[from] GeovarError),
}

impl CliError {
    /// 2 for configuration and setup problems, 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver { .. } => 3,
            CliError::Geovar(GeovarError::NoConvergence { .. } | GeovarError::PoissonNoConvergence { .. }) => 3,
            _ => 2,
        }
    }
}
