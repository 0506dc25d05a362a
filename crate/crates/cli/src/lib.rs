//! Experiment runner for the aerial wireless-power-transfer model: named
//! presets and ad-hoc parameter sweeps, each producing one long-format CSV
//! with analytic and Monte Carlo columns side by side.
//!
//! The binary front-end lives in `main.rs`; this library holds the pieces
//! integration tests drive directly:
//!
//! * [`sweep`] — the [`sweep::SweepSpec`] domain type: swept parameter,
//!   grid, fixed scenario and the quantity/engine/model/orientation facets.
//! * [`presets`] — the named preset catalog.
//! * [`runner`] — parallel sweep execution and deterministic CSV output.

pub mod presets;
pub mod runner;
pub mod sweep;

/// Failures, grouped by process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad invocation, config or sweep spec (exit code 1).
    #[error("{0}")]
    Validation(String),
    /// Engine failure while computing (exit code 2).
    #[error("{0}")]
    Runtime(String),
    /// Filesystem failure (exit code 3).
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}
