//! Monte Carlo benchmark harness and CLI for the spiked-covariance
//! estimators in [`spikedcov`].
//!
//! The library side exposes three layers:
//!
//! * [`config`] — experiment description: problem size, heavy-tail indices,
//!   sample-size grid, metric rule, methods, solver settings; parsed from a
//!   small INI dialect.
//! * [`experiment`] — the seeded trial runner: draws a truth and a data set
//!   per trial, runs the configured estimators, evaluates error measures and
//!   Cramér-Rao bounds at the truth, and aggregates everything into dB
//!   summary rows.
//! * [`io`] — CSV/JSON writers for trial records, summaries, bound tables
//!   and estimate factors.
//!
//! The `bench` binary wires these together behind `run`, `bounds` and
//! `estimate` subcommands.

pub mod config;
pub mod experiment;
pub mod io;

use spikedcov::CoreError;

/// Harness-level error: configuration problems, I/O failures, or numeric
/// errors bubbling up from the core library.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    /// Invalid configuration file, CLI arguments or input values.
    #[error("config error: {0}")]
    Config(String),

    /// Filesystem failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// CSV serialization failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// Failure from the estimation library.
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl BenchError {
    /// Process exit code: 2 for configuration/input errors, 3 for I/O
    /// failures, 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Io(_) => 3,
            BenchError::Csv(_) => 3,
            BenchError::Core(CoreError::Io(_)) => 3,
            BenchError::Core(CoreError::Parse { .. }) => 2,
            BenchError::Core(CoreError::InvalidParam(_)) => 2,
            BenchError::Core(_) => 1,
        }
    }
}

pub type BenchResult<T> = std::result::Result<T, BenchError>;

pub use config::{ExperimentConfig, Method, MetricRule, SolverSettings, DEFAULT_N_GRID};
pub use experiment::{
    run_experiment, trial_seed, truth_seed, BoundSample, RunOutput, SummaryRow, TrialRecord,
};
