//! Experiment runner for the boundary-trace laboratory: a catalog of named
//! experiments binding the closed-form, spectral, quadrature and Monte Carlo
//! routes to the identities they verify, with plain-text configuration and
//! JSON reports.

pub mod config;
pub mod error;
pub mod experiments;
pub mod plot;
pub mod report;
pub mod targets;

pub use config::{RunConfig, OUT_DIR_ENV};
pub use error::LabError;
pub use experiments::{catalog, run_experiment, ExperimentSpec, Route};
pub use plot::emit_plot_data;
pub use report::{CheckRow, VerificationReport};
