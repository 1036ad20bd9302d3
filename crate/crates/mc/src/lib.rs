//! Monte Carlo engine for reflected diffusions on the model domains:
//! path simulation, excursion decomposition, boundary local time, the
//! time-changed boundary process, and streaming censuses of excursion
//! endpoints, jumps and escapes.
//!
//! Determinism: path `i` consumes the counter-based stream `(seed, i)` and
//! all reductions run in fixed chunk order, so identical (seed, config)
//! inputs give bit-identical censuses on any thread count.

// `!(x > 0)`-style guards are deliberate: they reject NaN inputs too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod census;
pub mod config;
pub mod error;
pub mod escape;
pub mod estimators;
pub mod excursion;
pub mod localtime;
pub mod rng;
pub mod simulate;

pub use census::{write_excursions_csv, write_jumps_csv, ExcursionCensus};
pub use config::PathConfig;
pub use error::{McError, Result};
pub use escape::{
    estimate_escape_measure, estimate_escape_measures, first_hits_from, hit_fraction_from,
    EscapeEstimate,
};
pub use estimators::{
    calibrate_local_time, estimate_feller_measure, occupation_histogram, run_excursion_census,
    CensusOutcome, Estimate, LocalTimeCalibration,
};
pub use excursion::{BoundaryPoint, ExcursionRecord, ExcursionTracker};
pub use localtime::{
    build_local_time, path_jump_census, time_change, Jump, LocalTimeClock, TimeChangedPath,
};
pub use simulate::{decompose_excursions, simulate_reflected_path, PathEnd, RecordedPath};
