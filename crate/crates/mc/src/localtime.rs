//! Boundary local time of a recorded path, and the induced time change.
//!
//! The clock grows by `kappa * dt / eps` per sample spent in the detection
//! layer and is flat elsewhere; its right-continuous inverse skips excursion
//! intervals, so the time-changed path jumps exactly where the underlying
//! path made an excursion.

use crate::config::PathConfig;
use crate::error::{McError, Result};
use crate::excursion::BoundaryPoint;
use crate::simulate::{decompose_excursions, layer_contact, RecordedPath};
use feller_core::Geometry;

/// Sampled nondecreasing boundary clock with its right-continuous inverse.
#[derive(Debug, Clone)]
pub struct LocalTimeClock {
    pub dt: f64,
    /// Calibration constant applied to the raw layer occupation.
    pub kappa: f64,
    /// Clock value at each sample time; phi[0] = 0.
    phi: Vec<f64>,
}

impl LocalTimeClock {
    /// Clock value at time t (piecewise constant between samples).
    pub fn phi_at(&self, t: f64) -> f64 {
        if self.phi.is_empty() {
            return 0.0;
        }
        let i = ((t / self.dt).floor() as usize).min(self.phi.len() - 1);
        self.phi[i]
    }

    pub fn total(&self) -> f64 {
        *self.phi.last().unwrap_or(&0.0)
    }

    /// Right-continuous inverse: the first time the clock exceeds `s`, or
    /// `None` when it never does (inf of the empty set).
    pub fn tau(&self, s: f64) -> Option<f64> {
        let idx = self.phi.partition_point(|&v| v <= s);
        if idx >= self.phi.len() {
            None
        } else {
            Some(idx as f64 * self.dt)
        }
    }

    /// Index of the sample whose layer occupation pushed the clock past `s`.
    pub fn tau_index(&self, s: f64) -> Option<usize> {
        let idx = self.phi.partition_point(|&v| v <= s);
        if idx >= self.phi.len() {
            None
        } else {
            Some(idx - 1)
        }
    }
}

/// Accumulates the boundary clock of a recorded path.
pub fn build_local_time(
    path: &RecordedPath,
    cfg: &PathConfig,
    kappa: f64,
) -> Result<LocalTimeClock> {
    match path.geometry {
        Geometry::Interval01 | Geometry::UnitDisk => {}
        _ => {
            return Err(McError::UnsupportedGeometry(
                "local time is built on the recurrent model geometries".into(),
            ))
        }
    }
    let eps = cfg.eps_layer();
    let increment = kappa * cfg.dt / eps;
    let mut phi = Vec::with_capacity(path.len());
    let mut acc = 0.0;
    phi.push(0.0);
    for p in path.positions.iter().take(path.len().saturating_sub(1)) {
        if layer_contact(&path.geometry, p, eps).is_some() {
            acc += increment;
        }
        phi.push(acc);
    }
    Ok(LocalTimeClock { dt: path.dt, kappa, phi })
}

/// One jump of the time-changed boundary path.
#[derive(Debug, Clone, Copy)]
pub struct Jump {
    pub path_id: u64,
    /// Boundary time at which the jump occurs.
    pub boundary_time: f64,
    pub from: BoundaryPoint,
    pub to: BoundaryPoint,
    /// Intrinsic jump size (arc distance, chord, or endpoint swap).
    pub size: f64,
}

/// The boundary path Y_t = X_{tau_t}: positions on a uniform boundary-time
/// grid plus the jump list induced by the excursions of X.
#[derive(Debug, Clone)]
pub struct TimeChangedPath {
    pub geometry: Geometry,
    pub grid_step: f64,
    pub samples: Vec<(f64, BoundaryPoint)>,
    pub jumps: Vec<Jump>,
    pub total_boundary_time: f64,
}

/// Builds the time-changed boundary path from a recorded path and its clock.
///
/// Every registered excursion of X with distinct endpoints shows up as
/// exactly one jump of Y, stamped with the clock value at the excursion
/// start (the clock is flat across the excursion).
pub fn time_change(
    path: &RecordedPath,
    clock: &LocalTimeClock,
    cfg: &PathConfig,
    grid_step: f64,
) -> Result<TimeChangedPath> {
    if !(grid_step > 0.0) {
        return Err(McError::InvalidConfig("grid step must be positive".into()));
    }
    let eps = cfg.eps_layer();
    let total = clock.total();
    let mut samples = Vec::new();
    let mut s = 0.0;
    while s < total {
        if let Some(idx) = clock.tau_index(s) {
            if let Some(bp) = layer_contact(&path.geometry, &path.positions[idx], eps) {
                samples.push((s, bp));
            }
        }
        s += grid_step;
    }
    let jumps = decompose_excursions(path, cfg)?
        .into_iter()
        .map(|r| Jump {
            path_id: r.path_id,
            boundary_time: clock.phi_at(r.start_time),
            from: r.start,
            to: r.end,
            size: r.start.distance(&r.end),
        })
        .collect();
    Ok(TimeChangedPath {
        geometry: path.geometry,
        grid_step,
        samples,
        jumps,
        total_boundary_time: total,
    })
}

/// Empirical jump-rate measure of a time-changed boundary path.
///
/// Each entry of `pairs` weighs a jump by f(from) g(to); the rate is the
/// weighted count divided by the total boundary time. The supports of every
/// pair must be separated by at least `delta_min`, matching the registration
/// threshold that produced the jumps.
pub fn path_jump_census(
    y: &TimeChangedPath,
    pairs: &[(feller_core::BoundaryFunction, feller_core::BoundaryFunction)],
    delta_min: f64,
) -> Result<Vec<(f64, f64)>> {
    for (f, g) in pairs {
        match f.support_separation(g) {
            Some(sep) if sep >= delta_min => {}
            Some(sep) => {
                return Err(McError::EstimatorInvalid(format!(
                    "bin supports are {sep:.3} apart but jumps below {delta_min:.3} \
                     were discarded"
                )))
            }
            None => {
                return Err(McError::EstimatorInvalid(
                    "jump census bins need indicator-type boundary data".into(),
                ))
            }
        }
    }
    let eval = |f: &feller_core::BoundaryFunction, p: &BoundaryPoint| -> f64 {
        match p {
            BoundaryPoint::Endpoint(e) => f.eval_endpoint(*e as usize).unwrap_or(0.0),
            BoundaryPoint::Angle(a) => f.eval_angle(*a).unwrap_or(0.0),
            BoundaryPoint::Sphere(q) => f.eval_sphere(q).unwrap_or(0.0),
            BoundaryPoint::Cemetery => 0.0,
        }
    };
    let total = y.total_boundary_time;
    Ok(pairs
        .iter()
        .map(|(f, g)| {
            let count: f64 = y.jumps.iter().map(|j| eval(f, &j.from) * eval(g, &j.to)).sum();
            let rate = if total > 0.0 { count / total } else { 0.0 };
            (count, rate)
        })
        .collect())
}
