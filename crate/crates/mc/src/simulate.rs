//! Reflected Euler paths on the model domains.
//!
//! Increments are sqrt(dt) N(0, I) per coordinate. The interval folds at both
//! endpoints; the disk reflects the radial overshoot back inside along the
//! inward normal; the exterior shell absorbs on the sphere and hands control
//! to the escape protocol at the outer radius. A step that lands further than
//! 10 sqrt(dt) past the boundary aborts the run as unstable.

use crate::config::PathConfig;
use crate::error::{McError, Result};
use crate::excursion::{BoundaryPoint, ExcursionRecord, ExcursionTracker};
use crate::rng::path_rng;
use feller_core::Geometry;
use rand::Rng;
use rand_distr::StandardNormal;

const TAU: f64 = std::f64::consts::TAU;

/// A path stored sample-by-sample, for diagnostics and the path-level
/// operations (excursion decomposition, local time, time change). The large
/// estimators stream instead of recording.
#[derive(Debug, Clone)]
pub struct RecordedPath {
    pub geometry: Geometry,
    pub dt: f64,
    /// Sample positions, padded to three coordinates.
    pub positions: Vec<[f64; 3]>,
    pub ended: PathEnd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathEnd {
    /// Ran to the configured horizon (recurrent geometries).
    Horizon,
    /// Absorbed on the boundary sphere (exterior geometry).
    Hit,
    /// Certified escape at the outer radius (exterior geometry).
    Escaped,
}

impl RecordedPath {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn time_of(&self, index: usize) -> f64 {
        index as f64 * self.dt
    }
}

/// Folds a coordinate into [0, 1] and reports how far it overshot.
#[inline]
pub(crate) fn fold_unit(x: f64) -> (f64, f64) {
    let mut y = x;
    let mut overshoot = 0.0f64;
    loop {
        if y < 0.0 {
            overshoot = overshoot.max(-y);
            y = -y;
        } else if y > 1.0 {
            overshoot = overshoot.max(y - 1.0);
            y = 2.0 - y;
        } else {
            return (y, overshoot);
        }
    }
}

/// Mirrors a point outside the unit circle back inside; returns the overshoot.
#[inline]
pub(crate) fn reflect_disk(x: &mut f64, y: &mut f64, r2: f64) -> f64 {
    if r2 <= 1.0 {
        return 0.0;
    }
    let r = r2.sqrt();
    let scale = (2.0 - r) / r;
    *x *= scale;
    *y *= scale;
    r - 1.0
}

const MAX_RECORDED_STEPS: u64 = 20_000_000;

/// Simulates one reflected path and records every sample.
pub fn simulate_reflected_path(
    geom: &Geometry,
    x0: &[f64],
    cfg: &PathConfig,
) -> Result<RecordedPath> {
    cfg.validate(geom)?;
    let steps = (cfg.horizon / cfg.dt).round() as u64;
    if steps > MAX_RECORDED_STEPS {
        return Err(McError::InvalidConfig(format!(
            "{steps} samples is too large to record; use the streaming estimators"
        )));
    }
    let mut rng = path_rng(cfg.seed, 0);
    let mut noise = move || rng.sample::<f64, _>(StandardNormal);
    simulate_with_noise(geom, x0, cfg, steps, &mut noise)
}

/// Core stepper with an injectable noise source (tests force it to zero).
pub(crate) fn simulate_with_noise(
    geom: &Geometry,
    x0: &[f64],
    cfg: &PathConfig,
    steps: u64,
    noise: &mut dyn FnMut() -> f64,
) -> Result<RecordedPath> {
    let s = cfg.dt.sqrt();
    let limit = 10.0 * s;
    let mut positions = Vec::with_capacity(steps as usize + 1);
    let mut ended = PathEnd::Horizon;
    match *geom {
        Geometry::Interval01 => {
            let mut x = x0[0];
            if !(0.0..=1.0).contains(&x) {
                return Err(McError::InvalidConfig(format!("start {x} not in [0, 1]")));
            }
            positions.push([x, 0.0, 0.0]);
            for _ in 0..steps {
                let (nx, overshoot) = fold_unit(x + s * noise());
                if overshoot > limit {
                    return Err(McError::Instability { overshoot, limit });
                }
                x = nx;
                positions.push([x, 0.0, 0.0]);
            }
        }
        Geometry::UnitDisk => {
            let (mut x, mut y) = (x0[0], x0[1]);
            if x * x + y * y > 1.0 {
                return Err(McError::InvalidConfig("start outside the closed disk".into()));
            }
            positions.push([x, y, 0.0]);
            for _ in 0..steps {
                x += s * noise();
                y += s * noise();
                let r2 = x * x + y * y;
                let overshoot = reflect_disk(&mut x, &mut y, r2);
                if overshoot > limit {
                    return Err(McError::Instability { overshoot, limit });
                }
                positions.push([x, y, 0.0]);
            }
        }
        Geometry::BallExterior { dim, radius } => {
            if dim != 3 {
                return Err(McError::UnsupportedGeometry(
                    "exterior simulation is implemented for d = 3".into(),
                ));
            }
            let r_escape = cfg.r_escape.unwrap();
            let mut p = [x0[0], x0[1], x0[2]];
            let r0: f64 = p.iter().map(|c| c * c).sum::<f64>().sqrt();
            if r0 < radius || r0 > r_escape {
                return Err(McError::InvalidConfig(format!(
                    "start radius {r0} outside the shell [{radius}, {r_escape}]"
                )));
            }
            positions.push(p);
            for _ in 0..steps {
                for c in &mut p {
                    *c += s * noise();
                }
                let r2: f64 = p.iter().map(|c| c * c).sum();
                if r2 <= radius * radius {
                    let r = r2.sqrt();
                    if radius - r > limit {
                        return Err(McError::Instability { overshoot: radius - r, limit });
                    }
                    for c in &mut p {
                        *c *= radius / r;
                    }
                    positions.push(p);
                    ended = PathEnd::Hit;
                    break;
                }
                positions.push(p);
                if r2 >= r_escape * r_escape {
                    // recording stops at the protocol boundary; the streaming
                    // escape engine handles the certified draw
                    ended = PathEnd::Escaped;
                    break;
                }
            }
        }
        _ => {
            return Err(McError::UnsupportedGeometry(format!(
                "path simulation covers the interval, the disk and the exterior shell, not {geom:?}"
            )))
        }
    }
    Ok(RecordedPath { geometry: *geom, dt: cfg.dt, positions, ended })
}

/// Layer classification of a recorded sample: `Some(snapped point)` when the
/// sample lies in the detection layer.
pub(crate) fn layer_contact(geom: &Geometry, p: &[f64; 3], eps: f64) -> Option<BoundaryPoint> {
    match *geom {
        Geometry::Interval01 => {
            let x = p[0];
            if x <= eps {
                Some(BoundaryPoint::Endpoint(0))
            } else if x >= 1.0 - eps {
                Some(BoundaryPoint::Endpoint(1))
            } else {
                None
            }
        }
        Geometry::UnitDisk => {
            let r2 = p[0] * p[0] + p[1] * p[1];
            let lr = 1.0 - eps;
            if r2 >= lr * lr {
                Some(BoundaryPoint::Angle(p[1].atan2(p[0]).rem_euclid(TAU)))
            } else {
                None
            }
        }
        Geometry::BallExterior { radius, .. } => {
            let r2: f64 = p.iter().map(|c| c * c).sum();
            let lr = radius + eps;
            if r2 <= lr * lr {
                let r = r2.sqrt();
                Some(BoundaryPoint::Sphere([
                    p[0] * radius / r,
                    p[1] * radius / r,
                    p[2] * radius / r,
                ]))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Splits a recorded path into its registered excursions.
///
/// Maximal stretches outside the detection layer, kept when they last at
/// least two steps and their endpoints are at least `delta_min` apart (or the
/// path escaped). Records are ordered by start time and pairwise disjoint.
pub fn decompose_excursions(path: &RecordedPath, cfg: &PathConfig) -> Result<Vec<ExcursionRecord>> {
    match path.geometry {
        Geometry::Interval01 | Geometry::UnitDisk | Geometry::BallExterior { .. } => {}
        _ => {
            return Err(McError::UnsupportedGeometry(
                "excursion decomposition needs a simulated geometry".into(),
            ))
        }
    }
    let eps = cfg.eps_layer();
    let mut tracker = ExcursionTracker::new(0, 2, cfg.delta_min);
    for (i, p) in path.positions.iter().enumerate() {
        let t = path.time_of(i);
        match layer_contact(&path.geometry, p, eps) {
            Some(bp) => tracker.contact(t, bp, 0.0),
            None => tracker.outside_step(),
        }
    }
    if path.ended == PathEnd::Escaped {
        tracker.escape(path.time_of(path.len() - 1));
    }
    Ok(tracker.records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dt: f64, horizon: f64) -> PathConfig {
        PathConfig::new(dt, horizon, 1, 9)
    }

    #[test]
    fn zero_noise_path_is_constant() {
        let c = cfg(1e-3, 1.0);
        let mut z = || 0.0;
        let path =
            simulate_with_noise(&Geometry::Interval01, &[0.37], &c, 1000, &mut z).unwrap();
        assert!(path.positions.iter().all(|p| p[0] == 0.37));
        let path = simulate_with_noise(&Geometry::UnitDisk, &[0.1, -0.2], &c, 50, &mut z).unwrap();
        assert!(path.positions.iter().all(|p| p[0] == 0.1 && p[1] == -0.2));
    }

    #[test]
    fn folding_keeps_interval() {
        assert_eq!(fold_unit(0.5), (0.5, 0.0));
        assert_eq!(fold_unit(-0.1), (0.1, 0.1));
        assert_eq!(fold_unit(1.25), (0.75, 0.25));
        let (x, _) = fold_unit(2.3); // double fold
        assert!((0.0..=1.0).contains(&x));
    }

    #[test]
    fn recorded_path_stays_inside() {
        let c = cfg(1e-4, 2.0);
        let path = simulate_reflected_path(&Geometry::Interval01, &[0.5], &c).unwrap();
        assert_eq!(path.len(), 20_001);
        assert!(path.positions.iter().all(|p| (0.0..=1.0).contains(&p[0])));
        let path = simulate_reflected_path(&Geometry::UnitDisk, &[0.0, 0.0], &c).unwrap();
        assert!(path.positions.iter().all(|p| p[0] * p[0] + p[1] * p[1] <= 1.0 + 1e-12));
    }

    #[test]
    fn deterministic_given_seed() {
        let c = cfg(1e-4, 1.0);
        let a = simulate_reflected_path(&Geometry::UnitDisk, &[0.3, 0.0], &c).unwrap();
        let b = simulate_reflected_path(&Geometry::UnitDisk, &[0.3, 0.0], &c).unwrap();
        assert_eq!(a.positions, b.positions);
    }

    #[test]
    fn synthetic_sawtooth_decomposition() {
        // hand-built path: starts mid-interval, touches 0, crosses to 1,
        // wiggles briefly, returns to 0
        let dt = 0.01;
        let mut xs: Vec<f64> = Vec::new();
        xs.extend([0.5, 0.3, 0.1, 0.002]); // first contact at index 3
        xs.extend([0.2, 0.4, 0.6, 0.8, 0.999]); // crossing 0 -> 1, contact at 8
        xs.extend([0.9, 0.998]); // one-step wiggle, filtered
        xs.extend([0.7, 0.5, 0.3, 0.001]); // crossing 1 -> 0, contact at 14
        let path = RecordedPath {
            geometry: Geometry::Interval01,
            dt,
            positions: xs.iter().map(|&x| [x, 0.0, 0.0]).collect(),
            ended: PathEnd::Horizon,
        };
        let c = PathConfig::new(dt, 100.0 * dt, 1, 0).with_layer_factor(0.05 / dt.sqrt());
        assert!((c.eps_layer() - 0.05).abs() < 1e-12);
        let records = decompose_excursions(&path, &c).unwrap();
        assert_eq!(records.len(), 2, "records: {records:?}");
        assert_eq!(records[0].start, BoundaryPoint::Endpoint(0));
        assert_eq!(records[0].end, BoundaryPoint::Endpoint(1));
        assert!((records[0].start_time - 3.0 * dt).abs() < 1e-12);
        assert!((records[0].end_time - 8.0 * dt).abs() < 1e-12);
        assert_eq!(records[1].start, BoundaryPoint::Endpoint(1));
        assert_eq!(records[1].end, BoundaryPoint::Endpoint(0));
        // disjoint and ordered
        assert!(records[0].end_time <= records[1].start_time);
    }

    #[test]
    fn path_never_leaving_layer_has_no_excursions() {
        let dt = 0.01;
        let path = RecordedPath {
            geometry: Geometry::Interval01,
            dt,
            positions: vec![[0.01, 0.0, 0.0]; 50],
            ended: PathEnd::Horizon,
        };
        let c = PathConfig::new(dt, 100.0 * dt, 1, 0).with_layer_factor(0.05 / dt.sqrt());
        assert!(decompose_excursions(&path, &c).unwrap().is_empty());
    }

    #[test]
    fn instability_detected() {
        let c = cfg(1e-6, 1e-4);
        let mut huge = || 1.0e4;
        let err = simulate_with_noise(&Geometry::Interval01, &[0.5], &c, 10, &mut huge);
        assert!(matches!(err, Err(McError::Instability { .. })));
    }
}
