use crate::error::{McError, Result};
use feller_core::Geometry;

/// Discretization and sampling parameters for the path engines.
///
/// The boundary layer used for contact detection and local time has width
/// `layer_factor * sqrt(dt)`; paths are advanced by Gaussian increments of
/// variance `dt` per coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    /// Time step of the Euler scheme.
    pub dt: f64,
    /// Census window (paths run slightly longer to close a straddling excursion).
    pub horizon: f64,
    /// Layer width multiplier c in eps = c sqrt(dt).
    pub layer_factor: f64,
    /// Master seed; path i consumes the stream (seed, i) regardless of
    /// execution order or thread count.
    pub seed: u64,
    /// Number of independent paths.
    pub n_paths: u64,
    /// Escape-protocol radius for exterior geometry.
    pub r_escape: Option<f64>,
    /// Excursions with endpoints closer than this are discarded (the kernel
    /// is not integrable at the diagonal, and every estimator pairs the
    /// census with data vanishing there).
    pub delta_min: f64,
}

impl PathConfig {
    pub fn new(dt: f64, horizon: f64, n_paths: u64, seed: u64) -> Self {
        PathConfig {
            dt,
            horizon,
            layer_factor: 5.0,
            seed,
            n_paths,
            r_escape: None,
            delta_min: 0.5,
        }
    }

    pub fn with_layer_factor(mut self, c: f64) -> Self {
        self.layer_factor = c;
        self
    }

    pub fn with_delta_min(mut self, d: f64) -> Self {
        self.delta_min = d;
        self
    }

    pub fn with_r_escape(mut self, r: f64) -> Self {
        self.r_escape = Some(r);
        self
    }

    /// Boundary-layer width c sqrt(dt).
    pub fn eps_layer(&self) -> f64 {
        self.layer_factor * self.dt.sqrt()
    }

    pub fn validate(&self, geom: &Geometry) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(McError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.horizon < 100.0 * self.dt {
            return Err(McError::InvalidConfig(format!(
                "horizon {} must cover at least 100 steps of dt {}",
                self.horizon, self.dt
            )));
        }
        if !(self.layer_factor > 0.0) {
            return Err(McError::InvalidConfig("layer factor must be positive".into()));
        }
        if self.n_paths == 0 {
            return Err(McError::InvalidConfig("need at least one path".into()));
        }
        if let Geometry::BallExterior { radius, .. } = geom {
            match self.r_escape {
                Some(re) if re > *radius => {}
                Some(re) => {
                    return Err(McError::InvalidConfig(format!(
                        "escape radius {re} must exceed the boundary radius {radius}"
                    )))
                }
                None => {
                    return Err(McError::InvalidConfig(
                        "exterior geometry needs an escape radius".into(),
                    ))
                }
            }
        }
        Ok(())
    }
}
