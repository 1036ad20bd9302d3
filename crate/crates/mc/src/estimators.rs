//! Streaming estimators over independent reflected paths.
//!
//! Paths start from the normalized interior volume measure, so the expected
//! number of registered excursions with start weighted by f and end weighted
//! by g over a window of length t equals t * U(f (x) g) / m(G). The engines
//! stream one path at a time (nothing is recorded), accumulate per-path
//! statistics in fixed chunk order, and are deterministic for a given
//! (seed, config) regardless of thread count.

use crate::config::PathConfig;
use crate::error::{McError, Result};
use crate::excursion::{BoundaryPoint, ExcursionRecord, ExcursionTracker};
use crate::rng::path_rng;
use crate::simulate::{fold_unit, reflect_disk};
use feller_core::{BoundaryFunction, Geometry};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const TAU: f64 = std::f64::consts::TAU;
const CHUNK: u64 = 1024;
/// Extra simulated time allowed for closing an excursion that straddles the
/// census window.
const COMPLETION_GRACE: f64 = 10.0;

fn eval_boundary(f: &BoundaryFunction, p: &BoundaryPoint) -> f64 {
    match p {
        BoundaryPoint::Endpoint(e) => f.eval_endpoint(*e as usize).unwrap_or(0.0),
        BoundaryPoint::Angle(a) => f.eval_angle(*a).unwrap_or(0.0),
        BoundaryPoint::Sphere(q) => f.eval_sphere(q).unwrap_or(0.0),
        // functions on F extend to the cemetery by zero
        BoundaryPoint::Cemetery => 0.0,
    }
}

/// A point estimate with its 95% confidence half-width from path-level variance.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub ci_half: f64,
    pub n_paths: u64,
}

impl Estimate {
    pub fn contains(&self, target: f64) -> bool {
        (self.value - target).abs() <= self.ci_half
    }
}

/// Per-pair accumulated census statistics.
#[derive(Debug, Clone, Default)]
struct PairSums {
    sum: f64,
    sum_sq: f64,
    sum_cphi: f64,
}

/// Aggregated outcome of a census run.
#[derive(Debug, Clone)]
pub struct CensusOutcome {
    pub geometry: Geometry,
    pub window: f64,
    pub n_paths: u64,
    /// Interior volume (the census normalization).
    pub m_mass: f64,
    pair: Vec<PairSums>,
    /// Raw boundary clock: (time in layer) / eps, summed over paths.
    pub clock_raw_sum: f64,
    pub clock_raw_sq: f64,
    /// Interval only: raw clock split per endpoint.
    pub clock_endpoint_sums: [f64; 2],
    /// Registered records (kept only when requested).
    pub records: Vec<ExcursionRecord>,
    /// Paths whose straddling excursion had to be cut at the grace limit.
    pub truncated: u64,
    /// Records ending in the cemetery (always zero on recurrent interiors).
    pub killed: u64,
}

impl CensusOutcome {
    /// Census estimate of U(f_i (x) g_i): m(G) * mean(pair sum) / window.
    pub fn estimate(&self, i: usize) -> Estimate {
        let n = self.n_paths as f64;
        let mean = self.pair[i].sum / n;
        let var = ((self.pair[i].sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        let scale = self.m_mass / self.window;
        Estimate {
            value: scale * mean,
            ci_half: 1.96 * scale * (var / n).sqrt(),
            n_paths: self.n_paths,
        }
    }

    /// Jump rate per unit calibrated boundary time, scaled by the boundary
    /// mass: count_i / (kappa * clock_raw) * mu(F). Comparable to the
    /// boundary-kernel mass of the bin. The confidence interval comes from
    /// the delta method for the path-level ratio.
    pub fn jump_rate(&self, i: usize, kappa: f64) -> Estimate {
        let n = self.n_paths as f64;
        let mu_mass = self.geometry.boundary_mass();
        let phi_mean = self.clock_raw_sum / n;
        let c_mean = self.pair[i].sum / n;
        let ratio = c_mean / phi_mean;
        // E[(c - ratio * phi)^2] estimated from uncentered sums
        let s = (self.pair[i].sum_sq - 2.0 * ratio * self.pair[i].sum_cphi
            + ratio * ratio * self.clock_raw_sq)
            / n;
        let scale = mu_mass / kappa;
        Estimate {
            value: scale * ratio,
            ci_half: 1.96 * scale * (s.max(0.0) / n).sqrt() / phi_mean,
            n_paths: self.n_paths,
        }
    }

    pub fn pair_count(&self) -> usize {
        self.pair.len()
    }

    /// Total raw pair mass (diagnostics).
    pub fn pair_sum(&self, i: usize) -> f64 {
        self.pair[i].sum
    }
}

/// Per-path scalar totals handed to the chunk accumulator.
#[derive(Debug, Clone, Copy)]
struct PathTotals {
    clock_raw: f64,
    clock_first: f64,
    truncated: bool,
}

#[derive(Debug, Clone)]
struct ChunkOut {
    pair: Vec<PairSums>,
    clock_raw_sum: f64,
    clock_raw_sq: f64,
    clock_endpoint_sums: [f64; 2],
    records: Vec<ExcursionRecord>,
    truncated: u64,
    killed: u64,
}

impl ChunkOut {
    fn new(n_pairs: usize) -> Self {
        ChunkOut {
            pair: vec![PairSums::default(); n_pairs],
            clock_raw_sum: 0.0,
            clock_raw_sq: 0.0,
            clock_endpoint_sums: [0.0; 2],
            records: Vec::new(),
            truncated: 0,
            killed: 0,
        }
    }

    fn absorb_path(
        &mut self,
        pairs: &[(BoundaryFunction, BoundaryFunction)],
        tracker: &ExcursionTracker,
        totals: PathTotals,
        collect: bool,
        window: f64,
    ) {
        let PathTotals { clock_raw, clock_first, truncated } = totals;
        for (i, (f, g)) in pairs.iter().enumerate() {
            let mut c = 0.0;
            for r in &tracker.records {
                if r.start_time < window {
                    c += eval_boundary(f, &r.start) * eval_boundary(g, &r.end);
                }
            }
            self.pair[i].sum += c;
            self.pair[i].sum_sq += c * c;
            self.pair[i].sum_cphi += c * clock_raw;
        }
        self.clock_raw_sum += clock_raw;
        self.clock_raw_sq += clock_raw * clock_raw;
        self.clock_endpoint_sums[0] += clock_first;
        self.clock_endpoint_sums[1] += clock_raw - clock_first;
        self.killed += tracker
            .records
            .iter()
            .filter(|r| r.end == BoundaryPoint::Cemetery)
            .count() as u64;
        if truncated {
            self.truncated += 1;
        }
        if collect {
            self.records.extend(tracker.records.iter().copied());
        }
    }
}

/// Runs the excursion census on the interval or the disk.
///
/// Each entry of `pairs` is a (start-weight, end-weight) pair of boundary
/// functions; the outcome carries one census column per pair. Records are
/// retained only when `collect_records` is set.
pub fn run_excursion_census(
    geom: &Geometry,
    cfg: &PathConfig,
    pairs: &[(BoundaryFunction, BoundaryFunction)],
    collect_records: bool,
) -> Result<CensusOutcome> {
    cfg.validate(geom)?;
    for (f, g) in pairs {
        f.check_geometry(geom)?;
        g.check_geometry(geom)?;
    }
    let m_mass = match geom {
        Geometry::Interval01 => 1.0,
        Geometry::UnitDisk => std::f64::consts::PI,
        _ => {
            return Err(McError::UnsupportedGeometry(
                "the excursion census runs on the interval and the disk; escapes \
                 are estimated by the dedicated exterior engine"
                    .into(),
            ))
        }
    };

    let n_chunks = cfg.n_paths.div_ceil(CHUNK);
    let chunk_outs: Result<Vec<ChunkOut>> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut out = ChunkOut::new(pairs.len());
            let lo = ci * CHUNK;
            let hi = ((ci + 1) * CHUNK).min(cfg.n_paths);
            for p in lo..hi {
                match geom {
                    Geometry::Interval01 => {
                        census_path_interval(p, cfg, pairs, collect_records, &mut out)?
                    }
                    Geometry::UnitDisk => {
                        census_path_disk(p, cfg, pairs, collect_records, &mut out)?
                    }
                    _ => unreachable!(),
                }
            }
            Ok(out)
        })
        .collect();
    let chunk_outs = chunk_outs?;

    let mut outcome = CensusOutcome {
        geometry: *geom,
        window: cfg.horizon,
        n_paths: cfg.n_paths,
        m_mass,
        pair: vec![PairSums::default(); pairs.len()],
        clock_raw_sum: 0.0,
        clock_raw_sq: 0.0,
        clock_endpoint_sums: [0.0; 2],
        records: Vec::new(),
        truncated: 0,
        killed: 0,
    };
    for c in chunk_outs {
        for (dst, src) in outcome.pair.iter_mut().zip(&c.pair) {
            dst.sum += src.sum;
            dst.sum_sq += src.sum_sq;
            dst.sum_cphi += src.sum_cphi;
        }
        outcome.clock_raw_sum += c.clock_raw_sum;
        outcome.clock_raw_sq += c.clock_raw_sq;
        outcome.clock_endpoint_sums[0] += c.clock_endpoint_sums[0];
        outcome.clock_endpoint_sums[1] += c.clock_endpoint_sums[1];
        outcome.truncated += c.truncated;
        outcome.killed += c.killed;
        outcome.records.extend(c.records);
    }
    Ok(outcome)
}

fn census_path_interval(
    path_id: u64,
    cfg: &PathConfig,
    pairs: &[(BoundaryFunction, BoundaryFunction)],
    collect: bool,
    out: &mut ChunkOut,
) -> Result<()> {
    let dt = cfg.dt;
    let s = dt.sqrt();
    let eps = cfg.eps_layer();
    let limit = 10.0 * s;
    let clock_per_step = dt / eps;
    let horizon = cfg.horizon;
    let hard_stop = horizon + COMPLETION_GRACE;

    let mut rng = path_rng(cfg.seed, path_id);
    let mut x: f64 = rng.gen();
    let mut tracker = ExcursionTracker::new(path_id, 2, cfg.delta_min);
    let mut steps_in: u64 = 0;
    let mut steps_in_first: u64 = 0;
    let mut t = 0.0f64;
    let mut truncated = false;

    loop {
        if x <= eps {
            tracker.contact(t, BoundaryPoint::Endpoint(0), steps_in as f64 * clock_per_step);
            if t < horizon {
                steps_in += 1;
                steps_in_first += 1;
            }
        } else if x >= 1.0 - eps {
            tracker.contact(t, BoundaryPoint::Endpoint(1), steps_in as f64 * clock_per_step);
            if t < horizon {
                steps_in += 1;
            }
        } else {
            tracker.outside_step();
        }

        if t >= horizon {
            match tracker.open_excursion_start() {
                Some(st) if st < horizon => {
                    if t >= hard_stop {
                        truncated = true;
                        break;
                    }
                }
                _ => break,
            }
        }

        let (nx, overshoot) = fold_unit(x + s * rng.sample::<f64, _>(StandardNormal));
        if overshoot > limit {
            return Err(McError::Instability { overshoot, limit });
        }
        x = nx;
        t += dt;
    }

    out.absorb_path(
        pairs,
        &tracker,
        PathTotals {
            clock_raw: steps_in as f64 * clock_per_step,
            clock_first: steps_in_first as f64 * clock_per_step,
            truncated,
        },
        collect,
        horizon,
    );
    Ok(())
}

fn census_path_disk(
    path_id: u64,
    cfg: &PathConfig,
    pairs: &[(BoundaryFunction, BoundaryFunction)],
    collect: bool,
    out: &mut ChunkOut,
) -> Result<()> {
    let dt = cfg.dt;
    let s = dt.sqrt();
    let eps = cfg.eps_layer();
    let limit = 10.0 * s;
    let clock_per_step = dt / eps;
    let horizon = cfg.horizon;
    let hard_stop = horizon + COMPLETION_GRACE;
    let layer_r = 1.0 - eps;
    let layer_r2 = layer_r * layer_r;

    let mut rng = path_rng(cfg.seed, path_id);
    // uniform by area
    let r0 = rng.gen::<f64>().sqrt();
    let th0 = TAU * rng.gen::<f64>();
    let (mut x, mut y) = (r0 * th0.cos(), r0 * th0.sin());
    let mut tracker = ExcursionTracker::new(path_id, 2, cfg.delta_min);
    let mut steps_in: u64 = 0;
    let mut t = 0.0f64;
    let mut truncated = false;

    loop {
        let r2 = x * x + y * y;
        if r2 >= layer_r2 {
            let ang = y.atan2(x).rem_euclid(TAU);
            tracker.contact(t, BoundaryPoint::Angle(ang), steps_in as f64 * clock_per_step);
            if t < horizon {
                steps_in += 1;
            }
        } else {
            tracker.outside_step();
        }

        if t >= horizon {
            match tracker.open_excursion_start() {
                Some(st) if st < horizon => {
                    if t >= hard_stop {
                        truncated = true;
                        break;
                    }
                }
                _ => break,
            }
        }

        x += s * rng.sample::<f64, _>(StandardNormal);
        y += s * rng.sample::<f64, _>(StandardNormal);
        let r2n = x * x + y * y;
        if r2n > 1.0 {
            let overshoot = reflect_disk(&mut x, &mut y, r2n);
            if overshoot > limit {
                return Err(McError::Instability { overshoot, limit });
            }
        }
        t += dt;
    }

    out.absorb_path(
        pairs,
        &tracker,
        PathTotals {
            clock_raw: steps_in as f64 * clock_per_step,
            clock_first: 0.0,
            truncated,
        },
        collect,
        horizon,
    );
    Ok(())
}

/// Census estimate of the boundary measure mass U(f (x) g).
///
/// Requires the supports of f and g to be separated by at least the
/// registration threshold, so that discarded near-diagonal excursions carry
/// no weight.
pub fn estimate_feller_measure(
    geom: &Geometry,
    f: &BoundaryFunction,
    g: &BoundaryFunction,
    cfg: &PathConfig,
) -> Result<Estimate> {
    match f.support_separation(g) {
        Some(sep) if sep >= cfg.delta_min => {}
        Some(sep) => {
            return Err(McError::EstimatorInvalid(format!(
                "supports of f and g are {sep:.3} apart but excursions below \
                 {:.3} are discarded",
                cfg.delta_min
            )))
        }
        None => {
            return Err(McError::EstimatorInvalid(
                "support separation is only defined for indicator-type data; \
                 the census estimator needs it to stay clear of the diagonal"
                    .into(),
            ))
        }
    }
    let outcome = run_excursion_census(geom, cfg, &[(f.clone(), g.clone())], false)?;
    Ok(outcome.estimate(0))
}

/// Outcome of the interval calibration experiment fixing the local-time
/// normalization constant.
#[derive(Debug, Clone, Copy)]
pub struct LocalTimeCalibration {
    /// Multiplier applied to the raw layer clock.
    pub kappa: f64,
    /// Total endpoint crossings observed (both directions).
    pub crossings: f64,
    /// Total raw clock over all paths.
    pub clock_raw: f64,
    pub n_paths: u64,
}

/// Fixes kappa so that interval endpoint crossings per unit of calibrated
/// local time at each endpoint equal the known endpoint pairing value 1/2.
/// The constant is then frozen and reused for every geometry simulated with
/// the same scheme settings.
pub fn calibrate_local_time(cfg: &PathConfig) -> Result<LocalTimeCalibration> {
    let pairs = [
        (
            BoundaryFunction::endpoint_indicator(0),
            BoundaryFunction::endpoint_indicator(1),
        ),
        (
            BoundaryFunction::endpoint_indicator(1),
            BoundaryFunction::endpoint_indicator(0),
        ),
    ];
    let out = run_excursion_census(&Geometry::Interval01, cfg, &pairs, false)?;
    let crossings = out.pair_sum(0) + out.pair_sum(1);
    let clock_raw = out.clock_raw_sum;
    if clock_raw <= 0.0 || crossings <= 0.0 {
        return Err(McError::EstimatorInvalid(
            "calibration run observed no boundary activity; lengthen the horizon".into(),
        ));
    }
    // crossings / (kappa * clock_raw) * mu(F) = 2 * endpoint pairing = 1
    Ok(LocalTimeCalibration {
        kappa: 2.0 * crossings / clock_raw,
        crossings,
        clock_raw,
        n_paths: out.n_paths,
    })
}

/// Per-path occupation fractions over equal-measure interior bins, used to
/// check that the reflected scheme preserves the stationary volume measure.
pub fn occupation_histogram(
    geom: &Geometry,
    cfg: &PathConfig,
    n_bins: usize,
) -> Result<Vec<Estimate>> {
    cfg.validate(geom)?;
    let steps = (cfg.horizon / cfg.dt).round() as u64;
    let s = cfg.dt.sqrt();
    let n_chunks = cfg.n_paths.div_ceil(CHUNK);

    #[derive(Clone)]
    struct Occ {
        sum: Vec<f64>,
        sum_sq: Vec<f64>,
    }

    let chunk_outs: Result<Vec<Occ>> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut occ = Occ { sum: vec![0.0; n_bins], sum_sq: vec![0.0; n_bins] };
            let lo = ci * CHUNK;
            let hi = ((ci + 1) * CHUNK).min(cfg.n_paths);
            let mut counts = vec![0u64; n_bins];
            for p in lo..hi {
                let mut rng = path_rng(cfg.seed, p);
                counts.iter_mut().for_each(|c| *c = 0);
                match geom {
                    Geometry::Interval01 => {
                        let mut x: f64 = rng.gen();
                        for _ in 0..steps {
                            let (nx, overshoot) =
                                fold_unit(x + s * rng.sample::<f64, _>(StandardNormal));
                            if overshoot > 10.0 * s {
                                return Err(McError::Instability { overshoot, limit: 10.0 * s });
                            }
                            x = nx;
                            let b = ((x * n_bins as f64) as usize).min(n_bins - 1);
                            counts[b] += 1;
                        }
                    }
                    Geometry::UnitDisk => {
                        let r0 = rng.gen::<f64>().sqrt();
                        let th0 = TAU * rng.gen::<f64>();
                        let (mut x, mut y) = (r0 * th0.cos(), r0 * th0.sin());
                        for _ in 0..steps {
                            x += s * rng.sample::<f64, _>(StandardNormal);
                            y += s * rng.sample::<f64, _>(StandardNormal);
                            let r2 = x * x + y * y;
                            if r2 > 1.0 {
                                let overshoot = reflect_disk(&mut x, &mut y, r2);
                                if overshoot > 10.0 * s {
                                    return Err(McError::Instability {
                                        overshoot,
                                        limit: 10.0 * s,
                                    });
                                }
                            }
                            // equal-area annuli
                            let b = (((x * x + y * y) * n_bins as f64) as usize).min(n_bins - 1);
                            counts[b] += 1;
                        }
                    }
                    _ => {
                        return Err(McError::UnsupportedGeometry(
                            "occupation check runs on the interval and the disk".into(),
                        ))
                    }
                }
                for (b, &c) in counts.iter().enumerate() {
                    let frac = c as f64 / steps as f64;
                    occ.sum[b] += frac;
                    occ.sum_sq[b] += frac * frac;
                }
            }
            Ok(occ)
        })
        .collect();
    let chunk_outs = chunk_outs?;

    let n = cfg.n_paths as f64;
    let mut result = Vec::with_capacity(n_bins);
    for b in 0..n_bins {
        let sum: f64 = chunk_outs.iter().map(|c| c.sum[b]).sum();
        let sum_sq: f64 = chunk_outs.iter().map(|c| c.sum_sq[b]).sum();
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        result.push(Estimate {
            value: mean,
            ci_half: 1.96 * (var / n).sqrt(),
            n_paths: cfg.n_paths,
        });
    }
    Ok(result)
}
