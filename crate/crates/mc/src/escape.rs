//! Escape-measure estimation on the exterior of a sphere in R^3.
//!
//! The escape pairing V(f) equals (1/t) E[f(X_T); T <= t] when the start is
//! distributed as q(x) m(dx), q(x) = 1 - R/|x|. Paths are launched from the
//! normalized restriction of q m to the shell (R, r_escape].
//!
//! A path that reaches the outer radius before hitting the sphere is scored
//! as "no hit inside the window": conditional on eventually returning, the
//! unsimulated return trip from the outer radius takes longer than the
//! remaining window except with probability at most
//! 6 exp(-(r_escape - R)^2 / (6 t)), which is reported as part of the
//! protocol bound. The ignored tail of the starting measure beyond the shell
//! is bounded analytically as well. For experiments without a time window
//! (`hit_fraction_from`) the outer crossing is resolved exactly instead:
//! certified escape with probability 1 - R/r, otherwise an exact draw of the
//! eventual hit point from the exterior Poisson kernel.

use crate::config::PathConfig;
use crate::error::{McError, Result};
use crate::estimators::Estimate;
use crate::rng::path_rng;
use feller_core::{quad, BoundaryFunction, Geometry};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const TAU: f64 = std::f64::consts::TAU;
const CHUNK: u64 = 2048;

/// Escape estimate with its truncation diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct EscapeEstimate {
    pub value: f64,
    pub ci_half: f64,
    pub n_paths: u64,
    /// Paths that hit the sphere inside the window.
    pub n_hits: u64,
    /// Raw weighted hit mass sum
    pub raw_sum: f64,
    /// Analytic bound on the contribution of starts beyond the shell plus
    /// the outer-crossing misclassification bound.
    pub tail_bound: f64,
    /// Fraction of paths that crossed the outer radius inside the window
    /// (scored as no hit; see the module docs for the bound).
    pub crossed_fraction: f64,
    /// Mass of q.m on the sampled shell (the estimator normalization).
    pub shell_mass: f64,
}

/// Estimates V(f) for several boundary weights over one common family of
/// paths, so ratios between the estimates are tightly coupled.
pub fn estimate_escape_measures(
    geom: &Geometry,
    fs: &[BoundaryFunction],
    cfg: &PathConfig,
    tail_fraction: f64,
) -> Result<Vec<EscapeEstimate>> {
    let (radius, r_cut) = match *geom {
        Geometry::BallExterior { dim: 3, radius } => (radius, exterior_cut(cfg)?),
        Geometry::BallExterior { dim, .. } => {
            return Err(McError::UnsupportedGeometry(format!(
                "escape estimation needs the d = 3 exterior (exact protocol), got d = {dim}"
            )))
        }
        Geometry::Interval01 | Geometry::UnitDisk | Geometry::BallInterior { .. } => {
            return Err(McError::UnsupportedGeometry(
                "the escape measure vanishes on finite-volume interiors; nothing to estimate"
                    .into(),
            ))
        }
        _ => {
            return Err(McError::UnsupportedGeometry(
                "escape estimation runs on the exterior ball".into(),
            ))
        }
    };
    for f in fs {
        f.check_geometry(geom)?;
    }
    cfg.validate(geom)?;
    let window = cfg.horizon;
    let shell_mass = q_shell_mass(radius, r_cut);

    #[derive(Clone)]
    struct Chunk {
        sums: Vec<f64>,
        sums_sq: Vec<f64>,
        hits: u64,
        crossings: u64,
    }

    let n_chunks = cfg.n_paths.div_ceil(CHUNK);
    let chunks: Result<Vec<Chunk>> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut out = Chunk {
                sums: vec![0.0; fs.len()],
                sums_sq: vec![0.0; fs.len()],
                hits: 0,
                crossings: 0,
            };
            let lo = ci * CHUNK;
            let hi = ((ci + 1) * CHUNK).min(cfg.n_paths);
            for p in lo..hi {
                let mut rng = path_rng(cfg.seed, p);
                match escape_path(&mut rng, radius, r_cut, cfg.dt, window)? {
                    WindowOutcome::Hit(point) => {
                        out.hits += 1;
                        for (i, f) in fs.iter().enumerate() {
                            let v = f.eval_sphere(&point)?;
                            out.sums[i] += v;
                            out.sums_sq[i] += v * v;
                        }
                    }
                    WindowOutcome::CrossedOut => out.crossings += 1,
                    WindowOutcome::WindowClosed => {}
                }
            }
            Ok(out)
        })
        .collect();
    let chunks = chunks?;

    let n = cfg.n_paths as f64;
    let hits: u64 = chunks.iter().map(|c| c.hits).sum();
    let crossings: u64 = chunks.iter().map(|c| c.crossings).sum();
    let crossed_fraction = crossings as f64 / n;
    let scale = shell_mass / window;
    // a crossing misclassifies only if the unsimulated return beats the window
    let crossing_bound =
        scale * crossed_fraction * (6.0 * (-(r_cut - radius).powi(2) / (6.0 * window)).exp()).min(1.0);

    let mut result = Vec::with_capacity(fs.len());
    for (i, f) in fs.iter().enumerate() {
        let sum: f64 = chunks.iter().map(|c| c.sums[i]).sum();
        let sum_sq: f64 = chunks.iter().map(|c| c.sums_sq[i]).sum();
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        let sup_f = boundary_sup(f);
        let tail_bound = tail_mass_bound(radius, r_cut, window) * sup_f + crossing_bound * sup_f;
        let value = scale * mean;
        if value > 0.0 && tail_bound > tail_fraction * value {
            return Err(McError::TruncationDominated(format!(
                "tail bound {tail_bound:.3e} exceeds {tail_fraction} of the estimate {value:.3e}; \
                 enlarge the shell"
            )));
        }
        result.push(EscapeEstimate {
            value,
            ci_half: 1.96 * scale * (var / n).sqrt(),
            n_paths: cfg.n_paths,
            n_hits: hits,
            raw_sum: sum,
            tail_bound,
            crossed_fraction,
            shell_mass,
        });
    }
    Ok(result)
}

/// Single-weight wrapper.
pub fn estimate_escape_measure(
    geom: &Geometry,
    f: &BoundaryFunction,
    cfg: &PathConfig,
    tail_fraction: f64,
) -> Result<EscapeEstimate> {
    Ok(estimate_escape_measures(geom, std::slice::from_ref(f), cfg, tail_fraction)?[0])
}

fn exterior_cut(cfg: &PathConfig) -> Result<f64> {
    cfg.r_escape.ok_or_else(|| {
        McError::InvalidConfig("exterior runs need an escape radius".into())
    })
}

fn boundary_sup(f: &BoundaryFunction) -> f64 {
    match f {
        BoundaryFunction::Constant(c) => c.abs(),
        BoundaryFunction::SphereCap { .. } => 1.0,
        _ => 1.0,
    }
}

/// Mass of q(x) dx over the shell (R, r_cut].
fn q_shell_mass(radius: f64, r_cut: f64) -> f64 {
    let r3 = (r_cut.powi(3) - radius.powi(3)) / 3.0;
    let r2 = radius * (r_cut * r_cut - radius * radius) / 2.0;
    2.0 * TAU * (r3 - r2)
}

/// Analytic bound for starts beyond the shell: the hitting probability within
/// the window is at most 2 d exp(-(r - R)^2 / (2 d t)) for d = 3.
fn tail_mass_bound(radius: f64, r_cut: f64, window: f64) -> f64 {
    let integrand = |r: f64| {
        let q = 1.0 - radius / r;
        let p_hit = (6.0 * (-(r - radius) * (r - radius) / (6.0 * window)).exp()).min(1.0);
        q * p_hit * 2.0 * TAU * r * r
    };
    let reach = r_cut + 30.0 * (6.0 * window).sqrt();
    quad::integrate_gl(integrand, r_cut, reach, 400) / window
}

enum WindowOutcome {
    /// First hit of the sphere inside the window, at the snapped point.
    Hit([f64; 3]),
    /// Reached the outer radius first; the (possible) return lies beyond the
    /// window up to the reported bound.
    CrossedOut,
    /// Window elapsed inside the shell.
    WindowClosed,
}

/// One path of the windowed escape experiment.
fn escape_path(
    rng: &mut ChaCha8Rng,
    radius: f64,
    r_cut: f64,
    dt: f64,
    window: f64,
) -> Result<WindowOutcome> {
    let s = dt.sqrt();
    let limit = 10.0 * s;
    let r0 = sample_shell_radius(rng.gen(), radius, r_cut);
    let dir = sample_unit_dir(rng);
    let mut p = [dir[0] * r0, dir[1] * r0, dir[2] * r0];
    let r2_in = radius * radius;
    let r2_out = r_cut * r_cut;
    let mut t = 0.0f64;
    loop {
        if t >= window {
            return Ok(WindowOutcome::WindowClosed);
        }
        for c in &mut p {
            *c += s * rng.sample::<f64, _>(StandardNormal);
        }
        t += dt;
        let r2: f64 = p.iter().map(|c| c * c).sum();
        if r2 <= r2_in {
            let r = r2.sqrt();
            if radius - r > limit {
                return Err(McError::Instability { overshoot: radius - r, limit });
            }
            let snap = [p[0] * radius / r, p[1] * radius / r, p[2] * radius / r];
            return Ok(WindowOutcome::Hit(snap));
        }
        if r2 >= r2_out {
            return Ok(WindowOutcome::CrossedOut);
        }
    }
}

/// First-hit experiment from the fixed launch point (0, 0, rho), without any
/// time window: every path is resolved either to a hit point on the sphere or
/// to a certified escape.
///
/// Hits delivered by the outer-radius resolution are drawn from the exact
/// exterior Poisson kernel at the crossing position, so the combined hit
/// points follow the true first-hit distribution from the launch point (up
/// to the dt bias of inner-sphere detection) and the hit frequency is
/// R / rho in distribution.
pub fn first_hits_from(
    geom: &Geometry,
    launch_radius: f64,
    cfg: &PathConfig,
) -> Result<Vec<[f64; 3]>> {
    let (radius, r_cut) = match *geom {
        Geometry::BallExterior { dim: 3, radius } => (radius, exterior_cut(cfg)?),
        _ => {
            return Err(McError::UnsupportedGeometry(
                "first-hit resolution runs on the d = 3 exterior ball".into(),
            ))
        }
    };
    if launch_radius <= radius || launch_radius >= r_cut {
        return Err(McError::InvalidConfig(format!(
            "launch radius {launch_radius} must lie inside the shell ({radius}, {r_cut})"
        )));
    }
    let dt = cfg.dt;
    let s = dt.sqrt();
    let r2_in = radius * radius;
    let r2_out = r_cut * r_cut;
    // generous cap; the expected resolution time is O(1)
    let max_steps = (500.0 / dt) as u64;

    let n_chunks = cfg.n_paths.div_ceil(CHUNK);
    let chunk_hits: Result<Vec<(Vec<[f64; 3]>, u64)>> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * CHUNK;
            let hi = ((ci + 1) * CHUNK).min(cfg.n_paths);
            let mut hits = Vec::new();
            let mut unresolved = 0u64;
            for pth in lo..hi {
                let mut rng = path_rng(cfg.seed, pth);
                let mut p = [0.0, 0.0, launch_radius];
                let mut resolved = false;
                for _ in 0..max_steps {
                    for c in &mut p {
                        *c += s * rng.sample::<f64, _>(StandardNormal);
                    }
                    let r2: f64 = p.iter().map(|c| c * c).sum();
                    if r2 <= r2_in {
                        let r = r2.sqrt();
                        hits.push([p[0] * radius / r, p[1] * radius / r, p[2] * radius / r]);
                        resolved = true;
                        break;
                    }
                    if r2 >= r2_out {
                        let r = r2.sqrt();
                        if rng.gen::<f64>() >= 1.0 - radius / r {
                            hits.push(sample_poisson_hit(&mut rng, &p, radius));
                        }
                        resolved = true;
                        break;
                    }
                }
                if !resolved {
                    unresolved += 1;
                }
            }
            Ok((hits, unresolved))
        })
        .collect();
    let chunk_hits = chunk_hits?;
    let unresolved: u64 = chunk_hits.iter().map(|c| c.1).sum();
    if unresolved > 0 {
        return Err(McError::EstimatorInvalid(format!(
            "{unresolved} paths were still unresolved at the step cap"
        )));
    }
    Ok(chunk_hits.into_iter().flat_map(|c| c.0).collect())
}

/// Fraction of paths from |x| = rho that ever hit the sphere.
pub fn hit_fraction_from(geom: &Geometry, launch_radius: f64, cfg: &PathConfig) -> Result<Estimate> {
    let hits = first_hits_from(geom, launch_radius, cfg)?;
    let n = cfg.n_paths as f64;
    let p_hat = hits.len() as f64 / n;
    Ok(Estimate {
        value: p_hat,
        ci_half: 1.96 * (p_hat * (1.0 - p_hat) / n).sqrt(),
        n_paths: cfg.n_paths,
    })
}

/// Inverse-CDF sample of the radius with density proportional to
/// (1 - R/r) r^2 on (R, r_cut].
fn sample_shell_radius(v: f64, radius: f64, r_cut: f64) -> f64 {
    let mass = |r: f64| (r.powi(3) - radius.powi(3)) / 3.0 - radius * (r * r - radius * radius) / 2.0;
    let target = v * mass(r_cut);
    let (mut lo, mut hi) = (radius, r_cut);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn sample_unit_dir(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let u: f64 = 2.0 * rng.gen::<f64>() - 1.0;
    let phi: f64 = TAU * rng.gen::<f64>();
    let s = (1.0 - u * u).sqrt();
    [s * phi.cos(), s * phi.sin(), u]
}

/// Exact draw of the first hitting point of the sphere of radius R from an
/// exterior position x, using the inverse CDF of the exterior Poisson kernel
/// in the polar angle around the axis through x.
fn sample_poisson_hit(rng: &mut ChaCha8Rng, x: &[f64; 3], radius: f64) -> [f64; 3] {
    let r: f64 = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let v: f64 = rng.gen();
    let span = 1.0 / (r - radius) - 1.0 / (r + radius);
    let sv = v * span + 1.0 / (r + radius);
    let u = ((r * r + radius * radius - 1.0 / (sv * sv)) / (2.0 * r * radius)).clamp(-1.0, 1.0);
    let phi = TAU * rng.gen::<f64>();
    // orthonormal frame with e3 along x
    let e3 = [x[0] / r, x[1] / r, x[2] / r];
    let pick = if e3[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let mut e1 = [
        pick[1] * e3[2] - pick[2] * e3[1],
        pick[2] * e3[0] - pick[0] * e3[2],
        pick[0] * e3[1] - pick[1] * e3[0],
    ];
    let n1 = e1.iter().map(|c| c * c).sum::<f64>().sqrt();
    for c in &mut e1 {
        *c /= n1;
    }
    let e2 = [
        e3[1] * e1[2] - e3[2] * e1[1],
        e3[2] * e1[0] - e3[0] * e1[2],
        e3[0] * e1[1] - e3[1] * e1[0],
    ];
    let sin_t = (1.0 - u * u).sqrt();
    let (cp, sp) = (phi.cos(), phi.sin());
    [
        radius * (u * e3[0] + sin_t * (cp * e1[0] + sp * e2[0])),
        radius * (u * e3[1] + sin_t * (cp * e1[1] + sp * e2[1])),
        radius * (u * e3[2] + sin_t * (cp * e1[2] + sp * e2[2])),
    ]
}
