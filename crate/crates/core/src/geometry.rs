//! Model domains and their closed-form kernels.
//!
//! Each geometry fixes a closed boundary set F, an open complement G, a volume
//! measure m on G and a boundary measure mu on F:
//!
//! - `Interval01`: F = {0, 1}, G = (0, 1), m = Lebesgue, mu = counting measure.
//! - `UnitDisk`: F = unit circle, G = open disk, m = area, mu = arclength.
//! - `BallInterior(d, R)` / `BallExterior(d, R)`: F = sphere of radius R,
//!   G = one side of it, m = Lebesgue, mu = surface measure.
//! - `SpherePair(d, R)`: G = R^d minus the sphere (both components).
//!
//! Boundary points are stored as angles in [0, 2*pi) on the circle and as
//! vectors of length R on spheres, avoiding chart singularities.

use crate::boundary::BoundaryFunction;
use crate::error::{CoreError, Result};
use crate::quad;

const TAU: f64 = std::f64::consts::TAU;

/// A model domain: boundary set, interior, volume and boundary measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// G = (0, 1) with two-point boundary {0, 1}.
    Interval01,
    /// G = open unit disk in the plane, boundary the unit circle.
    UnitDisk,
    /// G = open ball of radius `radius` in dimension `dim`.
    BallInterior { dim: usize, radius: f64 },
    /// G = exterior of the closed ball; requires `dim >= 3` so the process is
    /// transient and escape has positive probability.
    BallExterior { dim: usize, radius: f64 },
    /// G = R^d minus the sphere, both components together.
    SpherePair { dim: usize, radius: f64 },
}

impl Geometry {
    pub fn ball_interior(dim: usize, radius: f64) -> Result<Self> {
        check_ball_params(dim, radius, 1)?;
        Ok(Geometry::BallInterior { dim, radius })
    }

    pub fn ball_exterior(dim: usize, radius: f64) -> Result<Self> {
        check_ball_params(dim, radius, 3)?;
        Ok(Geometry::BallExterior { dim, radius })
    }

    pub fn sphere_pair(dim: usize, radius: f64) -> Result<Self> {
        check_ball_params(dim, radius, 3)?;
        Ok(Geometry::SpherePair { dim, radius })
    }

    /// Ambient dimension of the interior points.
    pub fn dim(&self) -> usize {
        match *self {
            Geometry::Interval01 => 1,
            Geometry::UnitDisk => 2,
            Geometry::BallInterior { dim, .. }
            | Geometry::BallExterior { dim, .. }
            | Geometry::SpherePair { dim, .. } => dim,
        }
    }

    /// Total mass of the boundary measure mu.
    pub fn boundary_mass(&self) -> f64 {
        match *self {
            Geometry::Interval01 => 2.0,
            Geometry::UnitDisk => TAU,
            Geometry::BallInterior { dim, radius }
            | Geometry::BallExterior { dim, radius }
            | Geometry::SpherePair { dim, radius } => {
                sphere_area(dim).unwrap() * radius.powi(dim as i32 - 1)
            }
        }
    }

    /// Total mass of the volume measure m on G, if finite.
    pub fn volume(&self) -> Option<f64> {
        match *self {
            Geometry::Interval01 => Some(1.0),
            Geometry::UnitDisk => Some(std::f64::consts::PI),
            Geometry::BallInterior { dim, radius } => {
                Some(sphere_area(dim).unwrap() * radius.powi(dim as i32) / dim as f64)
            }
            Geometry::BallExterior { .. } | Geometry::SpherePair { .. } => None,
        }
    }
}

fn check_ball_params(dim: usize, radius: f64, min_dim: usize) -> Result<()> {
    if dim < min_dim {
        return Err(CoreError::UnsupportedDimension {
            d: dim,
            reason: format!("this geometry requires dimension >= {min_dim}"),
        });
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "radius must be positive and finite, got {radius}"
        )));
    }
    Ok(())
}

/// Area of the unit (d-1)-sphere in R^d: 2 pi^{d/2} / Gamma(d/2).
pub fn sphere_area(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(CoreError::UnsupportedDimension {
            d,
            reason: "sphere area is defined for d >= 1".into(),
        });
    }
    let pi = std::f64::consts::PI;
    Ok(2.0 * pi.powf(d as f64 / 2.0) / gamma_half_integer(d))
}

/// Gamma(n/2) for integer n >= 1, exact recurrences for both parities.
fn gamma_half_integer(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        // Gamma(k) = (k-1)!
        let k = n / 2;
        (1..k).fold(1.0, |acc, j| acc * j as f64)
    } else {
        // Gamma(1/2) = sqrt(pi), Gamma(x+1) = x Gamma(x)
        let mut acc = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x + 1.0 <= n as f64 / 2.0 + 1e-9 {
            acc *= x;
            x += 1.0;
        }
        acc
    }
}

/// Boundary kernel of the unit circle paired with arclength:
/// 1 / (4 pi (1 - cos(theta_xi - theta_eta))).
///
/// Symmetric, strictly positive, and singular on the diagonal.
pub fn douglas_kernel_circle(theta_xi: f64, theta_eta: f64) -> Result<f64> {
    let c = 1.0 - (theta_xi - theta_eta).cos();
    if c < 1e-24 {
        return Err(CoreError::DiagonalSingularity(format!(
            "circle kernel requested at coincident angles {theta_xi} ~ {theta_eta} (mod 2 pi)"
        )));
    }
    Ok(1.0 / (4.0 * std::f64::consts::PI * c))
}

/// Boundary kernel of the sphere of radius R in R^d (d >= 3) paired with the
/// surface measure: (2 / Omega_d) |xi - eta|^{-d}.
pub fn feller_kernel_sphere(d: usize, radius: f64, xi: &[f64], eta: &[f64]) -> Result<f64> {
    if d < 3 {
        return Err(CoreError::UnsupportedDimension {
            d,
            reason: "the sphere kernel requires d >= 3".into(),
        });
    }
    check_on_sphere(xi, radius, "xi")?;
    check_on_sphere(eta, radius, "eta")?;
    let dist2: f64 = xi.iter().zip(eta).map(|(a, b)| (a - b) * (a - b)).sum();
    if dist2 < 1e-24 * radius * radius {
        return Err(CoreError::DiagonalSingularity(
            "sphere kernel requested at coincident points".into(),
        ));
    }
    Ok(2.0 / sphere_area(d)? * dist2.sqrt().powi(-(d as i32)))
}

/// Hitting density of the sphere of radius R from x (inside or outside),
/// with respect to the surface measure:
///
/// ```text
/// K(x, eta) = (1 / (Omega_d R)) |R^2 - |x|^2| / |x - eta|^d
/// ```
pub fn poisson_kernel_ball(d: usize, radius: f64, x: &[f64], eta: &[f64]) -> Result<f64> {
    check_on_sphere(eta, radius, "eta")?;
    let r2: f64 = x.iter().map(|a| a * a).sum();
    let r = r2.sqrt();
    if (r - radius).abs() < 1e-12 * radius {
        return Err(CoreError::BoundaryPoint(format!(
            "Poisson kernel undefined for |x| = R (|x| = {r})"
        )));
    }
    let dist2: f64 = x.iter().zip(eta).map(|(a, b)| (a - b) * (a - b)).sum();
    let num = (radius * radius - r2).abs();
    Ok(num / (sphere_area(d)? * radius * dist2.sqrt().powi(d as i32)))
}

fn check_on_sphere(p: &[f64], radius: f64, name: &str) -> Result<()> {
    let r = p.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (r - radius).abs() > 1e-9 * radius.max(1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "{name} must lie on the sphere of radius {radius}, got |{name}| = {r}"
        )));
    }
    Ok(())
}

/// Probability q(x) that the process started at the interior point x never
/// hits the boundary set F.
///
/// Zero for every geometry with a bounded (or plane-splitting recurrent)
/// interior; for the exterior of a ball in d >= 3 it is 1 - (R/|x|)^{d-2}.
/// Points on the far side of F from the queried component get the limit value.
pub fn escape_probability(geom: &Geometry, x: &[f64]) -> f64 {
    match *geom {
        Geometry::Interval01 | Geometry::UnitDisk | Geometry::BallInterior { .. } => 0.0,
        Geometry::BallExterior { dim, radius } | Geometry::SpherePair { dim, radius } => {
            let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            if r <= radius {
                0.0
            } else {
                1.0 - (radius / r).powi(dim as i32 - 2)
            }
        }
    }
}

/// Integral of the Poisson kernel over the whole sphere, by quadrature.
///
/// Reduces to a single polar integral by rotational symmetry. Equals 1 for
/// interior x and (R/|x|)^{d-2} for exterior x.
pub fn poisson_kernel_mass(d: usize, radius: f64, x: &[f64]) -> Result<f64> {
    let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (r - radius).abs() < 1e-12 * radius {
        return Err(CoreError::BoundaryPoint("|x| = R".into()));
    }
    let num = (radius * radius - r * r).abs();
    let omega_d = sphere_area(d)?;
    let omega_dm1 = sphere_area(d - 1)?;
    let band = |theta: f64| {
        let dist2 = r * r + radius * radius - 2.0 * r * radius * theta.cos();
        theta.sin().powi(d as i32 - 2) / dist2.powf(d as f64 / 2.0)
    };
    let integral = quad::integrate_composite(
        &band,
        &polar_breakpoints(32),
        16,
    );
    Ok(num / (omega_d * radius) * radius.powi(d as i32 - 1) * omega_dm1 * integral)
}

fn polar_breakpoints(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| std::f64::consts::PI * k as f64 / n as f64)
        .collect()
}

/// Integral of a boundary function against the boundary measure mu.
pub fn boundary_measure_integrate(geom: &Geometry, f: &BoundaryFunction) -> Result<f64> {
    f.check_geometry(geom)?;
    match geom {
        Geometry::Interval01 => Ok(f.eval_endpoint(0)? + f.eval_endpoint(1)?),
        Geometry::UnitDisk => Ok(quad::integrate_periodic(|t| f.eval_angle(t).unwrap(), 4096)),
        Geometry::BallInterior { dim, radius }
        | Geometry::BallExterior { dim, radius }
        | Geometry::SpherePair { dim, radius } => {
            sphere_surface_integrate(*dim, *radius, |p| f.eval_sphere(p).unwrap())
        }
    }
}

/// Surface integral over the sphere of radius R in R^3 (product rule in the
/// polar angle and azimuth). Only d = 3 carries non-symmetric boundary data.
pub fn sphere_surface_integrate<F: Fn(&[f64; 3]) -> f64>(
    dim: usize,
    radius: f64,
    f: F,
) -> Result<f64> {
    if dim != 3 {
        return Err(CoreError::UnsupportedDimension {
            d: dim,
            reason: "surface quadrature with pointwise data is implemented for d = 3".into(),
        });
    }
    let n_polar = 128;
    let n_azimuth = 256;
    let (nodes, weights) = quad::gauss_legendre(n_polar);
    let mut acc = 0.0;
    for (u, w) in nodes.iter().zip(weights.iter()) {
        // u = cos(polar angle)
        let s = (1.0 - u * u).sqrt();
        let mut ring = 0.0;
        for k in 0..n_azimuth {
            let phi = TAU * k as f64 / n_azimuth as f64;
            let p = [
                radius * s * phi.cos(),
                radius * s * phi.sin(),
                radius * u,
            ];
            ring += f(&p);
        }
        acc += w * ring * TAU / n_azimuth as f64;
    }
    Ok(acc * radius * radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_area_closed_forms() {
        assert!((sphere_area(2).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3).unwrap() - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4).unwrap() - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(1).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn circle_kernel_reference_values() {
        // antipodal: 1/(8 pi); quarter turn: 1/(4 pi)
        let v = douglas_kernel_circle(0.0, PI).unwrap();
        assert!((v - 1.0 / (8.0 * PI)).abs() < 1e-15);
        let v = douglas_kernel_circle(0.0, PI / 2.0).unwrap();
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn circle_kernel_rejects_diagonal() {
        assert!(douglas_kernel_circle(1.0, 1.0).is_err());
        assert!(douglas_kernel_circle(0.25, 0.25 + TAU).is_err());
    }

    #[test]
    fn sphere_kernel_reference_values() {
        // d = 3, R = 1: antipodal distance 2 gives 1/(16 pi); distance 1 gives 1/(2 pi).
        let v = feller_kernel_sphere(3, 1.0, &[0.0, 0.0, 1.0], &[0.0, 0.0, -1.0]).unwrap();
        assert!((v - 1.0 / (16.0 * PI)).abs() < 1e-15);
        // |xi - eta| = 1 when the angle between them is 60 degrees.
        let a = [1.0, 0.0, 0.0];
        let b = [0.5, 3.0f64.sqrt() / 2.0, 0.0];
        let v = feller_kernel_sphere(3, 1.0, &a, &b).unwrap();
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn sphere_kernel_rejects_low_dimension_and_diagonal() {
        let p = [1.0, 0.0];
        assert!(feller_kernel_sphere(2, 1.0, &p, &p).is_err());
        let q = [0.0, 0.0, 1.0];
        assert!(feller_kernel_sphere(3, 1.0, &q, &q).is_err());
    }

    #[test]
    fn poisson_kernel_at_origin() {
        let v = poisson_kernel_ball(3, 1.0, &[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn poisson_kernel_rejects_boundary_x() {
        assert!(poisson_kernel_ball(3, 1.0, &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn poisson_mass_interior_and_exterior() {
        // interior: total hitting probability 1
        let m = poisson_kernel_mass(3, 1.0, &[0.3, -0.2, 0.1]).unwrap();
        assert!((m - 1.0).abs() < 1e-10, "interior mass {m}");
        // exterior at |x| = 2: hitting probability R/|x| = 1/2
        let m = poisson_kernel_mass(3, 1.0, &[2.0, 0.0, 0.0]).unwrap();
        assert!((m - 0.5).abs() < 1e-10, "exterior mass {m}");
        // d = 4 exterior: (R/|x|)^2
        let m = poisson_kernel_mass(4, 1.0, &[0.0, 1.5, 0.0, 0.0]).unwrap();
        assert!((m - (1.0f64 / 1.5).powi(2)).abs() < 1e-10, "d4 mass {m}");
    }

    #[test]
    fn escape_probability_values() {
        assert_eq!(escape_probability(&Geometry::Interval01, &[0.3]), 0.0);
        let ext = Geometry::ball_exterior(3, 1.0).unwrap();
        let q = escape_probability(&ext, &[2.0, 0.0, 0.0]);
        assert!((q - 0.5).abs() < 1e-15);
        // limit toward the boundary
        let q = escape_probability(&ext, &[1.0 + 1e-12, 0.0, 0.0]);
        assert!(q.abs() < 1e-11);
        // escape probability + exterior Poisson mass = 1
        for r in [1.3, 2.0, 3.7] {
            let q = escape_probability(&ext, &[r, 0.0, 0.0]);
            let mass = poisson_kernel_mass(3, 1.0, &[r, 0.0, 0.0]).unwrap();
            assert!((q + mass - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn exterior_requires_dim_three() {
        assert!(Geometry::ball_exterior(2, 1.0).is_err());
        assert!(Geometry::ball_exterior(3, 1.0).is_ok());
    }

    #[test]
    fn kernel_symmetry_random_pairs() {
        // fixed small LCG so the test is deterministic without extra deps
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..64 {
            let a = TAU * next();
            let b = TAU * next();
            if (a - b).abs() < 1e-6 {
                continue;
            }
            let u = douglas_kernel_circle(a, b).unwrap();
            let v = douglas_kernel_circle(b, a).unwrap();
            assert_eq!(u, v);
            // rotation invariance
            let s = TAU * next();
            let w = douglas_kernel_circle(a + s, b + s).unwrap();
            assert!((u - w).abs() <= 1e-9 * u.abs());
        }
    }
}
