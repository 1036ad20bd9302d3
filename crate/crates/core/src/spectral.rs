//! Spectral machinery for the absorbed diffusion on the unit interval.
//!
//! The generator is (1/2) d^2/dx^2 with Dirichlet conditions at 0 and 1, so
//! the killed semigroup acts diagonally on the basis sqrt(2) sin(k pi x) with
//! rates lambda_k = k^2 pi^2 / 2. Large-time evaluations use the truncated
//! eigenexpansion; below `IMAGE_SWITCH_T` the series loses digits to
//! cancellation and the method-of-images heat kernel takes over.
//!
//! On top of the semigroup sit the alpha-order hitting kernels, the energy
//! functional of pairs of excessive functions, and the increasing alpha-limit
//! that produces the boundary measure of excursion endpoints.

use crate::boundary::BoundaryFunction;
use crate::error::{CoreError, Result};
use crate::geometry::Geometry;
use crate::quad;
use statrs::function::erf::erf;
use std::sync::OnceLock;

const PI: f64 = std::f64::consts::PI;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Below this time the eigenseries needs too many modes and the image kernel
/// is used instead.
pub const IMAGE_SWITCH_T: f64 = 1e-3;

/// Default number of sine modes kept in the truncated expansion.
pub const DEFAULT_MODES: usize = 512;

/// The killed (absorbed) semigroup p_t^0 on G = (0, 1).
#[derive(Debug, Clone)]
pub struct AbsorbedSemigroup {
    geometry: Geometry,
    modes: usize,
}

impl AbsorbedSemigroup {
    pub fn interval(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(CoreError::InvalidArgument(
                "eigen truncation must be at least 1".into(),
            ));
        }
        Ok(AbsorbedSemigroup { geometry: Geometry::Interval01, modes })
    }

    pub fn new(geometry: Geometry, modes: usize) -> Result<Self> {
        match geometry {
            Geometry::Interval01 => Self::interval(modes),
            _ => Err(CoreError::GeometryMismatch(
                "spectral evaluation is implemented for the unit interval; other \
                 geometries are covered by closed forms or sampling"
                    .into(),
            )),
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Dirichlet eigenvalue lambda_k = (k pi)^2 / 2 of -(1/2) d^2/dx^2.
    pub fn eigenvalue(k: usize) -> f64 {
        let kp = k as f64 * PI;
        0.5 * kp * kp
    }

    /// Sine coefficients of a bounded function u on (0, 1) in the basis
    /// sqrt(2) sin(k pi x), by composite quadrature resolving every kept mode.
    pub fn sine_coefficients<F: Fn(f64) -> f64>(&self, u: F) -> Vec<f64> {
        let panels = self.modes.max(64);
        let breaks: Vec<f64> = (0..=panels).map(|i| i as f64 / panels as f64).collect();
        (1..=self.modes)
            .map(|k| {
                let kp = k as f64 * PI;
                quad::integrate_composite(&|x: f64| u(x) * SQRT_2 * (kp * x).sin(), &breaks, 6)
            })
            .collect()
    }

    /// Applies p_t^0 to sine coefficients (diagonal action).
    pub fn apply_to_coefficients(&self, t: f64, coeffs: &[f64]) -> Result<Vec<f64>> {
        if !(t > 0.0) {
            return Err(CoreError::InvalidArgument(format!(
                "semigroup time must be positive, got {t}"
            )));
        }
        Ok(coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * (-Self::eigenvalue(i + 1) * t).exp())
            .collect())
    }

    /// Evaluates a sine expansion at x.
    pub fn eval_expansion(&self, coeffs: &[f64], x: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * SQRT_2 * ((i + 1) as f64 * PI * x).sin())
            .sum()
    }

    /// p_t^0 u evaluated on a grid of interior points.
    ///
    /// Uses the eigenexpansion for t >= `IMAGE_SWITCH_T` and the image-kernel
    /// integral below it.
    pub fn apply_on_grid<F: Fn(f64) -> f64>(
        &self,
        t: f64,
        u: F,
        xs: &[f64],
    ) -> Result<Vec<f64>> {
        if !(t > 0.0) {
            return Err(CoreError::InvalidArgument(format!(
                "semigroup time must be positive, got {t}"
            )));
        }
        if t >= IMAGE_SWITCH_T {
            let coeffs = self.apply_to_coefficients(t, &self.sine_coefficients(&u))?;
            Ok(xs.iter().map(|&x| self.eval_expansion(&coeffs, x)).collect())
        } else {
            Ok(xs
                .iter()
                .map(|&x| {
                    // the kernel mass is within ~12 sqrt(t) of x
                    let half_width = 12.0 * t.sqrt();
                    let lo = (x - half_width).max(0.0);
                    let hi = (x + half_width).min(1.0);
                    quad::integrate_gl(|y| absorbed_heat_kernel(t, x, y) * u(y), lo, hi, 200)
                })
                .collect())
        }
    }
}

/// Absorbed heat kernel on (0, 1) by the method of images.
pub fn absorbed_heat_kernel(t: f64, x: f64, y: f64) -> f64 {
    let m = 2 + (3.0 * (2.0 * t).sqrt()).ceil() as i64;
    let mut acc = 0.0;
    for k in -m..=m {
        let shift = 2.0 * k as f64;
        acc += gauss_density(t, y - x + shift) - gauss_density(t, y + x + shift);
    }
    acc
}

fn gauss_density(t: f64, z: f64) -> f64 {
    (-z * z / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

fn gauss_cdf(t: f64, z: f64) -> f64 {
    0.5 * (1.0 + erf(z / (2.0 * t).sqrt()))
}

/// A function on (0, 1) that is excessive for the absorbed semigroup.
///
/// Construction is restricted to representations whose excessivity is known;
/// arbitrary inputs are rejected rather than guessed at.
#[derive(Debug, Clone, PartialEq)]
pub enum ExcessiveFunction {
    /// Harmonic extension of nonnegative endpoint data: a (1 - x) + b x.
    HarmonicExtension { at0: f64, at1: f64 },
    /// The escape function q(x) = P^x(never hit the boundary); identically
    /// zero on the interval.
    Escape,
    /// The ground eigenfunction sqrt(2) sin(pi x), invariant direction of p_t^0.
    GroundMode,
}

impl ExcessiveFunction {
    /// Harmonic extension of endpoint data; requires nonnegative values.
    pub fn harmonic(at0: f64, at1: f64) -> Result<Self> {
        if at0 < 0.0 || at1 < 0.0 {
            return Err(CoreError::InvalidArgument(format!(
                "harmonic extension of ({at0}, {at1}) is not excessive; \
                 endpoint data must be nonnegative"
            )));
        }
        Ok(ExcessiveFunction::HarmonicExtension { at0, at1 })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ExcessiveFunction::HarmonicExtension { at0, at1 } => at0 * (1.0 - x) + at1 * x,
            ExcessiveFunction::Escape => 0.0,
            ExcessiveFunction::GroundMode => SQRT_2 * (PI * x).sin(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExcessiveFunction::Escape)
            || matches!(
                self,
                ExcessiveFunction::HarmonicExtension { at0, at1 } if *at0 == 0.0 && *at1 == 0.0
            )
    }

    /// k-th coefficient in the basis sqrt(2) sin(k pi x), closed form.
    fn sine_coeff(&self, k: usize) -> f64 {
        match self {
            ExcessiveFunction::HarmonicExtension { at0, at1 } => {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                SQRT_2 * (at0 + sign * at1) / (k as f64 * PI)
            }
            ExcessiveFunction::Escape => 0.0,
            ExcessiveFunction::GroundMode => {
                if k == 1 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Exact L^2(0,1) inner product with another excessive function.
    fn inner(&self, other: &ExcessiveFunction) -> f64 {
        use ExcessiveFunction::*;
        match (self, other) {
            (Escape, _) | (_, Escape) => 0.0,
            (
                HarmonicExtension { at0: a, at1: b },
                HarmonicExtension { at0: c, at1: d },
            ) => (2.0 * a * c + a * d + b * c + 2.0 * b * d) / 6.0,
            (HarmonicExtension { .. }, GroundMode) => self.sine_coeff(1),
            (GroundMode, HarmonicExtension { .. }) => other.sine_coeff(1),
            (GroundMode, GroundMode) => 1.0,
        }
    }

    /// p_t^0 applied to this function, evaluated at x, by the image kernel.
    /// Exact up to the image truncation (no quadrature).
    fn apply_heat_image(&self, t: f64, x: f64) -> f64 {
        match self {
            ExcessiveFunction::Escape => 0.0,
            ExcessiveFunction::GroundMode => {
                (-AbsorbedSemigroup::eigenvalue(1) * t).exp() * self.eval(x)
            }
            ExcessiveFunction::HarmonicExtension { at0, at1 } => {
                let m = 2 + (3.0 * (2.0 * t).sqrt()).ceil() as i64;
                let mut acc = 0.0;
                for k in -m..=m {
                    let shift = 2.0 * k as f64;
                    acc += affine_against_gaussian(*at0, *at1, t, x - shift);
                    acc -= affine_against_gaussian(*at0, *at1, t, -x - shift);
                }
                acc
            }
        }
    }
}

/// Integral over (0, 1) of (a + (b - a) y) times the N(mu, t) density in y.
fn affine_against_gaussian(a: f64, b: f64, t: f64, mu: f64) -> f64 {
    let phi_hi = gauss_cdf(t, 1.0 - mu);
    let phi_lo = gauss_cdf(t, -mu);
    let dphi = phi_hi - phi_lo;
    let moment = mu * dphi + t * (gauss_density(t, -mu) - gauss_density(t, 1.0 - mu));
    a * dphi + (b - a) * moment
}

/// Energy functional at scale t: (1/t) < u - p_t^0 u, v >.
///
/// Nonnegative for excessive pairs and nondecreasing as t decreases.
pub fn energy_functional_t(
    sg: &AbsorbedSemigroup,
    u: &ExcessiveFunction,
    v: &ExcessiveFunction,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "energy functional requires t > 0, got {t}"
        )));
    }
    if u.is_zero() || v.is_zero() {
        return Ok(0.0);
    }
    let uv = u.inner(v);
    let ptu_v = if t >= IMAGE_SWITCH_T {
        // spectral: < p_t u, v > = sum over modes of e^{-lambda_k t} c_k(u) c_k(v)
        (1..=sg.modes())
            .map(|k| {
                (-AbsorbedSemigroup::eigenvalue(k) * t).exp() * u.sine_coeff(k) * v.sine_coeff(k)
            })
            .sum()
    } else {
        // image kernel applied to u, integrated against v
        quad::integrate_unit_graded(|x| u.apply_heat_image(t, x) * v.eval(x), 14, 12)
    };
    Ok((uv - ptu_v) / t)
}

/// Alpha-order hitting kernel of the interval boundary:
/// E^x[e^{-alpha T}; X_T = endpoint].
///
/// With beta = sqrt(2 alpha) this is sinh(beta (1 - x)) / sinh(beta) for
/// endpoint 0 and sinh(beta x) / sinh(beta) for endpoint 1; the alpha = 0
/// limit is the harmonic extension 1 - x resp. x.
pub fn alpha_poisson_interval(alpha: f64, x: f64, endpoint: usize) -> f64 {
    let a = if endpoint == 0 { 1.0 - x } else { x };
    if alpha == 0.0 {
        return a;
    }
    let beta = (2.0 * alpha).sqrt();
    sinh_ratio(beta * a, beta)
}

/// sinh(p) / sinh(q) for 0 <= p <= q, overflow-free for large arguments.
fn sinh_ratio(p: f64, q: f64) -> f64 {
    if q < 1e-8 {
        return if q == 0.0 { 1.0 } else { p / q };
    }
    (p - q).exp() * (1.0 - (-2.0 * p).exp()) / (1.0 - (-2.0 * q).exp())
}

fn interval_endpoint_values(f: &BoundaryFunction) -> Result<(f64, f64)> {
    Ok((f.eval_endpoint(0)?, f.eval_endpoint(1)?))
}

/// Alpha-order boundary pairing U_alpha(f (x) g) = alpha < H^alpha f, H g >
/// on the interval, by endpoint-graded quadrature over G.
///
/// Nondecreasing in alpha; symmetric in (f, g) up to quadrature error.
pub fn alpha_feller(
    sg: &AbsorbedSemigroup,
    alpha: f64,
    f: &BoundaryFunction,
    g: &BoundaryFunction,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "alpha-order pairing requires alpha > 0, got {alpha}"
        )));
    }
    let _ = sg;
    let (f0, f1) = interval_endpoint_values(f)?;
    let (g0, g1) = interval_endpoint_values(g)?;
    if (f0 == 0.0 && f1 == 0.0) || (g0 == 0.0 && g1 == 0.0) {
        return Ok(0.0);
    }
    let integrand = |x: f64| {
        let hf = f0 * alpha_poisson_interval(alpha, x, 0) + f1 * alpha_poisson_interval(alpha, x, 1);
        let hg = g0 * (1.0 - x) + g1 * x;
        hf * hg
    };
    Ok(alpha * quad::integrate_unit_graded(integrand, 16, 12))
}

/// Result of driving U_alpha along an increasing alpha schedule.
#[derive(Debug, Clone)]
pub struct FellerLimit {
    /// (alpha, U_alpha) along the schedule.
    pub iterates: Vec<(f64, f64)>,
    /// The largest-alpha iterate; the certified value of the limit.
    pub value: f64,
    /// Geometric extrapolation of the tail, reported for diagnostics.
    pub richardson: f64,
    /// Largest observed decrease between consecutive iterates (0 when the
    /// sequence is perfectly nondecreasing).
    pub max_violation: f64,
}

/// Increasing-alpha limit of U_alpha(f (x) g) with a monotonicity certificate.
///
/// The iterates must be nondecreasing up to `monotone_tol`; a larger decrease
/// is reported as a numerical inconsistency instead of being smoothed over.
pub fn feller_measure_limit(
    sg: &AbsorbedSemigroup,
    f: &BoundaryFunction,
    g: &BoundaryFunction,
    schedule: &[f64],
    monotone_tol: f64,
) -> Result<FellerLimit> {
    if schedule.len() < 3 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::InvalidArgument(
            "alpha schedule must be strictly increasing with at least 3 entries".into(),
        ));
    }
    let mut iterates = Vec::with_capacity(schedule.len());
    for &alpha in schedule {
        iterates.push((alpha, alpha_feller(sg, alpha, f, g)?));
    }
    let mut max_violation = 0.0f64;
    for w in iterates.windows(2) {
        max_violation = max_violation.max(w[0].1 - w[1].1);
    }
    if max_violation > monotone_tol {
        return Err(CoreError::NumericalInconsistency(format!(
            "U_alpha iterates decreased by {max_violation:.3e} along the schedule \
             (tolerance {monotone_tol:.1e})"
        )));
    }
    let n = iterates.len();
    let value = iterates[n - 1].1;
    let d1 = iterates[n - 1].1 - iterates[n - 2].1;
    let d0 = iterates[n - 2].1 - iterates[n - 3].1;
    let richardson = if d0.abs() > 0.0 && d1.abs() < d0.abs() {
        let r = d1 / d0;
        value + d1 * r / (1.0 - r)
    } else {
        value
    };
    Ok(FellerLimit { iterates, value, richardson, max_violation })
}

/// Escape-weighted pairing V(f) = alpha < H^alpha f, q >.
///
/// Identically zero whenever the interior has finite volume. On the exterior
/// of the unit-codimension sphere in R^3 the radial hitting transform
/// E^x[e^{-alpha T}] = (R/r) e^{-beta (r - R)} gives a one-dimensional
/// integral; the result is independent of alpha.
pub fn supplementary_feller(geom: &Geometry, alpha: f64, f: &BoundaryFunction) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(CoreError::InvalidArgument(format!(
            "escape pairing requires alpha > 0, got {alpha}"
        )));
    }
    f.check_geometry(geom)?;
    match *geom {
        Geometry::Interval01 | Geometry::UnitDisk | Geometry::BallInterior { .. } => Ok(0.0),
        Geometry::BallExterior { dim, radius } | Geometry::SpherePair { dim, radius } => {
            if dim != 3 {
                return Err(CoreError::UnsupportedDimension {
                    d: dim,
                    reason: "the radial escape integral is implemented for d = 3".into(),
                });
            }
            let c = match f {
                BoundaryFunction::Constant(c) => *c,
                BoundaryFunction::SphereCap { cos_min, .. } if *cos_min <= -1.0 => 1.0,
                _ => {
                    return Err(CoreError::InvalidArgument(
                        "the spectral escape route needs spherically symmetric data; \
                         non-symmetric boundary data is handled by sampling"
                            .into(),
                    ))
                }
            };
            let beta = (2.0 * alpha).sqrt();
            // integrand over the shell: 4 pi c R (r - R) e^{-beta (r - R)};
            // truncate where e^{-beta s} is ~1e-26.
            let cut = 60.0 / beta;
            let integral =
                quad::integrate_gl(|s: f64| s * (-beta * s).exp(), 0.0, cut, 200);
            Ok(alpha * 4.0 * PI * c * radius * integral)
        }
    }
}

/// The boundary pairing of the two interval endpoints, i.e. the large-alpha
/// limit of alpha < H^alpha 1_{0}, H 1_{1} >. Evaluated once by quadrature at
/// an alpha where the remaining tail is below 1e-15 and cached.
pub fn interval_endpoint_pairing() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        // beta = 40: beta / (2 sinh beta) ~ 3e-17
        alpha_feller(
            &sg,
            800.0,
            &BoundaryFunction::endpoint_indicator(0),
            &BoundaryFunction::endpoint_indicator(1),
        )
        .unwrap()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form for U_alpha(1_{0} (x) 1_{1}) on the interval:
    /// 1/2 - beta / (2 sinh beta) with beta = sqrt(2 alpha).
    fn u_alpha_cross_closed(alpha: f64) -> f64 {
        let beta = (2.0 * alpha).sqrt();
        0.5 - beta / (2.0 * beta.sinh())
    }

    /// Independent adaptive Simpson oracle, used to cross-check the closed form.
    fn adaptive_simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, right, tol / 2.0, depth - 1)
            }
        }
        let whole = simpson(&f, a, b);
        rec(&f, a, b, whole, tol, 40)
    }

    #[test]
    fn closed_form_oracle_agrees_with_adaptive_quadrature() {
        for alpha in [0.5f64, 2.0, 8.0, 50.0] {
            let beta = (2.0 * alpha).sqrt();
            let oracle = adaptive_simpson(
                |x| alpha * sinh_ratio(beta * (1.0 - x), beta) * x,
                0.0,
                1.0,
                1e-13,
            );
            let closed = u_alpha_cross_closed(alpha);
            assert!(
                (oracle - closed).abs() < 1e-11,
                "alpha={alpha}: quadrature {oracle} vs closed {closed}"
            );
        }
    }

    #[test]
    fn alpha_feller_reference_values() {
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let f0 = BoundaryFunction::endpoint_indicator(0);
        let f1 = BoundaryFunction::endpoint_indicator(1);
        // frozen from the closed form 1/2 - beta/(2 sinh beta)
        let v = alpha_feller(&sg, 2.0, &f0, &f1).unwrap();
        assert!((v - 0.224_279_435_228_216_7).abs() < 1e-10, "got {v}");
        assert!((v - u_alpha_cross_closed(2.0)).abs() < 1e-12);
        let v = alpha_feller(&sg, 8.0, &f0, &f1).unwrap();
        assert!((v - 0.426_712_859_348_268_8).abs() < 1e-10, "got {v}");
        assert!((v - u_alpha_cross_closed(8.0)).abs() < 1e-12);
        // zero data
        let z = BoundaryFunction::Endpoints { at0: 0.0, at1: 0.0 };
        assert_eq!(alpha_feller(&sg, 2.0, &f0, &z).unwrap(), 0.0);
    }

    #[test]
    fn alpha_feller_symmetric_and_monotone() {
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let f = BoundaryFunction::Endpoints { at0: 1.0, at1: 0.5 };
        let g = BoundaryFunction::Endpoints { at0: 0.25, at1: 2.0 };
        let mut prev = 0.0;
        for alpha in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let fg = alpha_feller(&sg, alpha, &f, &g).unwrap();
            let gf = alpha_feller(&sg, alpha, &g, &f).unwrap();
            assert!((fg - gf).abs() < 1e-10, "symmetry at alpha={alpha}");
            assert!(fg >= prev - 1e-12, "monotone at alpha={alpha}");
            prev = fg;
        }
    }

    #[test]
    fn alpha_poisson_reference_values() {
        // alpha = 0: harmonic extension
        assert!((alpha_poisson_interval(0.0, 0.25, 0) - 0.75).abs() < 1e-15);
        // alpha = 2, x = 0.5: sinh(1)/sinh(2), cross-checked by RK4 shooting below
        let v = alpha_poisson_interval(2.0, 0.5, 0);
        assert!((v - 1.0f64.sinh() / 2.0f64.sinh()).abs() < 1e-14);
        let shot = shoot_alpha_ode(2.0, 0.5);
        assert!((v - shot).abs() < 1e-8, "kernel {v} vs shooting {shot}");
        // reflection symmetry
        for x in [0.1, 0.37, 0.62] {
            let a = alpha_poisson_interval(3.0, x, 0);
            let b = alpha_poisson_interval(3.0, 1.0 - x, 1);
            assert!((a - b).abs() < 1e-14);
        }
    }

    /// Solves alpha u - u''/2 = 0, u(0) = 1, u(1) = 0 by RK4 + secant shooting
    /// and returns u(x_eval). Independent of the sinh representation.
    fn shoot_alpha_ode(alpha: f64, x_eval: f64) -> f64 {
        let rhs = |_x: f64, y: [f64; 2]| [y[1], 2.0 * alpha * y[0]];
        let integrate = |slope: f64, x_stop: f64| -> [f64; 2] {
            let n = 20_000;
            let h = x_stop / n as f64;
            let mut y = [1.0, slope];
            let mut x = 0.0;
            for _ in 0..n {
                let k1 = rhs(x, y);
                let k2 = rhs(x + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
                let k3 = rhs(x + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
                let k4 = rhs(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
                y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
                y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
                x += h;
            }
            y
        };
        let mut s0 = -1.0;
        let mut s1 = -2.0;
        let mut f0 = integrate(s0, 1.0)[0];
        for _ in 0..60 {
            let f1 = integrate(s1, 1.0)[0];
            if (f1 - f0).abs() < 1e-18 {
                break;
            }
            let s2 = s1 - f1 * (s1 - s0) / (f1 - f0);
            s0 = s1;
            f0 = f1;
            s1 = s2;
        }
        integrate(s1, x_eval)[0]
    }

    #[test]
    fn semigroup_eigenfunction_decay() {
        let sg = AbsorbedSemigroup::interval(64).unwrap();
        let t = 0.3;
        let xs = [0.1, 0.5, 0.9];
        let got = sg.apply_on_grid(t, |x| SQRT_2 * (PI * x).sin(), &xs).unwrap();
        for (&x, &v) in xs.iter().zip(&got) {
            let want = (-AbsorbedSemigroup::eigenvalue(1) * t).exp() * SQRT_2 * (PI * x).sin();
            assert!((v - want).abs() < 1e-9, "x={x}: {v} vs {want}");
        }
    }

    #[test]
    fn semigroup_strong_continuity_of_one() {
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let xs = [0.2, 0.5, 0.8];
        let mut prev_gap = f64::INFINITY;
        for t in [1e-2, 1e-3, 1e-4, 1e-5] {
            let vals = sg.apply_on_grid(t, |_| 1.0, &xs).unwrap();
            let gap = vals.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
            assert!(gap < prev_gap + 1e-12, "gap not shrinking at t={t}");
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-8, "p_t 1 should approach 1 pointwise, gap {prev_gap}");
    }

    #[test]
    fn semigroup_is_submarkov_contraction() {
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let xs: Vec<f64> = (1..40).map(|i| i as f64 / 40.0).collect();
        for t in [2e-3, 0.05, 0.4] {
            let vals = sg.apply_on_grid(t, |_| 1.0, &xs).unwrap();
            for (&x, &v) in xs.iter().zip(&vals) {
                assert!((-1e-8..=1.0 + 1e-8).contains(&v), "t={t}, x={x}: p_t 1 = {v}");
            }
        }
        // contraction in sup norm for a sign-changing input
        let u = |x: f64| (3.0 * PI * x).sin() - 0.4;
        let sup_u = 1.4;
        let vals = sg.apply_on_grid(0.01, u, &xs).unwrap();
        assert!(vals.iter().all(|v| v.abs() <= sup_u + 1e-8));
    }

    #[test]
    fn semigroup_matches_killed_random_walk() {
        // p_t 1 at (t, x) = (0.5, 0.5) against a killed simple random walk
        // with matched step variance: n sites, step dt_rw = h^2.
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let spectral = sg.apply_on_grid(0.5, |_| 1.0, &[0.5]).unwrap()[0];

        let n = 200usize; // grid points per unit
        let h = 1.0 / n as f64;
        let dt_rw = h * h;
        let steps = (0.5 / dt_rw).round() as usize;
        // survival probability by dynamic programming over the walk
        let mut p = vec![0.0f64; n + 1];
        for v in p.iter_mut().take(n).skip(1) {
            *v = 1.0;
        }
        for _ in 0..steps {
            let mut next = vec![0.0f64; n + 1];
            for i in 1..n {
                next[i] = 0.5 * (p[i - 1] + p[i + 1]);
            }
            // killed at 0 and n
            next[0] = 0.0;
            next[n] = 0.0;
            p = next;
        }
        let walk = p[n / 2];
        assert!(
            (spectral - walk).abs() < 2e-3,
            "spectral {spectral} vs killed walk {walk}"
        );
    }

    #[test]
    fn energy_functional_vanishes_with_zero_argument() {
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let u = ExcessiveFunction::harmonic(1.0, 0.0).unwrap();
        let v = ExcessiveFunction::Escape;
        assert_eq!(energy_functional_t(&sg, &u, &v, 0.25).unwrap(), 0.0);
    }

    #[test]
    fn energy_functional_of_one_matches_series_oracle() {
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let one = ExcessiveFunction::harmonic(1.0, 1.0).unwrap();
        for t in [0.05, 0.1, 0.2, 0.4] {
            let got = energy_functional_t(&sg, &one, &one, t).unwrap();
            // direct series: (1 - sum c_k^2 e^{-lambda_k t}) / t with c_k = 2 sqrt2/(k pi), odd k
            let mut s = 0.0;
            for k in (1..4000).step_by(2) {
                let c = 2.0 * SQRT_2 / (k as f64 * PI);
                s += c * c * (-AbsorbedSemigroup::eigenvalue(k) * t).exp();
            }
            let want = (1.0 - s) / t;
            assert!((got - want).abs() < 1e-10, "t={t}: {got} vs {want}");
            assert!(got > 0.0);
        }
    }

    #[test]
    fn energy_functional_monotone_in_t() {
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let u = ExcessiveFunction::harmonic(1.0, 0.0).unwrap();
        let v = ExcessiveFunction::harmonic(0.0, 1.0).unwrap();
        let grid = [0.4, 0.2, 0.1, 0.05];
        let mut prev = -f64::INFINITY;
        for &t in &grid {
            let val = energy_functional_t(&sg, &u, &v, t).unwrap();
            assert!(val >= prev - 1e-12, "not nondecreasing as t decreases at t={t}");
            prev = val;
        }
    }

    #[test]
    fn energy_functional_routes_agree_at_switch() {
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let u = ExcessiveFunction::harmonic(1.0, 0.0).unwrap();
        let v = ExcessiveFunction::harmonic(0.0, 1.0).unwrap();
        let series = energy_functional_t(&sg, &u, &v, IMAGE_SWITCH_T).unwrap();
        let image = energy_functional_t(&sg, &u, &v, IMAGE_SWITCH_T * 0.999_999).unwrap();
        assert!(
            (series - image).abs() < 1e-7,
            "series {series} vs image {image}"
        );
    }

    #[test]
    fn energy_functional_t_limit_matches_alpha_limit() {
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let u = ExcessiveFunction::harmonic(1.0, 0.0).unwrap();
        let v = ExcessiveFunction::harmonic(0.0, 1.0).unwrap();
        // at t = 0.01 the remaining defect is a theta-function tail, far below 1e-6
        let t_route = energy_functional_t(&sg, &u, &v, 0.01).unwrap();
        let alpha_route = interval_endpoint_pairing();
        assert!(
            (t_route - alpha_route).abs() < 1e-6,
            "t route {t_route} vs alpha route {alpha_route}"
        );
    }

    #[test]
    fn rejects_non_excessive_input() {
        assert!(ExcessiveFunction::harmonic(-1.0, 0.5).is_err());
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let u = ExcessiveFunction::harmonic(1.0, 0.0).unwrap();
        assert!(energy_functional_t(&sg, &u, &u, 0.0).is_err());
        assert!(energy_functional_t(&sg, &u, &u, -1.0).is_err());
    }

    #[test]
    fn feller_limit_reaches_half() {
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let schedule: Vec<f64> = (0..=14).map(|k| 2.0f64.powi(k)).collect();
        let lim = feller_measure_limit(
            &sg,
            &BoundaryFunction::endpoint_indicator(0),
            &BoundaryFunction::endpoint_indicator(1),
            &schedule,
            1e-9,
        )
        .unwrap();
        assert!((lim.value - 0.5).abs() < 1e-6, "limit {}", lim.value);
        assert!(lim.max_violation <= 1e-9);
        // bilinearity over the two-point boundary: off-diagonal part of U(1 (x) 1)
        let lim10 = feller_measure_limit(
            &sg,
            &BoundaryFunction::endpoint_indicator(1),
            &BoundaryFunction::endpoint_indicator(0),
            &schedule,
            1e-9,
        )
        .unwrap();
        assert!((lim.value + lim10.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn feller_limit_validates_schedule() {
        let sg = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let f = BoundaryFunction::endpoint_indicator(0);
        let g = BoundaryFunction::endpoint_indicator(1);
        assert!(feller_measure_limit(&sg, &f, &g, &[1.0, 2.0], 1e-9).is_err());
        assert!(feller_measure_limit(&sg, &f, &g, &[1.0, 3.0, 2.0], 1e-9).is_err());
        // zero g: all iterates zero
        let z = BoundaryFunction::Endpoints { at0: 0.0, at1: 0.0 };
        let lim = feller_measure_limit(&sg, &f, &z, &[1.0, 2.0, 4.0], 1e-9).unwrap();
        assert_eq!(lim.value, 0.0);
    }

    #[test]
    fn supplementary_feller_zero_on_finite_volume() {
        let sg_f = BoundaryFunction::Constant(1.0);
        assert_eq!(
            supplementary_feller(&Geometry::Interval01, 2.0, &sg_f).unwrap(),
            0.0
        );
        assert_eq!(
            supplementary_feller(&Geometry::UnitDisk, 7.0, &sg_f).unwrap(),
            0.0
        );
    }

    #[test]
    fn supplementary_feller_exterior_alpha_independent() {
        let ext = Geometry::ball_exterior(3, 1.0).unwrap();
        let one = BoundaryFunction::Constant(1.0);
        let v1 = supplementary_feller(&ext, 1.0, &one).unwrap();
        let v2 = supplementary_feller(&ext, 2.0, &one).unwrap();
        let v8 = supplementary_feller(&ext, 8.0, &one).unwrap();
        assert!((v1 - v2).abs() < 1e-9, "{v1} vs {v2}");
        assert!((v2 - v8).abs() < 1e-9);
        // radial integral evaluates to 2 pi R for unit data
        assert!((v1 - 2.0 * PI).abs() < 1e-9, "total escape mass {v1}");
        // scaling in R
        let ext2 = Geometry::ball_exterior(3, 2.0).unwrap();
        let w = supplementary_feller(&ext2, 1.0, &one).unwrap();
        assert!((w - 4.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn interval_endpoint_pairing_is_half() {
        assert!((interval_endpoint_pairing() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn truncation_control() {
        // doubling the eigen truncation moves reported values by < 1e-8
        let a = AbsorbedSemigroup::interval(DEFAULT_MODES).unwrap();
        let b = AbsorbedSemigroup::interval(2 * DEFAULT_MODES).unwrap();
        let u = ExcessiveFunction::harmonic(1.0, 1.0).unwrap();
        for t in [0.002, 0.05, 0.4] {
            let va = energy_functional_t(&a, &u, &u, t).unwrap();
            let vb = energy_functional_t(&b, &u, &u, t).unwrap();
            assert!((va - vb).abs() < 1e-8, "t={t}: {va} vs {vb}");
        }
        let xs = [0.3, 0.6];
        let ga = a.apply_on_grid(0.01, |_| 1.0, &xs).unwrap();
        let gb = b.apply_on_grid(0.01, |_| 1.0, &xs).unwrap();
        for (x, y) in ga.iter().zip(&gb) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}
