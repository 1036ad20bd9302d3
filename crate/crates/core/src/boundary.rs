//! Functions on the boundary set F of a model domain.
//!
//! Each representation is tied to the kind of boundary it lives on: endpoint
//! values for the two-point interval boundary, finite Fourier series, disjoint
//! half-open arc indicators or tabulated grid values on the circle, and cap
//! indicators on the sphere. A `Constant` is valid on every boundary.

use crate::error::{CoreError, Result};
use crate::geometry::Geometry;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryFunction {
    /// The same value everywhere on F (any geometry).
    Constant(f64),
    /// Values at the interval endpoints 0 and 1.
    Endpoints { at0: f64, at1: f64 },
    /// Finite Fourier series a0 + sum_n (a_n cos n th + b_n sin n th) on the circle.
    Fourier { a0: f64, cos: Vec<f64>, sin: Vec<f64> },
    /// Indicator of a union of pairwise disjoint half-open arcs [lo, hi) in [0, 2 pi).
    ArcIndicator { arcs: Vec<(f64, f64)> },
    /// Values on the uniform angular grid th_k = 2 pi k / n, linearly interpolated.
    Tabulated { values: Vec<f64> },
    /// Indicator of the spherical cap { p : <p, axis> / |p| >= cos_min } (d = 3).
    /// `cos_min = -1` covers the full sphere.
    SphereCap { axis: [f64; 3], cos_min: f64 },
}

impl BoundaryFunction {
    /// Indicator of a single half-open arc.
    pub fn arc(lo: f64, hi: f64) -> Result<Self> {
        Self::arcs(vec![(lo, hi)])
    }

    /// Indicator of a union of disjoint half-open arcs.
    pub fn arcs(arcs: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &arcs {
            if !(0.0..TAU).contains(&lo) || !(lo < hi) || hi > TAU + 1e-12 {
                return Err(CoreError::InvalidArgument(format!(
                    "arc [{lo}, {hi}) must satisfy 0 <= lo < hi <= 2 pi"
                )));
            }
        }
        let mut sorted = arcs.clone();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for pair in sorted.windows(2) {
            if pair[1].0 < pair[0].1 {
                return Err(CoreError::InvalidArgument(
                    "arcs must be pairwise disjoint".into(),
                ));
            }
        }
        Ok(BoundaryFunction::ArcIndicator { arcs: sorted })
    }

    /// cos(n theta) as a Fourier representation.
    pub fn cos_mode(n: usize) -> Self {
        let mut cos = vec![0.0; n];
        cos[n - 1] = 1.0;
        BoundaryFunction::Fourier { a0: 0.0, cos, sin: vec![] }
    }

    /// Indicator of one interval endpoint.
    pub fn endpoint_indicator(which: usize) -> Self {
        match which {
            0 => BoundaryFunction::Endpoints { at0: 1.0, at1: 0.0 },
            _ => BoundaryFunction::Endpoints { at0: 0.0, at1: 1.0 },
        }
    }

    /// Checks that this representation matches the geometry's boundary.
    pub fn check_geometry(&self, geom: &Geometry) -> Result<()> {
        let ok = matches!(
            (self, geom),
            (BoundaryFunction::Constant(_), _)
                | (BoundaryFunction::Endpoints { .. }, Geometry::Interval01)
                | (
                    BoundaryFunction::Fourier { .. }
                        | BoundaryFunction::ArcIndicator { .. }
                        | BoundaryFunction::Tabulated { .. },
                    Geometry::UnitDisk,
                )
                | (
                    BoundaryFunction::SphereCap { .. },
                    Geometry::BallInterior { .. }
                        | Geometry::BallExterior { .. }
                        | Geometry::SpherePair { .. },
                )
        );
        if ok {
            Ok(())
        } else {
            Err(CoreError::GeometryMismatch(format!(
                "boundary representation {self:?} does not live on the boundary of {geom:?}"
            )))
        }
    }

    /// Value at an interval endpoint (0 or 1).
    pub fn eval_endpoint(&self, which: usize) -> Result<f64> {
        match self {
            BoundaryFunction::Constant(c) => Ok(*c),
            BoundaryFunction::Endpoints { at0, at1 } => Ok(if which == 0 { *at0 } else { *at1 }),
            _ => Err(CoreError::GeometryMismatch(
                "not an interval boundary function".into(),
            )),
        }
    }

    /// Value at the circle point with angle `theta` (any real angle).
    pub fn eval_angle(&self, theta: f64) -> Result<f64> {
        let th = theta.rem_euclid(TAU);
        match self {
            BoundaryFunction::Constant(c) => Ok(*c),
            BoundaryFunction::Fourier { a0, cos, sin } => {
                let mut v = *a0;
                for (i, a) in cos.iter().enumerate() {
                    v += a * ((i + 1) as f64 * th).cos();
                }
                for (i, b) in sin.iter().enumerate() {
                    v += b * ((i + 1) as f64 * th).sin();
                }
                Ok(v)
            }
            BoundaryFunction::ArcIndicator { arcs } => {
                let inside = arcs.iter().any(|&(lo, hi)| th >= lo && th < hi);
                Ok(if inside { 1.0 } else { 0.0 })
            }
            BoundaryFunction::Tabulated { values } => {
                let n = values.len();
                if n == 0 {
                    return Err(CoreError::InvalidArgument("empty tabulated data".into()));
                }
                let pos = th / TAU * n as f64;
                let i = pos.floor() as usize % n;
                let frac = pos - pos.floor();
                Ok(values[i] * (1.0 - frac) + values[(i + 1) % n] * frac)
            }
            _ => Err(CoreError::GeometryMismatch(
                "not a circle boundary function".into(),
            )),
        }
    }

    /// Angular derivative f'(theta), defined a.e. (zero for indicators).
    pub fn derivative_angle(&self, theta: f64) -> Result<f64> {
        let th = theta.rem_euclid(TAU);
        match self {
            BoundaryFunction::Constant(_) | BoundaryFunction::ArcIndicator { .. } => Ok(0.0),
            BoundaryFunction::Fourier { cos, sin, .. } => {
                let mut v = 0.0;
                for (i, a) in cos.iter().enumerate() {
                    let n = (i + 1) as f64;
                    v -= a * n * (n * th).sin();
                }
                for (i, b) in sin.iter().enumerate() {
                    let n = (i + 1) as f64;
                    v += b * n * (n * th).cos();
                }
                Ok(v)
            }
            BoundaryFunction::Tabulated { values } => {
                let n = values.len() as f64;
                let h = TAU / n;
                let i = (th / h).floor() as usize % values.len();
                let j = (i + 1) % values.len();
                Ok((values[j] - values[i]) / h)
            }
            _ => Err(CoreError::GeometryMismatch(
                "not a circle boundary function".into(),
            )),
        }
    }

    /// Value at a point of the sphere (given as a vector of length R).
    pub fn eval_sphere(&self, p: &[f64; 3]) -> Result<f64> {
        match self {
            BoundaryFunction::Constant(c) => Ok(*c),
            BoundaryFunction::SphereCap { axis, cos_min } => {
                let norm_p = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                let norm_a =
                    (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
                let dot = p[0] * axis[0] + p[1] * axis[1] + p[2] * axis[2];
                Ok((dot >= *cos_min * norm_p * norm_a) as u8 as f64)
            }
            _ => Err(CoreError::GeometryMismatch(
                "not a sphere boundary function".into(),
            )),
        }
    }

    /// Exact circular autocorrelation difference
    /// `h(psi) = integral over eta of (f(eta + psi) - f(eta))^2 d eta`
    /// for circle representations (trapezoid fallback for tabulated data).
    pub fn angular_increment_energy(&self, psi: f64) -> Result<f64> {
        match self {
            BoundaryFunction::Constant(_) => Ok(0.0),
            BoundaryFunction::Fourier { cos, sin, .. } => {
                let mut v = 0.0;
                for (i, a) in cos.iter().enumerate() {
                    let n = (i + 1) as f64;
                    v += a * a * (1.0 - (n * psi).cos());
                }
                for (i, b) in sin.iter().enumerate() {
                    let n = (i + 1) as f64;
                    v += b * b * (1.0 - (n * psi).cos());
                }
                Ok(TAU * v)
            }
            BoundaryFunction::ArcIndicator { arcs } => {
                let total: f64 = arcs.iter().map(|&(lo, hi)| hi - lo).sum();
                let overlap = arc_union_shift_overlap(arcs, psi);
                Ok(2.0 * (total - overlap))
            }
            BoundaryFunction::Tabulated { values } => {
                let n = (values.len() * 4).max(1024);
                let mut acc = 0.0;
                for k in 0..n {
                    let th = TAU * k as f64 / n as f64;
                    let d = self.eval_angle(th + psi)? - self.eval_angle(th)?;
                    acc += d * d;
                }
                Ok(acc * TAU / n as f64)
            }
            _ => Err(CoreError::GeometryMismatch(
                "not a circle boundary function".into(),
            )),
        }
    }

    /// Linear combination `s * self + t * other` for Fourier representations.
    pub fn fourier_combination(&self, s: f64, other: &BoundaryFunction, t: f64) -> Result<Self> {
        match (self, other) {
            (
                BoundaryFunction::Fourier { a0, cos, sin },
                BoundaryFunction::Fourier { a0: c0, cos: ccos, sin: csin },
            ) => {
                let n = cos.len().max(ccos.len());
                let m = sin.len().max(csin.len());
                let get = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
                Ok(BoundaryFunction::Fourier {
                    a0: s * a0 + t * c0,
                    cos: (0..n).map(|i| s * get(cos, i) + t * get(ccos, i)).collect(),
                    sin: (0..m).map(|i| s * get(sin, i) + t * get(csin, i)).collect(),
                })
            }
            _ => Err(CoreError::InvalidArgument(
                "linear combinations are supported for Fourier data".into(),
            )),
        }
    }

    /// Smallest distance between the supports of two indicator-type functions,
    /// if both have localized supports on the same boundary.
    pub fn support_separation(&self, other: &BoundaryFunction) -> Option<f64> {
        match (self, other) {
            (
                BoundaryFunction::Endpoints { at0: a0, at1: a1 },
                BoundaryFunction::Endpoints { at0: b0, at1: b1 },
            ) => {
                // distance between {endpoints where self != 0} and likewise for other
                let sa: Vec<f64> = [(*a0, 0.0), (*a1, 1.0)]
                    .iter()
                    .filter(|(v, _)| *v != 0.0)
                    .map(|(_, p)| *p)
                    .collect();
                let sb: Vec<f64> = [(*b0, 0.0), (*b1, 1.0)]
                    .iter()
                    .filter(|(v, _)| *v != 0.0)
                    .map(|(_, p)| *p)
                    .collect();
                // an empty support is separated from everything
                Some(min_pair_distance(&sa, &sb, |x, y| (x - y).abs()).unwrap_or(f64::INFINITY))
            }
            (
                BoundaryFunction::ArcIndicator { arcs: a },
                BoundaryFunction::ArcIndicator { arcs: b },
            ) => {
                let mut best: Option<f64> = None;
                for &(alo, ahi) in a {
                    for &(blo, bhi) in b {
                        let d = circular_arc_distance((alo, ahi), (blo, bhi));
                        best = Some(best.map_or(d, |x: f64| x.min(d)));
                    }
                }
                Some(best.unwrap_or(f64::INFINITY))
            }
            _ => None,
        }
    }
}

fn min_pair_distance<F: Fn(f64, f64) -> f64>(a: &[f64], b: &[f64], d: F) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &x in a {
        for &y in b {
            let v = d(x, y);
            best = Some(best.map_or(v, |m: f64| m.min(v)));
        }
    }
    best
}

/// Gap between two arcs along the circle (zero if they overlap or touch).
fn circular_arc_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let gap1 = (b.0 - a.1).rem_euclid(TAU);
    let gap2 = (a.0 - b.1).rem_euclid(TAU);
    // If the arcs overlap, one of the "gaps" wraps around past the other arc.
    if gap1 + (b.1 - b.0) + gap2 + (a.1 - a.0) > TAU + 1e-12 {
        0.0
    } else {
        gap1.min(gap2)
    }
}

/// Measure of the intersection of a union of disjoint arcs with its own
/// rotation by `psi`.
fn arc_union_shift_overlap(arcs: &[(f64, f64)], psi: f64) -> f64 {
    let shift = psi.rem_euclid(TAU);
    let mut total = 0.0;
    for &(alo, ahi) in arcs {
        for &(blo, bhi) in arcs {
            // intersect [alo, ahi) with [blo - shift, bhi - shift) on the circle
            let lo = (blo - shift).rem_euclid(TAU);
            let len = bhi - blo;
            total += arc_intersection_length((alo, ahi), lo, len);
        }
    }
    total
}

/// Length of the intersection of the arc [alo, ahi) with the arc of length
/// `len` starting at `lo` (which may wrap).
fn arc_intersection_length(a: (f64, f64), lo: f64, len: f64) -> f64 {
    let pieces = if lo + len <= TAU {
        vec![(lo, lo + len)]
    } else {
        vec![(lo, TAU), (0.0, lo + len - TAU)]
    };
    pieces
        .into_iter()
        .map(|(l, h)| (h.min(a.1) - l.max(a.0)).max(0.0))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn fourier_eval_and_derivative() {
        let f = BoundaryFunction::cos_mode(3);
        assert!((f.eval_angle(0.2).unwrap() - (0.6f64).cos()).abs() < 1e-15);
        assert!((f.derivative_angle(0.2).unwrap() + 3.0 * (0.6f64).sin()).abs() < 1e-15);
    }

    #[test]
    fn arcs_validate_disjointness() {
        assert!(BoundaryFunction::arcs(vec![(0.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(BoundaryFunction::arcs(vec![(0.0, 1.0), (1.0, 2.0)]).is_ok());
        assert!(BoundaryFunction::arc(3.0, 1.0).is_err());
    }

    #[test]
    fn arc_indicator_membership() {
        let f = BoundaryFunction::arc(0.0, PI / 2.0).unwrap();
        assert_eq!(f.eval_angle(0.3).unwrap(), 1.0);
        assert_eq!(f.eval_angle(PI / 2.0).unwrap(), 0.0); // half-open
        assert_eq!(f.eval_angle(-0.1).unwrap(), 0.0);
        assert_eq!(f.eval_angle(TAU + 0.3).unwrap(), 1.0);
    }

    #[test]
    fn increment_energy_matches_quadrature_for_arcs() {
        let f = BoundaryFunction::arcs(vec![(0.0, 1.0), (2.0, 2.5)]).unwrap();
        for psi in [0.1, 0.7, 2.0, 4.0, 6.0] {
            let exact = f.angular_increment_energy(psi).unwrap();
            let n = 400_000;
            let mut acc = 0.0;
            for k in 0..n {
                let th = TAU * (k as f64 + 0.5) / n as f64;
                let d = f.eval_angle(th + psi).unwrap() - f.eval_angle(th).unwrap();
                acc += d * d;
            }
            acc *= TAU / n as f64;
            assert!(
                (exact - acc).abs() < 2e-4,
                "psi={psi}: exact {exact} vs riemann {acc}"
            );
        }
    }

    #[test]
    fn increment_energy_fourier() {
        // For cos(n th): h(psi) = 2 pi (1 - cos(n psi)); peak value 4 pi.
        let f = BoundaryFunction::cos_mode(2);
        let h = f.angular_increment_energy(PI / 2.0).unwrap();
        assert!((h - TAU * 2.0).abs() < 1e-12);
    }

    #[test]
    fn support_separation_arcs() {
        let a = BoundaryFunction::arc(0.0, PI / 2.0).unwrap();
        let b = BoundaryFunction::arc(PI, 3.0 * PI / 2.0).unwrap();
        let d = a.support_separation(&b).unwrap();
        assert!((d - PI / 2.0).abs() < 1e-12);
        let c = BoundaryFunction::arc(PI / 4.0, PI).unwrap();
        assert_eq!(a.support_separation(&c).unwrap(), 0.0);
    }

    #[test]
    fn endpoint_indicators() {
        let f = BoundaryFunction::endpoint_indicator(0);
        assert_eq!(f.eval_endpoint(0).unwrap(), 1.0);
        assert_eq!(f.eval_endpoint(1).unwrap(), 0.0);
        let g = BoundaryFunction::endpoint_indicator(1);
        assert_eq!(f.support_separation(&g).unwrap(), 1.0);
    }

    #[test]
    fn geometry_pairing_enforced() {
        let f = BoundaryFunction::cos_mode(1);
        assert!(f.check_geometry(&Geometry::UnitDisk).is_ok());
        assert!(f.check_geometry(&Geometry::Interval01).is_err());
        assert!(BoundaryFunction::Constant(1.0)
            .check_geometry(&Geometry::Interval01)
            .is_ok());
    }
}
