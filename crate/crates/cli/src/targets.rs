//! Independent numeric targets for the statistical experiments.

use feller_core::{douglas_kernel_circle, quad};

/// Kernel mass of a product of separated circle arcs:
/// the double integral of 1/(4 pi (1 - cos(xi - eta))) over A x B.
///
/// The arcs must not touch; the integrand is then smooth over the rectangle
/// and composite Gauss-Legendre converges fast.
pub fn arc_pair_kernel_mass(a: (f64, f64), b: (f64, f64)) -> f64 {
    let panels = 24;
    let nodes = 12;
    let mk = |lo: f64, hi: f64| -> Vec<f64> {
        (0..=panels)
            .map(|i| lo + (hi - lo) * i as f64 / panels as f64)
            .collect()
    };
    let outer_breaks = mk(a.0, a.1);
    let inner_breaks = mk(b.0, b.1);
    quad::integrate_composite(
        &|xi: f64| {
            quad::integrate_composite(
                &|eta: f64| douglas_kernel_circle(xi, eta).unwrap(),
                &inner_breaks,
                nodes,
            )
        },
        &outer_breaks,
        nodes,
    )
}

/// The circle jump-census bins: ordered pairs of eighth-circle arcs whose
/// supports are separated by at least a quarter arc.
pub fn circle_jump_bins() -> Vec<((f64, f64), (f64, f64))> {
    let w = std::f64::consts::FRAC_PI_4;
    let arc = |k: usize| (k as f64 * w, (k + 1) as f64 * w);
    vec![
        (arc(0), arc(2)),
        (arc(0), arc(4)),
        (arc(1), arc(3)),
        (arc(1), arc(5)),
        (arc(2), arc(6)),
        (arc(3), arc(7)),
        (arc(4), arc(6)),
        (arc(5), arc(7)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Closed form via the double antiderivative W(psi) = -ln sin(psi/2) / (2 pi).
    fn arc_pair_closed(a: (f64, f64), b: (f64, f64)) -> f64 {
        let w = |psi: f64| {
            let p = psi.rem_euclid(2.0 * PI);
            -(p / 2.0).sin().ln() / (2.0 * PI)
        };
        w(b.1 - a.0) + w(b.0 - a.1) - w(b.1 - a.1) - w(b.0 - a.0)
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let a = (0.0, PI / 2.0);
        let b = (PI, 1.5 * PI);
        let q = arc_pair_kernel_mass(a, b);
        let c = arc_pair_closed(a, b);
        // the reference pair evaluates to ln(2) / (2 pi)
        assert!((c - 2f64.ln() / (2.0 * PI)).abs() < 1e-14);
        assert!((q - c).abs() < 1e-10, "quadrature {q} vs closed {c}");
        for (a, b) in circle_jump_bins() {
            let q = arc_pair_kernel_mass(a, b);
            let c = arc_pair_closed(a, b);
            assert!((q - c).abs() < 1e-9 * c.max(1.0), "bin {a:?}x{b:?}: {q} vs {c}");
            // symmetry of the kernel mass
            let r = arc_pair_kernel_mass(b, a);
            assert!((q - r).abs() < 1e-10);
        }
    }

    #[test]
    fn bins_are_separated() {
        for ((a0, a1), (b0, b1)) in circle_jump_bins() {
            let fa = feller_core::BoundaryFunction::arc(a0, a1).unwrap();
            let fb = feller_core::BoundaryFunction::arc(b0, b1).unwrap();
            let sep = fa.support_separation(&fb).unwrap();
            assert!(sep >= PI / 4.0 - 1e-12, "separation {sep}");
        }
    }
}
