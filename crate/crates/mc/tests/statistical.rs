//! Statistical integration tests at moderate sample sizes; the pinned
//! full-scale parameters live in the acceptance suite of the runner crate.

use feller_core::{BoundaryFunction, Geometry};
use feller_mc::*;
use std::f64::consts::PI;

/// Closed form of the circle kernel mass over a product of separated arcs,
/// through the double antiderivative -ln sin(psi/2) / (2 pi).
fn arc_pair_mass(a: (f64, f64), b: (f64, f64)) -> f64 {
    let w = |psi: f64| {
        let p = psi.rem_euclid(2.0 * PI);
        -(p / 2.0).sin().ln() / (2.0 * PI)
    };
    w(b.1 - a.0) + w(b.0 - a.1) - w(b.1 - a.1) - w(b.0 - a.0)
}

#[test]
fn circle_arc_census_tracks_kernel_mass() {
    let a = (0.0, PI / 2.0);
    let b = (PI, 1.5 * PI);
    let target = arc_pair_mass(a, b);
    let cfg = PathConfig::new(4e-5, 1.0, 6000, 2718)
        .with_layer_factor(1.0)
        .with_delta_min(PI / 2.0);
    let est = estimate_feller_measure(
        &Geometry::UnitDisk,
        &BoundaryFunction::arc(a.0, a.1).unwrap(),
        &BoundaryFunction::arc(b.0, b.1).unwrap(),
        &cfg,
    )
    .unwrap();
    assert!(
        (est.value - target).abs() < 3.0 * est.ci_half + 0.05 * target,
        "census {} +- {} vs kernel mass {}",
        est.value,
        est.ci_half,
        target
    );
}

#[test]
fn composite_first_hit_distribution_matches_poisson_kernel() {
    // direct hits plus protocol re-entries together follow the exact
    // first-hit law from the launch point: the fraction on the near side of
    // the sphere (u = cos angle to the launch axis > 0) is 1 - F(0)
    let ext = Geometry::ball_exterior(3, 1.0).unwrap();
    let (rho, radius) = (2.0f64, 1.0f64);
    let cfg = PathConfig::new(1e-4, 1.0, 30_000, 13_579).with_r_escape(3.0);
    let hits = first_hits_from(&ext, rho, &cfg).unwrap();
    let n_hits = hits.len() as f64;
    // hit frequency R/rho
    let frac = n_hits / cfg.n_paths as f64;
    assert!(
        (frac - radius / rho).abs() < 0.015,
        "hit fraction {frac} vs {}",
        radius / rho
    );
    // near-side mass from the kernel CDF
    let span = 1.0 / (rho - radius) - 1.0 / (rho + radius);
    let f0 = ((rho * rho + radius * radius).sqrt().recip() - 1.0 / (rho + radius)) / span;
    let near = hits.iter().filter(|p| p[2] > 0.0).count() as f64 / n_hits;
    let ci = 1.96 * (near * (1.0 - near) / n_hits).sqrt();
    assert!(
        ((1.0 - f0) - near).abs() < ci + 0.02,
        "near-side fraction {near} vs {}",
        1.0 - f0
    );
}

#[test]
fn excursion_records_are_disjoint_ordered_and_on_the_boundary() {
    let cfg = PathConfig::new(1e-4, 6.0, 1, 4242)
        .with_layer_factor(1.0)
        .with_delta_min(0.25);
    for geom in [Geometry::Interval01, Geometry::UnitDisk] {
        let start = if geom == Geometry::Interval01 {
            vec![0.5]
        } else {
            vec![0.2, 0.1]
        };
        let path = simulate_reflected_path(&geom, &start, &cfg).unwrap();
        let records = decompose_excursions(&path, &cfg).unwrap();
        assert!(!records.is_empty(), "{geom:?}: a 6-unit path should register excursions");
        let eps = cfg.eps_layer();
        for w in records.windows(2) {
            assert!(w[0].end_time <= w[1].start_time, "overlap in {geom:?}");
        }
        for r in &records {
            assert!(r.start_time < r.end_time);
            assert!(r.start.distance(&r.end) >= cfg.delta_min);
            // the recorded endpoints coincide with path samples snapped from
            // inside the layer
            let i = (r.start_time / cfg.dt).round() as usize;
            let p = &path.positions[i];
            match (&geom, r.start) {
                (Geometry::Interval01, BoundaryPoint::Endpoint(e)) => {
                    assert!((p[0] - e as f64).abs() <= eps + 1e-12);
                }
                (Geometry::UnitDisk, BoundaryPoint::Angle(_)) => {
                    let rr = (p[0] * p[0] + p[1] * p[1]).sqrt();
                    assert!(rr >= 1.0 - eps - 1e-12);
                }
                other => panic!("unexpected endpoint {other:?}"),
            }
        }
    }
}

#[test]
fn census_records_deterministic_on_the_disk() {
    let cfg = PathConfig::new(2e-4, 1.0, 400, 99)
        .with_layer_factor(1.0)
        .with_delta_min(0.5);
    let pairs = [(
        BoundaryFunction::arc(0.0, 1.0).unwrap(),
        BoundaryFunction::arc(2.0, 3.0).unwrap(),
    )];
    let a = run_excursion_census(&Geometry::UnitDisk, &cfg, &pairs, true).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool
        .install(|| run_excursion_census(&Geometry::UnitDisk, &cfg, &pairs, true).unwrap());
    assert_eq!(a.records.len(), b.records.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x, y);
    }
    assert_eq!(a.clock_raw_sum.to_bits(), b.clock_raw_sum.to_bits());
}

#[test]
fn escape_hemisphere_symmetry_moderate_scale() {
    let ext = Geometry::ball_exterior(3, 1.0).unwrap();
    let cfg = PathConfig::new(2e-4, 0.1, 120_000, 31_415).with_r_escape(4.0);
    let full = BoundaryFunction::Constant(1.0);
    let hemi = BoundaryFunction::SphereCap { axis: [0.0, 0.0, 1.0], cos_min: 0.0 };
    let ests = estimate_escape_measures(&ext, &[full, hemi], &cfg, 0.05).unwrap();
    let hits = ests[0].raw_sum;
    assert!(hits > 100.0, "need hits to compare, got {hits}");
    let ratio = ests[1].raw_sum / hits;
    let ci = 1.96 * (ratio * (1.0 - ratio) / hits).sqrt();
    assert!(
        (ratio - 0.5).abs() <= ci + 0.01,
        "hemisphere ratio {ratio} +- {ci}"
    );
}

#[test]
fn circle_census_symmetric_under_pair_reversal() {
    // reversibility: the (A, B) and (B, A) censuses agree within joint CI
    let a = BoundaryFunction::arc(0.0, PI / 2.0).unwrap();
    let b = BoundaryFunction::arc(PI, 1.5 * PI).unwrap();
    let cfg = PathConfig::new(4e-5, 1.0, 4000, 8887)
        .with_layer_factor(1.0)
        .with_delta_min(PI / 2.0);
    let out = run_excursion_census(
        &Geometry::UnitDisk,
        &cfg,
        &[(a.clone(), b.clone()), (b, a)],
        false,
    )
    .unwrap();
    let fwd = out.estimate(0);
    let rev = out.estimate(1);
    assert!(
        (fwd.value - rev.value).abs() <= fwd.ci_half + rev.ci_half,
        "forward {} +- {} vs reversed {} +- {}",
        fwd.value,
        fwd.ci_half,
        rev.value,
        rev.ci_half
    );
}

#[test]
fn interval_census_refines_toward_the_pairing_value() {
    // three dt levels with the default layer factor: the bias shrinks
    let mut biases = Vec::new();
    for (i, dt) in [6.4e-4, 1.6e-4, 4e-5].into_iter().enumerate() {
        let cfg = PathConfig::new(dt, 1.0, 6000, 500 + i as u64).with_layer_factor(3.0);
        let est = estimate_feller_measure(
            &Geometry::Interval01,
            &BoundaryFunction::endpoint_indicator(0),
            &BoundaryFunction::endpoint_indicator(1),
            &cfg,
        )
        .unwrap();
        biases.push((est.value - 0.5).abs());
    }
    assert!(
        biases[2] < biases[0],
        "bias did not shrink across refinements: {biases:?}"
    );
}
