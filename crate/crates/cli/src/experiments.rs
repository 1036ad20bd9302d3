//! The built-in experiment catalog.
//!
//! Each experiment binds one verified identity to concrete routes with
//! pinned tolerances, and produces a self-contained report. Monte Carlo
//! experiments derive their per-path streams from the run seed plus a fixed
//! per-experiment offset, so experiments are independent but reproducible.

use crate::config::RunConfig;
use crate::error::LabError;
use crate::report::{CheckRow, VerificationReport};
use crate::targets;
use feller_core::{
    alpha_feller, energy_vs_douglas, escape_probability, feller_measure_limit,
    interval_endpoint_pairing, poisson_kernel_mass, supplementary_feller, AbsorbedSemigroup,
    BoundaryFunction, Geometry,
};
use feller_mc::{
    calibrate_local_time, estimate_escape_measures, hit_fraction_from, run_excursion_census,
    write_excursions_csv, write_jumps_csv, Jump, PathConfig,
};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Route {
    Spectral,
    Quadrature,
    MonteCarlo,
    CrossCheck,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Spectral => "spectral",
            Route::Quadrature => "quadrature",
            Route::MonteCarlo => "montecarlo",
            Route::CrossCheck => "cross-check",
        }
    }
}

/// A catalog entry: what is verified, where, and how.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentSpec {
    pub name: &'static str,
    pub geometry: &'static str,
    pub route: Route,
    /// The identity under test, in plain words.
    pub identity: &'static str,
}

pub fn catalog() -> Vec<ExperimentSpec> {
    vec![
        ExperimentSpec {
            name: "douglas-disk",
            geometry: "disk",
            route: Route::Quadrature,
            identity: "Dirichlet energy of the harmonic extension equals the singular \
                       boundary double integral on the disk (cos n theta, n = 1..4)",
        },
        ExperimentSpec {
            name: "interval-feller-spectral",
            geometry: "interval",
            route: Route::Spectral,
            identity: "the increasing alpha-limit of the endpoint pairing reaches 1/2",
        },
        ExperimentSpec {
            name: "interval-feller-trace",
            geometry: "interval",
            route: Route::CrossCheck,
            identity: "trace energy equality on the two-point boundary",
        },
        ExperimentSpec {
            name: "interval-monotone",
            geometry: "interval",
            route: Route::Spectral,
            identity: "alpha-order pairings are nondecreasing along the doubling schedule",
        },
        ExperimentSpec {
            name: "interval-identity",
            geometry: "interval",
            route: Route::Quadrature,
            identity: "finite-alpha energy identity: invariant term plus jump term equals \
                       the boundary pairing",
        },
        ExperimentSpec {
            name: "interval-feller-mc",
            geometry: "interval",
            route: Route::MonteCarlo,
            identity: "the excursion census reproduces the endpoint pairing 1/2",
        },
        ExperimentSpec {
            name: "circle-census-mc",
            geometry: "circle",
            route: Route::MonteCarlo,
            identity: "the excursion census over separated arcs matches the circle kernel mass",
        },
        ExperimentSpec {
            name: "circle-jumps-mc",
            geometry: "circle",
            route: Route::MonteCarlo,
            identity: "time-changed jump rates match the kernel mass bin-wise after one \
                       interval calibration; the killing census is zero",
        },
        ExperimentSpec {
            name: "exterior-escape-mc",
            geometry: "exterior-ball",
            route: Route::MonteCarlo,
            identity: "the escape census is rotation invariant (hemisphere/full ratio 1/2) \
                       and vanishes on finite-volume interiors",
        },
        ExperimentSpec {
            name: "poisson-mass",
            geometry: "ball",
            route: Route::Quadrature,
            identity: "hitting-kernel mass is 1 inside and (R/|x|)^(d-2) outside",
        },
        ExperimentSpec {
            name: "interval-refinement-mc",
            geometry: "interval",
            route: Route::MonteCarlo,
            identity: "the census estimate approaches 1/2 with shrinking bias as dt refines",
        },
    ]
}

/// Per-experiment tunable defaults, surfaced by the `defaults` subcommand.
pub fn parameter_defaults() -> Vec<(&'static str, Vec<(String, String)>)> {
    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }
    vec![
        (
            "interval-feller-mc",
            kv(&[
                ("n_paths", "100000"),
                ("dt", "1e-5"),
                ("horizon", "1.0"),
                ("layer_factor", "1.0"),
                ("delta_min", "0.5"),
            ]),
        ),
        (
            "circle-census-mc",
            kv(&[
                ("n_paths", "100000"),
                ("dt", "1e-5"),
                ("horizon", "1.0"),
                ("layer_factor", "1.0"),
            ]),
        ),
        (
            "circle-jumps-mc",
            kv(&[
                ("n_paths", "100000"),
                ("dt", "1e-5"),
                ("horizon", "1.0"),
                ("layer_factor", "1.0"),
                ("calibration_paths", "30000"),
            ]),
        ),
        (
            "exterior-escape-mc",
            kv(&[
                ("n_paths", "600000"),
                ("dt", "1e-4"),
                ("window", "0.1"),
                ("r_escape", "4.0"),
                ("fraction_paths", "20000"),
                ("fraction_dt", "2.5e-5"),
            ]),
        ),
        (
            "interval-refinement-mc",
            kv(&[("n_paths", "30000"), ("layer_factor", "3.0"), ("horizon", "1.0")]),
        ),
    ]
}

/// Seed offsets keeping the experiments' path streams disjoint.
fn experiment_seed(base: u64, offset: u64) -> u64 {
    base.wrapping_add(offset.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn run_experiment(
    name: &str,
    cfg: &RunConfig,
    out_dir: Option<&Path>,
) -> Result<VerificationReport, LabError> {
    let spec = catalog()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| LabError::UnknownExperiment(name.to_string()))?;
    let started = Instant::now();
    let mut report = match name {
        "douglas-disk" => douglas_disk(cfg)?,
        "interval-feller-spectral" => interval_feller_spectral(cfg)?,
        "interval-feller-trace" => interval_feller_trace(cfg)?,
        "interval-monotone" => interval_monotone(cfg)?,
        "interval-identity" => interval_identity(cfg)?,
        "interval-feller-mc" => interval_feller_mc(cfg, out_dir)?,
        "circle-census-mc" => circle_census_mc(cfg, out_dir)?,
        "circle-jumps-mc" => circle_jumps_mc(cfg, out_dir)?,
        "exterior-escape-mc" => exterior_escape_mc(cfg)?,
        "poisson-mass" => poisson_mass(cfg)?,
        "interval-refinement-mc" => interval_refinement_mc(cfg)?,
        _ => unreachable!(),
    };
    report.experiment = spec.name.to_string();
    report.identity = spec.identity.to_string();
    report.geometry = spec.geometry.to_string();
    report.route = spec.route.as_str().to_string();
    report.runtime_seconds = started.elapsed().as_secs_f64();
    Ok(report.finalize())
}

fn blank_report(seed: u64, cfg: &RunConfig) -> VerificationReport {
    VerificationReport {
        experiment: String::new(),
        identity: String::new(),
        geometry: String::new(),
        route: String::new(),
        seed,
        pass: false,
        runtime_seconds: 0.0,
        checks: Vec::new(),
        curves: BTreeMap::new(),
        config_echo: cfg.echo(),
    }
}

fn echo_param(report: &mut VerificationReport, exp: &str, key: &str, value: impl ToString) {
    report.config_echo.insert(format!("{exp}.{key}"), value.to_string());
}

// ---------------------------------------------------------------------------
// deterministic experiments
// ---------------------------------------------------------------------------

fn douglas_disk(cfg: &RunConfig) -> Result<VerificationReport, LabError> {
    let mut report = blank_report(cfg.seed()?, cfg);
    let mut curve = Vec::new();
    for n in 1..=4usize {
        let f = BoundaryFunction::cos_mode(n);
        let er = energy_vs_douglas(&Geometry::UnitDisk, &f, 1e-5)?;
        let analytic = n as f64 * PI / 2.0;
        report.checks.push(CheckRow::relative(
            format!("douglas equals dirichlet (cos {n}t)"),
            er.douglas_value,
            er.dirichlet_energy,
            1e-5,
        ));
        report.checks.push(CheckRow::relative(
            format!("energy equals n pi/2 (cos {n}t)"),
            er.douglas_value,
            analytic,
            1e-5,
        ));
        curve.push(vec![n as f64, er.dirichlet_energy, er.douglas_value, analytic]);
    }
    report.curves.insert("mode-energies".into(), curve);
    Ok(report)
}

fn interval_feller_spectral(cfg: &RunConfig) -> Result<VerificationReport, LabError> {
    let mut report = blank_report(cfg.seed()?, cfg);
    let sg = AbsorbedSemigroup::interval(512)?;
    let f0 = BoundaryFunction::endpoint_indicator(0);
    let f1 = BoundaryFunction::endpoint_indicator(1);
    let value = alpha_feller(&sg, 1e4, &f0, &f1)?;
    report.checks.push(CheckRow::absolute(
        "endpoint pairing at alpha = 1e4",
        value,
        0.5,
        1e-4,
    ));
    let schedule: Vec<f64> = (0..=14).map(|k| 2f64.powi(k)).collect();
    let lim = feller_measure_limit(&sg, &f0, &f1, &schedule, 1e-9)?;
    report.curves.insert(
        "u-alpha".into(),
        lim.iterates.iter().map(|&(a, v)| vec![a, v]).collect(),
    );
    report.checks.push(CheckRow::absolute(
        "largest-alpha iterate",
        lim.value,
        0.5,
        1e-4,
    ));
    Ok(report)
}

fn interval_feller_trace(cfg: &RunConfig) -> Result<VerificationReport, LabError> {
    let mut report = blank_report(cfg.seed()?, cfg);
    let f = BoundaryFunction::Endpoints { at0: 0.0, at1: 1.0 };
    let er = energy_vs_douglas(&Geometry::Interval01, &f, 1e-9)?;
    report.checks.push(CheckRow::absolute(
        "dirichlet equals douglas on the two-point boundary",
        er.douglas_value,
        er.dirichlet_energy,
        1e-9,
    ));
    report.checks.push(CheckRow::absolute(
        "both equal the endpoint pairing value",
        er.douglas_value,
        interval_endpoint_pairing(),
        1e-9,
    ));
    Ok(report)
}

fn interval_monotone(cfg: &RunConfig) -> Result<VerificationReport, LabError> {
    let mut report = blank_report(cfg.seed()?, cfg);
    let sg = AbsorbedSemigroup::interval(512)?;
    let f0 = BoundaryFunction::endpoint_indicator(0);
    let f1 = BoundaryFunction::endpoint_indicator(1);
    let schedule: Vec<f64> = (0..=14).map(|k| 2f64.powi(k)).collect();
    let lim = feller_measure_limit(&sg, &f0, &f1, &schedule, 1e-9)?;
    report.checks.push(CheckRow::upper_bound(
        "largest decrease along the doubling schedule",
        lim.max_violation,
        1e-9,
    ));
    report.checks.push(CheckRow::absolute(
        "limit of the schedule",
        lim.value,
        0.5,
        1e-4,
    ));
    report.curves.insert(
        "u-alpha".into(),
        lim.iterates.iter().map(|&(a, v)| vec![a, v]).collect(),
    );
    Ok(report)
}

fn interval_identity(cfg: &RunConfig) -> Result<VerificationReport, LabError> {
    let mut report = blank_report(cfg.seed()?, cfg);
    let sg = AbsorbedSemigroup::interval(512)?;
    let u = BoundaryFunction::Endpoints { at0: 0.0, at1: 1.0 };
    for alpha in [1.0, 2.0, 8.0] {
        let parts = feller_core::identity_energy_residual(&sg, alpha, &u)?;
        report.checks.push(CheckRow::absolute(
            format!("energy identity residual at alpha = {alpha}"),
            parts.residual,
            0.0,
            1e-8,
        ));
    }
    Ok(report)
}

fn poisson_mass(cfg: &RunConfig) -> Result<VerificationReport, LabError> {
    let mut report = blank_report(cfg.seed()?, cfg);
    // deterministic spot points: fixed LCG over mixed dimensions and radii
    let mut state = 0x243f_6a88_85a3_08d3u64 ^ report.seed;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut max_interior: f64 = 0.0;
    let mut max_exterior: f64 = 0.0;
    let mut max_complement: f64 = 0.0;
    let ext = Geometry::ball_exterior(3, 1.0)?;
    for i in 0..20 {
        let d = if i % 3 == 0 { 4 } else { 3 };
        let mut x: Vec<f64> = (0..d).map(|_| next() - 0.5).collect();
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let r = if i % 2 == 0 { 0.15 + 0.7 * next() } else { 1.2 + 2.0 * next() };
        for c in &mut x {
            *c *= r / norm;
        }
        let mass = poisson_kernel_mass(d, 1.0, &x)?;
        if r < 1.0 {
            max_interior = max_interior.max((mass - 1.0).abs());
        } else {
            let want = (1.0 / r).powi(d as i32 - 2);
            max_exterior = max_exterior.max((mass - want).abs());
            if d == 3 {
                let q = escape_probability(&ext, &x);
                max_complement = max_complement.max((q + mass - 1.0).abs());
            }
        }
    }
    report.checks.push(CheckRow::absolute(
        "interior kernel mass (worst of 20 points)",
        max_interior,
        0.0,
        1e-8,
    ));
    report.checks.push(CheckRow::absolute(
        "exterior kernel mass vs (R/|x|)^(d-2)",
        max_exterior,
        0.0,
        1e-8,
    ));
    report.checks.push(CheckRow::absolute(
        "escape probability complements the exterior mass",
        max_complement,
        0.0,
        1e-8,
    ));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Monte Carlo experiments
// ---------------------------------------------------------------------------

fn maybe_write_records(
    out_dir: Option<&Path>,
    emit: bool,
    name: &str,
    seed: u64,
    geom: &Geometry,
    outcome: &feller_mc::CensusOutcome,
    kappa: Option<f64>,
) -> Result<(), LabError> {
    if !emit {
        return Ok(());
    }
    let Some(dir) = out_dir else { return Ok(()) };
    let sub = dir.join(format!("{name}-{seed}"));
    std::fs::create_dir_all(&sub)?;
    let exc = std::fs::File::create(sub.join("excursions.csv"))?;
    write_excursions_csv(std::io::BufWriter::new(exc), geom, &outcome.records)?;
    let jumps: Vec<Jump> = outcome
        .records
        .iter()
        .map(|r| Jump {
            path_id: r.path_id,
            boundary_time: kappa.unwrap_or(1.0) * r.clock_at_start,
            from: r.start,
            to: r.end,
            size: r.start.distance(&r.end),
        })
        .collect();
    let jf = std::fs::File::create(sub.join("jumps.csv"))?;
    write_jumps_csv(std::io::BufWriter::new(jf), geom, &jumps)?;
    Ok(())
}

fn interval_feller_mc(
    cfg: &RunConfig,
    out_dir: Option<&Path>,
) -> Result<VerificationReport, LabError> {
    let exp = "interval-feller-mc";
    let seed = experiment_seed(cfg.seed()?, 1);
    let mut report = blank_report(seed, cfg);
    let n_paths = cfg.get_u64(exp, "n_paths", 100_000)?;
    let dt = cfg.get_f64(exp, "dt", 1e-5)?;
    let horizon = cfg.get_f64(exp, "horizon", 1.0)?;
    let layer = cfg.get_f64(exp, "layer_factor", 1.0)?;
    let delta_min = cfg.get_f64(exp, "delta_min", 0.5)?;
    let emit = cfg.get_bool(exp, "emit_csv", false)?;
    for (k, v) in [
        ("n_paths", n_paths.to_string()),
        ("dt", dt.to_string()),
        ("horizon", horizon.to_string()),
        ("layer_factor", layer.to_string()),
        ("delta_min", delta_min.to_string()),
        ("seed", seed.to_string()),
    ] {
        echo_param(&mut report, exp, k, v);
    }

    let pc = PathConfig::new(dt, horizon, n_paths, seed)
        .with_layer_factor(layer)
        .with_delta_min(delta_min);
    let pairs = [(
        BoundaryFunction::endpoint_indicator(0),
        BoundaryFunction::endpoint_indicator(1),
    )];
    let outcome = run_excursion_census(&Geometry::Interval01, &pc, &pairs, emit)?;
    let est = outcome.estimate(0);
    let target = interval_endpoint_pairing();
    report.checks.push(CheckRow::ci_overlap(
        "census estimate within its CI of the spectral value",
        est.value,
        target,
        est.ci_half,
    ));
    report.checks.push(CheckRow::upper_bound(
        "CI half-width at most 5% of the target",
        est.ci_half,
        0.05 * target,
    ));
    report.checks.push(CheckRow::absolute(
        "killing census on the interval",
        outcome.killed as f64,
        0.0,
        0.0,
    ));
    report.checks.push(CheckRow::upper_bound(
        "paths cut at the completion grace limit",
        outcome.truncated as f64,
        0.0,
    ));
    maybe_write_records(out_dir, emit, exp, seed, &Geometry::Interval01, &outcome, None)?;
    Ok(report)
}

fn circle_census_mc(
    cfg: &RunConfig,
    out_dir: Option<&Path>,
) -> Result<VerificationReport, LabError> {
    let exp = "circle-census-mc";
    let seed = experiment_seed(cfg.seed()?, 2);
    let mut report = blank_report(seed, cfg);
    let n_paths = cfg.get_u64(exp, "n_paths", 100_000)?;
    let dt = cfg.get_f64(exp, "dt", 1e-5)?;
    let horizon = cfg.get_f64(exp, "horizon", 1.0)?;
    let layer = cfg.get_f64(exp, "layer_factor", 1.0)?;
    let emit = cfg.get_bool(exp, "emit_csv", false)?;
    for (k, v) in [
        ("n_paths", n_paths.to_string()),
        ("dt", dt.to_string()),
        ("horizon", horizon.to_string()),
        ("layer_factor", layer.to_string()),
        ("seed", seed.to_string()),
    ] {
        echo_param(&mut report, exp, k, v);
    }

    let a = (0.0, PI / 2.0);
    let b = (PI, 1.5 * PI);
    let target = targets::arc_pair_kernel_mass(a, b);
    let pc = PathConfig::new(dt, horizon, n_paths, seed)
        .with_layer_factor(layer)
        .with_delta_min(PI / 2.0);
    let fa = BoundaryFunction::arc(a.0, a.1)?;
    let fb = BoundaryFunction::arc(b.0, b.1)?;
    let outcome = run_excursion_census(&Geometry::UnitDisk, &pc, &[(fa, fb)], emit)?;
    let est = outcome.estimate(0);
    report.checks.push(CheckRow::ci_overlap(
        "arc-pair census within its CI of the kernel mass",
        est.value,
        target,
        est.ci_half,
    ));
    report.checks.push(CheckRow::upper_bound(
        "CI half-width at most 5% of the target",
        est.ci_half,
        0.05 * target,
    ));
    report.checks.push(CheckRow::absolute(
        "killing census on the circle",
        outcome.killed as f64,
        0.0,
        0.0,
    ));
    maybe_write_records(out_dir, emit, exp, seed, &Geometry::UnitDisk, &outcome, None)?;
    Ok(report)
}

fn circle_jumps_mc(
    cfg: &RunConfig,
    out_dir: Option<&Path>,
) -> Result<VerificationReport, LabError> {
    let exp = "circle-jumps-mc";
    let seed = experiment_seed(cfg.seed()?, 3);
    let cal_seed = experiment_seed(cfg.seed()?, 4);
    let mut report = blank_report(seed, cfg);
    let n_paths = cfg.get_u64(exp, "n_paths", 100_000)?;
    let cal_paths = cfg.get_u64(exp, "calibration_paths", 30_000)?;
    let dt = cfg.get_f64(exp, "dt", 1e-5)?;
    let horizon = cfg.get_f64(exp, "horizon", 1.0)?;
    let layer = cfg.get_f64(exp, "layer_factor", 1.0)?;
    let emit = cfg.get_bool(exp, "emit_csv", false)?;
    for (k, v) in [
        ("n_paths", n_paths.to_string()),
        ("calibration_paths", cal_paths.to_string()),
        ("dt", dt.to_string()),
        ("horizon", horizon.to_string()),
        ("layer_factor", layer.to_string()),
        ("seed", seed.to_string()),
        ("calibration_seed", cal_seed.to_string()),
    ] {
        echo_param(&mut report, exp, k, v);
    }

    // one interval calibration with the same scheme settings, then frozen
    let cal_cfg = PathConfig::new(dt, horizon, cal_paths, cal_seed)
        .with_layer_factor(layer)
        .with_delta_min(0.5);
    let cal = calibrate_local_time(&cal_cfg)?;
    echo_param(&mut report, exp, "kappa", cal.kappa);
    report.checks.push(CheckRow::absolute(
        "local-time constant near the raw layer clock",
        cal.kappa,
        1.0,
        0.2,
    ));

    let bins = targets::circle_jump_bins();
    let pairs: Vec<(BoundaryFunction, BoundaryFunction)> = bins
        .iter()
        .map(|&(a, b)| {
            Ok::<_, LabError>((
                BoundaryFunction::arc(a.0, a.1)?,
                BoundaryFunction::arc(b.0, b.1)?,
            ))
        })
        .collect::<Result<_, _>>()?;
    let pc = PathConfig::new(dt, horizon, n_paths, seed)
        .with_layer_factor(layer)
        .with_delta_min(PI / 4.0);
    let outcome = run_excursion_census(&Geometry::UnitDisk, &pc, &pairs, emit)?;

    let mut curve = Vec::new();
    for (i, &(a, b)) in bins.iter().enumerate() {
        let target = targets::arc_pair_kernel_mass(a, b);
        let rate = outcome.jump_rate(i, cal.kappa);
        report.checks.push(CheckRow::ci_overlap(
            format!(
                "jump rate over [{:.2},{:.2})x[{:.2},{:.2}) matches the kernel mass",
                a.0, a.1, b.0, b.1
            ),
            rate.value,
            target,
            rate.ci_half,
        ));
        curve.push(vec![i as f64, rate.value, rate.value - rate.ci_half, rate.value + rate.ci_half, target]);
    }
    report.curves.insert("jump-rates".into(), curve);
    report.checks.push(CheckRow::absolute(
        "killing census on the circle",
        outcome.killed as f64,
        0.0,
        0.0,
    ));
    maybe_write_records(out_dir, emit, exp, seed, &Geometry::UnitDisk, &outcome, Some(cal.kappa))?;
    Ok(report)
}

fn exterior_escape_mc(cfg: &RunConfig) -> Result<VerificationReport, LabError> {
    let exp = "exterior-escape-mc";
    let seed = experiment_seed(cfg.seed()?, 5);
    let mut report = blank_report(seed, cfg);
    let n_paths = cfg.get_u64(exp, "n_paths", 600_000)?;
    let dt = cfg.get_f64(exp, "dt", 1e-4)?;
    let window = cfg.get_f64(exp, "window", 0.1)?;
    let r_escape = cfg.get_f64(exp, "r_escape", 4.0)?;
    let frac_paths = cfg.get_u64(exp, "fraction_paths", 20_000)?;
    let frac_dt = cfg.get_f64(exp, "fraction_dt", 2.5e-5)?;
    for (k, v) in [
        ("n_paths", n_paths.to_string()),
        ("dt", dt.to_string()),
        ("window", window.to_string()),
        ("r_escape", r_escape.to_string()),
        ("fraction_paths", frac_paths.to_string()),
        ("fraction_dt", frac_dt.to_string()),
        ("seed", seed.to_string()),
    ] {
        echo_param(&mut report, exp, k, v);
    }

    let ext = Geometry::ball_exterior(3, 1.0)?;
    let pc = PathConfig::new(dt, window, n_paths, seed).with_r_escape(r_escape);
    let full = BoundaryFunction::Constant(1.0);
    let hemi = BoundaryFunction::SphereCap { axis: [0.0, 0.0, 1.0], cos_min: 0.0 };
    let ests = estimate_escape_measures(&ext, &[full.clone(), hemi], &pc, 0.05)?;
    let (est_full, est_hemi) = (ests[0], ests[1]);

    // hemisphere fraction among hits: binomial CI, same paths for both weights
    let hits = est_full.raw_sum.max(1.0);
    let p_hat = est_hemi.raw_sum / hits;
    let p_ci = 1.96 * (p_hat * (1.0 - p_hat) / hits).sqrt();
    report.checks.push(CheckRow::ci_overlap(
        "hemisphere share of escape-bound hits is 1/2 (rotation invariance)",
        p_hat,
        0.5,
        p_ci,
    ));
    report.checks.push(CheckRow::ci_overlap(
        "total escape mass near the alpha-route value (loose: dt bias)",
        est_full.value,
        supplementary_feller(&ext, 1.0, &full)?,
        3.0 * est_full.ci_half + 0.05 * est_full.value.abs(),
    ));
    report.checks.push(CheckRow::upper_bound(
        "analytic tail bound within 5% of the estimate",
        est_full.tail_bound,
        0.05 * est_full.value,
    ));

    // paths launched at |x| = 2 hit the sphere with probability 1/2, up to
    // the O(sqrt(dt)) inner-sphere detection bias
    let frac_cfg = PathConfig::new(frac_dt, 1.0, frac_paths, experiment_seed(cfg.seed()?, 6))
        .with_r_escape(3.0);
    let frac = hit_fraction_from(&ext, 2.0, &frac_cfg)?;
    report.checks.push(CheckRow::ci_overlap(
        "hit fraction from |x| = 2 matches the escape probability complement",
        frac.value,
        0.5,
        frac.ci_half + 0.75 * frac_dt.sqrt(),
    ));

    // escape vanishes identically on finite-volume interiors
    for (geom, label) in [(Geometry::Interval01, "interval"), (Geometry::UnitDisk, "disk")] {
        let v = supplementary_feller(&geom, 2.0, &BoundaryFunction::Constant(1.0))?;
        report.checks.push(CheckRow::absolute(
            format!("spectral escape pairing is zero ({label})"),
            v,
            0.0,
            0.0,
        ));
        let rejected = feller_mc::estimate_escape_measure(
            &geom,
            &BoundaryFunction::Constant(1.0),
            &PathConfig::new(1e-3, 0.5, 10, seed),
            0.05,
        )
        .is_err();
        report.checks.push(CheckRow::absolute(
            format!("escape estimator refuses the {label} (nothing to estimate)"),
            rejected as u8 as f64,
            1.0,
            0.0,
        ));
    }
    // and the recurrent excursion censuses contain no cemetery records
    let small_int = PathConfig::new(1e-4, 0.5, 2000, experiment_seed(cfg.seed()?, 10))
        .with_layer_factor(1.0);
    let oi = run_excursion_census(
        &Geometry::Interval01,
        &small_int,
        &[(
            BoundaryFunction::endpoint_indicator(0),
            BoundaryFunction::endpoint_indicator(1),
        )],
        false,
    )?;
    let small_disk = PathConfig::new(1e-4, 0.5, 2000, experiment_seed(cfg.seed()?, 11))
        .with_layer_factor(1.0)
        .with_delta_min(0.5);
    let od = run_excursion_census(
        &Geometry::UnitDisk,
        &small_disk,
        &[(
            BoundaryFunction::arc(0.0, 1.0)?,
            BoundaryFunction::arc(2.0, 3.0)?,
        )],
        false,
    )?;
    report.checks.push(CheckRow::absolute(
        "interval escape census",
        oi.killed as f64,
        0.0,
        0.0,
    ));
    report.checks.push(CheckRow::absolute(
        "disk escape census",
        od.killed as f64,
        0.0,
        0.0,
    ));
    Ok(report)
}

fn interval_refinement_mc(cfg: &RunConfig) -> Result<VerificationReport, LabError> {
    let exp = "interval-refinement-mc";
    let base = cfg.seed()?;
    let mut report = blank_report(experiment_seed(base, 7), cfg);
    let n_paths = cfg.get_u64(exp, "n_paths", 30_000)?;
    let horizon = cfg.get_f64(exp, "horizon", 1.0)?;
    let layer = cfg.get_f64(exp, "layer_factor", 3.0)?;
    for (k, v) in [
        ("n_paths", n_paths.to_string()),
        ("horizon", horizon.to_string()),
        ("layer_factor", layer.to_string()),
    ] {
        echo_param(&mut report, exp, k, v);
    }
    let target = interval_endpoint_pairing();
    let dts = [4e-5, 1e-5, 2.5e-6];
    let mut levels = Vec::new();
    let mut curve = Vec::new();
    for (i, &dt) in dts.iter().enumerate() {
        let pc = PathConfig::new(dt, horizon, n_paths, experiment_seed(base, 7 + i as u64))
            .with_layer_factor(layer)
            .with_delta_min(0.5);
        let outcome = run_excursion_census(
            &Geometry::Interval01,
            &pc,
            &[(
                BoundaryFunction::endpoint_indicator(0),
                BoundaryFunction::endpoint_indicator(1),
            )],
            false,
        )?;
        let est = outcome.estimate(0);
        curve.push(vec![dt, est.value, est.value - est.ci_half, est.value + est.ci_half]);
        levels.push(est);
    }
    report.curves.insert("refinement".into(), curve);
    for i in 0..levels.len() - 1 {
        let (a, b) = (levels[i], levels[i + 1]);
        report.checks.push(CheckRow::ci_overlap(
            format!("levels {i} and {} have overlapping intervals", i + 1),
            b.value,
            a.value,
            a.ci_half + b.ci_half,
        ));
        report.checks.push(CheckRow::upper_bound(
            format!("bias does not grow from level {i} to {}", i + 1),
            (b.value - target).abs(),
            (a.value - target).abs() + a.ci_half + b.ci_half,
        ));
    }
    report.checks.push(CheckRow::upper_bound(
        "final bias strictly below the coarsest bias",
        (levels[levels.len() - 1].value - target).abs(),
        (levels[0].value - target).abs(),
    ));
    Ok(report)
}
