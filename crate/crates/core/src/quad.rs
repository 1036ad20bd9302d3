//! Deterministic quadrature rules shared by the spectral and energy modules.
//!
//! All rules accumulate in a fixed order so repeated evaluations at identical
//! settings are bit-identical.

use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre integration of `f` over [a, b] with `n` nodes.
pub fn integrate_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = cached_gl(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite Gauss-Legendre over consecutive panels given by `breakpoints`.
pub fn integrate_composite<F: Fn(f64) -> f64>(
    f: &F,
    breakpoints: &[f64],
    nodes_per_panel: usize,
) -> f64 {
    let mut acc = 0.0;
    for pair in breakpoints.windows(2) {
        acc += integrate_gl(f, pair[0], pair[1], nodes_per_panel);
    }
    acc
}

/// Panel breakpoints on [0, 1], geometrically graded toward both endpoints.
///
/// Grading resolves boundary layers of width down to ~2^-levels, which the
/// alpha-order kernels develop for large rates.
pub fn graded_unit_breakpoints(levels: u32) -> Vec<f64> {
    let mut pts = Vec::with_capacity(2 * levels as usize + 2);
    pts.push(0.0);
    for k in (1..=levels).rev() {
        pts.push(0.5f64.powi(k as i32));
    }
    for k in 2..=levels {
        pts.push(1.0 - 0.5f64.powi(k as i32));
    }
    pts.push(1.0);
    pts
}

/// Integrate a function on (0, 1) with endpoint-graded composite Gauss-Legendre.
pub fn integrate_unit_graded<F: Fn(f64) -> f64>(f: F, levels: u32, nodes_per_panel: usize) -> f64 {
    let pts = graded_unit_breakpoints(levels);
    integrate_composite(&f, &pts, nodes_per_panel)
}

/// Trapezoid rule for a 2*pi-periodic function sampled at `n` equispaced angles.
///
/// Spectrally accurate for smooth periodic integrands.
pub fn integrate_periodic<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let h = std::f64::consts::TAU / n as f64;
    let mut acc = 0.0;
    for k in 0..n {
        acc += f(k as f64 * h);
    }
    acc * h
}

fn cached_gl(n: usize) -> (&'static [f64], &'static [f64]) {
    // The set of distinct node counts per process is tiny, so leaking the
    // computed rules is the cheapest way to hand out 'static slices.
    type Rule = (&'static [f64], &'static [f64]);
    static CACHE: OnceLock<std::sync::Mutex<std::collections::HashMap<usize, Rule>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(std::collections::HashMap::new()));
    let mut guard = cache.lock().unwrap();
    *guard.entry(n).or_insert_with(|| {
        let (nodes, weights) = gauss_legendre(n);
        (
            &*Box::leak(nodes.into_boxed_slice()),
            &*Box::leak(weights.into_boxed_slice()),
        )
    })
}
