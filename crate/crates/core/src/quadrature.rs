//! Gauss-Legendre rules.

use std::f64::consts::PI;

/// Nodes (ascending) and weights of the `m`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Roots of `P_m` by Newton iteration from the Tricomi initial guesses; the
/// three-term recurrence supplies `P_m` and `P_m'`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped affinely onto `[a, b]`.
pub fn gauss_legendre_on(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if m == 0 { 1.0 } else { p1 };
    let pm1 = if m == 0 { 0.0 } else { p0 };
    let d = m as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}
