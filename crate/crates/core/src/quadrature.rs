//! Gauss–Legendre rules and their composite versions on finite intervals.

use std::f64::consts::PI;

/// Points per panel of the composite rule.
pub const PANEL_POINTS: usize = 8;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence (`n >= 1`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
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

/// Composite rule on `[a, b]`: `panels` equal panels, [`PANEL_POINTS`]
/// Gauss–Legendre points each. Returns `(x, weight)` pairs whose weights
/// sum to `b - a`.
pub fn composite(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let (xs, ws) = gauss_legendre(PANEL_POINTS);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * PANEL_POINTS);
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for (x, w) in xs.iter().zip(&ws) {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

/// `int_a^b f` by a single [`PANEL_POINTS`]-point rule; exact for
/// polynomials of degree below `2 * PANEL_POINTS`.
pub fn integrate_panel(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (xs, ws) = gauss_legendre(PANEL_POINTS);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    xs.iter().zip(&ws).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}
