//! Composite Gauss–Legendre quadrature on intervals with explicit breakpoints.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule: `panels` equal panels per segment between
/// consecutive breakpoints, `order` nodes per panel.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: usize,
}

impl CompositeRule {
    pub fn new(order: usize, panels: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        CompositeRule {
            nodes,
            weights,
            panels: panels.max(1),
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, breakpoints: &[f64]) -> f64 {
        let mut total = 0.0;
        for seg in breakpoints.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            if b <= a {
                continue;
            }
            let h = (b - a) / self.panels as f64;
            for p in 0..self.panels {
                let lo = a + p as f64 * h;
                let mid = lo + 0.5 * h;
                let mut s = 0.0;
                for (x, w) in self.nodes.iter().zip(&self.weights) {
                    s += w * f(mid + 0.5 * h * x);
                }
                total += 0.5 * h * s;
            }
        }
        total
    }
}

/// Integrates `f` over the breakpoint partition, doubling the panel count
/// until two successive results agree to `tol` (absolute, scaled by
/// `max(1, |value|)`).
///
/// Nodes in a segment of width w near |x| = X are placed with absolute error
/// ~ eps·X, a relative error eps·X/w that no refinement removes, so `tol` is
/// raised to that floor for very narrow segments.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], tol: f64) -> Result<f64> {
    let floor = breakpoints
        .windows(2)
        .filter(|s| s[1] > s[0])
        .map(|s| 64.0 * f64::EPSILON * s[0].abs().max(s[1].abs()) / (s[1] - s[0]))
        .fold(0.0, f64::max);
    let tol = tol.max(floor);
    let mut panels = 4;
    let mut coarse = CompositeRule::new(16, panels).integrate(&f, breakpoints);
    for _ in 0..12 {
        panels *= 2;
        let fine = CompositeRule::new(16, panels).integrate(&f, breakpoints);
        if (fine - coarse).abs() <= tol * fine.abs().max(1.0) {
            return Ok(fine);
        }
        coarse = fine;
    }
    let fine = CompositeRule::new(16, panels * 2).integrate(&f, breakpoints);
    Err(Error::QuadratureNonconvergence { coarse, fine })
}

/// Sorted, de-duplicated breakpoints clipped to `[lo, hi]`.
pub fn breakpoints(lo: f64, hi: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(interior.iter().copied().filter(|x| *x > lo && *x < hi));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}
