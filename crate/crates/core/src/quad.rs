//! Gauss–Legendre rules, geometrically graded panels and adaptive integration.

use std::f64::consts::PI;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre polynomial from Chebyshev-like guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| (mid + half * x, half * w)).collect()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        self.on(a, b).into_iter().map(|(x, w)| w * f(x)).sum()
    }
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
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel breakpoints on `[0, len]` graded geometrically toward 0: `0, len·σ^k, ..., len·σ, len`.
pub fn graded_breakpoints(len: f64, grading: f64, panels: usize) -> Vec<f64> {
    assert!(grading > 0.0 && grading < 1.0, "grading ratio must lie in (0, 1)");
    let mut pts = vec![0.0];
    for k in (0..panels).rev() {
        pts.push(len * grading.powi(k as i32));
    }
    if panels == 0 {
        pts.push(len);
    }
    pts
}

/// Composite rule on `[0, len]` with panels graded toward 0 and `rule` on each panel.
pub fn graded_nodes(len: f64, grading: f64, panels: usize, rule: &GaussLegendre) -> Vec<(f64, f64)> {
    let pts = graded_breakpoints(len, grading, panels);
    pts.windows(2).flat_map(|w| rule.on(w[0], w[1])).collect()
}

/// Composite rule on `[a, b]` with `panels` equal panels.
pub fn uniform_nodes(a: f64, b: f64, panels: usize, rule: &GaussLegendre) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    (0..panels).flat_map(|k| rule.on(a + k as f64 * h, a + (k + 1) as f64 * h)).collect()
}

/// Result of [`adaptive`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Adaptive {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Adaptive bisection with a 20-point rule, comparing each panel with its two halves.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: usize) -> Adaptive {
    let rule = GaussLegendre::new(20);
    let whole = rule.integrate(a, b, &f);
    let mut out = Adaptive { value: 0.0, error: 0.0, panels: 0, converged: true };
    recurse(&f, &rule, a, b, whole, tol, max_depth, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    out: &mut Adaptive,
) {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, f);
    let right = rule.integrate(m, b, f);
    let err = (left + right - whole).abs();
    if err <= tol || depth == 0 {
        out.value += left + right;
        out.error += err;
        out.panels += 2;
        if err > tol {
            out.converged = false;
        }
        return;
    }
    recurse(f, rule, a, m, left, 0.5 * tol, depth - 1, out);
    recurse(f, rule, m, b, right, 0.5 * tol, depth - 1, out);
}
