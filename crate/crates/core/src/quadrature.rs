//! Fixed-order quadrature rules shared by the symbol and kernel modules.

use std::f64::consts::FRAC_PI_2;

/// One node of a rule on `[-1, 1]`, with the distances to both endpoints kept
/// separately so integrands singular at an endpoint can be evaluated without
/// cancellation.
#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub x: f64,
    /// `1 + x`
    pub from_left: f64,
    /// `1 - x`
    pub from_right: f64,
    pub weight: f64,
}

/// Double-exponential (tanh-sinh) rule. Converges exponentially for integrands
/// that are analytic inside the interval, including algebraic and logarithmic
/// endpoint singularities.
#[derive(Clone, Debug)]
pub struct TanhSinh {
    nodes: Vec<Node>,
}

impl TanhSinh {
    /// Rule with step `h` truncated where the weights drop below 1e-300.
    pub fn new(h: f64) -> Self {
        let mut nodes = Vec::new();
        let mut k = 0i64;
        loop {
            let t = k as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            let cu = u.cosh();
            let weight = h * FRAC_PI_2 * t.cosh() / (cu * cu);
            // 1 - tanh(u) = e^{-u} / cosh(u)
            let tail = (-u).exp() / cu;
            if weight < 1e-300 || tail == 0.0 {
                break;
            }
            let x = u.tanh();
            nodes.push(Node { x, from_left: 2.0 - tail, from_right: tail, weight });
            if k > 0 {
                nodes.push(Node { x: -x, from_left: tail, from_right: 2.0 - tail, weight });
            }
            k += 1;
        }
        nodes.sort_by(|a, b| a.x.total_cmp(&b.x));
        TanhSinh { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]`. The integrand receives the point and its
    /// distances to `a` and `b`.
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64, f64, f64) -> T,
    {
        let half = 0.5 * (b - a);
        let mut acc = T::default();
        for n in &self.nodes {
            let dl = half * n.from_left;
            let dr = half * n.from_right;
            let x = if dl <= dr { a + dl } else { b - dr };
            acc = acc + f(x, dl, dr) * (n.weight * half);
        }
        acc
    }
}

/// Midpoint rule on `[lo, hi]` (`0 < lo < hi`) after the change of variables
/// `τ = e^u`: `n` nodes equally spaced in `ln τ`, returned as `(τ, weight)`.
pub fn log_midpoint(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    assert!(lo > 0.0 && hi > lo && n > 0, "log_midpoint needs 0 < lo < hi");
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let tau = (a + (i as f64 + 0.5) * h).exp();
            (tau, tau * h)
        })
        .collect()
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of `ln y` against `ln x`, skipping non-positive samples.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    if lx.len() < 2 {
        return None;
    }
    Some(linear_fit(&lx, &ly).0)
}
