use std::f64::consts::PI;

use rayon::prelude::*;

use super::{norm, MultiIndex, SymbolSpec};
use crate::error::{Error, Result};
use crate::report::{format_float, EstimateReport};

/// Relative slack allowed between the empirical and the declared `κ`.
pub const KAPPA_TOLERANCE: f64 = 1e-3;

/// One `(t, ξ, α)` sample of the condition sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionRow {
    pub t: f64,
    pub xi: Vec<f64>,
    pub alpha: MultiIndex,
    /// `(−Re ψ)/|ξ|^γ` for `α = 0`, `|D^α ψ| |ξ|^{|α|−γ}` otherwise.
    pub ratio: f64,
    /// Declared `κ(1 − tol)` for `α = 0`; the sweep's derivative constant otherwise.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub declared_kappa: f64,
    /// Infimum of `(−Re ψ)/|ξ|^γ` over the samples.
    pub empirical_kappa: f64,
    /// Supremum of `|D^α ψ| |ξ|^{|α|−γ}` over samples and `|α| ≤ ⌊d/2⌋ + 1`.
    pub derivative_constant: f64,
    pub tolerance: f64,
    pub nonfinite_samples: usize,
    pub rows: Vec<ConditionRow>,
    pub pass: bool,
}

impl ConditionReport {
    /// CSV with columns `t, xi_1.., alpha, ratio, bound, pass`.
    pub fn to_csv(&self) -> String {
        let dim = self.rows.first().map_or(0, |r| r.xi.len());
        let mut out = String::from("t");
        for i in 1..=dim {
            out.push_str(&format!(",xi_{i}"));
        }
        out.push_str(",alpha,ratio,bound,pass\n");
        for r in &self.rows {
            out.push_str(&format_float(r.t));
            for v in &r.xi {
                out.push(',');
                out.push_str(&format_float(*v));
            }
            out.push_str(&format!(",{},{},{},{}\n", r.alpha, format_float(r.ratio), format_float(r.bound), r.pass));
        }
        out
    }

    pub fn to_estimate_report(&self) -> EstimateReport {
        let mut rep = EstimateReport::new("symbol_conditions");
        rep.summary("declared_kappa", self.declared_kappa)
            .summary("empirical_kappa", self.empirical_kappa)
            .summary("derivative_constant", self.derivative_constant)
            .summary("inverse_declared_kappa", 1.0 / self.declared_kappa)
            .summary("nonfinite_samples", self.nonfinite_samples as f64)
            .summary("samples", self.rows.len() as f64)
            .tolerance("kappa_relative", self.tolerance);
        rep.require("ellipticity", self.empirical_kappa >= self.declared_kappa * (1.0 - self.tolerance));
        rep.require("finite_derivatives", self.nonfinite_samples == 0);
        if self.derivative_constant > 1.0 / self.declared_kappa {
            rep.note(format!(
                "derivative constant {} exceeds 1/κ = {}; the bound holds with the empirical constant",
                self.derivative_constant,
                1.0 / self.declared_kappa
            ));
        }
        rep
    }
}

/// Log-spaced radii `0.1..10` times a fixed set of unit directions.
pub fn default_xi_lattice(dim: usize) -> Vec<Vec<f64>> {
    let dirs: Vec<Vec<f64>> = match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..16)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / 16.0;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let mut d = Vec::new();
            for a in -1i32..=1 {
                for b in -1i32..=1 {
                    for c in -1i32..=1 {
                        if (a, b, c) != (0, 0, 0) {
                            let v = [a as f64, b as f64, c as f64];
                            let n = norm(&v);
                            d.push(v.iter().map(|x| x / n).collect());
                        }
                    }
                }
            }
            d
        }
    };
    let radii: Vec<f64> = (0..9).map(|k| 10f64.powf(-1.0 + 0.25 * k as f64)).collect();
    radii.iter().flat_map(|r| dirs.iter().map(move |w| w.iter().map(|v| v * r).collect())).collect()
}

/// Samples both symbol conditions over `t_samples × xi_lattice` and every
/// multi-index with `|α| ≤ ⌊d/2⌋ + 1`.
///
/// Non-finite values are reported as failing rows rather than errors.
pub fn verify_conditions(
    s: &SymbolSpec,
    t_samples: &[f64],
    xi_lattice: &[Vec<f64>],
    tolerance: f64,
) -> Result<ConditionReport> {
    if xi_lattice.is_empty() || t_samples.is_empty() {
        return Err(Error::domain("condition sweep needs at least one t and one ξ sample"));
    }
    for xi in xi_lattice {
        if xi.len() != s.dim() {
            return Err(Error::domain(format!("ξ sample {xi:?} has the wrong dimension")));
        }
        if norm(xi) == 0.0 {
            return Err(Error::domain("the ξ lattice must exclude the origin"));
        }
    }
    let (start, end) = s.window();
    for &t in t_samples {
        if !(t >= start && t <= end) {
            return Err(Error::OutOfWindow { t, start, end });
        }
    }
    let bps = s.breakpoints();
    for w in bps.windows(2) {
        if !t_samples.iter().any(|&t| t >= w[0] && t < w[1]) {
            return Err(Error::domain(format!("no t sample falls in the coefficient piece [{}, {})", w[0], w[1])));
        }
    }

    let gamma = s.gamma();
    let mut alphas = vec![MultiIndex::zero(s.dim())];
    alphas.extend(MultiIndex::up_to(s.dim(), MultiIndex::condition_order(s.dim())));
    let jobs: Vec<(f64, &Vec<f64>)> =
        t_samples.iter().flat_map(|&t| xi_lattice.iter().map(move |xi| (t, xi))).collect();
    let raw: Vec<Vec<(MultiIndex, f64)>> = jobs
        .par_iter()
        .map(|&(t, xi)| {
            let r = norm(xi);
            alphas
                .iter()
                .map(|a| {
                    let ratio = if a.order() == 0 {
                        -s.eval_unchecked(t, xi).re / r.powf(gamma)
                    } else {
                        s.derivative_unchecked(t, xi, a, r).norm() * r.powf(a.order() as f64 - gamma)
                    };
                    (a.clone(), ratio)
                })
                .collect()
        })
        .collect();

    let bound0 = s.kappa() * (1.0 - tolerance);
    let mut empirical_kappa = f64::INFINITY;
    let mut derivative_constant: f64 = 0.0;
    let mut nonfinite = 0;
    for row in &raw {
        for (a, v) in row {
            if !v.is_finite() {
                nonfinite += 1;
            } else if a.order() == 0 {
                empirical_kappa = empirical_kappa.min(*v);
            } else {
                derivative_constant = derivative_constant.max(*v);
            }
        }
    }
    let mut rows = Vec::with_capacity(raw.len() * alphas.len());
    for ((t, xi), row) in jobs.iter().zip(raw) {
        for (alpha, ratio) in row {
            let (bound, pass) = if alpha.order() == 0 {
                (bound0, ratio.is_finite() && ratio >= bound0)
            } else {
                (derivative_constant, ratio.is_finite())
            };
            rows.push(ConditionRow { t: *t, xi: (*xi).clone(), alpha, ratio, bound, pass });
        }
    }
    let pass = nonfinite == 0 && empirical_kappa >= bound0;
    Ok(ConditionReport {
        declared_kappa: s.kappa(),
        empirical_kappa,
        derivative_constant,
        tolerance,
        nonfinite_samples: nonfinite,
        rows,
        pass,
    })
}
