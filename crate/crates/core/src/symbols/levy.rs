//! Symbols of integro-differential operators
//! `A u = ∫ (u(x+y) − u(x) − χ(y)(∇u(x), y)) m(t, y) |y|^{-d-γ} dy`
//! with a zero-order homogeneous density `m`.
//!
//! In polar coordinates the radial integral has a closed form, so only the
//! angular integral over the unit sphere is done numerically.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{Error, Result};
use crate::quadrature::TanhSinh;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Angular profile of a zero-order homogeneous density `m(t, y) = m(t, y/|y|)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LevyDensity {
    Constant(f64),
    /// `d = 1`: values at `w = +1` and `w = −1`.
    TwoPoint {
        plus: f64,
        minus: f64,
    },
    /// `d = 2`: `m(θ) = c0 + Σ_k cos[k-1]·cos(kθ) + sin[k-1]·sin(kθ)`.
    Fourier {
        c0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

impl LevyDensity {
    fn at_angle(&self, theta: f64) -> f64 {
        match self {
            LevyDensity::Constant(c) => *c,
            LevyDensity::TwoPoint { plus, minus } => {
                if theta.cos() >= 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
            LevyDensity::Fourier { c0, cos, sin } => {
                let mut v = *c0;
                for (k, a) in cos.iter().enumerate() {
                    v += a * ((k + 1) as f64 * theta).cos();
                }
                for (k, b) in sin.iter().enumerate() {
                    v += b * ((k + 1) as f64 * theta).sin();
                }
                v
            }
        }
    }

    fn scaled(&self, c: f64) -> LevyDensity {
        match self {
            LevyDensity::Constant(v) => LevyDensity::Constant(c * v),
            LevyDensity::TwoPoint { plus, minus } => LevyDensity::TwoPoint { plus: c * plus, minus: c * minus },
            LevyDensity::Fourier { c0, cos, sin } => LevyDensity::Fourier {
                c0: c * c0,
                cos: cos.iter().map(|v| c * v).collect(),
                sin: sin.iter().map(|v| c * v).collect(),
            },
        }
    }

    /// Checks the density against the dimension and its basic constraints.
    pub(crate) fn validate(&self, dim: usize, gamma: f64) -> Result<()> {
        match (self, dim) {
            (LevyDensity::Constant(_), 1 | 2) => {}
            (LevyDensity::TwoPoint { .. }, 1) => {}
            (LevyDensity::Fourier { .. }, 2) => {}
            _ => return Err(Error::invalid(format!("density form {self:?} is not available in dimension {dim}"))),
        }
        let samples = sphere_angles(dim, 1024);
        if let Some(th) = samples.iter().find(|&&th| self.at_angle(th) < -1e-12) {
            return Err(Error::invalid(format!("density is negative in direction θ = {th}")));
        }
        let (mass, first_moment) = self.sphere_moments(dim);
        if mass <= 0.0 {
            return Err(Error::invalid("density vanishes on the whole sphere"));
        }
        if is_critical(gamma) {
            let norm = first_moment.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-10 * mass {
                return Err(Error::invalid(format!(
                    "γ = 1 needs ∫ w m(w) dS = 0 on the unit sphere, got {first_moment:?}"
                )));
            }
        }
        Ok(())
    }

    /// `(∫ m dS, ∫ w m dS)` over the unit sphere.
    fn sphere_moments(&self, dim: usize) -> (f64, Vec<f64>) {
        match (self, dim) {
            (LevyDensity::Constant(c), 1) => (2.0 * c, vec![0.0]),
            (LevyDensity::TwoPoint { plus, minus }, 1) => (plus + minus, vec![plus - minus]),
            (LevyDensity::Constant(c), _) => (2.0 * PI * c, vec![0.0, 0.0]),
            (LevyDensity::Fourier { c0, cos, sin }, _) => {
                let a1 = cos.first().copied().unwrap_or(0.0);
                let b1 = sin.first().copied().unwrap_or(0.0);
                (2.0 * PI * c0, vec![PI * a1, PI * b1])
            }
            _ => (0.0, vec![0.0; dim]),
        }
    }
}

fn is_critical(gamma: f64) -> bool {
    (gamma - 1.0).abs() < 1e-12
}

fn sphere_angles(dim: usize, n: usize) -> Vec<f64> {
    if dim == 1 {
        vec![0.0, PI]
    } else {
        (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
    }
}

/// Normalising constant `c_{d,γ}` for which the constant density `c_{d,γ}`
/// gives the symbol `−|ξ|^γ`:
/// `c_{d,γ} = γ 2^{γ−1} Γ((d+γ)/2) / (π^{d/2} Γ(1 − γ/2))`.
pub fn fractional_constant(gamma: f64, dim: usize) -> f64 {
    let d = dim as f64;
    gamma * 2f64.powf(gamma - 1.0) * gamma_fn((d + gamma) / 2.0) / (PI.powf(d / 2.0) * gamma_fn(1.0 - gamma / 2.0))
}

/// Closed-form radial integral
/// `∫_0^∞ (e^{irs} − 1 − χ i r s) r^{−1−γ} dr` for a direction with `s = ξ·w`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RadialProfile {
    gamma: f64,
    /// `Γ(−γ)` for γ ≠ 1.
    gamma_neg: f64,
}

impl RadialProfile {
    pub(crate) fn new(gamma: f64) -> Self {
        let gamma_neg = if is_critical(gamma) { 0.0 } else { gamma_fn(-gamma) };
        RadialProfile { gamma, gamma_neg }
    }

    pub(crate) fn eval(&self, s: f64) -> Complex64 {
        if s == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let a = s.abs();
        if is_critical(self.gamma) {
            // −π|s|/2 + i s (1 − γ_E − ln|s|)
            Complex64::new(-0.5 * PI * a, s * (1.0 - EULER_GAMMA - a.ln()))
        } else {
            // Γ(−γ) (−i s)^γ
            let phase = -0.5 * PI * self.gamma * s.signum();
            Complex64::from_polar(self.gamma_neg * a.powf(self.gamma), phase)
        }
    }
}

fn angular_rule() -> Arc<TanhSinh> {
    static RULE: OnceLock<Arc<TanhSinh>> = OnceLock::new();
    RULE.get_or_init(|| Arc::new(TanhSinh::new(1.0 / 16.0))).clone()
}

/// Evaluator for one density piece.
#[derive(Clone, Debug)]
pub(crate) struct LevyEval {
    radial: RadialProfile,
    rule: Arc<TanhSinh>,
}

impl LevyEval {
    pub(crate) fn new(gamma: f64) -> Self {
        LevyEval { radial: RadialProfile::new(gamma), rule: angular_rule() }
    }

    /// Number of angular nodes used in two dimensions.
    #[cfg(test)]
    pub(crate) fn angular_nodes(&self) -> usize {
        2 * self.rule.len()
    }

    pub(crate) fn eval(&self, m: &LevyDensity, xi: &[f64]) -> Complex64 {
        match xi.len() {
            1 => {
                let s = xi[0];
                m.at_angle(0.0) * self.radial.eval(s) + m.at_angle(PI) * self.radial.eval(-s)
            }
            _ => {
                let r = xi[0].hypot(xi[1]);
                if r == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let phi = xi[1].atan2(xi[0]);
                // Split the circle where ξ·w changes sign; on each half-circle
                // parametrised by δ ∈ [0, π], ξ·w = ±r sin δ.
                let lo = phi - 0.5 * PI;
                let hi = phi + 0.5 * PI;
                self.rule.integrate(0.0, PI, |delta, dl, dr| {
                    let sin = if dl <= dr { dl.sin() } else { dr.sin() };
                    let s = r * sin;
                    m.at_angle(lo + delta) * self.radial.eval(s) + m.at_angle(hi + delta) * self.radial.eval(-s)
                })
            }
        }
    }
}

/// Builds the density `c_{d,γ}·m`, so that `m ≡ 1` reproduces `−|ξ|^γ`.
pub fn normalized(m: &LevyDensity, gamma: f64, dim: usize) -> LevyDensity {
    m.scaled(fractional_constant(gamma, dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_function_handles_negative_arguments() {
        // Γ(−1/2) = −2√π
        assert!((gamma_fn(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constant_density_is_fractional_laplacian() {
        for &g in &[0.3, 0.5, 1.0, 1.5, 1.9] {
            for dim in [1, 2] {
                let ev = LevyEval::new(g);
                let m = LevyDensity::Constant(fractional_constant(g, dim));
                for &r in &[0.1, 1.0, 3.7, 10.0] {
                    let xi: Vec<f64> = if dim == 1 { vec![r] } else { vec![0.6 * r, -0.8 * r] };
                    let v = ev.eval(&m, &xi);
                    let want = -r.powf(g);
                    assert!(
                        (v.re - want).abs() < 1e-9 * r.powf(g) && v.im.abs() < 1e-9 * r.powf(g),
                        "γ={g} d={dim} r={r}: {v} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn at_least_256_angular_nodes() {
        assert!(LevyEval::new(1.5).angular_nodes() >= 256);
    }

    #[test]
    fn critical_order_cancellation() {
        let bad = LevyDensity::TwoPoint { plus: 2.0, minus: 0.0 };
        assert!(bad.validate(1, 1.0).is_err());
        assert!(bad.validate(1, 0.5).is_ok());
        let good = LevyDensity::Fourier { c0: 1.0, cos: vec![0.0, 0.5], sin: vec![] };
        assert!(good.validate(2, 1.0).is_ok());
        let shifted = LevyDensity::Fourier { c0: 1.0, cos: vec![0.5], sin: vec![] };
        assert!(shifted.validate(2, 1.0).is_err());
        assert!(LevyDensity::Constant(-1.0).validate(1, 0.5).is_err());
    }
}
