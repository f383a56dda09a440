//! Time-measurable symbols `ψ(t, ξ)`.
//!
//! A [`SymbolSpec`] carries a declared order `γ` and ellipticity constant `κ`
//! and is meant to satisfy, for every `t` in its window,
//!
//! ```text
//! Re ψ(t, ξ) ≤ −κ |ξ|^γ,      |D^α_ξ ψ(t, ξ)| ≤ κ^{-1} |ξ|^{γ−|α|},  |α| ≤ ⌊d/2⌋ + 1.
//! ```
//!
//! Time dependence is piecewise constant ([`TimeProfile`]), which is what lets
//! the kernels and the solver integrate `∫ψ dr` exactly. Every kind is
//! homogeneous of degree `γ` in `ξ`, so constants are read off the unit sphere.
//! By convention `ψ(t, 0) = 0`.

mod levy;
mod multi_index;
mod profile;
mod verify;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

pub use levy::{fractional_constant, normalized as normalized_levy_density, LevyDensity};
pub use multi_index::MultiIndex;
pub use profile::{Piece, TimeProfile};
pub use verify::{default_xi_lattice, verify_conditions, ConditionReport, ConditionRow, KAPPA_TOLERANCE};

use crate::error::{Error, Result};
use levy::LevyEval;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Fractional,
    Poly2m,
    Levy,
    Composed,
    Scaled,
}

/// Coefficients `a^{αβ}` of a `2m`-order operator, indexed by the order-`m`
/// multi-indices of [`MultiIndex::of_order`]; `matrix` is row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2mCoeffs {
    pub matrix: Vec<Complex64>,
}

#[derive(Clone, Debug)]
enum Body {
    Fractional(TimeProfile<Complex64>),
    Poly2m { m: u32, indices: Vec<MultiIndex>, profile: TimeProfile<Poly2mCoeffs> },
    Levy { profile: TimeProfile<LevyDensity>, eval: LevyEval },
    Composed(Vec<(SymbolSpec, f64)>),
    Scaled { inner: Box<SymbolSpec>, xi_scale: f64 },
}

/// An immutable symbol with its declared order and ellipticity constant.
#[derive(Clone, Debug)]
pub struct SymbolSpec {
    gamma: f64,
    kappa: f64,
    dim: usize,
    body: Body,
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("spatial dimension {dim} (supported: 1..=3)")))
    }
}

/// Unit-sphere sample used for the construction-time constants.
pub(crate) fn sphere_samples(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..720)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / 720.0;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            // Fibonacci lattice plus the 26 lattice directions of the unit cube.
            let n = 2000;
            let golden = PI * (3.0 - 5f64.sqrt());
            let mut out: Vec<Vec<f64>> = (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect();
            for a in -1i32..=1 {
                for b in -1i32..=1 {
                    for c in -1i32..=1 {
                        if a == 0 && b == 0 && c == 0 {
                            continue;
                        }
                        let v = [a as f64, b as f64, c as f64];
                        let n = norm(&v);
                        out.push(v.iter().map(|x| x / n).collect());
                    }
                }
            }
            out
        }
    }
}

impl SymbolSpec {
    /// `ψ(t, ξ) = −a(t)|ξ|^γ` with declared `κ = min_pieces min(Re a, 1/|a|)`.
    pub fn fractional(a: TimeProfile<Complex64>, gamma: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        check_gamma(gamma)?;
        let mut kappa = f64::INFINITY;
        for (i, p) in a.pieces().iter().enumerate() {
            if !(p.coeff.re > 0.0) || !p.coeff.im.is_finite() {
                return Err(Error::invalid(format!("piece {i} on [{}, {}) has Re a = {} ≤ 0", p.t0, p.t1, p.coeff.re)));
            }
            kappa = kappa.min(p.coeff.re.min(1.0 / p.coeff.norm()));
        }
        Ok(SymbolSpec { gamma, kappa, dim, body: Body::Fractional(a) })
    }

    /// `ψ(t, ξ) = −Σ_{|α|=|β|=m} a^{αβ}(t) ξ^α ξ^β`, order `2m`.
    ///
    /// Coercivity `Re Σ a^{αβ} ξ^α ξ^β ≥ κ|ξ|^{2m}` is checked on a dense
    /// sample of the unit sphere for every piece.
    pub fn poly2m(coeffs: TimeProfile<Poly2mCoeffs>, m: u32, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if m == 0 {
            return Err(Error::invalid("2m-order operator needs m ≥ 1"));
        }
        let indices = MultiIndex::of_order(dim, m);
        let n = indices.len();
        for (i, p) in coeffs.pieces().iter().enumerate() {
            if p.coeff.matrix.len() != n * n {
                return Err(Error::invalid(format!(
                    "piece {i}: expected a {n}×{n} coefficient matrix over the order-{m} multi-indices, got {} entries",
                    p.coeff.matrix.len()
                )));
            }
        }
        let mut spec =
            SymbolSpec { gamma: 2.0 * m as f64, kappa: 1.0, dim, body: Body::Poly2m { m, indices, profile: coeffs } };
        let (ellip, modulus) = spec.sphere_constants()?;
        if ellip.value <= 0.0 {
            return Err(Error::invalid(format!(
                "coercivity fails at ξ = {:?}, t = {}: Re Σ a ξ^α ξ^β = {}",
                ellip.xi, ellip.t, ellip.value
            )));
        }
        spec.kappa = ellip.value.min(1.0 / modulus);
        Ok(spec)
    }

    /// Lévy-type operator with density profile `m(t, ·)`, `γ ∈ (0, 2)`,
    /// `d ∈ {1, 2}`.
    pub fn levy(m: TimeProfile<LevyDensity>, gamma: f64, dim: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 2.0) {
            return Err(Error::Unsupported(format!("Lévy symbols need γ ∈ (0, 2), got {gamma}")));
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::Unsupported(format!("Lévy symbols in dimension {dim}")));
        }
        for (i, p) in m.pieces().iter().enumerate() {
            p.coeff
                .validate(dim, gamma)
                .map_err(|e| Error::invalid(format!("piece {i} on [{}, {}): {e}", p.t0, p.t1)))?;
        }
        let mut spec =
            SymbolSpec { gamma, kappa: 1.0, dim, body: Body::Levy { profile: m, eval: LevyEval::new(gamma) } };
        let (ellip, modulus) = spec.sphere_constants()?;
        if ellip.value <= 0.0 {
            return Err(Error::invalid(format!("Lévy symbol is not elliptic at ξ = {:?}, t = {}", ellip.xi, ellip.t)));
        }
        spec.kappa = ellip.value.min(1.0 / modulus);
        Ok(spec)
    }

    /// `ψ = −(−ψ1)^a (−ψ2)^b` on the principal branch, order `aγ1 + bγ2`.
    pub fn compose(s1: &SymbolSpec, a: f64, s2: &SymbolSpec, b: f64) -> Result<Self> {
        Self::compose_factors(vec![(s1.clone(), a), (s2.clone(), b)])
    }

    /// `ψ = −(−ψ1)^a`, order `aγ1`.
    pub fn power(s: &SymbolSpec, a: f64) -> Result<Self> {
        Self::compose_factors(vec![(s.clone(), a)])
    }

    fn compose_factors(factors: Vec<(SymbolSpec, f64)>) -> Result<Self> {
        let dim = factors[0].0.dim;
        if factors.iter().any(|(s, _)| s.dim != dim) {
            return Err(Error::invalid("composed factors have different dimensions"));
        }
        if let Some((_, p)) = factors.iter().find(|(_, p)| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::invalid(format!("composition powers must be positive, got {p}")));
        }
        let start = factors.iter().map(|(s, _)| s.window().0).fold(f64::NEG_INFINITY, f64::max);
        let end = factors.iter().map(|(s, _)| s.window().1).fold(f64::INFINITY, f64::min);
        if !(start < end) {
            return Err(Error::invalid("composed factors have disjoint time windows"));
        }
        for (s, _) in &factors {
            let (ellip, _) = s.sphere_constants()?;
            if ellip.value <= 0.0 {
                return Err(Error::invalid("a composed factor fails its ellipticity check"));
            }
        }
        let gamma = factors.iter().map(|(s, p)| p * s.gamma).sum();
        let mut spec = SymbolSpec { gamma, kappa: 1.0, dim, body: Body::Composed(factors) };
        let (ellip, modulus) = spec.sphere_constants()?;
        if ellip.value <= 0.0 {
            return Err(Error::invalid(format!(
                "composite ellipticity fails at ξ = {:?}, t = {}: Re[(−ψ1)^a(−ψ2)^b] = {}",
                ellip.xi, ellip.t, -ellip.value
            )));
        }
        spec.kappa = ellip.value.min(1.0 / modulus);
        Ok(spec)
    }

    /// `ψ_c(t, ξ) = ψ(t, cξ)`; same order, `κ_c = κ min(c^γ, c^{−γ})`.
    pub fn scaled(inner: &SymbolSpec, xi_scale: f64) -> Result<Self> {
        if !(xi_scale > 0.0 && xi_scale.is_finite()) {
            return Err(Error::invalid(format!("ξ scale must be positive, got {xi_scale}")));
        }
        let g = xi_scale.powf(inner.gamma);
        Ok(SymbolSpec {
            gamma: inner.gamma,
            kappa: inner.kappa * g.min(1.0 / g),
            dim: inner.dim,
            body: Body::Scaled { inner: Box::new(inner.clone()), xi_scale },
        })
    }

    pub fn kind(&self) -> SymbolKind {
        match self.body {
            Body::Fractional(_) => SymbolKind::Fractional,
            Body::Poly2m { .. } => SymbolKind::Poly2m,
            Body::Levy { .. } => SymbolKind::Levy,
            Body::Composed(_) => SymbolKind::Composed,
            Body::Scaled { .. } => SymbolKind::Scaled,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `[start, end]` of the coefficient schedule.
    pub fn window(&self) -> (f64, f64) {
        match &self.body {
            Body::Fractional(p) => (p.start(), p.end()),
            Body::Poly2m { profile, .. } => (profile.start(), profile.end()),
            Body::Levy { profile, .. } => (profile.start(), profile.end()),
            Body::Scaled { inner, .. } => inner.window(),
            Body::Composed(f) => {
                let start = f.iter().map(|(s, _)| s.window().0).fold(f64::NEG_INFINITY, f64::max);
                let end = f.iter().map(|(s, _)| s.window().1).fold(f64::INFINITY, f64::min);
                (start, end)
            }
        }
    }

    /// Sorted breakpoints of the schedule inside the window, both ends included.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = match &self.body {
            Body::Fractional(p) => p.breakpoints(),
            Body::Poly2m { profile, .. } => profile.breakpoints(),
            Body::Levy { profile, .. } => profile.breakpoints(),
            Body::Scaled { inner, .. } => inner.breakpoints(),
            Body::Composed(f) => {
                let (start, end) = self.window();
                let mut b: Vec<f64> =
                    f.iter().flat_map(|(s, _)| s.breakpoints()).filter(|&t| t > start && t < end).collect();
                b.push(start);
                b.push(end);
                b
            }
        };
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Midpoint of every interval on which the symbol is constant in time.
    pub fn piece_midpoints(&self) -> Vec<f64> {
        self.breakpoints().windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// `ψ(t, ξ)`. Errors when `t` is outside the window or `ξ` has the wrong
    /// length; `ψ(t, 0) = 0`.
    pub fn eval(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        if xi.len() != self.dim {
            return Err(Error::domain(format!("ξ has {} components, symbol dimension is {}", xi.len(), self.dim)));
        }
        let (start, end) = self.window();
        if !(t >= start && t <= end) {
            return Err(Error::OutOfWindow { t, start, end });
        }
        Ok(self.eval_unchecked(t, xi))
    }

    /// Evaluation without argument validation. Callers guarantee
    /// `xi.len() == dim` and `t` inside the window.
    pub(crate) fn eval_unchecked(&self, t: f64, xi: &[f64]) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        if xi.iter().all(|&v| v == 0.0) {
            return zero;
        }
        match &self.body {
            Body::Fractional(p) => {
                let a = p.at(t).expect("t inside window");
                -a * norm(xi).powf(self.gamma)
            }
            Body::Poly2m { indices, profile, .. } => {
                let c = profile.at(t).expect("t inside window");
                let mono: Vec<f64> = indices.iter().map(|a| a.monomial(xi)).collect();
                let n = mono.len();
                let mut acc = zero;
                for i in 0..n {
                    for j in 0..n {
                        acc += c.matrix[i * n + j] * (mono[i] * mono[j]);
                    }
                }
                -acc
            }
            Body::Levy { profile, eval } => eval.eval(profile.at(t).expect("t inside window"), xi),
            Body::Composed(factors) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for (s, p) in factors {
                    let v = -s.eval_unchecked(t, xi);
                    if v == zero {
                        return zero;
                    }
                    acc *= v.powf(*p);
                }
                -acc
            }
            Body::Scaled { inner, xi_scale } => {
                let scaled: Vec<f64> = xi.iter().map(|v| v * xi_scale).collect();
                inner.eval_unchecked(t, &scaled)
            }
        }
    }

    /// `D^α_ξ ψ(t, ξ)` for `ξ ≠ 0`: closed form for fractional (|α| ≤ 2),
    /// `2m`-order and scaled symbols, central differences with step
    /// `10^{-4}|ξ|` otherwise.
    pub fn derivative(&self, t: f64, xi: &[f64], alpha: &MultiIndex) -> Result<Complex64> {
        self.eval(t, xi)?;
        if alpha.dim() != self.dim {
            return Err(Error::domain("multi-index dimension mismatch"));
        }
        let r = norm(xi);
        if r == 0.0 {
            return Err(Error::domain("derivatives are taken away from ξ = 0"));
        }
        Ok(self.derivative_unchecked(t, xi, alpha, r))
    }

    fn derivative_unchecked(&self, t: f64, xi: &[f64], alpha: &MultiIndex, r: f64) -> Complex64 {
        match &self.body {
            Body::Fractional(p) if alpha.order() <= 2 => {
                let a = *p.at(t).expect("t inside window");
                let g = self.gamma;
                let nz: Vec<usize> = (0..self.dim).filter(|&i| alpha.0[i] > 0).collect();
                let v = match (alpha.order(), nz.as_slice()) {
                    (0, _) => r.powf(g),
                    (1, [i]) => g * r.powf(g - 2.0) * xi[*i],
                    (2, [i]) => g * r.powf(g - 2.0) + g * (g - 2.0) * r.powf(g - 4.0) * xi[*i] * xi[*i],
                    (2, [i, j]) => g * (g - 2.0) * r.powf(g - 4.0) * xi[*i] * xi[*j],
                    _ => unreachable!(),
                };
                -a * v
            }
            Body::Poly2m { indices, profile, .. } => {
                let c = profile.at(t).expect("t inside window");
                let n = indices.len();
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        if let Some((k, e)) = indices[i].add(&indices[j]).differentiate(alpha) {
                            acc += c.matrix[i * n + j] * (k * e.monomial(xi));
                        }
                    }
                }
                -acc
            }
            Body::Scaled { inner, xi_scale } => {
                let scaled: Vec<f64> = xi.iter().map(|v| v * xi_scale).collect();
                inner.derivative_unchecked(t, &scaled, alpha, r * xi_scale) * xi_scale.powi(alpha.order() as i32)
            }
            _ => self.central_difference(t, xi, alpha, 1e-4 * r),
        }
    }

    fn central_difference(&self, t: f64, xi: &[f64], alpha: &MultiIndex, h: f64) -> Complex64 {
        let Some(i) = alpha.0.iter().position(|&a| a > 0) else {
            return self.eval_unchecked(t, xi);
        };
        let mut lower = alpha.clone();
        lower.0[i] -= 1;
        let mut plus = xi.to_vec();
        let mut minus = xi.to_vec();
        plus[i] += h;
        minus[i] -= h;
        (self.central_difference(t, &plus, &lower, h) - self.central_difference(t, &minus, &lower, h)) / (2.0 * h)
    }

    /// `(inf −Re ψ/|ξ|^γ, sup |ψ|/|ξ|^γ)` over the unit-sphere sample and every
    /// constant-in-time piece.
    pub(crate) fn sphere_constants(&self) -> Result<(SphereMin, f64)> {
        let mut worst = SphereMin { value: f64::INFINITY, xi: vec![], t: f64::NAN };
        let mut modulus: f64 = 0.0;
        let dirs = sphere_samples(self.dim);
        for t in self.piece_midpoints() {
            for w in &dirs {
                let v = self.eval_unchecked(t, w);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::invalid(format!("symbol is not finite at ξ = {w:?}, t = {t}")));
                }
                if -v.re < worst.value {
                    worst = SphereMin { value: -v.re, xi: w.clone(), t };
                }
                modulus = modulus.max(v.norm());
            }
        }
        Ok((worst, modulus))
    }

    /// Same intervals with the coefficient sets randomly permuted among the
    /// pieces. Composed factors are permuted independently.
    pub fn with_permuted_schedule<R: Rng + ?Sized>(&self, rng: &mut R) -> SymbolSpec {
        fn order<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
            let mut o: Vec<usize> = (0..n).collect();
            o.shuffle(rng);
            o
        }
        let body = match &self.body {
            Body::Fractional(p) => Body::Fractional(p.reassigned(&order(p.pieces().len(), rng))),
            Body::Poly2m { m, indices, profile } => Body::Poly2m {
                m: *m,
                indices: indices.clone(),
                profile: profile.reassigned(&order(profile.pieces().len(), rng)),
            },
            Body::Levy { profile, eval } => {
                Body::Levy { profile: profile.reassigned(&order(profile.pieces().len(), rng)), eval: eval.clone() }
            }
            Body::Composed(f) => Body::Composed(f.iter().map(|(s, p)| (s.with_permuted_schedule(rng), *p)).collect()),
            Body::Scaled { inner, xi_scale } => {
                Body::Scaled { inner: Box::new(inner.with_permuted_schedule(rng)), xi_scale: *xi_scale }
            }
        };
        SymbolSpec { body, ..self.clone() }
    }

    /// Constant-in-time symbol with the coefficients in force at `t`, on the
    /// same window.
    pub fn frozen_at(&self, t: f64) -> Result<SymbolSpec> {
        let (start, end) = self.window();
        if !(t >= start && t <= end) {
            return Err(Error::OutOfWindow { t, start, end });
        }
        fn freeze<C: Clone>(p: &TimeProfile<C>, t: f64) -> Result<TimeProfile<C>> {
            TimeProfile::constant(p.start(), p.end(), p.at(t)?.clone())
        }
        let body = match &self.body {
            Body::Fractional(p) => Body::Fractional(freeze(p, t)?),
            Body::Poly2m { m, indices, profile } => {
                Body::Poly2m { m: *m, indices: indices.clone(), profile: freeze(profile, t)? }
            }
            Body::Levy { profile, eval } => Body::Levy { profile: freeze(profile, t)?, eval: eval.clone() },
            Body::Composed(f) => {
                Body::Composed(f.iter().map(|(s, p)| Ok((s.frozen_at(t)?, *p))).collect::<Result<_>>()?)
            }
            Body::Scaled { inner, xi_scale } => {
                Body::Scaled { inner: Box::new(inner.frozen_at(t)?), xi_scale: *xi_scale }
            }
        };
        Ok(SymbolSpec { body, ..self.clone() })
    }

    /// True when every coefficient is real, so that `ψ(t, −ξ) = conj ψ(t, ξ)`
    /// for the even kinds.
    pub fn is_real(&self) -> bool {
        match &self.body {
            Body::Fractional(p) => p.pieces().iter().all(|x| x.coeff.im == 0.0),
            Body::Poly2m { profile, .. } => profile.pieces().iter().all(|x| x.coeff.matrix.iter().all(|c| c.im == 0.0)),
            Body::Levy { profile, .. } => profile.pieces().iter().all(|p| match &p.coeff {
                LevyDensity::Constant(_) => true,
                LevyDensity::TwoPoint { plus, minus } => plus == minus,
                LevyDensity::Fourier { cos, sin, .. } => {
                    cos.iter().step_by(2).all(|v| *v == 0.0) && sin.iter().step_by(2).all(|v| *v == 0.0)
                }
            }),
            Body::Composed(f) => f.iter().all(|(s, _)| s.is_real()),
            Body::Scaled { inner, .. } => inner.is_real(),
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("order γ must be positive, got {gamma}")))
    }
}

/// Location of the smallest ellipticity ratio on the unit sphere.
#[derive(Clone, Debug)]
pub(crate) struct SphereMin {
    pub value: f64,
    pub xi: Vec<f64>,
    pub t: f64,
}

#[cfg(test)]
mod tests;
