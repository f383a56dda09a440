//! The kernels `p_λ(t, s, ·)` and `K(t, s, ·)` on periodic lattices, and the
//! numerical checks of their integral bounds.
//!
//! ```text
//! p_λ(t, s, x) = 1_{s<t} F^{-1}{ exp(∫_s^t (ψ(r, ξ) − λ) dr) }(x)
//! K(t, s, x)   = 1_{s<t} F^{-1}{ |ξ|^γ exp(∫_s^t ψ(r, ξ) dr) }(x)
//! ```
//!
//! The inverse transform is the lattice sum `L^{-d} Σ_k m(ξ_k) e^{iξ_k·x}`,
//! i.e. the periodization of the whole-space kernel up to the truncation at
//! the Nyquist shell, which is monitored.

mod checks;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checks::{
    assumption1_sweep, hormander_levels, hormander_q, l1_uniformity, moment_power_law, operator_slice_norm,
    opnorm_sweep, Assumption1Options, HormanderOptions, SliceGridRule,
};

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::spectral::Spectral;
use crate::symbols::SymbolSpec;

/// A slice is flagged when the multiplier on the Nyquist shell exceeds this
/// fraction of its maximum.
pub const ALIASING_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `p_λ` with the given `λ ≥ 0`.
    PLambda(f64),
    K,
}

/// Which upper limit on `μ` [`KernelSlice::moment`] enforces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentRange {
    /// `0 ≤ μ < min(γ, ⌊d/2⌋ + 1 − d/2)`, where the moment bound is proved.
    Proof,
    /// `0 ≤ μ < γ`, where the moment of `K` is finite.
    Integrable,
}

impl MomentRange {
    pub fn upper(self, gamma: f64, dim: usize) -> f64 {
        match self {
            MomentRange::Proof => gamma.min((dim / 2) as f64 + 1.0 - dim as f64 / 2.0),
            MomentRange::Integrable => gamma,
        }
    }
}

/// Samples of `p_λ(t, s, ·)` or `K(t, s, ·)` at the lattice points.
#[derive(Clone, Debug)]
pub struct KernelSlice {
    pub grid: SpatialGrid,
    pub t: f64,
    pub s: f64,
    pub kind: KernelKind,
    pub gamma: f64,
    pub values: Vec<Complex64>,
    /// Largest multiplier modulus on the Nyquist shell over the largest overall.
    pub nyquist_ratio: f64,
    pub under_resolved: bool,
}

/// `(length, representative time)` of every coefficient piece meeting `[a, b]`.
pub(crate) fn overlaps(sym: &SymbolSpec, a: f64, b: f64) -> Result<Vec<(f64, f64)>> {
    if !(a <= b) {
        return Err(Error::domain(format!("time integral needs a ≤ b, got [{a}, {b}]")));
    }
    let (start, end) = sym.window();
    if a < start || b > end {
        return Err(Error::domain(format!("[{a}, {b}] is not covered by the coefficient schedule [{start}, {end}]")));
    }
    Ok(sym
        .breakpoints()
        .windows(2)
        .filter_map(|w| {
            let (lo, hi) = (w[0].max(a), w[1].min(b));
            (hi > lo).then(|| (hi - lo, 0.5 * (w[0] + w[1])))
        })
        .collect())
}

/// `∫_a^b ψ(r, ξ) dr`, summed exactly over the constant pieces.
pub fn time_integral(sym: &SymbolSpec, a: f64, b: f64, xi: &[f64]) -> Result<Complex64> {
    if xi.len() != sym.dim() {
        return Err(Error::domain("ξ dimension does not match the symbol"));
    }
    Ok(integrate_pieces(sym, &overlaps(sym, a, b)?, xi))
}

fn integrate_pieces(sym: &SymbolSpec, pieces: &[(f64, f64)], xi: &[f64]) -> Complex64 {
    pieces.iter().map(|&(len, t)| sym.eval_unchecked(t, xi) * len).sum()
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Lattice samples of a Fourier multiplier, with the Nyquist-shell ratio.
pub(crate) fn sample_multiplier<F>(grid: &SpatialGrid, f: F) -> (Vec<Complex64>, f64)
where
    F: Fn(usize, &[f64]) -> Complex64 + Sync,
{
    let vals: Vec<Complex64> = (0..grid.len()).into_par_iter().map(|i| f(i, &grid.frequency(i))).collect();
    let mut max = 0.0f64;
    let mut nyq = 0.0f64;
    for (i, v) in vals.iter().enumerate() {
        let a = v.norm();
        max = max.max(a);
        if grid.is_nyquist(i) {
            nyq = nyq.max(a);
        }
    }
    let ratio = if max > 0.0 { nyq / max } else { 0.0 };
    (vals, ratio)
}

/// Exponent `∫_s^t ψ dr` on every lattice frequency.
pub(crate) fn exponent_field(sym: &SymbolSpec, t: f64, s: f64, grid: &SpatialGrid) -> Result<Vec<Complex64>> {
    let pieces = overlaps(sym, s, t)?;
    Ok((0..grid.len()).into_par_iter().map(|i| integrate_pieces(sym, &pieces, &grid.frequency(i))).collect())
}

/// Multiplier of the kernel at lattice frequency `xi`, given its exponent.
pub(crate) fn kernel_multiplier(kind: KernelKind, gamma: f64, gap: f64, xi: &[f64], expo: Complex64) -> Complex64 {
    match kind {
        KernelKind::PLambda(lambda) => (expo - lambda * gap).exp(),
        KernelKind::K => {
            let r = norm(xi);
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                expo.exp() * r.powf(gamma)
            }
        }
    }
}

/// Kernel values on `grid`, shifted so that the slice represents
/// `x ↦ kernel(x − shift)`.
pub fn kernel_slice_shifted(
    sym: &SymbolSpec,
    t: f64,
    s: f64,
    kind: KernelKind,
    grid: &SpatialGrid,
    shift: &[f64],
) -> Result<KernelSlice> {
    if grid.dim() != sym.dim() || shift.len() != sym.dim() {
        return Err(Error::Grid("grid, shift and symbol dimensions differ".into()));
    }
    if let KernelKind::PLambda(l) = kind {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::domain(format!("λ must be nonnegative, got {l}")));
        }
    }
    let gamma = sym.gamma();
    if t <= s {
        return Ok(KernelSlice {
            grid: grid.clone(),
            t,
            s,
            kind,
            gamma,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            nyquist_ratio: 0.0,
            under_resolved: false,
        });
    }
    let expo = exponent_field(sym, t, s, grid)?;
    let (mult, nyquist_ratio) = sample_multiplier(grid, |i, xi| {
        let phase: f64 = xi.iter().zip(shift).map(|(a, b)| a * b).sum();
        kernel_multiplier(kind, gamma, t - s, xi, expo[i]) * Complex64::from_polar(1.0, -phase)
    });
    let values = Spectral::new(grid).synthesize(mult);
    Ok(KernelSlice {
        grid: grid.clone(),
        t,
        s,
        kind,
        gamma,
        values,
        nyquist_ratio,
        under_resolved: nyquist_ratio > ALIASING_THRESHOLD,
    })
}

/// `p_λ(t, s, ·)` or `K(t, s, ·)` on `grid`; the zero slice when `t ≤ s`.
pub fn kernel_slice(sym: &SymbolSpec, t: f64, s: f64, kind: KernelKind, grid: &SpatialGrid) -> Result<KernelSlice> {
    kernel_slice_shifted(sym, t, s, kind, grid, &vec![0.0; grid.dim()])
}

impl KernelSlice {
    /// Lattice sum of `|values|` times the cell volume.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.grid.cell_volume()
    }

    /// `Σ |x|^μ |values| Δx^d`, with `μ` checked against `range`.
    pub fn moment(&self, mu: f64, range: MomentRange) -> Result<f64> {
        let upper = range.upper(self.gamma, self.grid.dim());
        if !(mu >= 0.0 && mu < upper) {
            return Err(Error::domain(format!(
                "moment order μ = {mu} must satisfy 0 ≤ μ < {upper} ({range:?} range for γ = {}, d = {})",
                self.gamma,
                self.grid.dim()
            )));
        }
        Ok(self.weighted_sum(|x| norm(x).powf(mu)))
    }

    /// `Σ w(x_j) |values_j| Δx^d`.
    pub fn weighted_sum(&self, w: impl Fn(&[f64]) -> f64) -> f64 {
        let c = self.grid.axis_coords();
        let mut x = vec![0.0; self.grid.dim()];
        let mut acc = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let ax = self.grid.axes(i);
            for (a, xa) in x.iter_mut().enumerate() {
                *xa = c[ax[a]];
            }
            acc += w(&x) * v.norm();
        }
        acc * self.grid.cell_volume()
    }

    /// Largest `|Im|` relative to the largest modulus.
    pub fn imaginary_ratio(&self) -> f64 {
        let max = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / max
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }
}
