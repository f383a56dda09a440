//! Periodic spatial lattices and time-node sets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::SymbolSpec;

/// The box `[−L/2, L/2)^d` sampled with `N` points per axis.
///
/// Flat indices are row-major with the last axis fastest. Frequencies are
/// `ξ_k = 2πk/L` in FFT order; the Nyquist index `N/2` maps to `k = −N/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    dim: usize,
    extent: f64,
    points: usize,
}

impl SpatialGrid {
    pub fn new(dim: usize, extent: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Grid(format!("dimension {dim} is outside 1..=3")));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::Grid(format!("extent must be positive, got {extent}")));
        }
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::Grid(format!("points per axis must be a power of two ≥ 2, got {points}")));
        }
        if points.checked_pow(dim as u32).is_none_or(|n| n > 1 << 28) {
            return Err(Error::Grid(format!("{points}^{dim} lattice points is too many")));
        }
        Ok(SpatialGrid { dim, extent, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of lattice points `N^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `2π/L`.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.extent
    }

    /// `π N / L`, the modulus of the Nyquist frequency.
    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / self.extent
    }

    /// Per-axis indices of a flat index.
    pub fn axes(&self, flat: usize) -> [usize; 3] {
        let n = self.points;
        let mut out = [0; 3];
        let mut r = flat;
        for a in (0..self.dim).rev() {
            out[a] = r % n;
            r /= n;
        }
        out
    }

    /// Signed integer wavenumber of an axis index.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.points / 2 {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    /// Spatial coordinates along one axis.
    pub fn axis_coords(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|i| -0.5 * self.extent + i as f64 * h).collect()
    }

    /// Frequencies along one axis in FFT order.
    pub fn axis_frequencies(&self) -> Vec<f64> {
        let s = self.frequency_step();
        (0..self.points).map(|i| s * self.wavenumber(i) as f64).collect()
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let c = self.axis_coords();
        let ax = self.axes(flat);
        (0..self.dim).map(|a| c[ax[a]]).collect()
    }

    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        let ax = self.axes(flat);
        let s = self.frequency_step();
        (0..self.dim).map(|a| s * self.wavenumber(ax[a]) as f64).collect()
    }

    /// All lattice points, flat order.
    pub fn points_list(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// All frequencies, flat order.
    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.frequency(i)).collect()
    }

    /// `Σ k_a` over axes, used for the `(−1)^{Σk}` centring phase.
    pub fn parity(&self, flat: usize) -> bool {
        let ax = self.axes(flat);
        ax[..self.dim].iter().sum::<usize>() % 2 == 1
    }

    /// True when any axis sits at the Nyquist index.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let ax = self.axes(flat);
        ax[..self.dim].contains(&(self.points / 2))
    }

    /// Same box, `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        SpatialGrid::new(self.dim, self.extent, self.points * factor)
    }

    pub fn with_extent(&self, extent: f64) -> Result<Self> {
        SpatialGrid::new(self.dim, extent, self.points)
    }
}

/// A spatial lattice together with increasing time nodes `t_0 < … < t_M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    space: SpatialGrid,
    nodes: Vec<f64>,
}

impl SpaceTimeGrid {
    pub fn new(space: SpatialGrid, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Grid("need at least two time nodes".into()));
        }
        if nodes.iter().any(|t| !t.is_finite()) || nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Grid("time nodes must be finite and strictly increasing".into()));
        }
        Ok(SpaceTimeGrid { space, nodes })
    }

    /// `count` equally spaced nodes on `[t0, t1]`.
    pub fn uniform(space: SpatialGrid, t0: f64, t1: f64, count: usize) -> Result<Self> {
        if count < 2 || !(t0 < t1) {
            return Err(Error::Grid(format!("cannot place {count} nodes on [{t0}, {t1}]")));
        }
        let h = (t1 - t0) / (count - 1) as f64;
        let mut nodes: Vec<f64> = (0..count).map(|i| t0 + i as f64 * h).collect();
        nodes[count - 1] = t1;
        Self::new(space, nodes)
    }

    /// Uniform nodes with the symbol's breakpoints inside `(t0, t1)` merged in.
    pub fn aligned(space: SpatialGrid, t0: f64, t1: f64, count: usize, symbol: &SymbolSpec) -> Result<Self> {
        let base = Self::uniform(space, t0, t1, count)?;
        let tol = 1e-12 * (t1 - t0);
        let mut nodes = base.nodes;
        for b in symbol.breakpoints() {
            if b > t0 && b < t1 && !nodes.iter().any(|t| (t - b).abs() <= tol) {
                nodes.push(b);
            }
        }
        nodes.sort_by(f64::total_cmp);
        Self::new(base.space, nodes)
    }

    pub fn space(&self) -> &SpatialGrid {
        &self.space
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn window(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    /// Time weights: `Δt_n = t_{n+1} − t_n` for `n < M`, and the last cell
    /// length repeated at `t_M`.
    pub fn time_weights(&self) -> Vec<f64> {
        let m = self.nodes.len();
        let mut w: Vec<f64> = self.nodes.windows(2).map(|p| p[1] - p[0]).collect();
        w.push(w[m - 2]);
        w
    }

    /// Every cell split into `factor` equal parts, and the lattice refined by
    /// the same factor.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let mut nodes = Vec::with_capacity((self.nodes.len() - 1) * factor + 1);
        for w in self.nodes.windows(2) {
            for j in 0..factor {
                nodes.push(w[0] + (w[1] - w[0]) * j as f64 / factor as f64);
            }
        }
        nodes.push(*self.nodes.last().unwrap());
        Self::new(self.space.refined(factor)?, nodes)
    }

    /// Checks that the symbol covers the node window and that every breakpoint
    /// strictly inside the window is a node.
    pub fn check_alignment(&self, symbol: &SymbolSpec) -> Result<()> {
        let (a, b) = self.window();
        let (start, end) = symbol.window();
        if a < start || b > end {
            return Err(Error::Alignment(format!(
                "time nodes span [{a}, {b}] but the coefficient schedule covers [{start}, {end}]"
            )));
        }
        let tol = 1e-12 * (b - a).max(1.0);
        for bp in symbol.breakpoints() {
            if bp > a && bp < b && !self.nodes.iter().any(|t| (t - bp).abs() <= tol) {
                return Err(Error::Alignment(format!("breakpoint {bp} is not a time node")));
            }
        }
        if symbol.dim() != self.space.dim() {
            return Err(Error::Grid(format!(
                "symbol dimension {} does not match grid dimension {}",
                symbol.dim(),
                self.space.dim()
            )));
        }
        Ok(())
    }
}
