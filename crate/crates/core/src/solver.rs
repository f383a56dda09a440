//! Exact-in-time spectral integration of `u_t = A(t)u − λu + f`.
//!
//! Forcing is piecewise constant on the cells `[t_n, t_{n+1})` and the
//! symbol is constant on each cell once the nodes contain its breakpoints, so
//! every Fourier mode obeys the one-step recurrence
//!
//! ```text
//! û_{n+1} = E û_n + φ f̂_n,   E = e^{(ψ−λ)Δt},   φ = (E − 1)/(ψ − λ)
//! ```
//!
//! with no time-discretization error. The state starts from zero at `t_0`.

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SpaceTimeGrid, SpatialGrid};
use crate::spectral::Spectral;
use crate::symbols::SymbolSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    U,
    F,
    Residual,
}

/// Complex samples at every (time node, lattice point), node-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: SpaceTimeGrid,
    values: Vec<Complex64>,
    role: Role,
}

impl GridFunction {
    pub fn new(grid: SpaceTimeGrid, values: Vec<Complex64>, role: Role) -> Result<Self> {
        let want = grid.node_count() * grid.space().len();
        if values.len() != want {
            return Err(Error::Grid(format!("expected {want} values, got {}", values.len())));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Grid("grid function has non-finite values".into()));
        }
        Ok(GridFunction { grid, values, role })
    }

    pub fn zeros(grid: &SpaceTimeGrid, role: Role) -> Self {
        let n = grid.node_count() * grid.space().len();
        GridFunction { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); n], role }
    }

    /// Samples `f(t_n, x_j)`.
    pub fn from_fn(grid: &SpaceTimeGrid, role: Role, f: impl Fn(f64, &[f64]) -> Complex64) -> Self {
        let pts = grid.space().points_list();
        let values = grid.nodes().iter().flat_map(|&t| pts.iter().map(|x| f(t, x)).collect::<Vec<_>>()).collect();
        GridFunction { grid: grid.clone(), values, role }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn node(&self, n: usize) -> &[Complex64] {
        let len = self.grid.space().len();
        &self.values[n * len..(n + 1) * len]
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// `self + c · other` on the same grid.
    pub fn axpy(&self, c: Complex64, other: &GridFunction) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::Grid("grid functions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Ok(GridFunction { grid: self.grid.clone(), values, role: self.role })
    }

    pub fn scaled(&self, c: Complex64) -> GridFunction {
        GridFunction { grid: self.grid.clone(), values: self.values.iter().map(|v| v * c).collect(), role: self.role }
    }

    /// Circular shift by `steps[a]` lattice points along each axis.
    pub fn shifted(&self, steps: &[i64]) -> GridFunction {
        let sp = self.grid.space();
        let n = sp.points() as i64;
        let d = sp.dim();
        let len = sp.len();
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for i in 0..len {
            let ax = sp.axes(i);
            let j = (0..d).fold(0usize, |acc, a| acc * n as usize + (ax[a] as i64 + steps[a]).rem_euclid(n) as usize);
            for t in 0..self.grid.node_count() {
                out[t * len + j] = self.values[t * len + i];
            }
        }
        GridFunction { grid: self.grid.clone(), values: out, role: self.role }
    }
}

/// Per-node spatial spectra, node-major.
pub(crate) fn to_spectra(u: &GridFunction) -> Vec<Complex64> {
    let sp = Spectral::new(u.grid.space());
    let len = u.grid.space().len();
    let mut v = u.values.clone();
    v.chunks_mut(len).for_each(|c| sp.forward(c));
    v
}

pub(crate) fn from_spectra(grid: &SpaceTimeGrid, mut v: Vec<Complex64>, role: Role) -> GridFunction {
    let sp = Spectral::new(grid.space());
    let len = grid.space().len();
    v.chunks_mut(len).for_each(|c| sp.inverse(c));
    GridFunction { grid: grid.clone(), values: v, role }
}

/// Applies `column(k, values over nodes)` to every mode in parallel.
fn per_mode<F>(spec: &[Complex64], nodes: usize, len: usize, f: F) -> Vec<Complex64>
where
    F: Fn(usize, &[Complex64]) -> Vec<Complex64> + Sync,
{
    let cols: Vec<Vec<Complex64>> = (0..len)
        .into_par_iter()
        .map(|k| {
            let col: Vec<Complex64> = (0..nodes).map(|n| spec[n * len + k]).collect();
            f(k, &col)
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); nodes * len];
    for (k, col) in cols.into_iter().enumerate() {
        for (n, v) in col.into_iter().enumerate() {
            out[n * len + k] = v;
        }
    }
    out
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `ψ` on the lattice for each coefficient piece, plus the piece index of
/// every cell and node.
struct SymbolFields {
    fields: Vec<Vec<Complex64>>,
    cell_piece: Vec<usize>,
    node_piece: Vec<usize>,
}

impl SymbolFields {
    fn new(sym: &SymbolSpec, grid: &SpaceTimeGrid) -> Result<Self> {
        grid.check_alignment(sym)?;
        let bps = sym.breakpoints();
        let pieces = bps.len() - 1;
        let piece_of = |t: f64| -> usize {
            let i = bps.partition_point(|&b| b <= t);
            i.saturating_sub(1).min(pieces - 1)
        };
        let nodes = grid.nodes();
        let cell_piece: Vec<usize> = nodes.windows(2).map(|w| piece_of(0.5 * (w[0] + w[1]))).collect();
        let node_piece: Vec<usize> = nodes.iter().map(|&t| piece_of(t)).collect();
        let mut used: Vec<usize> = cell_piece.iter().chain(&node_piece).copied().collect();
        used.sort_unstable();
        used.dedup();
        let space = grid.space();
        let freqs = space.frequencies();
        let mut fields = vec![Vec::new(); pieces];
        let computed: Vec<(usize, Vec<Complex64>)> = used
            .par_iter()
            .map(|&p| {
                let t = 0.5 * (bps[p] + bps[p + 1]);
                (p, freqs.iter().map(|xi| sym.eval_unchecked(t, xi)).collect())
            })
            .collect();
        for (p, f) in computed {
            fields[p] = f;
        }
        Ok(SymbolFields { fields, cell_piece, node_piece })
    }

    fn cell(&self, n: usize, k: usize) -> Complex64 {
        self.fields[self.cell_piece[n]][k]
    }

    fn node(&self, n: usize, k: usize) -> Complex64 {
        self.fields[self.node_piece[n]][k]
    }
}

/// `(e^z − 1)/z`, continuous at `z = 0`.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        // Taylor series; the first omitted term is below 1e-17.
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = term;
        for k in 2..=12 {
            term *= z / k as f64;
            acc += term;
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("λ must be finite and nonnegative, got {lambda}")))
    }
}

/// The recurrence on spectra, one column per mode.
fn recurrence(fields: &SymbolFields, grid: &SpaceTimeGrid, fhat: &[Complex64], lambda: f64) -> Vec<Complex64> {
    let nodes = grid.node_count();
    let len = grid.space().len();
    let t = grid.nodes();
    per_mode(fhat, nodes, len, |k, col| {
        let mut out = Vec::with_capacity(nodes);
        let mut u = Complex64::new(0.0, 0.0);
        out.push(u);
        for n in 0..nodes - 1 {
            let dt = t[n + 1] - t[n];
            let z = (fields.cell(n, k) - lambda) * dt;
            u = z.exp() * u + phi1(z) * dt * col[n];
            out.push(u);
        }
        out
    })
}

fn warn_if_mean(grid: &SpaceTimeGrid, fhat: &[Complex64], lambda: f64) {
    if lambda == 0.0 {
        let len = grid.space().len();
        let w = grid.time_weights();
        let mean: Complex64 = (0..grid.node_count() - 1).map(|n| fhat[n * len] * w[n]).sum();
        if mean.norm() > 1e-12 * fhat.iter().map(|v| v.norm()).fold(0.0, f64::max) {
            warn!("λ = 0 with forcing of nonzero spatial mean: the ξ = 0 mode grows linearly in time");
        }
    }
}

/// `R_λ f`: the solution of `u_t = A u − λ u + f` with zero state at `t_0`.
pub fn solve_resolvent(sym: &SymbolSpec, f: &GridFunction, lambda: f64) -> Result<GridFunction> {
    check_lambda(lambda)?;
    let fields = SymbolFields::new(sym, &f.grid)?;
    let fhat = to_spectra(f);
    warn_if_mean(&f.grid, &fhat, lambda);
    let uhat = recurrence(&fields, &f.grid, &fhat, lambda);
    Ok(from_spectra(&f.grid, uhat, Role::U))
}

fn abs_gamma_field(space: &SpatialGrid, sigma: f64) -> Vec<Complex64> {
    space
        .frequencies()
        .iter()
        .map(|xi| {
            let r = norm(xi);
            Complex64::new(if r == 0.0 { 0.0 } else { r.powf(sigma) }, 0.0)
        })
        .collect()
}

fn apply_spatial(u: &GridFunction, mult: &[Complex64], role: Role) -> GridFunction {
    let len = u.grid.space().len();
    let mut v = to_spectra(u);
    v.chunks_mut(len).for_each(|c| c.iter_mut().zip(mult).for_each(|(a, m)| *a *= m));
    from_spectra(&u.grid, v, role)
}

/// `(−Δ)^{σ/2}` as the multiplier `|ξ|^σ`; the `ξ = 0` mode is removed, so
/// `σ = 0` subtracts the spatial mean.
pub fn frac_laplacian(u: &GridFunction, sigma: f64) -> Result<GridFunction> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("order σ must be nonnegative, got {sigma}")));
    }
    Ok(apply_spatial(u, &abs_gamma_field(u.grid.space(), sigma), u.role))
}

/// `A(t_n) u(t_n)` at every node.
pub fn apply_a(sym: &SymbolSpec, u: &GridFunction) -> Result<GridFunction> {
    let fields = SymbolFields::new(sym, &u.grid)?;
    let len = u.grid.space().len();
    let mut v = to_spectra(u);
    for (n, c) in v.chunks_mut(len).enumerate() {
        for (k, a) in c.iter_mut().enumerate() {
            *a *= fields.node(n, k);
        }
    }
    Ok(from_spectra(&u.grid, v, u.role))
}

/// `G f = (−Δ)^{γ/2} R_0 f`, computed by running the recurrence on `|ξ|^γ f̂`.
pub fn apply_g(sym: &SymbolSpec, f: &GridFunction) -> Result<GridFunction> {
    let fields = SymbolFields::new(sym, &f.grid)?;
    let len = f.grid.space().len();
    let w = abs_gamma_field(f.grid.space(), sym.gamma());
    let mut fhat = to_spectra(f);
    fhat.chunks_mut(len).for_each(|c| c.iter_mut().zip(&w).for_each(|(a, m)| *a *= m));
    let uhat = recurrence(&fields, &f.grid, &fhat, 0.0);
    Ok(from_spectra(&f.grid, uhat, Role::U))
}

/// `u_t` at every node from the mode equation: `(ψ − λ)û_n + f̂_n` with the
/// symbol of the cell to the right of `t_n` (to the left at the last node).
pub fn time_derivative(sym: &SymbolSpec, u: &GridFunction, f: &GridFunction, lambda: f64) -> Result<GridFunction> {
    check_lambda(lambda)?;
    if u.grid != f.grid {
        return Err(Error::Grid("u and f live on different grids".into()));
    }
    let fields = SymbolFields::new(sym, &u.grid)?;
    let len = u.grid.space().len();
    let m = u.grid.node_count() - 1;
    let uhat = to_spectra(u);
    let fhat = to_spectra(f);
    let mut v = vec![Complex64::new(0.0, 0.0); uhat.len()];
    for n in 0..=m {
        let cell = n.min(m - 1);
        for k in 0..len {
            v[n * len + k] = (fields.cell(cell, k) - lambda) * uhat[n * len + k] + fhat[n * len + k];
        }
    }
    Ok(from_spectra(&u.grid, v, Role::U))
}

/// The forcing that [`solve_resolvent`] maps to `u`: the exact inverse of
/// the recurrence, `f̂_n = (û_{n+1} − E û_n)/φ`. The last node repeats the
/// last cell. `u` must vanish at `t_0` for the round trip to be exact.
pub fn forward_apply(sym: &SymbolSpec, u: &GridFunction, lambda: f64) -> Result<GridFunction> {
    check_lambda(lambda)?;
    let fields = SymbolFields::new(sym, &u.grid)?;
    let nodes = u.grid.node_count();
    let len = u.grid.space().len();
    let t = u.grid.nodes().to_vec();
    let uhat = to_spectra(u);
    let fhat = per_mode(&uhat, nodes, len, |k, col| {
        let mut out = Vec::with_capacity(nodes);
        for n in 0..nodes - 1 {
            let dt = t[n + 1] - t[n];
            let z = (fields.cell(n, k) - lambda) * dt;
            out.push((col[n + 1] - z.exp() * col[n]) / (phi1(z) * dt));
        }
        out.push(out[nodes - 2]);
        out
    });
    Ok(from_spectra(&u.grid, fhat, Role::F))
}

/// `u_t − A u + λ u − f` with `u_t` from [`time_derivative`].
pub fn residual(sym: &SymbolSpec, u: &GridFunction, f: &GridFunction, lambda: f64) -> Result<GridFunction> {
    let ut = time_derivative(sym, u, f, lambda)?;
    let au = apply_a(sym, u)?;
    let r = ut
        .axpy(Complex64::new(-1.0, 0.0), &au)?
        .axpy(Complex64::new(lambda, 0.0), u)?
        .axpy(Complex64::new(-1.0, 0.0), f)?;
    Ok(r.with_role(Role::Residual))
}
