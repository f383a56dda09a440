//! FFT plumbing on [`SpatialGrid`] lattices.
//!
//! With samples `u_j = u(x_j)` the forward map is the plain DFT along every
//! axis and the inverse carries the `1/N^d` factor, so that `inverse ∘
//! forward` is the identity and Fourier multipliers act mode by mode.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::SpatialGrid;

/// Forward and inverse transforms for one lattice shape.
#[derive(Clone)]
pub struct Spectral {
    grid: SpatialGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

/// Lines shorter than this are transformed on the calling thread.
const PAR_LINES: usize = 64;

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

/// Plans depend only on the line length; they are shared process-wide.
fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

impl Spectral {
    pub fn new(grid: &SpatialGrid) -> Self {
        let (forward, inverse) = plans(grid.points());
        Spectral { grid: grid.clone(), forward, inverse }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// Unnormalized forward DFT in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &self.forward);
    }

    /// Inverse DFT in place, including the `1/N^d` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &self.inverse);
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    /// Inverse DFT without normalization.
    pub fn inverse_unnormalized(&self, data: &mut [Complex64]) {
        self.apply(data, &self.inverse);
    }

    fn apply(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points();
        let d = self.grid.dim();
        assert_eq!(data.len(), self.grid.len(), "buffer does not match the lattice");
        for axis in 0..d {
            // Stride between consecutive elements of a line along `axis`.
            let stride = n.pow((d - 1 - axis) as u32);
            if stride == 1 {
                if data.len() / n >= PAR_LINES {
                    data.par_chunks_mut(n).for_each(|line| plan.process(line));
                } else {
                    plan.process(data);
                }
                continue;
            }
            let block = stride * n;
            let lines = |chunk: &mut [Complex64]| {
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                for off in 0..stride {
                    for (i, b) in buf.iter_mut().enumerate() {
                        *b = chunk[off + i * stride];
                    }
                    plan.process(&mut buf);
                    for (i, b) in buf.iter().enumerate() {
                        chunk[off + i * stride] = *b;
                    }
                }
            };
            data.par_chunks_mut(block).for_each(lines);
        }
    }

    /// Values of the function with Fourier transform `m` at the lattice
    /// points, `L^{−d} Σ_k m(ξ_k) e^{iξ_k·x_j}`. `spectrum` is consumed as
    /// the working buffer.
    pub fn synthesize(&self, mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
        for (i, v) in spectrum.iter_mut().enumerate() {
            if self.grid.parity(i) {
                *v = -*v;
            }
        }
        self.inverse_unnormalized(&mut spectrum);
        let s = self.grid.extent().powi(-(self.grid.dim() as i32));
        spectrum.iter_mut().for_each(|v| *v *= s);
        spectrum
    }
}
