//! Forcing described independently of a grid, so it can be resampled under
//! refinement: a sum of separable terms `g(x)·h(t)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpaceTimeGrid;
use crate::solver::{GridFunction, Role};

/// Spatial factor of a separable term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Spatial {
    /// Periodized Gaussian `exp(−|x − c|²/(2w²))`.
    Bump {
        center: Vec<f64>,
        width: f64,
        /// Scale to unit spatial L1 norm instead of unit height.
        #[serde(default)]
        normalized: bool,
    },
    /// Lattice mode `e^{iξ·x}` with `ξ = 2πk/L`.
    PlaneWave { wavenumber: Vec<i64> },
}

/// One interval of a temporal profile; zero outside all intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pulse {
    pub t0: f64,
    pub t1: f64,
    pub value: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableTerm {
    pub space: Spatial,
    pub time: Vec<Pulse>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Forcing {
    pub terms: Vec<SeparableTerm>,
}

impl Spatial {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Spatial::Bump { center, width, .. } => {
                if center.len() != dim {
                    return Err(Error::Config(format!("bump center has {} coordinates, grid has {dim}", center.len())));
                }
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::Config(format!("bump width must be positive, got {width}")));
                }
            }
            Spatial::PlaneWave { wavenumber } => {
                if wavenumber.len() != dim {
                    return Err(Error::Config(format!("wavenumber has {} entries, grid has {dim}", wavenumber.len())));
                }
            }
        }
        Ok(())
    }

    fn sample(&self, grid: &SpaceTimeGrid) -> Vec<Complex64> {
        let space = grid.space();
        let l = space.extent();
        let pts = space.points_list();
        match self {
            Spatial::Bump { center, width, normalized } => {
                let mut v: Vec<Complex64> = pts
                    .iter()
                    .map(|x| {
                        let r2: f64 = x
                            .iter()
                            .zip(center)
                            .map(|(a, c)| {
                                let d = (a - c + 0.5 * l).rem_euclid(l) - 0.5 * l;
                                d * d
                            })
                            .sum();
                        Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
                    })
                    .collect();
                if *normalized {
                    let mass: f64 = v.iter().map(|z| z.re).sum::<f64>() * space.cell_volume();
                    v.iter_mut().for_each(|z| *z /= mass);
                }
                v
            }
            Spatial::PlaneWave { wavenumber } => {
                let step = space.frequency_step();
                pts.iter()
                    .map(|x| {
                        let p: f64 = x.iter().zip(wavenumber).map(|(a, k)| a * step * *k as f64).sum();
                        Complex64::from_polar(1.0, p)
                    })
                    .collect()
            }
        }
    }
}

impl Forcing {
    pub fn single(space: Spatial, time: Vec<Pulse>) -> Self {
        Forcing { terms: vec![SeparableTerm { space, time }] }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::Config("forcing has no terms".into()));
        }
        for t in &self.terms {
            t.space.validate(dim)?;
            if let Some(p) = t.time.iter().find(|p| !(p.t0 < p.t1) || !p.t0.is_finite() || !p.t1.is_finite()) {
                return Err(Error::Config(format!("pulse [{}, {}) is empty or not finite", p.t0, p.t1)));
            }
        }
        Ok(())
    }

    /// Pulse edges, which a grid should contain as nodes.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.terms.iter().flat_map(|t| t.time.iter().flat_map(|p| [p.t0, p.t1])).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Samples on `grid`: each cell `[t_n, t_{n+1})` takes the value at
    /// `t_n`, and the last node repeats the last cell.
    pub fn sample(&self, grid: &SpaceTimeGrid) -> Result<GridFunction> {
        self.validate(grid.space().dim())?;
        let len = grid.space().len();
        let nodes = grid.nodes();
        let mut values = vec![Complex64::new(0.0, 0.0); nodes.len() * len];
        for term in &self.terms {
            let g = term.space.sample(grid);
            for (n, &t) in nodes[..nodes.len() - 1].iter().enumerate() {
                let h: Complex64 = term.time.iter().filter(|p| p.t0 <= t && t < p.t1).map(|p| p.value).sum();
                if h != Complex64::new(0.0, 0.0) {
                    values[n * len..(n + 1) * len].iter_mut().zip(&g).for_each(|(v, x)| *v += h * x);
                }
            }
        }
        let m = nodes.len() - 1;
        let (head, last) = values.split_at_mut(m * len);
        last.copy_from_slice(&head[(m - 1) * len..]);
        GridFunction::new(grid.clone(), values, Role::F)
    }
}
