//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use czkit::solver::{solve_resolvent, GridFunction, Role};
use czkit::symbols::{Piece, SymbolSpec, TimeProfile};
use czkit::{SpaceTimeGrid, SpatialGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Fractional symbol on `[0, 1]` whose coefficient jumps at `cuts`.
pub fn schedule(gamma: f64, cuts: &[f64], coeffs: &[Complex64]) -> SymbolSpec {
    let mut edges = vec![0.0];
    edges.extend_from_slice(cuts);
    edges.push(1.0);
    let pieces = edges.windows(2).zip(coeffs).map(|(w, &a)| Piece { t0: w[0], t1: w[1], coeff: a }).collect();
    SymbolSpec::fractional(TimeProfile::new(pieces).unwrap(), gamma, 1).unwrap()
}

/// Classical RK4 for `y' = z y + h` over `[0, dt]` in `steps` steps.
pub fn rk4(y: Complex64, z: Complex64, h: Complex64, dt: f64, steps: usize) -> Complex64 {
    let s = dt / steps as f64;
    let rhs = |v: Complex64| z * v + h;
    (0..steps).fold(y, |v, _| {
        let k1 = rhs(v);
        let k2 = rhs(v + 0.5 * s * k1);
        let k3 = rhs(v + 0.5 * s * k2);
        let k4 = rhs(v + s * k3);
        v + s / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    })
}

/// Uniform random values, constant on cells, last node repeating the last cell.
pub fn random_forcing(grid: &SpaceTimeGrid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = grid.space().len();
    let m = grid.node_count() - 1;
    let mut v: Vec<Complex64> =
        (0..m * len).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let last = v[(m - 1) * len..].to_vec();
    v.extend(last);
    GridFunction::new(grid.clone(), v, Role::F).unwrap()
}

/// One random plane-wave trial: solves with a two-piece complex schedule and
/// returns the largest nodal error against a fine RK4 integration of the
/// mode's scalar ODE, relative to the largest oracle value.
pub fn mode_trial(rng: &mut ChaCha8Rng) -> f64 {
    // On a 2π-periodic lattice the plane wave e^{ikx} has ξ = k.
    let space = SpatialGrid::new(1, 2.0 * PI, 64).unwrap();
    let gamma = rng.random_range(0.6..2.0);
    let cut = rng.random_range(0.2..0.8);
    let coeffs = [c(rng.random_range(0.2..3.0), rng.random_range(-2.0..2.0)), c(rng.random_range(0.2..3.0), 0.0)];
    let sym = schedule(gamma, &[cut], &coeffs);
    let grid = SpaceTimeGrid::aligned(space.clone(), 0.0, 1.0, 33, &sym).unwrap();
    let k: i64 = rng.random_range(-20..=20);
    let lambda = rng.random_range(0.0..4.0);
    let nodes = grid.nodes().to_vec();
    let m = nodes.len() - 1;
    let mut h: Vec<Complex64> = (0..m).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    h.push(h[m - 1]);
    let pts = space.axis_coords();
    let values =
        h.iter().flat_map(|&hn| pts.iter().map(move |&x| hn * Complex64::from_polar(1.0, k as f64 * x))).collect();
    let f = GridFunction::new(grid.clone(), values, Role::F).unwrap();
    let u = solve_resolvent(&sym, &f, lambda).unwrap();

    let xi = (k as f64).abs();
    let mut y = c(0.0, 0.0);
    let mut oracle = vec![y];
    for n in 0..m {
        let a = if nodes[n] < cut { coeffs[0] } else { coeffs[1] };
        y = rk4(y, -a * xi.powf(gamma) - lambda, h[n], nodes[n + 1] - nodes[n], 4000);
        oracle.push(y);
    }
    let phase = Complex64::from_polar(1.0, -(k as f64) * pts[0]);
    let scale = oracle.iter().map(|v| v.norm()).fold(0.0, f64::max);
    oracle.iter().enumerate().map(|(n, want)| (u.node(n)[0] * phase - want).norm()).fold(0.0, f64::max) / scale
}
