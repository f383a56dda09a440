use log::{info, warn};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    exponent_field, kernel_multiplier, kernel_slice, norm, sample_multiplier, KernelKind, KernelSlice, MomentRange,
};
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::partitions::{Cube, Filtration};
use crate::quadrature::{log_midpoint, loglog_slope};
use crate::report::{EstimateReport, Sample};
use crate::spectral::Spectral;
use crate::symbols::SymbolSpec;

/// Kernel scales read off the unit sphere: `A = sup |ψ|/|ξ|^γ` sets the
/// spatial spread of the kernels and `κ̂ = inf (−Re ψ)/|ξ|^γ` their smoothness.
#[derive(Clone, Copy, Debug)]
struct Scales {
    gamma: f64,
    spread: f64,
    decay: f64,
}

impl Scales {
    fn of(sym: &SymbolSpec) -> Result<Self> {
        let (ellip, modulus) = sym.sphere_constants()?;
        Ok(Scales { gamma: sym.gamma(), spread: modulus, decay: ellip.value })
    }

    /// Spatial width of the kernels after a time gap `tau`.
    fn width(&self, tau: f64) -> f64 {
        (tau * self.spread).powf(1.0 / self.gamma)
    }

    /// Smallest gap whose multiplier has decayed below the aliasing
    /// threshold at the Nyquist shell of `grid`.
    fn resolved_gap(&self, grid: &SpatialGrid) -> f64 {
        30.0 / (self.decay * grid.nyquist().powf(self.gamma))
    }
}

/// Per-slice lattice: extent `box_factor · (τ A)^{1/γ}` (at least
/// `min_extent`) with a fixed number of points per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SliceGridRule {
    pub points: usize,
    pub box_factor: f64,
    pub min_extent: f64,
}

impl Default for SliceGridRule {
    fn default() -> Self {
        SliceGridRule { points: 4096, box_factor: 40.0, min_extent: 0.0 }
    }
}

impl SliceGridRule {
    fn grid_with(&self, dim: usize, sc: &Scales, tau: f64, floor: f64) -> Result<SpatialGrid> {
        let extent = (self.box_factor * sc.width(tau)).max(self.min_extent).max(floor);
        SpatialGrid::new(dim, extent, self.points)
    }

    pub fn grid(&self, sym: &SymbolSpec, tau: f64) -> Result<SpatialGrid> {
        self.grid_with(sym.dim(), &Scales::of(sym)?, tau, 0.0)
    }
}

fn require_window(sym: &SymbolSpec, a: f64, b: f64) -> Result<()> {
    let (start, end) = sym.window();
    if a < start || b > end {
        return Err(Error::domain(format!(
            "the check needs the schedule on [{a}, {b}], but it covers [{start}, {end}]"
        )));
    }
    Ok(())
}

fn tail_note(rep: &mut EstimateReport, sc: &Scales, slice: &KernelSlice) {
    // Chebyshev certificate for the kernel mass outside the box.
    if sc.gamma < 1.0 {
        let mu = 0.5 * sc.gamma;
        if let Ok(m) = slice.moment(mu, MomentRange::Integrable) {
            let bound = m / (0.5 * slice.grid.extent()).powf(mu);
            let l1 = slice.l1_norm();
            if bound > 1e-4 * l1 {
                rep.note(format!(
                    "tail certificate {bound:e} exceeds 1e-4 of the L1 norm at gap {}",
                    slice.t - slice.s
                ));
            }
        }
    }
}

/// `‖K(t, s0, ·)‖_{L1}` on the per-slice lattice of `rule`; the surrogate for
/// the `L_p` operator norm of the slice operator.
pub fn operator_slice_norm(sym: &SymbolSpec, t: f64, s0: f64, rule: &SliceGridRule) -> Result<f64> {
    if t <= s0 {
        return Ok(0.0);
    }
    let grid = rule.grid(sym, t - s0)?;
    Ok(kernel_slice(sym, t, s0, KernelKind::K, &grid)?.l1_norm())
}

/// Fits the exponent of `‖K(s0 + τ, s0)‖_{L1}` in `τ`; expected `−1`.
pub fn opnorm_sweep(sym: &SymbolSpec, s0: f64, gaps: &[f64], rule: &SliceGridRule, tol: f64) -> Result<EstimateReport> {
    let sc = Scales::of(sym)?;
    let mut rep = EstimateReport::new("opnorm");
    let rows: Vec<Result<(f64, KernelSlice)>> = gaps
        .par_iter()
        .map(|&g| {
            let grid = rule.grid_with(sym.dim(), &sc, g, 0.0)?;
            Ok((g, kernel_slice(sym, s0 + g, s0, KernelKind::K, &grid)?))
        })
        .collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut flagged = 0;
    for r in rows {
        let (g, slice) = r?;
        let n = slice.l1_norm();
        flagged += slice.under_resolved as usize;
        tail_note(&mut rep, &sc, &slice);
        rep.samples.push(Sample::new(format!("gap={g}")).with("gap", g).with("l1", n).with("l1_times_gap", n * g));
        xs.push(g);
        ys.push(n);
    }
    let slope = loglog_slope(&xs, &ys).unwrap_or(f64::NAN);
    rep.summary("fitted_exponent", slope).summary("expected_exponent", -1.0).summary("under_resolved", flagged as f64);
    rep.tolerance("exponent", tol);
    rep.require("exponent", (slope + 1.0).abs() <= tol);
    rep.require("resolved", flagged == 0);
    Ok(rep)
}

/// `sup e^{λτ}‖p_λ(s0 + τ, s0)‖_{L1}` over the sampled gaps and `λ`, with the
/// exact factorization `‖p_λ‖ = e^{−λτ}‖p_0‖` checked slice by slice.
pub fn l1_uniformity(
    sym: &SymbolSpec,
    s0: f64,
    gaps: &[f64],
    lambdas: &[f64],
    rule: &SliceGridRule,
) -> Result<EstimateReport> {
    let sc = Scales::of(sym)?;
    let mut rep = EstimateReport::new("l1");
    let mut sup: f64 = 0.0;
    let mut worst_factor: f64 = 0.0;
    let mut flagged = 0;
    for &g in gaps {
        let grid = rule.grid_with(sym.dim(), &sc, g, 0.0)?;
        let p0 = kernel_slice(sym, s0 + g, s0, KernelKind::PLambda(0.0), &grid)?;
        flagged += p0.under_resolved as usize;
        let n0 = p0.l1_norm();
        tail_note(&mut rep, &sc, &p0);
        for &l in lambdas {
            let pl = kernel_slice(sym, s0 + g, s0, KernelKind::PLambda(l), &grid)?;
            let nl = pl.l1_norm();
            let scaled = (l * g).exp() * nl;
            worst_factor = worst_factor.max((scaled - n0).abs() / n0);
            sup = sup.max(scaled);
            rep.samples.push(
                Sample::new(format!("gap={g},lambda={l}"))
                    .with("gap", g)
                    .with("lambda", l)
                    .with("l1", nl)
                    .with("scaled_l1", scaled),
            );
        }
    }
    rep.summary("sup_scaled_l1", sup)
        .summary("factorization_error", worst_factor)
        .summary("under_resolved", flagged as f64);
    rep.tolerance("factorization", 1e-12);
    rep.require("finite", sup.is_finite());
    rep.require("factorization", worst_factor <= 1e-12);
    rep.require("resolved", flagged == 0);
    Ok(rep)
}

/// Fits `log ∫|x|^μ |K(s0 + τ, s0, x)| dx` against `log τ` on one fixed lattice;
/// the expected slope is `μ/γ − 1`.
pub fn moment_power_law(
    sym: &SymbolSpec,
    s0: f64,
    mu: f64,
    range: MomentRange,
    gaps: &[f64],
    grid: &SpatialGrid,
    tol: f64,
) -> Result<EstimateReport> {
    let sc = Scales::of(sym)?;
    let mut rep = EstimateReport::new("moment");
    let slices: Vec<Result<KernelSlice>> =
        gaps.par_iter().map(|&g| kernel_slice(sym, s0 + g, s0, KernelKind::K, grid)).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut flagged = 0;
    for (g, s) in gaps.iter().zip(slices) {
        let s = s?;
        let m = s.moment(mu, range)?;
        flagged += s.under_resolved as usize;
        tail_note(&mut rep, &sc, &s);
        rep.samples.push(Sample::new(format!("gap={g}")).with("gap", *g).with("moment", m).with("l1", s.l1_norm()));
        xs.push(*g);
        ys.push(m);
    }
    let slope = loglog_slope(&xs, &ys).unwrap_or(f64::NAN);
    let expected = mu / sym.gamma() - 1.0;
    rep.summary("mu", mu)
        .summary("fitted_exponent", slope)
        .summary("expected_exponent", expected)
        .summary("under_resolved", flagged as f64);
    rep.tolerance("exponent", tol);
    rep.require("exponent", (slope - expected).abs() <= tol);
    rep.require("resolved", flagged == 0);
    Ok(rep)
}

/// Discretization of the Hörmander integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HormanderOptions {
    /// Lattice points per axis for every slice.
    pub points: usize,
    /// Far-time slices span `box_factor` kernel widths.
    pub box_factor: f64,
    /// Near-time slices span at least `near_factor` cube sides.
    pub near_factor: f64,
    pub far_nodes: usize,
    pub near_nodes: usize,
    /// Far-time integrals stop at `t0 + horizon · 2^{−mγ}`.
    pub horizon: f64,
}

impl Default for HormanderOptions {
    fn default() -> Self {
        HormanderOptions {
            points: 4096,
            box_factor: 40.0,
            near_factor: 64.0,
            far_nodes: 48,
            near_nodes: 32,
            horizon: 64.0,
        }
    }
}

/// Integrals for one pair of points of a cube.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct PairIntegrals {
    total: f64,
    far: f64,
    near: f64,
    i1: f64,
    i2: f64,
    i3: f64,
    tail: f64,
    near_remainder: f64,
    flagged: usize,
}

type Point = (f64, Vec<f64>);

fn phase(xi: &[f64], y: &[f64], c: &[f64]) -> Complex64 {
    let p: f64 = xi.iter().zip(y.iter().zip(c)).map(|(a, (b, cc))| a * (b - cc)).sum();
    Complex64::from_polar(1.0, -p)
}

/// `K` multipliers for births `s` and `r` at time `t` on `grid`.
fn k_multipliers(
    sym: &SymbolSpec,
    t: f64,
    s: f64,
    r: f64,
    grid: &SpatialGrid,
) -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
    let gamma = sym.gamma();
    let side = |birth: f64| -> Result<(Vec<Complex64>, f64)> {
        if t <= birth {
            return Ok((vec![Complex64::new(0.0, 0.0); grid.len()], 0.0));
        }
        let e = exponent_field(sym, t, birth, grid)?;
        Ok(sample_multiplier(grid, |i, xi| kernel_multiplier(KernelKind::K, gamma, t - birth, xi, e[i])))
    };
    let (ms, ns) = side(s)?;
    let (mr, nr) = if r == s { (ms.clone(), ns) } else { side(r)? };
    Ok((ms, mr, ns.max(nr)))
}

fn synth_sum(sp: &Spectral, m: Vec<Complex64>, mask: Option<&dyn Fn(usize) -> bool>) -> f64 {
    let v = sp.synthesize(m);
    let dv = sp.grid().cell_volume();
    match mask {
        None => v.iter().map(|z| z.norm()).sum::<f64>() * dv,
        Some(f) => v.iter().enumerate().filter(|(i, _)| f(*i)).map(|(_, z)| z.norm()).sum::<f64>() * dv,
    }
}

fn pair_integrals(
    sym: &SymbolSpec,
    sc: &Scales,
    filt: &Filtration,
    q: &Cube,
    a: &Point,
    b: &Point,
    opts: &HormanderOptions,
) -> Result<PairIntegrals> {
    let (s, y) = (a.0, &a.1);
    let (r, z) = (b.0, &b.1);
    let dim = sym.dim();
    let p = filt.parabolic_time(q.m);
    let h = (-q.m as f64).exp2();
    let bounds = filt.bounds(q);
    let t0 = bounds.t.0;
    let first = s.min(r);
    let rule = SliceGridRule { points: opts.points, box_factor: opts.box_factor, min_extent: 0.0 };
    let mut out = PairIntegrals::default();

    // Far time: every x, t in [t0 + 4P, t0 + horizon·P].
    let center: Vec<f64> = y.iter().zip(z).map(|(u, v)| 0.5 * (u + v)).collect();
    let sep = norm(&y.iter().zip(z).map(|(u, v)| u - v).collect::<Vec<_>>());
    let nodes = log_midpoint(4.0 * p, opts.horizon * p, opts.far_nodes);
    let mut last_total = 0.0;
    for &(tau, w) in &nodes {
        let t = t0 + tau;
        let grid = rule.grid_with(dim, sc, t - first, 8.0 * (sep + h))?;
        let sp = Spectral::new(&grid);
        let (ms, mr, nyq) = k_multipliers(sym, t, s, r, &grid)?;
        out.flagged += (nyq > super::ALIASING_THRESHOLD) as usize;
        let freq = |i: usize| grid.frequency(i);
        let py: Vec<Complex64> = (0..grid.len()).map(|i| phase(&freq(i), y, &center)).collect();
        let pz: Vec<Complex64> = (0..grid.len()).map(|i| phase(&freq(i), z, &center)).collect();
        let total = synth_sum(&sp, (0..grid.len()).map(|i| ms[i] * py[i] - mr[i] * pz[i]).collect(), None);
        let i1 = synth_sum(&sp, (0..grid.len()).map(|i| ms[i] * (py[i] - pz[i])).collect(), None);
        let i2 = synth_sum(&sp, (0..grid.len()).map(|i| (ms[i] - mr[i]) * pz[i]).collect(), None);
        out.far += w * total;
        out.i1 += w * i1;
        out.i2 += w * i2;
        last_total = total;
    }
    // Power-law envelope beyond the horizon: decay at least (t − s)^{−1−β}.
    let beta = (1.0 / sc.gamma).min(1.0);
    let (t_last, _) = nodes[nodes.len() - 1];
    out.tail = last_total * (t0 + t_last - first) / beta;

    // Near time: x outside the dilated box, t in [t0, t0 + 4P).
    let star = filt.dilate(q);
    let corner: Vec<f64> = bounds.x.iter().map(|iv| iv.0).collect();
    let end = star.t.1;
    let second = s.max(r);
    let mut segments = vec![];
    if second > first {
        segments.push((first, second));
    }
    segments.push((second, end));
    let mut near_s = 0.0;
    let mut near_r = 0.0;
    for (lo, hi) in segments {
        let grid = rule.grid_with(dim, sc, hi - first, opts.near_factor * h)?;
        let sp = Spectral::new(&grid);
        let tau_min = sc.resolved_gap(&grid);
        if hi - lo <= tau_min {
            continue;
        }
        let coords = grid.axis_coords();
        let outside = |i: usize| {
            let ax = grid.axes(i);
            (0..dim).any(|j| {
                let x = coords[ax[j]];
                x < -2.0 * h || x >= 2.0 * h
            })
        };
        let py: Vec<Complex64> = (0..grid.len()).map(|i| phase(&grid.frequency(i), y, &corner)).collect();
        let pz: Vec<Complex64> = (0..grid.len()).map(|i| phase(&grid.frequency(i), z, &corner)).collect();
        let nodes = log_midpoint(tau_min, hi - lo, opts.near_nodes);
        let mut first_total = None;
        for &(tau, w) in &nodes {
            let t = lo + tau;
            let (ms, mr, nyq) = k_multipliers(sym, t, s, r, &grid)?;
            out.flagged += (nyq > super::ALIASING_THRESHOLD) as usize;
            let total =
                synth_sum(&sp, (0..grid.len()).map(|i| ms[i] * py[i] - mr[i] * pz[i]).collect(), Some(&outside));
            let ks = synth_sum(&sp, (0..grid.len()).map(|i| ms[i] * py[i]).collect(), Some(&outside));
            let kr = synth_sum(&sp, (0..grid.len()).map(|i| mr[i] * pz[i]).collect(), Some(&outside));
            first_total.get_or_insert(total);
            out.near += w * total;
            near_s += w * ks;
            near_r += w * kr;
        }
        out.near_remainder += tau_min * first_total.unwrap_or(0.0);
    }
    out.i3 = 2.0 * near_s.max(near_r);
    out.total = out.far + out.near;
    Ok(out)
}

/// Hörmander integral `∫∫_{exterior of Q*} |K(t, x, s, y) − K(t, x, r, z)| dx dt`
/// for each pair of points of `q`, with the far/near split.
pub fn hormander_q(
    sym: &SymbolSpec,
    filt: &Filtration,
    q: &Cube,
    pairs: &[(Point, Point)],
    opts: &HormanderOptions,
) -> Result<EstimateReport> {
    if filt.dim() != sym.dim() || q.idx.len() != sym.dim() {
        return Err(Error::domain("cube, filtration and symbol dimensions differ"));
    }
    let bounds = filt.bounds(q);
    for (a, b) in pairs {
        for pt in [a, b] {
            if !bounds.contains(pt.0, &pt.1) {
                return Err(Error::domain(format!("sample point {pt:?} lies outside the cube")));
            }
        }
    }
    let p = filt.parabolic_time(q.m);
    require_window(sym, bounds.t.0, bounds.t.0 + opts.horizon * p)?;
    let sc = Scales::of(sym)?;
    let results: Vec<Result<PairIntegrals>> =
        pairs.par_iter().map(|(a, b)| pair_integrals(sym, &sc, filt, q, a, b, opts)).collect();

    let mut rep = EstimateReport::new("hormander");
    let mut max = PairIntegrals::default();
    let mut triangle_ok = true;
    for (k, r) in results.into_iter().enumerate() {
        let v = r?;
        triangle_ok &= v.far <= (v.i1 + v.i2) * (1.0 + 1e-9) + 1e-300;
        triangle_ok &= v.near <= v.i3 * (1.0 + 1e-9) + 1e-300;
        rep.samples.push(
            Sample::new(format!("pair={k}"))
                .with("total", v.total)
                .with("far", v.far)
                .with("near", v.near)
                .with("i1", v.i1)
                .with("i2", v.i2)
                .with("i3", v.i3)
                .with("tail", v.tail)
                .with("near_remainder", v.near_remainder),
        );
        max.total = max.total.max(v.total);
        max.i1 = max.i1.max(v.i1);
        max.i2 = max.i2.max(v.i2);
        max.i3 = max.i3.max(v.i3);
        max.tail = max.tail.max(v.tail);
        max.near_remainder = max.near_remainder.max(v.near_remainder);
        max.flagged += v.flagged;
    }
    rep.summary("level", q.m as f64)
        .summary("max_total", max.total)
        .summary("max_i1", max.i1)
        .summary("max_i2", max.i2)
        .summary("max_i3", max.i3)
        .summary("max_tail", max.tail)
        .summary("max_near_remainder", max.near_remainder)
        .summary("under_resolved", max.flagged as f64);
    rep.require("finite", max.total.is_finite());
    rep.require("split_consistent", triangle_ok);
    rep.require("resolved", max.flagged == 0);
    Ok(rep)
}

/// Seeded relative positions in `[0, 1)^{d+1}`, reused at every level.
fn relative_pairs(dim: usize, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = (0..=dim).map(|_| rng.random::<f64>()).collect();
            let b = (0..=dim).map(|_| rng.random::<f64>()).collect();
            (a, b)
        })
        .collect()
}

/// Runs [`hormander_q`] on one cube per level with the same relative sample
/// pairs. Passes when every level passes and `max/min − 1` of the per-level
/// maxima is at most `variation_tol`.
pub fn hormander_levels(
    sym: &SymbolSpec,
    filt: &Filtration,
    levels: &[i64],
    pair_count: usize,
    seed: u64,
    opts: &HormanderOptions,
    variation_tol: f64,
) -> Result<EstimateReport> {
    let rel = relative_pairs(sym.dim(), pair_count, seed);
    let mut rep = EstimateReport::new("hormander_levels");
    let mut values = Vec::new();
    let start = sym.window().0;
    for &m in levels {
        let side = filt.time_side(m);
        let q = Cube { m, i0: (start / side).ceil() as i64, idx: vec![0; sym.dim()] };
        let b = filt.bounds(&q);
        let to_abs = |u: &[f64]| -> Point {
            let t = b.t.0 + u[0] * (b.t.1 - b.t.0);
            (t, b.x.iter().zip(&u[1..]).map(|(iv, v)| iv.0 + v * (iv.1 - iv.0)).collect())
        };
        let pairs: Vec<(Point, Point)> = rel.iter().map(|(a, c)| (to_abs(a), to_abs(c))).collect();
        let part = hormander_q(sym, filt, &q, &pairs, opts)?;
        let v = part.get("max_total").unwrap_or(f64::NAN);
        info!("hormander level {m}: max {v}");
        values.push(v);
        rep.samples.push(Sample::new(format!("m={m}")).with("m", m as f64).with("max_total", v));
        rep.push_part(part);
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let variation = max / min - 1.0;
    rep.summary("envelope", max).summary("variation", variation).summary("pairs", pair_count as f64);
    rep.tolerance("variation", variation_tol);
    rep.require("bounded", max.is_finite() && min > 0.0);
    rep.require("variation", variation <= variation_tol);
    Ok(rep)
}

/// A sweep point: `None` when it falls outside the schedule window.
type Skippable<T> = Option<Result<T>>;

/// `(gap, u, value, envelope, remainder)` of a condition (iii) point.
type TailRow = (f64, f64, f64, f64, f64);

/// Sweep parameters for the three scale-invariant kernel conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Assumption1Options {
    /// Time gaps `a − s` (conditions (i), (ii)) and `b − s` (condition (iii)).
    pub gaps: Vec<f64>,
    /// Arguments `u` for conditions (i) and (ii).
    pub u_small: Vec<f64>,
    /// Arguments `u` for condition (iii).
    pub u_tail: Vec<f64>,
    /// Moment order for the condition (iii) envelope; defaults to half the
    /// admissible upper limit.
    pub mu: Option<f64>,
    pub horizon: f64,
    pub nodes_per_octave: usize,
    pub points: usize,
    pub box_factor: f64,
    pub exponent_tol: f64,
    pub collapse_tol: f64,
}

impl Default for Assumption1Options {
    fn default() -> Self {
        Assumption1Options {
            gaps: vec![0.5, 1.0, 2.0],
            u_small: (3..=7).rev().map(|k| (-(k as f64)).exp2()).collect(),
            u_tail: (-3..=1).map(|k| (k as f64).exp2()).collect(),
            mu: None,
            horizon: 4096.0,
            nodes_per_octave: 8,
            points: 4096,
            box_factor: 40.0,
            exponent_tol: 0.1,
            collapse_tol: 0.25,
        }
    }
}

struct Curve {
    /// `(config, u, value)`.
    rows: Vec<(f64, f64, f64)>,
}

impl Curve {
    fn slope(&self) -> f64 {
        let (x, y): (Vec<f64>, Vec<f64>) = self.rows.iter().map(|r| (r.1, r.2)).unzip();
        loglog_slope(&x, &y).unwrap_or(f64::NAN)
    }

    /// Largest `max/min − 1` among values sharing the same `u`.
    fn spread(&self) -> f64 {
        let mut us: Vec<f64> = self.rows.iter().map(|r| r.1).collect();
        us.sort_by(f64::total_cmp);
        us.dedup();
        us.iter()
            .map(|&u| {
                let v: Vec<f64> = self.rows.iter().filter(|r| r.1 == u).map(|r| r.2).collect();
                let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
                hi / lo - 1.0
            })
            .fold(0.0, f64::max)
    }
}

fn octaves(lo: f64, hi: f64, per: usize) -> usize {
    (((hi / lo).log2() * per as f64).ceil() as usize).max(1)
}

/// `∫|F^{-1}[m]| dx` over the lattice.
fn l1_of(grid: &SpatialGrid, m: Vec<Complex64>) -> f64 {
    synth_sum(&Spectral::new(grid), m, None)
}

/// Empirical check of the three scale-invariant kernel conditions: for a
/// sweep of the argument `u`, the left-hand integrals must collapse onto one
/// curve across configurations and follow the power laws `u` ((i), (ii)) and
/// `u^μ` (the moment envelope of (iii)).
pub fn assumption1_sweep(sym: &SymbolSpec, opts: &Assumption1Options) -> Result<EstimateReport> {
    let sc = Scales::of(sym)?;
    let dim = sym.dim();
    let gamma = sym.gamma();
    let (s0, end) = sym.window();
    let rule = SliceGridRule { points: opts.points, box_factor: opts.box_factor, min_extent: 0.0 };
    let mut rep = EstimateReport::new("assumption1");
    let e1 = |v: f64| -> Vec<f64> {
        let mut x = vec![0.0; dim];
        x[0] = v;
        x
    };
    let n_far = octaves(1.0, opts.horizon, opts.nodes_per_octave);

    // (i) spatial translation.
    let mut part = EstimateReport::new("condition_i");
    let configs: Vec<(f64, f64)> = opts.gaps.iter().flat_map(|&g| opts.u_small.iter().map(move |&u| (g, u))).collect();
    let runs: Vec<Skippable<(f64, f64, f64, f64)>> = configs
        .par_iter()
        .map(|&(g, u)| {
            if s0 + opts.horizon * g > end {
                return None;
            }
            let delta = u * g.powf(1.0 / gamma);
            let (y, z) = (e1(-0.5 * delta), e1(0.5 * delta));
            let origin = vec![0.0; dim];
            let run = || -> Result<(f64, f64, f64, f64)> {
                let mut acc = 0.0;
                let mut last = (0.0, 0.0);
                for (tau, w) in log_midpoint(g, opts.horizon * g, n_far) {
                    let grid = rule.grid_with(dim, &sc, tau, 0.0)?;
                    let e = exponent_field(sym, s0 + tau, s0, &grid)?;
                    let (m, _) = sample_multiplier(&grid, |i, xi| {
                        kernel_multiplier(KernelKind::K, gamma, tau, xi, e[i])
                            * (phase(xi, &y, &origin) - phase(xi, &z, &origin))
                    });
                    let f = l1_of(&grid, m);
                    acc += w * f;
                    last = (tau, f);
                }
                let t_end = opts.horizon * g;
                let tail = last.1 * last.0.powf(1.0 + 1.0 / gamma) * gamma * t_end.powf(-1.0 / gamma);
                Ok((g, u, acc + tail, tail))
            };
            Some(run())
        })
        .collect();
    let curve = collect_curve(&mut part, runs, "tail")?;
    finish_curve(&mut part, &curve, 1.0, opts);
    rep.push_part(part);

    // (ii) time translation.
    let mut part = EstimateReport::new("condition_ii");
    let runs: Vec<Skippable<(f64, f64, f64, f64)>> = configs
        .par_iter()
        .map(|&(g, u)| {
            let delta = u * g;
            let r = s0 + delta;
            if r + opts.horizon * g > end {
                return None;
            }
            let run = || -> Result<(f64, f64, f64, f64)> {
                let mut acc = 0.0;
                let mut last = (0.0, 0.0);
                for (tau, w) in log_midpoint(g, opts.horizon * g, n_far) {
                    let t = r + tau;
                    let grid = rule.grid_with(dim, &sc, tau + delta, 0.0)?;
                    let (ms, mr, _) = k_multipliers(sym, t, s0, r, &grid)?;
                    let f = l1_of(&grid, ms.iter().zip(&mr).map(|(a, b)| a - b).collect());
                    acc += w * f;
                    last = (tau, f);
                }
                let t_end = opts.horizon * g;
                let tail = last.1 * last.0 * last.0 / t_end;
                Ok((g, u, acc + tail, tail))
            };
            Some(run())
        })
        .collect();
    let curve = collect_curve(&mut part, runs, "tail")?;
    finish_curve(&mut part, &curve, 1.0, opts);
    rep.push_part(part);

    // (iii) spatial tails, compared with the moment envelope.
    let mut part = EstimateReport::new("condition_iii");
    let mu = opts.mu.unwrap_or(0.5 * MomentRange::Proof.upper(gamma, dim));
    let upper = MomentRange::Integrable.upper(gamma, dim);
    if !(mu > 0.0 && mu < upper) {
        return Err(Error::domain(format!("envelope moment μ = {mu} must lie in (0, {upper})")));
    }
    // Moment integral M(B) = ∫_0^B ∫|x|^μ |K| dx dτ on per-slice lattices.
    let moment_integral = |b: f64| -> Result<f64> {
        let lo = b * (-12f64).exp2();
        let mut acc = 0.0;
        let mut first = None;
        for (tau, w) in log_midpoint(lo, b, 12 * opts.nodes_per_octave) {
            let grid = rule.grid_with(dim, &sc, tau, 0.0)?;
            let m = kernel_slice(sym, s0 + tau, s0, KernelKind::K, &grid)?.moment(mu, MomentRange::Integrable)?;
            first.get_or_insert((tau, m));
            acc += w * m;
        }
        // ∫_0^lo of the power law τ^{μ/γ − 1} through the first node.
        let (t1, m1) = first.unwrap();
        let p = mu / gamma;
        Ok(acc + m1 * t1.powf(1.0 - p) * lo.powf(p) / p)
    };
    let tail_configs: Vec<(f64, f64)> =
        opts.gaps.iter().flat_map(|&b| opts.u_tail.iter().map(move |&u| (b, u))).collect();
    let moments: Vec<Option<Result<f64>>> =
        opts.gaps.par_iter().map(|&b| if s0 + b > end { None } else { Some(moment_integral(b)) }).collect();
    let runs: Vec<Skippable<TailRow>> = tail_configs
        .par_iter()
        .map(|&(b, u)| {
            let k = opts.gaps.iter().position(|&g| g == b).unwrap();
            let mom = match &moments[k] {
                None => return None,
                Some(Err(e)) => return Some(Err(Error::domain(e.to_string()))),
                Some(Ok(v)) => *v,
            };
            let rho = b.powf(1.0 / gamma) / u;
            let run = || -> Result<(f64, f64, f64, f64, f64)> {
                let extent_floor = 32.0 * rho;
                let probe = rule.grid_with(dim, &sc, b, extent_floor)?;
                let tau_min = sc.resolved_gap(&probe).min(0.5 * b);
                let mut acc = 0.0;
                let mut first = None;
                for (tau, w) in log_midpoint(tau_min, b, octaves(tau_min, b, opts.nodes_per_octave)) {
                    let grid = rule.grid_with(dim, &sc, tau, extent_floor)?;
                    let slice = kernel_slice(sym, s0 + tau, s0, KernelKind::K, &grid)?;
                    let f = slice.weighted_sum(|x| if norm(x) >= rho { 1.0 } else { 0.0 });
                    first.get_or_insert(f);
                    acc += w * f;
                }
                let remainder = tau_min * first.unwrap_or(0.0);
                let envelope = rho.powf(-mu) * mom;
                Ok((b, u, acc + remainder, envelope, remainder))
            };
            Some(run())
        })
        .collect();
    let mut lhs = Curve { rows: vec![] };
    let mut env = Curve { rows: vec![] };
    let mut below = true;
    for (cfg, r) in tail_configs.iter().zip(runs) {
        match r {
            None => {
                warn!("condition (iii): gap {} exceeds the schedule window, skipped", cfg.0);
                part.note(format!("skipped b - s = {}: outside the schedule window", cfg.0));
            }
            Some(r) => {
                let (b, u, v, e, rem) = r?;
                below &= v <= e;
                part.samples.push(
                    Sample::new(format!("gap={b},u={u}"))
                        .with("gap", b)
                        .with("u", u)
                        .with("value", v)
                        .with("envelope", e)
                        .with("remainder", rem),
                );
                lhs.rows.push((b, u, v));
                env.rows.push((b, u, e));
            }
        }
    }
    let env_slope = env.slope();
    part.summary("mu", mu)
        .summary("envelope_exponent", env_slope)
        .summary("expected_exponent", mu)
        .summary("value_exponent", lhs.slope())
        .summary("value_spread", lhs.spread())
        .summary("envelope_spread", env.spread());
    part.tolerance("exponent", opts.exponent_tol).tolerance("collapse", opts.collapse_tol);
    part.require("configurations", !lhs.rows.is_empty());
    part.require("below_envelope", below);
    part.require("exponent", (env_slope - mu).abs() <= opts.exponent_tol);
    part.require("collapse", lhs.spread() <= opts.collapse_tol && env.spread() <= opts.collapse_tol);
    rep.push_part(part);
    Ok(rep)
}

fn collect_curve(part: &mut EstimateReport, runs: Vec<Skippable<(f64, f64, f64, f64)>>, extra: &str) -> Result<Curve> {
    let mut curve = Curve { rows: vec![] };
    for r in runs {
        match r {
            None => {
                warn!("{}: configuration exceeds the schedule window, skipped", part.check);
                part.note("skipped a configuration outside the schedule window");
            }
            Some(r) => {
                let (g, u, v, x) = r?;
                part.samples.push(
                    Sample::new(format!("gap={g},u={u}")).with("gap", g).with("u", u).with("value", v).with(extra, x),
                );
                curve.rows.push((g, u, v));
            }
        }
    }
    Ok(curve)
}

fn finish_curve(part: &mut EstimateReport, curve: &Curve, expected: f64, opts: &Assumption1Options) {
    let slope = curve.slope();
    let spread = curve.spread();
    part.summary("fitted_exponent", slope).summary("expected_exponent", expected).summary("spread", spread);
    part.tolerance("exponent", opts.exponent_tol).tolerance("collapse", opts.collapse_tol);
    part.require("configurations", !curve.rows.is_empty());
    part.require("exponent", (slope - expected).abs() <= opts.exponent_tol);
    part.require("collapse", spread <= opts.collapse_tol);
}
