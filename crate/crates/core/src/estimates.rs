//! Mixed norms and seeded ensemble experiments for the solution estimates.
//!
//! None of these checks claim a value for the constants in the estimates;
//! they measure ratios, check their boundedness and stability, and fit
//! scaling exponents in `λ`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::grid::{SpaceTimeGrid, SpatialGrid};
use crate::kernels::{l1_uniformity, SliceGridRule};
use crate::quadrature::loglog_slope;
use crate::report::{EstimateReport, Sample};
use crate::solver::{apply_g, frac_laplacian, solve_resolvent, time_derivative, GridFunction, Role};
use crate::spectral::Spectral;
use crate::symbols::{SymbolKind, SymbolSpec};

/// Slack on the exact contraction bounds, which hold up to roundoff.
pub const CONTRACTION_TOLERANCE: f64 = 1e-6;

/// Exponents of `L_q(R, L_p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedNormSpec {
    pub p: f64,
    pub q: f64,
}

impl MixedNormSpec {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let s = MixedNormSpec { p, q };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(v > 1.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be finite and > 1, got {v}")));
            }
        }
        Ok(())
    }

    /// `(p − 1)/p`.
    pub fn sup_exponent(&self) -> f64 {
        (self.p - 1.0) / self.p
    }
}

/// `(Σ_j Δx^d |v_j|^p)^{1/p}`; `p = 1` is allowed here.
pub fn spatial_norm(values: &[Complex64], p: f64, cell_volume: f64) -> f64 {
    (values.iter().map(|z| z.norm().powf(p)).sum::<f64>() * cell_volume).powf(1.0 / p)
}

fn node_norms(u: &GridFunction, p: f64) -> Vec<f64> {
    let len = u.grid().space().len();
    let dv = u.grid().space().cell_volume();
    u.values().par_chunks(len).map(|c| spatial_norm(c, p, dv)).collect()
}

fn weighted_lq(norms: &[f64], weights: &[f64], q: f64) -> f64 {
    norms.iter().zip(weights).map(|(n, w)| w * n.powf(q)).sum::<f64>().powf(1.0 / q)
}

/// `(Σ_n w_n (Σ_j Δx^d |u(t_n, x_j)|^p)^{q/p})^{1/q}` with the time weights of
/// [`SpaceTimeGrid::time_weights`].
pub fn mixed_norm(u: &GridFunction, spec: &MixedNormSpec) -> f64 {
    weighted_lq(&node_norms(u, spec.p), &u.grid().time_weights(), spec.q)
}

/// Space-time `L1` norm with the same weights.
pub fn space_time_l1(u: &GridFunction) -> f64 {
    weighted_lq(&node_norms(u, 1.0), &u.grid().time_weights(), 1.0)
}

/// Source of random forcing terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// Independent complex Gaussian spectra on every cell.
    GaussianField,
    /// One to three Gaussian bumps, each switched on over a random interval.
    SeparableBumps,
    /// A fixed Gaussian field times a random step function in time.
    TemporalJumps,
}

fn default_band() -> f64 {
    1.0 / 3.0
}

/// Seeded ensemble of forcing terms. Every member is band-limited to
/// wavenumbers `|k| ≤ band · N/2` per axis, vanishes at the first node, and
/// repeats its last cell at the last node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub count: usize,
    pub generator: Generator,
    pub seed: u64,
    #[serde(default = "default_band")]
    pub band: f64,
}

impl EnsembleSpec {
    pub fn new(count: usize, generator: Generator, seed: u64) -> Self {
        EnsembleSpec { count, generator, seed, band: default_band() }
    }

    fn validate(&self, grid: &SpaceTimeGrid) -> Result<()> {
        if self.count == 0 {
            return Err(Error::domain("ensemble is empty"));
        }
        if !(self.band > 0.0 && self.band <= 1.0) {
            return Err(Error::domain(format!("band must lie in (0, 1], got {}", self.band)));
        }
        if grid.node_count() < 3 {
            return Err(Error::domain("ensembles need at least three time nodes"));
        }
        Ok(())
    }

    /// Member `index`; its random stream depends only on `(seed, index)`.
    pub fn member(&self, grid: &SpaceTimeGrid, index: usize) -> Result<GridFunction> {
        self.validate(grid)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let space = grid.space();
        let len = space.len();
        let nodes = grid.node_count();
        let m = nodes - 1;
        let mut values = vec![Complex64::new(0.0, 0.0); nodes * len];
        match self.generator {
            Generator::GaussianField => {
                for n in 1..m {
                    values[n * len..(n + 1) * len].copy_from_slice(&gaussian_field(space, self.band, &mut rng));
                }
            }
            Generator::SeparableBumps => {
                let pts = space.points_list();
                let l = space.extent();
                let terms = rng.random_range(1..=3);
                for _ in 0..terms {
                    let center: Vec<f64> = (0..space.dim()).map(|_| rng.random_range(-0.5..0.5) * l).collect();
                    let width = rng.random_range(4.0 * space.spacing()..l / 8.0);
                    let amp = complex_normal(&mut rng);
                    let a = rng.random_range(1..m);
                    let b = rng.random_range(a + 1..=m);
                    let bump: Vec<f64> = pts
                        .iter()
                        .map(|x| {
                            let r2: f64 = x
                                .iter()
                                .zip(&center)
                                .map(|(p, c)| {
                                    let d = (p - c + 0.5 * l).rem_euclid(l) - 0.5 * l;
                                    d * d
                                })
                                .sum();
                            (-r2 / (2.0 * width * width)).exp()
                        })
                        .collect();
                    for n in a..b {
                        values[n * len..(n + 1) * len].iter_mut().zip(&bump).for_each(|(v, g)| *v += amp * g);
                    }
                }
            }
            Generator::TemporalJumps => {
                let field = gaussian_field(space, self.band, &mut rng);
                let mut level: f64 = rng.sample(StandardNormal);
                let jumps = rng.random_range(2..=6);
                let mut at: Vec<usize> = (0..jumps).map(|_| rng.random_range(1..m)).collect();
                at.sort_unstable();
                for n in 1..m {
                    while at.first() == Some(&n) {
                        level = rng.sample(StandardNormal);
                        at.remove(0);
                    }
                    values[n * len..(n + 1) * len].iter_mut().zip(&field).for_each(|(v, g)| *v = g * level);
                }
            }
        }
        band_limit(space, self.band, &mut values);
        let (head, last) = values.split_at_mut(m * len);
        last.copy_from_slice(&head[(m - 1) * len..]);
        let f = GridFunction::new(grid.clone(), values, Role::F)?;
        if space_time_l1(&f) == 0.0 {
            return Err(Error::domain(format!("ensemble member {index} vanishes; the grid has too few cells")));
        }
        Ok(f)
    }

    pub fn members(&self, grid: &SpaceTimeGrid) -> Result<Vec<GridFunction>> {
        (0..self.count).into_par_iter().map(|i| self.member(grid, i)).collect()
    }
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn in_band(space: &SpatialGrid, band: f64, flat: usize) -> bool {
    let cut = band * space.points() as f64 / 2.0;
    let ax = space.axes(flat);
    ax[..space.dim()].iter().all(|&i| (space.wavenumber(i).abs() as f64) <= cut)
}

fn gaussian_field(space: &SpatialGrid, band: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let len = space.len();
    let mut spec: Vec<Complex64> = (0..len)
        .map(|i| {
            // Draw for every mode so the stream does not depend on the band.
            let z = complex_normal(rng);
            if in_band(space, band, i) {
                z
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Spectral::new(space).inverse_unnormalized(&mut spec);
    let scale = 1.0 / (len as f64).sqrt();
    spec.iter_mut().for_each(|z| *z *= scale);
    spec
}

fn band_limit(space: &SpatialGrid, band: f64, values: &mut [Complex64]) {
    let sp = Spectral::new(space);
    let keep: Vec<bool> = (0..space.len()).map(|i| in_band(space, band, i)).collect();
    values.par_chunks_mut(space.len()).for_each(|c| {
        sp.forward(c);
        c.iter_mut().zip(&keep).for_each(|(z, k)| {
            if !k {
                *z = Complex64::new(0.0, 0.0);
            }
        });
        sp.inverse(c);
    });
}

struct Stats {
    max: f64,
    mean: f64,
    p50: f64,
    p90: f64,
}

fn stats(v: &[f64]) -> Stats {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let at = |q: f64| s[((s.len() - 1) as f64 * q).floor() as usize];
    Stats { max: s[s.len() - 1], mean: s.iter().sum::<f64>() / s.len() as f64, p50: at(0.5), p90: at(0.9) }
}

/// Whether `λ‖R_λ f‖ ≤ ‖f‖` holds exactly on the lattice: every real symbol
/// at `p = q = 2`, and for other exponents only symbols with positive
/// kernels (fractional of order at most 2, Lévy-type) on uniform nodes.
fn contraction_applies(sym: &SymbolSpec, spec: &MixedNormSpec, grid: &SpaceTimeGrid) -> bool {
    if !sym.is_real() || !uniform_nodes(grid) {
        return false;
    }
    let positive =
        matches!(sym.kind(), SymbolKind::Levy) || (sym.kind() == SymbolKind::Fractional && sym.gamma() <= 2.0);
    positive || (spec.p == 2.0 && spec.q == 2.0)
}

fn uniform_nodes(grid: &SpaceTimeGrid) -> bool {
    let w = grid.time_weights();
    w.iter().all(|x| (x - w[0]).abs() <= 1e-12 * w[0])
}

#[derive(Clone, Copy, Debug)]
struct AprioriMember {
    ratio: f64,
    lambda_ratio: f64,
    ut: f64,
    frac: f64,
    f: f64,
}

fn apriori_members(
    sym: &SymbolSpec,
    members: &[GridFunction],
    lambda: f64,
    spec: &MixedNormSpec,
) -> Result<Vec<AprioriMember>> {
    members
        .par_iter()
        .map(|f| {
            let u = solve_resolvent(sym, f, lambda)?;
            let ut = mixed_norm(&time_derivative(sym, &u, f, lambda)?, spec);
            let frac = mixed_norm(&frac_laplacian(&u, sym.gamma())?, spec);
            let lu = if lambda > 0.0 { lambda * mixed_norm(&u, spec) } else { 0.0 };
            let fnorm = mixed_norm(f, spec);
            Ok(AprioriMember { ratio: (ut + frac + lu) / fnorm, lambda_ratio: lu / fnorm, ut, frac, f: fnorm })
        })
        .collect()
}

/// `(‖u_t‖ + ‖(−Δ)^{γ/2}u‖ + λ‖u‖)/‖f‖` in `L_q(L_p)` over the ensemble,
/// with `u = R_λ f` and `u_t` from the exact mode rule. The same ensemble is
/// rerun with the coefficient pieces randomly permuted in time and with the
/// coefficients frozen at the window start; the two maxima must agree within
/// a factor 2.
pub fn apriori_ratio(
    sym: &SymbolSpec,
    ens: &EnsembleSpec,
    grid: &SpaceTimeGrid,
    lambda: f64,
    spec: &MixedNormSpec,
) -> Result<EstimateReport> {
    spec.validate()?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("λ must be finite and nonnegative, got {lambda}")));
    }
    grid.check_alignment(sym)?;
    let members = ens.members(grid)?;
    let base = apriori_members(sym, &members, lambda, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ens.seed);
    rng.set_stream(u64::MAX);
    let permuted = sym.with_permuted_schedule(&mut rng);
    let frozen = sym.frozen_at(sym.window().0)?;
    let perm = apriori_members(&permuted, &members, lambda, spec)?;
    let froz = apriori_members(&frozen, &members, lambda, spec)?;

    let mut rep = EstimateReport::new("apriori");
    for (i, ((b, p), z)) in base.iter().zip(&perm).zip(&froz).enumerate() {
        rep.samples.push(
            Sample::new(format!("member={i}"))
                .with("member", i as f64)
                .with("ratio", b.ratio)
                .with("lambda_ratio", b.lambda_ratio)
                .with("ut_norm", b.ut)
                .with("frac_norm", b.frac)
                .with("f_norm", b.f)
                .with("ratio_permuted", p.ratio)
                .with("ratio_frozen", z.ratio),
        );
    }
    let ratios: Vec<f64> = base.iter().map(|m| m.ratio).collect();
    let st = stats(&ratios);
    let max_lambda = base.iter().map(|m| m.lambda_ratio).fold(0.0, f64::max);
    let max_perm = perm.iter().map(|m| m.ratio).fold(0.0, f64::max);
    let max_froz = froz.iter().map(|m| m.ratio).fold(0.0, f64::max);
    let stability = max_perm / max_froz;
    rep.summary("max_ratio", st.max)
        .summary("mean_ratio", st.mean)
        .summary("median_ratio", st.p50)
        .summary("p90_ratio", st.p90)
        .summary("max_lambda_ratio", max_lambda)
        .summary("max_ratio_permuted", max_perm)
        .summary("max_ratio_frozen", max_froz)
        .summary("stability", stability)
        .summary("lambda", lambda)
        .summary("members", members.len() as f64);
    rep.tolerance("stability_factor", 2.0);
    rep.require("finite", st.max.is_finite() && max_perm.is_finite() && max_froz.is_finite());
    rep.require("stable", (0.5..=2.0).contains(&stability));
    if sym.breakpoints().len() <= 2 {
        rep.note("single-piece schedule: the permuted run repeats the given one");
    }
    if lambda > 0.0 && contraction_applies(sym, spec, grid) {
        rep.tolerance("lambda_contraction", CONTRACTION_TOLERANCE);
        rep.require("lambda_contraction", max_lambda <= 1.0 + CONTRACTION_TOLERANCE);
    } else if lambda > 0.0 {
        rep.note(
            "λ‖u‖ ≤ ‖f‖ is not asserted: it needs a real symbol with a positive kernel (or p = q = 2) on uniform nodes",
        );
    }
    if lambda == 0.0 {
        rep.note("λ = 0: the λ‖u‖ term is dropped and R_0 starts from zero state");
    }
    Ok(rep)
}

/// Grid and sweep settings for [`resolvent_bounds`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolventOptions {
    pub lambdas: Vec<f64>,
    /// Lattice points per axis; `None` picks 256, 64, 16 for `d` = 1, 2, 3.
    pub points: Option<usize>,
    /// Width of the Gaussian profile of the extremal forcing terms.
    pub width: f64,
    /// Lattice extent in units of `width`.
    pub extent_widths: f64,
    pub nodes: usize,
    pub exponent_tol: f64,
}

impl Default for ResolventOptions {
    fn default() -> Self {
        ResolventOptions {
            lambdas: vec![1.0, 2.0, 4.0, 8.0],
            points: None,
            width: 16.0,
            extent_widths: 16.0,
            nodes: 1025,
            exponent_tol: 0.1,
        }
    }
}

impl ResolventOptions {
    /// Lattice for the sweep: it spans the whole schedule window.
    pub fn grid(&self, sym: &SymbolSpec) -> Result<SpaceTimeGrid> {
        let points = self.points.unwrap_or(match sym.dim() {
            1 => 256,
            2 => 64,
            _ => 16,
        });
        let space = SpatialGrid::new(sym.dim(), self.extent_widths * self.width, points)?;
        let (a, b) = sym.window();
        SpaceTimeGrid::aligned(space, a, b, self.nodes, sym)
    }
}

/// Gaussian profile times `h(t_n)` on every cell.
fn separable(grid: &SpaceTimeGrid, width: f64, h: impl Fn(f64) -> f64) -> GridFunction {
    let nodes = grid.nodes();
    let m = nodes.len() - 1;
    let t_m1 = nodes[m - 1];
    GridFunction::from_fn(grid, Role::F, |t, x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let tt = if t >= nodes[m] { t_m1 } else { t };
        Complex64::new((-r2 / (2.0 * width * width)).exp() * h(tt), 0.0)
    })
}

/// The three resolvent bounds and their `λ`-scaling:
///
/// - `‖p_λ(t, s)‖_{L1} e^{λ(t−s)}` independent of `λ`;
/// - `sup_t ‖R_λ f(t)‖_{L_p} / ‖f‖_{L_p(R^{d+1})}` with exponent `−(p−1)/p`;
/// - `‖R_λ f‖_{L_q(L_p)} / ‖f‖_{L_q(L_p)}` with exponent `−1`.
///
/// The exponents are fitted on the envelope over the ensemble together with
/// two near-extremal forcing terms: a slowly varying plateau, which
/// saturates the `L_q(L_p)` bound, and the Hölder extremal profile
/// `e^{−λ(T−t)/(p−1)}`, which saturates the pointwise bound at `t = T`.
/// Both need `λ T ≫ 1`, so the schedule window must be at least `8/λ_min`.
pub fn resolvent_bounds(
    sym: &SymbolSpec,
    ens: &EnsembleSpec,
    spec: &MixedNormSpec,
    opts: &ResolventOptions,
) -> Result<EstimateReport> {
    spec.validate()?;
    if opts.lambdas.len() < 2 || opts.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::domain("resolvent sweep needs at least two positive λ"));
    }
    let lmin = opts.lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let (start, end) = sym.window();
    if end - start < 8.0 / lmin {
        return Err(Error::domain(format!(
            "the schedule window [{start}, {end}] is shorter than 8/λ_min = {}; the extremal profiles cannot develop",
            8.0 / lmin
        )));
    }
    let grid = opts.grid(sym)?;
    let members = ens.members(&grid)?;
    let lp = MixedNormSpec { p: spec.p, q: spec.p };
    let contraction = contraction_applies(sym, spec, &grid);
    let pprime = spec.p / (spec.p - 1.0);

    let mut rep = EstimateReport::new("resolvent");

    // Kernel mass.
    let gaps: Vec<f64> = [1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0].iter().map(|g| g * (end - start)).collect();
    let rule = SliceGridRule {
        points: match sym.dim() {
            1 => 4096,
            2 => 512,
            _ => 64,
        },
        ..SliceGridRule::default()
    };
    let mut kernel = l1_uniformity(sym, start, &gaps, &opts.lambdas, &rule)?;
    kernel.check = "kernel_l1".into();

    let ratios = |f: &GridFunction, lambda: f64| -> Result<(f64, f64)> {
        let u = solve_resolvent(sym, f, lambda)?;
        let sup = node_norms(&u, spec.p).into_iter().fold(0.0, f64::max) / mixed_norm(f, &lp);
        let mixed = mixed_norm(&u, spec) / mixed_norm(f, spec);
        Ok((sup, mixed))
    };

    let mut sup_env = Vec::new();
    let mut mixed_env = Vec::new();
    let mut sup_part = EstimateReport::new("pointwise_lp");
    let mut mixed_part = EstimateReport::new("mixed_norm");
    let mut bound_ok = true;
    for &lambda in &opts.lambdas {
        let plateau = separable(&grid, opts.width, |_| 1.0);
        let holder = separable(&grid, opts.width, |t| (-lambda * (end - t) / (spec.p - 1.0)).exp());
        let member_ratios: Vec<(f64, f64)> = members.par_iter().map(|f| ratios(f, lambda)).collect::<Result<_>>()?;
        let (ps, pm) = ratios(&plateau, lambda)?;
        let (hs, hm) = ratios(&holder, lambda)?;
        let ens_sup = member_ratios.iter().map(|r| r.0).fold(0.0, f64::max);
        let ens_mixed = member_ratios.iter().map(|r| r.1).fold(0.0, f64::max);
        let env_sup = ens_sup.max(ps).max(hs);
        let env_mixed = ens_mixed.max(pm).max(hm);
        let sup_bound = (lambda * pprime).powf(-1.0 / pprime);
        bound_ok &=
            env_sup <= sup_bound * (1.0 + CONTRACTION_TOLERANCE) && env_mixed <= (1.0 + CONTRACTION_TOLERANCE) / lambda;
        sup_env.push(env_sup);
        mixed_env.push(env_mixed);
        sup_part.samples.push(
            Sample::new(format!("lambda={lambda}"))
                .with("lambda", lambda)
                .with("ensemble_max", ens_sup)
                .with("plateau", ps)
                .with("holder", hs)
                .with("envelope", env_sup)
                .with("positive_kernel_bound", sup_bound),
        );
        mixed_part.samples.push(
            Sample::new(format!("lambda={lambda}"))
                .with("lambda", lambda)
                .with("ensemble_max", ens_mixed)
                .with("plateau", pm)
                .with("holder", hm)
                .with("envelope", env_mixed)
                .with("positive_kernel_bound", 1.0 / lambda),
        );
    }
    let fit = |env: &[f64]| loglog_slope(&opts.lambdas, env).unwrap_or(f64::NAN);
    for (part, env, expected) in [(&mut sup_part, &sup_env, -spec.sup_exponent()), (&mut mixed_part, &mixed_env, -1.0)]
    {
        let slope = fit(env);
        part.summary("fitted_exponent", slope).summary("expected_exponent", expected);
        part.tolerance("exponent", opts.exponent_tol);
        part.require("finite", env.iter().all(|v| v.is_finite()));
        part.require("exponent", (slope - expected).abs() <= opts.exponent_tol);
    }
    if contraction {
        rep.tolerance("contraction", CONTRACTION_TOLERANCE);
        rep.require("contraction", bound_ok);
    } else {
        rep.note("the exact positive-kernel bounds are not asserted for this symbol");
    }
    rep.summary("p", spec.p).summary("q", spec.q).summary("members", members.len() as f64);
    rep.summary("sup_exponent", sup_part.get("fitted_exponent").unwrap_or(f64::NAN));
    rep.summary("mixed_exponent", mixed_part.get("fitted_exponent").unwrap_or(f64::NAN));
    rep.summary("kernel_factorization_error", kernel.get("factorization_error").unwrap_or(f64::NAN));
    rep.push_part(kernel);
    rep.push_part(sup_part);
    rep.push_part(mixed_part);
    Ok(rep)
}

/// `‖Gf‖_{L2}/‖f‖_{L2}` over the ensemble. For a real symbol with
/// `−ψ(t, ξ) ≥ c|ξ|^γ` every mode of `G` has time-kernel mass at most `1/c`,
/// so on uniform nodes the ratio is at most `1/c`; for `ψ = −|ξ|^γ` that is 1.
pub fn g_l2_bound(sym: &SymbolSpec, ens: &EnsembleSpec, grid: &SpaceTimeGrid) -> Result<EstimateReport> {
    grid.check_alignment(sym)?;
    let members = ens.members(grid)?;
    let l2 = MixedNormSpec { p: 2.0, q: 2.0 };
    let ratios: Vec<f64> = members
        .par_iter()
        .map(|f| Ok(mixed_norm(&apply_g(sym, f)?, &l2) / mixed_norm(f, &l2)))
        .collect::<Result<_>>()?;
    let mut rep = EstimateReport::new("gl2");
    for (i, r) in ratios.iter().enumerate() {
        rep.samples.push(Sample::new(format!("member={i}")).with("member", i as f64).with("ratio", *r));
    }
    let st = stats(&ratios);
    rep.summary("max_ratio", st.max).summary("mean_ratio", st.mean).summary("members", ratios.len() as f64);
    rep.require("finite", st.max.is_finite());
    if sym.is_real() && uniform_nodes(grid) {
        let (ellip, _) = sym.sphere_constants()?;
        let bound = 1.0 / ellip.value;
        rep.summary("bound", bound).tolerance("bound", CONTRACTION_TOLERANCE);
        rep.require("bounded", st.max <= bound * (1.0 + CONTRACTION_TOLERANCE));
    } else {
        rep.note("no closed-form bound for complex symbols or nonuniform nodes; only finiteness is asserted");
    }
    Ok(rep)
}

/// Options for [`weak11_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Weak11Options {
    /// Absolute levels; `None` uses `max|Gf| · 2^{i/2}`, `i = −40..=4`, from
    /// the coarsest grid.
    pub alphas: Option<Vec<f64>>,
    pub refinements: usize,
    pub tol: f64,
}

impl Default for Weak11Options {
    fn default() -> Self {
        Weak11Options { alphas: None, refinements: 2, tol: 0.2 }
    }
}

/// `α · |{|Gf| > α}|` measured with the time weights and cell volume.
fn level_set(g: &GridFunction, alpha: f64) -> f64 {
    let len = g.grid().space().len();
    let dv = g.grid().space().cell_volume();
    g.values()
        .chunks(len)
        .zip(g.grid().time_weights())
        .map(|(c, w)| c.iter().filter(|z| z.norm() > alpha).count() as f64 * w * dv)
        .sum::<f64>()
        * alpha
}

/// `sup_α α |{|Gf| > α}| / ‖f‖_{L1}` on `grid` and on its 2×, 4×, …
/// refinements; the sup must stay within `tol` of the coarse value.
pub fn weak11_check(
    sym: &SymbolSpec,
    forcing: &Forcing,
    grid: &SpaceTimeGrid,
    opts: &Weak11Options,
) -> Result<EstimateReport> {
    let mut rep = EstimateReport::new("weak11");
    let mut alphas = opts.alphas.clone();
    let mut sups = Vec::new();
    for r in 0..=opts.refinements {
        let g = if r == 0 { grid.clone() } else { grid.refined(1 << r)? };
        g.check_alignment(sym)?;
        let f = forcing.sample(&g)?;
        let gf = apply_g(sym, &f)?;
        let l1 = space_time_l1(&f);
        if l1 == 0.0 {
            return Err(Error::domain("forcing vanishes on the grid"));
        }
        let top = gf.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let levels = alphas.get_or_insert_with(|| (-40..=4).map(|i| top * (i as f64 / 2.0).exp2()).collect()).clone();
        let vals: Vec<f64> = levels.par_iter().map(|&a| level_set(&gf, a) / l1).collect();
        let (best, at) =
            vals.iter().zip(&levels).fold((0.0, f64::NAN), |acc, (v, a)| if *v > acc.0 { (*v, *a) } else { acc });
        for (a, v) in levels.iter().zip(&vals) {
            rep.samples.push(
                Sample::new(format!("refinement={r},alpha={a:e}"))
                    .with("refinement", r as f64)
                    .with("alpha", *a)
                    .with("value", *v),
            );
        }
        rep.summary(&format!("sup_r{r}"), best).summary(&format!("argmax_alpha_r{r}"), at);
        sups.push(best);
    }
    let drift = sups.iter().map(|s| (s / sups[0] - 1.0).abs()).fold(0.0, f64::max);
    rep.summary("sup", sups.iter().copied().fold(0.0, f64::max)).summary("refinement_drift", drift);
    rep.tolerance("refinement_drift", opts.tol);
    rep.require("finite", sups.iter().all(|s| s.is_finite() && *s > 0.0));
    rep.require("grid_stable", drift <= opts.tol);
    Ok(rep)
}
