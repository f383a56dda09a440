//! End-to-end acceptance suite. Each test prints one line
//! `acceptance <n> (<name>): PASS|FAIL | <measurements> | <runtime>` on stderr,
//! outside the test harness capture. Tests are serialized so the runtimes
//! are not inflated by each other.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use common::{c, mode_trial, random_forcing, schedule};
use czkit::config::KernelConfig;
use czkit::estimates::{
    apriori_ratio, g_l2_bound, mixed_norm, resolvent_bounds, weak11_check, EnsembleSpec, Generator, MixedNormSpec,
    ResolventOptions, Weak11Options,
};
use czkit::forcing::{Forcing, Pulse, Spatial};
use czkit::kernels::{
    assumption1_sweep, hormander_levels, kernel_slice, l1_uniformity, moment_power_law, KernelKind, SliceGridRule,
};
use czkit::partitions::{Filtration, Gamma};
use czkit::solver::{forward_apply, solve_resolvent};
use czkit::symbols::{Piece, SymbolSpec, TimeProfile};
use czkit::{SpaceTimeGrid, SpatialGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

// Pinned tolerances.
const HEAT_L1_TOL: f64 = 1e-6;
const CAUCHY_L1_TOL: f64 = 1e-4;
const FACTORIZATION_TOL: f64 = 1e-12;
const MOMENT_SLOPE_TOL: f64 = 0.05;
const VARIATION_TOL: f64 = 0.25;
const EXPONENT_TOL: f64 = 0.1;
const SOLVER_TOL: f64 = 1e-8;
const CONTRACTION_TOL: f64 = 1e-6;
const STABILITY_FACTOR: f64 = 2.0;

fn run(n: u32, name: &str, budget: Option<Duration>, body: impl FnOnce() -> (bool, String)) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let (ok, detail) = body();
    let elapsed = start.elapsed();
    let in_budget = budget.is_none_or(|b| elapsed <= b);
    let pass = ok && in_budget;
    let timing = match budget {
        Some(b) => format!("{:.2}s of {}s", elapsed.as_secs_f64(), b.as_secs()),
        None => format!("{:.2}s", elapsed.as_secs_f64()),
    };
    let line = format!("acceptance {n} ({name}): {} | {detail} | {timing}\n", if pass { "PASS" } else { "FAIL" });
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(pass, "{line}");
}

fn frac(gamma: f64, t1: f64, a: Complex64) -> SymbolSpec {
    SymbolSpec::fractional(TimeProfile::constant(0.0, t1, a).unwrap(), gamma, 1).unwrap()
}

fn one() -> Complex64 {
    c(1.0, 0.0)
}

fn relative_l1(got: &[Complex64], want: &[f64]) -> f64 {
    got.iter().zip(want).map(|(g, w)| (g - w).norm()).sum::<f64>() / want.iter().map(|w| w.abs()).sum::<f64>()
}

#[test]
fn criterion_1_partition_suite() {
    run(1, "partition suite", Some(Duration::from_secs(1)), || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut violations = Vec::new();
        for gs in ["0.5", "1", "1.5", "2", "pi", "3.7"] {
            let g: Gamma = gs.parse().unwrap();
            let (num, den, fl) = (g.numerator(), g.denominator(), g.floor());
            for d in [1usize, 2] {
                let f = Filtration::new(g.clone(), d).unwrap();
                for m in -12i64..=12 {
                    let tau = f.tau(m);
                    let k = f.step(m);
                    let ratio = f.regularity_ratio(m);
                    // τ_m ∈ [1, 2) is equivalent to E_m = ⌊mγ⌋.
                    let exact_e = (m as i128 * num).div_euclid(den) as i64;
                    if f.e(m) != exact_e || !(1.0..2.0).contains(&tau) {
                        violations.push(format!("γ={gs} m={m}: E={} τ={tau}", f.e(m)));
                    }
                    if (k != fl && k != fl + 1)
                        || ratio != ((d as i64 + k) as f64).exp2()
                        || ratio > ((d as i64 + fl + 1) as f64).exp2()
                    {
                        violations.push(format!("γ={gs} d={d} m={m}: k={k} ratio={ratio}"));
                    }
                    if gs == "2" && f.time_side(m) != 4f64.powi(-m as i32) {
                        violations.push(format!("γ=2 m={m}: time side {}", f.time_side(m)));
                    }
                }
                for _ in 0..10_000 {
                    let m = rng.random_range(-12..12);
                    let t = rng.random_range(-4.0..4.0);
                    let x: Vec<f64> = (0..d).map(|_| rng.random_range(-4.0..4.0)).collect();
                    let q = f.locate(t, &x, m).unwrap();
                    let child = f.locate(t, &x, m + 1).unwrap();
                    let ok = f.bounds(&q).contains(t, &x)
                        && f.bounds(&child).contains(t, &x)
                        && f.parent(&child) == q
                        && f.children(&q).contains(&child)
                        && f.bounds(&q).contains_box(&f.bounds(&child));
                    if !ok {
                        violations.push(format!("γ={gs} d={d} m={m}: point ({t}, {x:?})"));
                    }
                }
            }
        }
        let detail = format!("6 orders x 2 dims x 25 levels, 10^4 points per pair, violations={}", violations.len());
        (
            violations.is_empty(),
            if violations.is_empty() { detail } else { format!("{detail}, first: {}", violations[0]) },
        )
    });
}

#[test]
fn criterion_2_kernel_oracles() {
    run(2, "kernel oracles", Some(Duration::from_secs(5)), || {
        let heat = frac(2.0, 8.0, one());
        let grid = SpatialGrid::new(1, 40.0, 4096).unwrap();
        let k = kernel_slice(&heat, 1.0, 0.0, KernelKind::PLambda(0.0), &grid).unwrap();
        let gauss: Vec<f64> = grid.axis_coords().iter().map(|x| (-x * x / 4.0).exp() / (4.0 * PI).sqrt()).collect();
        let heat_err = relative_l1(&k.values, &gauss);

        // The whole-line Cauchy density needs a box far wider than its tails.
        let cauchy = frac(1.0, 8.0, one());
        let grid = SpatialGrid::new(1, 32768.0, 1 << 18).unwrap();
        let k = kernel_slice(&cauchy, 1.0, 0.0, KernelKind::PLambda(0.0), &grid).unwrap();
        let density: Vec<f64> = grid.axis_coords().iter().map(|x| 1.0 / (PI * (x * x + 1.0))).collect();
        let cauchy_err = relative_l1(&k.values, &density);

        let two_piece = SymbolSpec::fractional(
            TimeProfile::new(vec![
                Piece { t0: 0.0, t1: 0.5, coeff: c(1.0, 0.7) },
                Piece { t0: 0.5, t1: 8.0, coeff: c(2.0, 0.0) },
            ])
            .unwrap(),
            1.5,
            1,
        )
        .unwrap();
        let grid = SpatialGrid::new(1, 40.0, 4096).unwrap();
        let mut factor_err: f64 = 0.0;
        for sym in [&heat, &two_piece] {
            let (s, t) = (0.25, 1.75);
            let p0 = kernel_slice(sym, t, s, KernelKind::PLambda(0.0), &grid).unwrap().l1_norm();
            for lambda in [0.5, 1.0, 4.0] {
                let pl = kernel_slice(sym, t, s, KernelKind::PLambda(lambda), &grid).unwrap().l1_norm();
                let want = (-lambda * (t - s)).exp() * p0;
                factor_err = factor_err.max((pl - want).abs() / want);
            }
        }
        let ok = heat_err <= HEAT_L1_TOL && cauchy_err <= CAUCHY_L1_TOL && factor_err <= FACTORIZATION_TOL;
        (
            ok,
            format!(
                "heat L1 err {heat_err:.2e} (tol {HEAT_L1_TOL:e}), Cauchy L1 err {cauchy_err:.2e} (tol {CAUCHY_L1_TOL:e}), \
                 p_lambda factorization err {factor_err:.2e} (tol {FACTORIZATION_TOL:e})"
            ),
        )
    });
}

#[test]
fn criterion_3_moment_power_law() {
    run(3, "moment power law", Some(Duration::from_secs(30)), || {
        let kc = KernelConfig::default();
        let grid = SpatialGrid::new(1, kc.moment_extent, kc.moment_points).unwrap();
        let mut ok = true;
        let mut slopes = Vec::new();
        for gamma in [1.0, 1.5, 2.0] {
            let sym = frac(gamma, 8.0, one());
            let mu = gamma / 2.0;
            let rep = moment_power_law(&sym, 0.0, mu, kc.moment_range, &kc.gaps, &grid, MOMENT_SLOPE_TOL).unwrap();
            let slope = rep.get("fitted_exponent").unwrap();
            let expected = mu / gamma - 1.0;
            ok &= rep.pass && (slope - expected).abs() <= MOMENT_SLOPE_TOL;
            slopes.push(format!("γ={gamma}: {slope:.4} vs {expected}"));
        }
        (ok, format!("{} (tol {MOMENT_SLOPE_TOL})", slopes.join(", ")))
    });
}

#[test]
fn criterion_4_hormander_and_assumption1() {
    run(4, "Hörmander boundedness", Some(Duration::from_secs(300)), || {
        let kc = KernelConfig::default();
        let mut ok = true;
        let mut parts = Vec::new();
        for gamma in [2.0, 1.5] {
            let sym = frac(gamma, 1e5, one());
            let filt = Filtration::new(kc.exact_gamma(&sym).unwrap(), 1).unwrap();
            let rep = hormander_levels(&sym, &filt, &kc.levels, kc.pairs, 7, &kc.hormander, VARIATION_TOL).unwrap();
            let (env, var) = (rep.get("envelope").unwrap(), rep.get("variation").unwrap());
            ok &= env.is_finite() && rep.get("pass.resolved") != Some(0.0);
            if gamma == 2.0 {
                ok &= var <= VARIATION_TOL;
            }
            parts.push(format!("γ={gamma}: envelope {env:.4}, variation {var:.3}"));
        }
        let sym = frac(1.5, 1e5, one());
        let rep = assumption1_sweep(&sym, &kc.assumption1).unwrap();
        let part = |name: &str| rep.parts.iter().find(|p| p.check == name).unwrap();
        let (c1, c3) = (part("condition_i"), part("condition_iii"));
        let e1 = c1.get("fitted_exponent").unwrap();
        let (e3, mu) = (c3.get("envelope_exponent").unwrap(), c3.get("expected_exponent").unwrap());
        ok &= rep.pass && (e1 - 1.0).abs() <= EXPONENT_TOL && (e3 - mu).abs() <= EXPONENT_TOL;
        parts.push(format!("assumption1 (i) exponent {e1:.4} vs 1, (iii) envelope exponent {e3:.4} vs {mu}"));
        (ok, format!("{} (variation tol {VARIATION_TOL}, exponent tol {EXPONENT_TOL})", parts.join("; ")))
    });
}

#[test]
fn criterion_5_solver_exactness() {
    run(5, "solver exactness", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cut = rng.random_range(0.2..0.8);
        let coeffs = [c(rng.random_range(0.2..3.0), rng.random_range(-2.0..2.0)), c(rng.random_range(0.2..3.0), 0.0)];
        let sym = schedule(1.5, &[cut], &coeffs);
        let grid = SpaceTimeGrid::aligned(SpatialGrid::new(1, 20.0, 256).unwrap(), 0.0, 1.0, 65, &sym).unwrap();
        let f = random_forcing(&grid, 55);
        let mut round_trip: f64 = 0.0;
        for lambda in [0.0, 0.5, 4.0] {
            let back = forward_apply(&sym, &solve_resolvent(&sym, &f, lambda).unwrap(), lambda).unwrap();
            let diff = back.axpy(c(-1.0, 0.0), &f).unwrap();
            for (p, q) in [(2.0, 2.0), (3.0, 1.5)] {
                let spec = MixedNormSpec::new(p, q).unwrap();
                round_trip = round_trip.max(mixed_norm(&diff, &spec) / mixed_norm(&f, &spec));
            }
        }
        let mut modes = ChaCha8Rng::seed_from_u64(2024);
        let mode_err = (0..10).map(|_| mode_trial(&mut modes)).fold(0.0, f64::max);
        (
            round_trip <= SOLVER_TOL && mode_err <= SOLVER_TOL,
            format!(
                "round trip rel err {round_trip:.2e}, 10-mode ODE oracle rel err {mode_err:.2e} (tol {SOLVER_TOL:e})"
            ),
        )
    });
}

#[test]
fn criterion_6_estimate_suite() {
    run(6, "estimate suite", Some(Duration::from_secs(120)), || {
        let mut ok = true;
        let mut parts = Vec::new();
        let grid = SpaceTimeGrid::uniform(SpatialGrid::new(1, 40.0, 1024).unwrap(), 0.0, 1.0, 65).unwrap();

        let a = [1.0, 2.5, 0.6, 1.7];
        let pieces =
            (0..4).map(|i| Piece { t0: i as f64 / 4.0, t1: (i + 1) as f64 / 4.0, coeff: c(a[i], 0.0) }).collect();
        let sched = SymbolSpec::fractional(TimeProfile::new(pieces).unwrap(), 1.5, 1).unwrap();
        let (mut worst_lambda, mut worst_stability): (f64, f64) = (0.0, 1.0);
        for gen in [Generator::GaussianField, Generator::SeparableBumps, Generator::TemporalJumps] {
            for (p, q) in [(2.0, 2.0), (1.5, 3.0)] {
                let rep = apriori_ratio(
                    &sched,
                    &EnsembleSpec::new(32, gen, 11),
                    &grid,
                    1.0,
                    &MixedNormSpec::new(p, q).unwrap(),
                )
                .unwrap();
                let lr = rep.get("max_lambda_ratio").unwrap();
                let st = rep.get("stability").unwrap();
                worst_lambda = worst_lambda.max(lr);
                worst_stability = if (st.ln()).abs() > worst_stability.ln().abs() { st } else { worst_stability };
                ok &= rep.pass
                    && lr <= 1.0 + CONTRACTION_TOL
                    && (1.0 / STABILITY_FACTOR..=STABILITY_FACTOR).contains(&st);
            }
        }
        parts.push(format!(
            "apriori max λ-ratio {worst_lambda:.4}, worst permuted/frozen stability {worst_stability:.3}"
        ));

        let sym = frac(1.5, 16.0, one());
        let ens = EnsembleSpec::new(64, Generator::GaussianField, 3);
        for (p, q) in [(2.0, 2.0), (3.0, 2.0), (1.5, 4.0)] {
            let rep =
                resolvent_bounds(&sym, &ens, &MixedNormSpec::new(p, q).unwrap(), &ResolventOptions::default()).unwrap();
            let mixed = rep.get("mixed_exponent").unwrap();
            let sup = rep.get("sup_exponent").unwrap();
            let want = -(p - 1.0) / p;
            ok &= rep.pass && (mixed + 1.0).abs() <= EXPONENT_TOL && (sup - want).abs() <= EXPONENT_TOL;
            parts.push(format!("resolvent p={p} q={q}: mixed {mixed:.3} vs -1, sup {sup:.3} vs {want:.3}"));
        }

        let mut worst_g: f64 = 0.0;
        for gamma in [1.0, 1.5, 2.0] {
            let rep = g_l2_bound(&frac(gamma, 1.0, one()), &EnsembleSpec::new(64, Generator::GaussianField, 13), &grid)
                .unwrap();
            let r = rep.get("max_ratio").unwrap();
            worst_g = worst_g.max(r);
            ok &= rep.pass && r <= 1.0 + CONTRACTION_TOL;
        }
        parts.push(format!("‖Gf‖/‖f‖ max {worst_g:.4}"));
        (ok, format!("{} (contraction tol {CONTRACTION_TOL:e}, exponent tol {EXPONENT_TOL})", parts.join("; ")))
    });
}

/// Every report this suite can produce cheaply, serialized.
fn report_bytes() -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let f = Filtration::new("pi".parse().unwrap(), 2).unwrap();
    out.push(("partition".into(), f.table_csv((-6, 6)).into_bytes()));

    let heat = frac(2.0, 8.0, one());
    let rule = SliceGridRule { points: 1024, ..SliceGridRule::default() };
    out.push((
        "kernel_l1".into(),
        l1_uniformity(&heat, 0.0, &[0.25, 1.0], &[0.0, 2.0], &rule).unwrap().to_json().into_bytes(),
    ));
    let long = frac(2.0, 1e5, one());
    let kc = KernelConfig::default();
    let filt = Filtration::new("2".parse().unwrap(), 1).unwrap();
    let h = hormander_levels(&long, &filt, &[0], 4, 7, &kc.hormander, VARIATION_TOL).unwrap();
    out.push(("hormander".into(), h.to_json().into_bytes()));

    let sym = schedule(1.5, &[0.5], &[c(1.0, 0.3), c(2.0, 0.0)]);
    let grid = SpaceTimeGrid::aligned(SpatialGrid::new(1, 20.0, 256).unwrap(), 0.0, 1.0, 17, &sym).unwrap();
    let u = solve_resolvent(&sym, &random_forcing(&grid, 9), 1.0).unwrap();
    out.push((
        "solve".into(),
        u.values().iter().flat_map(|z| [z.re.to_le_bytes(), z.im.to_le_bytes()]).flatten().collect(),
    ));

    let spec = MixedNormSpec::new(1.5, 3.0).unwrap();
    let ens = EnsembleSpec::new(8, Generator::SeparableBumps, 21);
    out.push(("apriori".into(), apriori_ratio(&sym, &ens, &grid, 2.0, &spec).unwrap().to_json().into_bytes()));
    out.push(("gl2".into(), g_l2_bound(&frac(1.5, 1.0, one()), &ens, &grid).unwrap().to_json().into_bytes()));
    let opts = ResolventOptions { nodes: 129, points: Some(64), ..ResolventOptions::default() };
    let r = resolvent_bounds(&frac(1.5, 16.0, one()), &EnsembleSpec::new(4, Generator::GaussianField, 3), &spec, &opts)
        .unwrap();
    out.push(("resolvent".into(), r.to_json().into_bytes()));
    let bump = Forcing::single(
        Spatial::Bump { center: vec![0.0], width: 0.2, normalized: true },
        vec![Pulse { t0: 0.0, t1: 0.25, value: one() }],
    );
    let w = weak11_check(&frac(1.5, 1.0, one()), &bump, &grid, &Weak11Options::default()).unwrap();
    out.push(("weak11".into(), w.to_json().into_bytes()));
    out
}

#[test]
fn criterion_7_determinism() {
    run(7, "determinism", None, || {
        let runs: Vec<Vec<(String, Vec<u8>)>> = [1usize, 4, 4]
            .iter()
            .map(|&n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(report_bytes))
            .collect();
        let mismatched: Vec<&str> = runs[0]
            .iter()
            .enumerate()
            .filter(|(i, (_, bytes))| runs[1..].iter().any(|r| &r[*i].1 != bytes))
            .map(|(_, (name, _))| name.as_str())
            .collect();
        (
            mismatched.is_empty(),
            format!("{} reports x runs on 1, 4, 4 threads, mismatched: {:?}", runs[0].len(), mismatched),
        )
    });
}
