use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use czkit::config::RunConfig;
use czkit::estimates::{apriori_ratio, g_l2_bound, resolvent_bounds, weak11_check, MixedNormSpec};
use czkit::forcing::Forcing;
use czkit::kernels::{assumption1_sweep, hormander_levels, l1_uniformity, moment_power_law, opnorm_sweep};
use czkit::partitions::{trace_to, Filtration, Gamma};
use czkit::report::{csv_field, format_float};
use czkit::solver::{solve_resolvent, Role};
use czkit::symbols::{default_xi_lattice, verify_conditions, KAPPA_TOLERANCE};
use czkit::{EstimateReport, SpatialGrid};
use log::info;
use serde::Deserialize;

use crate::io::{read_grid_function, write_atomic, write_grid_function};
use crate::{EstimateArgs, KernelArgs, KernelCheck, PartitionArgs, SolveArgs, VerifyArgs};

/// Levels beyond this are far past anything the float side lengths resolve.
const MAX_LEVEL: i64 = 1000;

fn load(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    RunConfig::from_json(&text).with_context(|| format!("config {}", path.display()))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(rep: &EstimateReport) -> String {
    let mut s = rep.to_json();
    s.push('\n');
    s
}

fn check_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn log_outcome(what: &str, rep: &EstimateReport) {
    // Parts sharing one name (per-level detail) are summarized by the total.
    let mut names: Vec<&str> = rep.parts.iter().map(|p| p.check.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    if names.len() == rep.parts.len() {
        for part in &rep.parts {
            info!("{what} {}: {}", part.check, verdict(part.pass));
        }
    }
    info!("{what}: {}", verdict(rep.pass));
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn parse_levels(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s.split_once("..").ok_or_else(|| anyhow!("--levels must look like A..B, got `{s}`"))?;
    let lo: i64 = a.trim().parse().with_context(|| format!("bad level `{a}`"))?;
    let hi: i64 = b.trim().parse().with_context(|| format!("bad level `{b}`"))?;
    if lo > hi {
        bail!("empty level range {lo}..{hi}");
    }
    if lo.abs().max(hi.abs()) > MAX_LEVEL {
        bail!("levels are limited to |m| <= {MAX_LEVEL}");
    }
    Ok((lo, hi))
}

fn trace_csv(gamma: &Gamma, lo: i64, hi: i64) -> String {
    let mut states = Vec::new();
    if lo < 0 {
        states.extend(trace_to(gamma, lo));
    }
    states.extend(trace_to(gamma, hi.max(0)));
    states.retain(|s| (lo..=hi).contains(&s.m));
    states.sort_by_key(|s| s.m);
    states.dedup_by_key(|s| s.m);
    let mut out = String::from("m,E_m,k_step,tau_m,direction\n");
    for s in states {
        let dir = match s.m.signum() {
            1 => "finer",
            -1 => "coarser",
            _ => "origin",
        };
        let k = s.k.map(|k| k.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{k},{},{dir}\n", s.m, s.e, format_float(s.tau(gamma))));
    }
    out
}

fn locate_csv(filt: &Filtration, point: &str, m: i64) -> Result<String> {
    let coords: Vec<f64> = point
        .split(',')
        .map(|c| c.trim().parse::<f64>().with_context(|| format!("bad coordinate `{c}`")))
        .collect::<Result<_>>()?;
    if coords.len() != filt.dim() + 1 {
        bail!("--locate needs t and {} space coordinates, got {} values", filt.dim(), coords.len());
    }
    let cube = filt.locate(coords[0], &coords[1..], m)?;
    let b = filt.bounds(&cube);
    let mut header = vec!["m".to_string(), "i0".into()];
    let mut row = vec![cube.m.to_string(), cube.i0.to_string()];
    for (j, i) in cube.idx.iter().enumerate() {
        header.push(format!("i{}", j + 1));
        row.push(i.to_string());
    }
    header.extend(["t_lo".into(), "t_hi".into()]);
    row.extend([format_float(b.t.0), format_float(b.t.1)]);
    for (j, (lo, hi)) in b.x.iter().enumerate() {
        header.extend([format!("x{}_lo", j + 1), format!("x{}_hi", j + 1)]);
        row.extend([format_float(*lo), format_float(*hi)]);
    }
    Ok(format!("{}\n{}\n", header.join(","), row.join(",")))
}

pub fn partition(a: &PartitionArgs) -> Result<bool> {
    let gamma: Gamma = a.gamma.parse()?;
    let filt = Filtration::new(gamma, a.dim)?;
    let csv = match (&a.locate, a.level) {
        (Some(p), Some(m)) => locate_csv(&filt, p, m)?,
        _ => {
            let levels = a.levels.as_deref().ok_or_else(|| anyhow!("--levels is required without --locate"))?;
            let (lo, hi) = parse_levels(levels)?;
            if a.trace {
                trace_csv(filt.gamma(), lo, hi)
            } else {
                filt.table_csv((lo, hi))
            }
        }
    };
    emit(&a.out, &csv)?;
    Ok(true)
}

/// Column names `(x, measured, fitted-or-bound)` for one sweep's samples.
fn sweep_columns(check: &str) -> (&'static str, &'static str, &'static str) {
    match check {
        "l1" => ("gap", "scaled_l1", "sup_scaled_l1"),
        "opnorm" => ("gap", "l1", "fitted_exponent"),
        "moment" => ("gap", "moment", "fitted_exponent"),
        "hormander_levels" => ("m", "max_total", "envelope"),
        "condition_iii" => ("u", "value", "envelope_exponent"),
        _ => ("u", "value", "fitted_exponent"),
    }
}

fn kernel_outputs(rep: &EstimateReport) -> (String, Vec<(String, String)>) {
    // Only assumption1 splits into independent sweeps; other parts are detail.
    let sweeps: Vec<&EstimateReport> = if rep.check == "assumption1" { rep.parts.iter().collect() } else { vec![rep] };
    let mut rows = String::from("check,params,measured,bound_or_fit,pass\n");
    let mut plots = Vec::new();
    for s in sweeps {
        let (x, y, fit) = sweep_columns(&s.check);
        let fit = s.get(fit).map(format_float).unwrap_or_default();
        let mut plot = format!("{x},{y}\n");
        for sample in &s.samples {
            let (Some(xv), Some(yv)) = (sample.values.get(x), sample.values.get(y)) else { continue };
            rows.push_str(&format!(
                "{},{},{},{fit},{}\n",
                s.check,
                csv_field(&sample.label),
                format_float(*yv),
                s.pass
            ));
            plot.push_str(&format!("{},{}\n", format_float(*xv), format_float(*yv)));
        }
        plots.push((s.check.clone(), plot));
    }
    (rows, plots)
}

pub fn kernel(a: &KernelArgs) -> Result<bool> {
    let cfg = load(&a.config)?;
    let sym = cfg.symbol.build()?;
    let k = &cfg.kernel;
    let s0 = k.s0.unwrap_or(sym.window().0);
    let name = check_name(&a.check);
    let mut rep = match a.check {
        KernelCheck::L1 => l1_uniformity(&sym, s0, &k.gaps, &k.lambdas, &k.slice)?,
        KernelCheck::Opnorm => opnorm_sweep(&sym, s0, &k.gaps, &k.slice, k.opnorm_tol)?,
        KernelCheck::Moment => {
            let grid = SpatialGrid::new(sym.dim(), k.moment_extent, k.moment_points)?;
            let mu = k.mu.unwrap_or(0.5 * sym.gamma());
            moment_power_law(&sym, s0, mu, k.moment_range, &k.gaps, &grid, k.moment_tol)?
        }
        KernelCheck::Hormander => {
            let filt = Filtration::new(k.exact_gamma(&sym)?, sym.dim())?;
            hormander_levels(&sym, &filt, &k.levels, k.pairs, cfg.seed, &k.hormander, k.variation_tol)?
        }
        KernelCheck::Assumption1 => assumption1_sweep(&sym, &k.assumption1)?,
    };
    rep.config = Some(cfg.resolved());
    let (rows, plots) = kernel_outputs(&rep);
    let base = a.out_dir.join(format!("kernel_{name}"));
    write_atomic(&base.with_extension("csv"), rows.as_bytes())?;
    for (sweep, plot) in plots {
        let file = if a.check != KernelCheck::Assumption1 {
            format!("kernel_{name}_plot.csv")
        } else {
            format!("kernel_{name}_{sweep}_plot.csv")
        };
        write_atomic(&a.out_dir.join(file), plot.as_bytes())?;
    }
    write_atomic(&base.with_extension("json"), json_text(&rep).as_bytes())?;
    log_outcome(&format!("kernel {name}"), &rep);
    Ok(rep.pass)
}

/// Reference to a raw grid file; the path is relative to the forcing file.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileForcing {
    file: PathBuf,
}

pub fn solve(a: &SolveArgs) -> Result<bool> {
    let cfg = load(&a.config)?;
    let sym = cfg.symbol.build()?;
    let grid = cfg.grid(&sym)?;
    let text = fs::read_to_string(&a.forcing).with_context(|| format!("reading {}", a.forcing.display()))?;
    let probe: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", a.forcing.display()))?;
    let f = if probe.get("file").is_some() {
        let r: FileForcing = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.forcing.display()))?;
        let path = a.forcing.parent().unwrap_or(Path::new(".")).join(r.file);
        let f = read_grid_function(&path)?;
        if f.grid() != &grid {
            bail!("{}: grid does not match the configured grid", path.display());
        }
        f.with_role(Role::F)
    } else {
        let terms: Forcing = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.forcing.display()))?;
        terms.sample(&grid)?
    };
    let u = solve_resolvent(&sym, &f, a.lambda)?;
    write_grid_function(&a.out, &u, Some(a.lambda), Some(cfg.resolved()))?;
    info!("solve: wrote {} nodes x {} points to {}", grid.node_count(), grid.space().len(), a.out.display());
    Ok(true)
}

/// Copies part samples to the top level with the part name as label prefix.
fn flattened(rep: &EstimateReport) -> EstimateReport {
    let mut flat = rep.clone();
    for part in &rep.parts {
        for s in &part.samples {
            let mut s = s.clone();
            s.label = format!("{}/{}", part.check, s.label);
            flat.samples.push(s);
        }
    }
    flat
}

pub fn estimate(a: &EstimateArgs) -> Result<bool> {
    let mut cfg = load(&a.config)?;
    let est = &mut cfg.estimate;
    est.p = a.p.unwrap_or(est.p);
    est.q = a.q.unwrap_or(est.q);
    est.lambda = a.lambda.unwrap_or(est.lambda);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    let sym = cfg.symbol.build()?;
    let spec = MixedNormSpec::new(cfg.estimate.p, cfg.estimate.q)?;
    let ens = cfg.estimate.ensemble.spec(cfg.seed);
    let name = check_name(&a.check);
    let mut rep = match a.check {
        crate::EstimateCheck::Apriori => apriori_ratio(&sym, &ens, &cfg.grid(&sym)?, cfg.estimate.lambda, &spec)?,
        crate::EstimateCheck::Resolvent => resolvent_bounds(&sym, &ens, &spec, &cfg.estimate.resolvent)?,
        crate::EstimateCheck::Gl2 => g_l2_bound(&sym, &ens, &cfg.grid(&sym)?)?,
        crate::EstimateCheck::Weak11 => {
            let grid = cfg.grid(&sym)?;
            let forcing = cfg.estimate.weak11_forcing(&grid);
            cfg.estimate.forcing = Some(forcing.clone());
            weak11_check(&sym, &forcing, &grid, &cfg.estimate.weak11)?
        }
    };
    rep.config = Some(cfg.resolved());
    let base = a.out_dir.join(format!("estimate_{name}"));
    write_atomic(&base.with_extension("csv"), flattened(&rep).samples_csv().as_bytes())?;
    write_atomic(&base.with_extension("json"), json_text(&rep).as_bytes())?;
    log_outcome(&format!("estimate {name}"), &rep);
    Ok(rep.pass)
}

pub fn verify_symbol(a: &VerifyArgs) -> Result<bool> {
    let cfg = load(&a.config)?;
    let sym = cfg.symbol.build()?;
    let v = &cfg.verify;
    let t = v.t_samples.clone().unwrap_or_else(|| sym.piece_midpoints());
    let xi = v.xi_lattice.clone().unwrap_or_else(|| default_xi_lattice(sym.dim()));
    let cond = verify_conditions(&sym, &t, &xi, v.tolerance.unwrap_or(KAPPA_TOLERANCE))?;
    let mut rep = cond.to_estimate_report();
    rep.config = Some(cfg.resolved());
    let base = a.out_dir.join("verify_symbol");
    write_atomic(&base.with_extension("csv"), cond.to_csv().as_bytes())?;
    write_atomic(&base.with_extension("json"), json_text(&rep).as_bytes())?;
    log_outcome("verify-symbol", &rep);
    Ok(rep.pass)
}
