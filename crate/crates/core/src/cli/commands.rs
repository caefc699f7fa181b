use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use super::output::{Cell, Format, Table};
use super::verify::run_suites;
use super::{CliError, ExperimentConfig, ProcessKind, WALSH_TABLE_MAX_DEPTH};
use crate::error::Error;
use crate::generate::{random_martingale, trial_seed};
use crate::integral::{mrt_roundtrip, random_walk, walk_moment, walk_moment_closed_form, AVERAGING_TOL, EXACT_TOL};
use crate::io;
use crate::martingale::{AdaptedProcess, DiscreteMartingale};
use crate::sde::{weak_expectation, SdeProblem};
use crate::space::{inner_product, wht_forward, wht_inverse, DyadicSpace, WalshMask};

type CmdResult = Result<bool, CliError>;

pub const SDE_PROBLEMS: &[&str] = &["gbm", "ou", "poly"];
const DEFAULT_SDE_DEPTHS: &[u32] = &[6, 8, 10, 12, 14];
const DEFAULT_WALSH_TABLE_DEPTH: u32 = 4;
const DEFAULT_VERIFY_DEPTH: u32 = 12;
const DEFAULT_MRT_TRIALS: usize = 100;

/// `E(walsh(s) · walsh(t))` for every pair of masks, rows and columns in
/// mask-index order.
pub fn walsh_table_matrix(space: DyadicSpace) -> Vec<Vec<f64>> {
    let walsh: Vec<_> = (0..space.size() as u64)
        .map(|b| space.walsh(WalshMask::from_bits(&space, b).expect("mask in range")).expect("valid mask"))
        .collect();
    walsh
        .iter()
        .map(|s| walsh.iter().map(|t| inner_product(s, t).expect("same space")).collect())
        .collect()
}

pub(super) fn walsh_table(cfg: &ExperimentConfig) -> CmdResult {
    let depth = cfg.depth_or(DEFAULT_WALSH_TABLE_DEPTH);
    if depth > WALSH_TABLE_MAX_DEPTH {
        return Err(CliError::Capacity { what: "the full Walsh table", depth, limit: WALSH_TABLE_MAX_DEPTH });
    }
    let space = DyadicSpace::new(depth)?;
    let gram = walsh_table_matrix(space);
    let mut columns = vec!["mask".to_string()];
    columns.extend((0..space.size()).map(|k| k.to_string()));
    let mut table = Table::new("walsh-table", cfg.seed, Some(depth), &columns);
    let mut exact = true;
    for (i, row) in gram.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            exact &= v == if i == j { 1.0 } else { 0.0 };
        }
        let mut cells: Vec<Cell> = vec![i.into()];
        cells.extend(row.iter().map(|&v| Cell::Real(v)));
        table.push(cells);
    }
    table.emit(cfg.out.as_deref(), cfg.format_or(Format::Csv))?;
    if !exact {
        eprintln!("dymart: walsh gram matrix differs from the identity");
    }
    Ok(exact)
}

/// Round trip on `trials` seeded random martingales. Returns the table and
/// the seeds of failing trials.
pub fn mrt_table(cfg: &ExperimentConfig, depth: u32, trials: usize) -> Result<(Table, Vec<u64>), CliError> {
    let space = DyadicSpace::new(depth)?;
    let tol = cfg.tolerance("roundtrip", AVERAGING_TOL);
    let mut table = Table::new(
        "mrt",
        cfg.seed,
        Some(depth),
        &["trial", "seed", "max_error", "predictability_violation", "pass"],
    );
    let mut failed = Vec::new();
    for trial in 0..trials {
        let seed = trial_seed(cfg.seed, trial as u64);
        let report = mrt_roundtrip(&random_martingale(space, seed))?;
        let pass = report.max_error <= tol && report.predictability_violation <= tol;
        if !pass {
            failed.push(seed);
        }
        table.push(vec![
            trial.into(),
            seed.into(),
            report.max_error.into(),
            report.predictability_violation.into(),
            pass.into(),
        ]);
    }
    Ok((table, failed))
}

pub(super) fn mrt(cfg: &ExperimentConfig, input: Option<&Path>) -> CmdResult {
    let format = cfg.format_or(Format::Csv);
    let Some(path) = input else {
        let depth = cfg.depth_or(DEFAULT_VERIFY_DEPTH);
        let trials = cfg.trials.unwrap_or(DEFAULT_MRT_TRIALS);
        let (table, failed) = mrt_table(cfg, depth, trials)?;
        table.emit(cfg.out.as_deref(), format)?;
        for seed in &failed {
            eprintln!("dymart: round trip exceeds tolerance for seed {seed}");
        }
        return Ok(failed.is_empty());
    };

    let slices = match io::read_process(path) {
        Ok(s) => s,
        Err(e @ (Error::Io(_) | Error::Csv(_) | Error::Format { .. } | Error::Capacity { .. })) => {
            return Err(e.into())
        }
        Err(e) => {
            eprintln!("dymart: {}: {e}", path.display());
            return Ok(false);
        }
    };
    let depth = slices.first().map(|s| s.space().depth());
    let tol = cfg.tolerance("roundtrip", AVERAGING_TOL);
    let mut table = Table::new("mrt", cfg.seed, depth, &["input", "check", "violation", "pass"]);
    let name = path.display().to_string();
    let verdict = AdaptedProcess::new(slices).and_then(DiscreteMartingale::new);
    let pass = match verdict {
        Ok(m) => {
            let report = mrt_roundtrip(&m)?;
            let pass = report.max_error <= tol && report.predictability_violation <= tol;
            table.push(vec![name.as_str().into(), "roundtrip".into(), report.max_error.into(), pass.into()]);
            pass
        }
        Err(e) => {
            let (check, violation) = match &e {
                Error::NotAdapted { violation, .. } => ("adapted", *violation),
                Error::NotMartingale { violation, .. } => ("martingale", *violation),
                _ => ("structure", f64::INFINITY),
            };
            eprintln!("dymart: {}: {e}", path.display());
            table.push(vec![name.as_str().into(), check.into(), violation.into(), false.into()]);
            false
        }
    };
    table.emit(cfg.out.as_deref(), format)?;
    Ok(pass)
}

/// `E(χ_n^k)` by enumeration against the closed forms, `k = 1..4`.
pub fn bm_stats_table(cfg: &ExperimentConfig, depths: &[u32]) -> Result<(Table, bool), CliError> {
    let tol = cfg.tolerance("moments", EXACT_TOL);
    let mut table = Table::new(
        "bm-stats",
        cfg.seed,
        None,
        &["depth", "k", "enumerated", "closed_form", "abs_error"],
    );
    let mut pass = true;
    for &depth in depths {
        let space = DyadicSpace::new(depth)?;
        for k in 1..=4u32 {
            let enumerated = walk_moment(space, k as i32);
            let closed = walk_moment_closed_form(depth, k).expect("k <= 4");
            let err = (enumerated - closed).abs();
            pass &= err <= tol;
            table.push(vec![depth.into(), k.into(), enumerated.into(), closed.into(), err.into()]);
        }
    }
    Ok((table, pass))
}

pub(super) fn bm_stats(cfg: &ExperimentConfig, depths: &[u32]) -> CmdResult {
    let depths: Vec<u32> = if !depths.is_empty() {
        depths.to_vec()
    } else if let Some(d) = cfg.depth {
        vec![d]
    } else {
        (1..=12).collect()
    };
    let (table, pass) = bm_stats_table(cfg, &depths)?;
    table.emit(cfg.out.as_deref(), cfg.format_or(Format::Csv))?;
    Ok(pass)
}

fn param(params: &[(String, f64)], allowed: &[&str], name: &str, default: f64) -> Result<f64, CliError> {
    if let Some((bad, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(CliError::Usage(format!(
            "unknown parameter {bad:?}; expected one of {}",
            allowed.join(", ")
        )));
    }
    Ok(params.iter().rev().find(|(k, _)| k == name).map_or(default, |(_, v)| *v))
}

/// Builds a named problem and the exact `E(X_1)` of the continuous SDE when
/// it is known in closed form.
pub fn sde_problem(
    name: &str,
    params: &[(String, f64)],
    drift_coeffs: &[f64],
    diffusion_coeffs: &[f64],
    depth: u32,
) -> Result<(SdeProblem, Option<f64>), CliError> {
    match name {
        "gbm" => {
            let allowed = ["mu", "sigma", "x0"];
            let mu = param(params, &allowed, "mu", 0.05)?;
            let sigma = param(params, &allowed, "sigma", 0.2)?;
            let x0 = param(params, &allowed, "x0", 1.0)?;
            Ok((SdeProblem::gbm(mu, sigma, x0, depth)?, Some(x0 * mu.exp())))
        }
        "ou" => {
            let allowed = ["theta", "mean", "sigma", "x0"];
            let theta = param(params, &allowed, "theta", 1.0)?;
            let mean = param(params, &allowed, "mean", 0.0)?;
            let sigma = param(params, &allowed, "sigma", 0.3)?;
            let x0 = param(params, &allowed, "x0", 1.0)?;
            let reference = mean + (x0 - mean) * (-theta).exp();
            Ok((SdeProblem::ou(theta, mean, sigma, x0, depth)?, Some(reference)))
        }
        "poly" => {
            let x0 = param(params, &["x0"], "x0", 1.0)?;
            // E(X) solves dm/dt = a0 + a1 m when the drift is affine.
            let reference = match drift_coeffs {
                [] => Some(x0),
                [a0] => Some(x0 + a0),
                [a0, a1] if *a1 == 0.0 => Some(x0 + a0),
                [a0, a1] => Some((x0 + a0 / a1) * a1.exp() - a0 / a1),
                _ => None,
            };
            let problem = SdeProblem::polynomial(drift_coeffs.to_vec(), diffusion_coeffs.to_vec(), x0, depth)?;
            Ok((problem, reference))
        }
        other => Err(CliError::Usage(format!(
            "unknown problem {other:?}; available: {}",
            SDE_PROBLEMS.join(", ")
        ))),
    }
}

/// `E(X_n)` at each depth against the continuous-time reference.
pub fn sde_table(cfg: &ExperimentConfig, problem: &SdeProblem, reference: Option<f64>, depths: &[u32]) -> Result<Table, CliError> {
    let mut table = Table::new("sde", cfg.seed, None, &["depth", "estimate", "reference", "error"]);
    for &depth in depths {
        let estimate = weak_expectation(&problem.with_depth(depth)?, |x| x)?;
        let reference = reference.unwrap_or(f64::NAN);
        table.push(vec![
            depth.into(),
            estimate.into(),
            reference.into(),
            (estimate - reference).abs().into(),
        ]);
    }
    Ok(table)
}

pub(super) fn sde(
    cfg: &ExperimentConfig,
    name: &str,
    depths: &[u32],
    params: &[(String, f64)],
    drift_coeffs: &[f64],
    diffusion_coeffs: &[f64],
) -> CmdResult {
    let depths: Vec<u32> = if !depths.is_empty() {
        depths.to_vec()
    } else if let Some(d) = cfg.depth {
        vec![d]
    } else {
        DEFAULT_SDE_DEPTHS.to_vec()
    };
    let first = depths.first().copied().unwrap_or(1);
    let (problem, reference) = sde_problem(name, params, drift_coeffs, diffusion_coeffs, first)?;
    let table = sde_table(cfg, &problem, reference, &depths)?;
    table.emit(cfg.out.as_deref(), cfg.format_or(Format::Csv))?;
    Ok(true)
}

pub(super) fn verify_all(cfg: &ExperimentConfig) -> CmdResult {
    let depth = cfg.depth_or(DEFAULT_VERIFY_DEPTH);
    DyadicSpace::new(depth)?;
    let results = run_suites(cfg, depth);
    let mut table = Table::new(
        "verify-all",
        cfg.seed,
        Some(depth),
        &["suite", "checks", "max_violation", "tolerance", "pass"],
    );
    let mut pass = true;
    for r in &results {
        pass &= r.pass;
        if !r.pass {
            eprintln!("dymart: suite {} failed: {}", r.suite, r.detail);
        }
        table.push(vec![
            r.suite.into(),
            r.checks.into(),
            r.max_violation.into(),
            r.tolerance.into(),
            r.pass.into(),
        ]);
    }
    table.emit(cfg.out.as_deref(), cfg.format_or(Format::Json))?;
    Ok(pass)
}

pub(super) fn generate(cfg: &ExperimentConfig, kind: ProcessKind) -> CmdResult {
    let depth = cfg.depth_or(DEFAULT_VERIFY_DEPTH);
    let space = DyadicSpace::new(depth)?;
    let process = match kind {
        ProcessKind::Walk => random_walk(space).into_process(),
        ProcessKind::Martingale => random_martingale(space, cfg.seed).into_process(),
    };
    let comment = format!("dymart generate seed={} depth={depth}", cfg.seed);
    match cfg.out.as_deref() {
        Some(p) if p.extension().is_some_and(|e| e == "bin") => {
            io::write_process_binary(File::create(p)?, &process)?
        }
        Some(p) => io::write_process_csv(BufWriter::new(File::create(p)?), &process, Some(&comment))?,
        None => io::write_process_csv(BufWriter::new(std::io::stdout().lock()), &process, Some(&comment))?,
    }
    Ok(true)
}

pub(super) fn transform(cfg: &ExperimentConfig, input: &Path, inverse: bool) -> CmdResult {
    let comment = format!(
        "dymart transform {} of {}",
        if inverse { "inverse" } else { "forward" },
        input.display()
    );
    let write = |out: Box<dyn std::io::Write>| -> Result<(), CliError> {
        if inverse {
            let s = io::read_spectrum_csv(input)?;
            io::write_random_variable_csv(out, &wht_inverse(&s), Some(&comment))?;
        } else {
            let f = io::read_random_variable_csv(input)?;
            io::write_spectrum_csv(out, &wht_forward(&f), Some(&comment))?;
        }
        Ok(())
    };
    match cfg.out.as_deref() {
        Some(p) => write(Box::new(BufWriter::new(File::create(p)?)))?,
        None => write(Box::new(BufWriter::new(std::io::stdout().lock())))?,
    }
    Ok(true)
}
