//! The `verify-all` suites. Each suite reports how many checks it ran and
//! the largest violation seen; it passes when that violation is within its
//! tolerance (overridable with `--tol NAME=VALUE`).

use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::Rng;

use super::ExperimentConfig;
use crate::error::Result;
use crate::filtration::{
    cond_expectation, filtration_basis, is_measurable, spectral_truncate, FiltrationLevel,
};
use crate::generate::{random_integrand, random_martingale, random_variable, rng, trial_seed};
use crate::integral::{
    integral_is_martingale, integral_process, integrand_energy, ito_isometry, mrt_roundtrip,
    random_walk, walk_moment, walk_moment_closed_form, AVERAGING_TOL, EXACT_TOL,
};
use crate::martingale::{
    close_martingale, disjoint_increment_pairs, increment_product_check,
    independent_increments_check, martingale_check, quadratic_variation, represent, QvRange,
};
use crate::sde::{martingale_diagnostic, weak_expectation, Diagnostic, SdeProblem};
use crate::space::{inner_product, wht_forward, DyadicSpace, WalshMask};

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub checks: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Default)]
struct Measured {
    checks: usize,
    violation: f64,
    /// A failure that no tolerance can excuse.
    broken: Option<String>,
}

impl Measured {
    fn record(&mut self, violation: f64) {
        self.checks += 1;
        self.violation = self.violation.max(violation);
    }

    fn fail(&mut self, why: String) {
        self.checks += 1;
        self.broken.get_or_insert(why);
    }
}

fn suite<F>(cfg: &ExperimentConfig, name: &'static str, default_tol: f64, body: F) -> SuiteResult
where
    F: FnOnce() -> Result<Measured>,
{
    let tolerance = cfg.tolerance(name, default_tol);
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let (checks, max_violation, detail) = match outcome {
        Ok(Ok(m)) => {
            let detail = match &m.broken {
                Some(why) => why.clone(),
                None if m.violation > tolerance => {
                    format!("violation {:e} exceeds tolerance {:e}", m.violation, tolerance)
                }
                None => String::new(),
            };
            (m.checks, m.violation, detail)
        }
        Ok(Err(e)) => (0, f64::INFINITY, e.to_string()),
        Err(_) => (0, f64::INFINITY, "suite panicked".to_string()),
    };
    SuiteResult { suite: name, checks, pass: detail.is_empty(), max_violation, tolerance, detail }
}

fn trials(cfg: &ExperimentConfig) -> usize {
    cfg.trials.unwrap_or(100)
}

/// Runs every suite at the given depth.
pub fn run_suites(cfg: &ExperimentConfig, depth: u32) -> Vec<SuiteResult> {
    let space = DyadicSpace::new(depth).expect("depth validated by caller");
    let seed = cfg.seed;
    let t = trials(cfg);
    vec![
        suite(cfg, "walsh_orthonormality", 0.0, || walsh_orthonormality(depth.min(8))),
        suite(cfg, "star_independence", 0.0, || star_independence(depth.min(10), seed)),
        suite(cfg, "filtration_basis", AVERAGING_TOL, || filtration_basis_suite(space, seed)),
        suite(cfg, "spectral_equivalence", AVERAGING_TOL, || spectral_equivalence(space, seed, t)),
        suite(cfg, "tower_law", 0.0, || tower_law(space, seed)),
        suite(cfg, "mrt_roundtrip", AVERAGING_TOL, || roundtrip(space, seed, t)),
        suite(cfg, "integral_martingale", EXACT_TOL, || integral_martingale(space, seed, 2 * t)),
        suite(cfg, "ito_isometry", AVERAGING_TOL, || isometry(space, seed, 2 * t)),
        suite(cfg, "energy_identity", AVERAGING_TOL, || energy_identity(space, seed, t)),
        suite(cfg, "quadratic_variation", EXACT_TOL, || qv(space, seed, cfg.full_range_qv)),
        suite(cfg, "bm_moments", EXACT_TOL, || bm_moments(depth.min(12))),
        suite(cfg, "independent_increments", EXACT_TOL, || independence(depth.min(8))),
        suite(cfg, "sde_weak", EXACT_TOL, || sde_weak(depth.min(14))),
        suite(cfg, "sde_martingale", AVERAGING_TOL, || sde_martingale(depth.min(10))),
    ]
}

fn walsh_orthonormality(depth: u32) -> Result<Measured> {
    let space = DyadicSpace::new(depth)?;
    let walsh = (0..space.size() as u64)
        .map(|b| space.walsh(WalshMask::from_bits(&space, b)?))
        .collect::<Result<Vec<_>>>()?;
    let mut m = Measured::default();
    for (i, s) in walsh.iter().enumerate() {
        for (j, t) in walsh.iter().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            m.record((inner_product(s, t)? - delta).abs());
        }
    }
    Ok(m)
}

fn star_independence(depth: u32, seed: u64) -> Result<Measured> {
    let space = DyadicSpace::new(depth)?;
    let mut rng = rng(seed);
    let mut m = Measured::default();
    for _ in 0..1000 {
        let coins: Vec<u32> = loop {
            let c: Vec<u32> = (1..=depth).filter(|_| rng.gen_bool(0.5)).collect();
            if !c.is_empty() {
                break c;
            }
        };
        let thresholds: Vec<f64> = coins
            .iter()
            .map(|_| {
                if rng.gen_bool(0.5) {
                    [-1.5, -1.0, 0.0, 1.0, 1.5][rng.gen_range(0..5)]
                } else {
                    rng.gen_range(-2.0..2.0)
                }
            })
            .collect();
        let (lhs, rhs) = space.check_star_independence(&coins, &thresholds)?;
        m.record((lhs - rhs).abs());
    }
    Ok(m)
}

fn filtration_basis_suite(space: DyadicSpace, seed: u64) -> Result<Measured> {
    let mut m = Measured::default();
    let f = random_variable(space, seed);
    for l in 0..=space.depth() {
        let level = FiltrationLevel::new(space, l)?;
        let basis = filtration_basis(level);
        if basis.len() != 1 << l {
            m.fail(format!("level {l}: basis has {} elements", basis.len()));
        }
        for mask in basis.iter().take(64) {
            if !is_measurable(&space.walsh(*mask)?, level, 0.0)? {
                m.fail(format!("level {l}: basis element {mask} is not measurable"));
            }
        }
        // A measurable function's spectrum lives on the basis masks.
        let spectrum = wht_forward(&cond_expectation(&f, level)?);
        let mut inside = vec![false; space.size()];
        for mask in &basis {
            inside[mask.index()] = true;
        }
        let outside = spectrum
            .coeffs()
            .iter()
            .zip(&inside)
            .filter(|(_, &keep)| !keep)
            .fold(0.0f64, |acc, (c, _)| acc.max(c.abs()));
        m.record(outside);
    }
    Ok(m)
}

fn spectral_equivalence(space: DyadicSpace, seed: u64, trials: usize) -> Result<Measured> {
    let mut m = Measured::default();
    for t in 0..trials {
        let f = random_variable(space, trial_seed(seed, t as u64));
        for l in 0..=space.depth() {
            let level = FiltrationLevel::new(space, l)?;
            m.record(spectral_truncate(&f, level)?.max_abs_diff(&cond_expectation(&f, level)?)?);
        }
    }
    Ok(m)
}

fn tower_law(space: DyadicSpace, seed: u64) -> Result<Measured> {
    let mut m = Measured::default();
    for t in 0..3 {
        let f = random_variable(space, trial_seed(seed, t));
        let levels: Vec<_> = (0..=space.depth())
            .map(|l| cond_expectation(&f, FiltrationLevel::new(space, l)?))
            .collect::<Result<_>>()?;
        for l in 0..=space.depth() as usize {
            for k in 0..=l {
                let nested = cond_expectation(&levels[l], FiltrationLevel::new(space, k as u32)?)?;
                m.record(nested.max_abs_diff(&levels[k])?);
            }
        }
    }
    Ok(m)
}

fn roundtrip(space: DyadicSpace, seed: u64, trials: usize) -> Result<Measured> {
    let mut m = Measured::default();
    for t in 0..trials {
        let r = mrt_roundtrip(&random_martingale(space, trial_seed(seed, t as u64)))?;
        m.record(r.max_error.max(r.predictability_violation));
    }
    Ok(m)
}

fn integral_martingale(space: DyadicSpace, seed: u64, trials: usize) -> Result<Measured> {
    let mut m = Measured::default();
    for t in 0..trials {
        let r = integral_is_martingale(&random_integrand(space, trial_seed(seed, t as u64)))?;
        m.record(r.max_violation.max(r.adaptedness_violation));
    }
    Ok(m)
}

fn isometry(space: DyadicSpace, seed: u64, trials: usize) -> Result<Measured> {
    let mut m = Measured::default();
    for t in 0..trials {
        let (lhs, rhs) = ito_isometry(&random_integrand(space, trial_seed(seed, t as u64)));
        m.record((lhs - rhs).abs());
    }
    Ok(m)
}

fn energy_identity(space: DyadicSpace, seed: u64, trials: usize) -> Result<Measured> {
    let mut m = Measured::default();
    for t in 0..trials {
        let y = random_martingale(space, trial_seed(seed, t as u64));
        let total = y.process().increment(0, space.depth() as usize).moment(2);
        let rep = represent(&y)?;
        let parts: f64 = rep.coeffs().iter().map(|c| c.moment(2)).sum();
        m.record((total - parts).abs());
        let full = quadratic_variation(y.process(), QvRange::Full).expectation();
        m.record((full - total).abs());
    }
    Ok(m)
}

fn qv(space: DyadicSpace, seed: u64, full_range: bool) -> Result<Measured> {
    let mut m = Measured::default();
    let n = space.depth() as f64;
    let (range, expected) = if full_range {
        (QvRange::Full, 1.0)
    } else {
        (QvRange::Truncated, (n - 1.0) / n)
    };
    let walk_qv = quadratic_variation(random_walk(space).process(), range);
    m.record(walk_qv.max_abs_diff(&space.constant(expected))?);
    m.record(walk_qv.variance());
    for t in 0..10 {
        let h = random_integrand(space, trial_seed(seed, t));
        let qv = quadratic_variation(&integral_process(&h), QvRange::Full);
        m.record(qv.max_abs_diff(&integrand_energy(&h))?);
    }
    Ok(m)
}

fn bm_moments(max_depth: u32) -> Result<Measured> {
    let mut m = Measured::default();
    for n in 1..=max_depth {
        let space = DyadicSpace::new(n)?;
        for k in 1..=4 {
            let closed = walk_moment_closed_form(n, k).expect("k <= 4");
            m.record((walk_moment(space, k as i32) - closed).abs());
        }
    }
    Ok(m)
}

fn independence(depth: u32) -> Result<Measured> {
    let mut m = Measured::default();
    let space = DyadicSpace::new(depth)?;
    let walk = random_walk(space);
    let pairs = disjoint_increment_pairs(depth as usize);
    for &(a, b, c, d) in &pairs {
        let (lhs, rhs) = increment_product_check(walk.process(), a, b, c, d)?;
        m.record((lhs - rhs).abs());
    }
    let report = independent_increments_check(walk.process(), &pairs, 0.0)?;
    m.checks += report.pairs_checked;
    m.violation = m.violation.max(report.max_discrepancy);

    if depth >= 2 {
        // Y_2 = ω1 + (1 + ω1)·ω2 has dependent increments.
        let w1 = space.rademacher(1)?;
        let w2 = space.rademacher(2)?;
        let control = close_martingale(&(&w1 + &(&(&space.constant(1.0) + &w1) * &w2)));
        let r = independent_increments_check(control.process(), &[(0, 1, 1, 2)], EXACT_TOL)?;
        if r.pass {
            m.fail("dependent control martingale was not detected".into());
        } else {
            m.checks += 1;
        }
    }
    Ok(m)
}

fn sde_weak(max_depth: u32) -> Result<Measured> {
    let (mu, sigma, x0) = (0.05, 0.2, 1.0);
    let target = x0 * f64::exp(mu);
    let mut m = Measured::default();
    let mut previous = f64::INFINITY;
    for n in 1..=max_depth {
        let estimate = weak_expectation(&SdeProblem::gbm(mu, sigma, x0, n)?, |x| x)?;
        let recursion = x0 * (1.0 + mu / n as f64).powi(n as i32);
        m.record((estimate - recursion).abs());
        let error = (estimate - target).abs();
        if error >= previous {
            m.fail(format!("weak error did not decrease at depth {n}"));
        }
        previous = error;
    }
    Ok(m)
}

fn sde_martingale(depth: u32) -> Result<Measured> {
    let mut m = Measured::default();
    for p in [
        SdeProblem::new(|_, _| 0.0, |_, _| 1.0, 0.0, depth)?,
        SdeProblem::new(|_, _| 0.0, |_, x| x, 1.0, depth)?,
        SdeProblem::new(|_, _| 0.0, |t, x| 0.3 + t * x.sin(), 0.5, depth)?,
    ] {
        match martingale_diagnostic(&p)? {
            Diagnostic::Checked(r) => m.record(r.max_violation.max(r.adaptedness_violation)),
            Diagnostic::NotApplicable { .. } => m.fail("driftless problem reported as not applicable".into()),
        }
    }
    let walk = random_walk(DyadicSpace::new(depth)?);
    m.record(martingale_check(walk.process(), 0.0)?.max_violation);
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_at_small_depths() {
        let cfg = ExperimentConfig { trials: Some(5), ..Default::default() };
        for depth in 1..=6 {
            for r in run_suites(&cfg, depth) {
                assert!(r.pass, "depth {depth}: {r:?}");
                assert!(r.checks > 0 || depth == 1, "depth {depth}: {r:?}");
            }
        }
    }

    #[test]
    fn zero_tolerance_breaks_rounding_sensitive_suites() {
        let mut cfg = ExperimentConfig { trials: Some(5), ..Default::default() };
        cfg.tolerances.insert("all".into(), 0.0);
        let results = run_suites(&cfg, 8);
        assert!(results.iter().any(|r| !r.pass));
        // exact suites stay green
        for name in ["walsh_orthonormality", "star_independence", "tower_law"] {
            assert!(results.iter().find(|r| r.suite == name).unwrap().pass, "{name}");
        }
    }
}
