//! Euler scheme for `dX = a(t, X) dt + b(t, X) dW` on the dyadic grid.
//!
//! The driving noise over step `l` is the walk increment `ω_{l+1}/√n`:
//!
//! ```text
//! X_0 = x0,   X_{l+1} = X_l + a(l/n, X_l)/n + b(l/n, X_l) · ω_{l+1}/√n
//! ```
//!
//! With `a ≡ 0` the solution is a stochastic integral with the predictable
//! integrand `H_l = b(l/n, X_l)`, hence a martingale.

use std::fmt;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integral::AVERAGING_TOL;
use crate::martingale::{martingale_check, AdaptedProcess, MartingaleReport};
use crate::space::{DyadicSpace, RandomVariable};
use crate::sum::pairwise_sum;

/// Coefficient function `(t, x) ↦ value`.
pub type Coefficient = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Largest depth accepted for sampled paths (atom indices are `u64`).
pub const MAX_SAMPLED_DEPTH: u32 = 62;

#[derive(Clone)]
pub struct SdeProblem {
    drift: Coefficient,
    diffusion: Coefficient,
    x0: f64,
    depth: u32,
}

impl fmt::Debug for SdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdeProblem").field("x0", &self.x0).field("depth", &self.depth).finish()
    }
}

impl SdeProblem {
    pub fn new<A, B>(drift: A, diffusion: B, x0: f64, depth: u32) -> Result<Self>
    where
        A: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        if depth == 0 {
            return Err(Error::ZeroDepth(depth));
        }
        if depth > MAX_SAMPLED_DEPTH {
            return Err(Error::Capacity { depth, cap: MAX_SAMPLED_DEPTH });
        }
        if !x0.is_finite() {
            return Err(Error::InvalidArgument(format!("initial state {x0} is not finite")));
        }
        Ok(SdeProblem { drift: Arc::new(drift), diffusion: Arc::new(diffusion), x0, depth })
    }

    /// Geometric Brownian motion: `a = μx`, `b = σx`.
    pub fn gbm(mu: f64, sigma: f64, x0: f64, depth: u32) -> Result<Self> {
        Self::new(move |_, x| mu * x, move |_, x| sigma * x, x0, depth)
    }

    /// Ornstein–Uhlenbeck: `a = θ(μ − x)`, `b = σ`.
    pub fn ou(theta: f64, mean: f64, sigma: f64, x0: f64, depth: u32) -> Result<Self> {
        Self::new(move |_, x| theta * (mean - x), move |_, _| sigma, x0, depth)
    }

    /// Polynomial coefficients in the state: `a(x) = Σ_k drift[k] x^k`,
    /// likewise for `b`.
    pub fn polynomial(drift: Vec<f64>, diffusion: Vec<f64>, x0: f64, depth: u32) -> Result<Self> {
        Self::new(move |_, x| horner(&drift, x), move |_, x| horner(&diffusion, x), x0, depth)
    }

    /// Same coefficients and initial state at another depth.
    pub fn with_depth(&self, depth: u32) -> Result<Self> {
        if depth == 0 {
            return Err(Error::ZeroDepth(depth));
        }
        if depth > MAX_SAMPLED_DEPTH {
            return Err(Error::Capacity { depth, cap: MAX_SAMPLED_DEPTH });
        }
        Ok(SdeProblem { depth, ..self.clone() })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn drift(&self, t: f64, x: f64) -> f64 {
        (self.drift)(t, x)
    }

    pub fn diffusion(&self, t: f64, x: f64) -> f64 {
        (self.diffusion)(t, x)
    }

    /// One Euler step from `x` at step `l` with coin sign `sign`.
    fn step(&self, l: usize, x: f64, sign: f64) -> Result<f64> {
        let n = self.depth as f64;
        let t = l as f64 / n;
        let a = self.drift(t, x);
        if !a.is_finite() {
            return Err(Error::Solver { what: "drift", step: l, time: t, state: x });
        }
        let b = self.diffusion(t, x);
        if !b.is_finite() {
            return Err(Error::Solver { what: "diffusion", step: l, time: t, state: x });
        }
        let next = x + a / n + b * sign / n.sqrt();
        if !next.is_finite() {
            return Err(Error::Solver { what: "state", step: l + 1, time: (l + 1) as f64 / n, state: x });
        }
        Ok(next)
    }
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Paths of the Euler scheme for a subset of atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPaths {
    pub depth: u32,
    /// Atom indices, ascending.
    pub atoms: Vec<u64>,
    /// `paths[i][l]` is `X_l` on `atoms[i]`.
    pub paths: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    /// Every atom; requires the depth to be within the cap.
    Full,
    /// `count` distinct atoms drawn uniformly with a seeded generator.
    Sampled { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Solution {
    Full(AdaptedProcess),
    Sampled(SampledPaths),
}

pub fn euler_solve(p: &SdeProblem, mode: SolveMode) -> Result<Solution> {
    match mode {
        SolveMode::Full => solve_full(p).map(Solution::Full),
        SolveMode::Sampled { count, seed } => solve_sampled(p, count, seed).map(Solution::Sampled),
    }
}

/// Runs the scheme on every atom and returns the whole process.
pub fn solve_full(p: &SdeProblem) -> Result<AdaptedProcess> {
    let space = DyadicSpace::new(p.depth)?;
    let n = p.depth;
    let mut state = vec![p.x0; space.size()];
    let mut slices = Vec::with_capacity(n as usize + 1);
    slices.push(RandomVariable::from_trusted(space, state.clone()));
    for l in 0..n as usize {
        let bit = n - 1 - l as u32;
        for (m, x) in state.iter_mut().enumerate() {
            let sign = if (m >> bit) & 1 == 1 { 1.0 } else { -1.0 };
            *x = p.step(l, *x, sign)?;
        }
        slices.push(RandomVariable::from_trusted(space, state.clone()));
    }
    // X_l depends only on the first l coins.
    AdaptedProcess::structural(slices)
}

/// Runs the scheme along `count` seeded atoms, returned in ascending order.
pub fn solve_sampled(p: &SdeProblem, count: usize, seed: u64) -> Result<SampledPaths> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let n = p.depth;
    let size = 1u64 << n;
    if count as u64 > size {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {count} distinct atoms from {size}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut atoms: Vec<u64> = if count as u64 == size {
        (0..size).collect()
    } else {
        sample(&mut rng, size as usize, count).into_iter().map(|a| a as u64).collect()
    };
    atoms.sort_unstable();
    let paths = atoms
        .iter()
        .map(|&atom| {
            let mut x = p.x0;
            let mut path = Vec::with_capacity(n as usize + 1);
            path.push(x);
            for l in 0..n as usize {
                let sign = if (atom >> (n - 1 - l as u32)) & 1 == 1 { 1.0 } else { -1.0 };
                x = p.step(l, x, sign)?;
                path.push(x);
            }
            Ok(path)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledPaths { depth: n, atoms, paths })
}

/// `E(payoff(X_n))` summed exactly over all `2^n` atoms.
pub fn weak_expectation<F: Fn(f64) -> f64>(p: &SdeProblem, payoff: F) -> Result<f64> {
    let space = DyadicSpace::new(p.depth)?;
    let n = p.depth;
    let mut state = vec![p.x0; space.size()];
    for l in 0..n as usize {
        let bit = n - 1 - l as u32;
        for (m, x) in state.iter_mut().enumerate() {
            let sign = if (m >> bit) & 1 == 1 { 1.0 } else { -1.0 };
            *x = p.step(l, *x, sign)?;
        }
    }
    for (i, x) in state.iter_mut().enumerate() {
        let v = payoff(*x);
        if !v.is_finite() {
            return Err(Error::NonFinite { index: i, value: v });
        }
        *x = v;
    }
    Ok(pairwise_sum(&state) * space.atom_mass())
}

/// Outcome of [`martingale_diagnostic`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Diagnostic {
    /// The drift is nonzero somewhere along the solution.
    NotApplicable { step: usize, time: f64, state: f64, drift: f64 },
    Checked(MartingaleReport),
}

impl Diagnostic {
    pub fn passed(&self) -> bool {
        matches!(self, Diagnostic::Checked(r) if r.pass)
    }
}

/// For driftless problems, checks that the full solution is a martingale.
///
/// The drift is evaluated at every visited `(t, X_l)`; any nonzero value
/// makes the check not applicable.
pub fn martingale_diagnostic(p: &SdeProblem) -> Result<Diagnostic> {
    let solution = solve_full(p)?;
    let n = p.depth as f64;
    for (l, slice) in solution.slices()[..p.depth as usize].iter().enumerate() {
        let t = l as f64 / n;
        if let Some(&x) = slice.values().iter().find(|&&x| p.drift(t, x) != 0.0) {
            return Ok(Diagnostic::NotApplicable { step: l, time: t, state: x, drift: p.drift(t, x) });
        }
    }
    Ok(Diagnostic::Checked(martingale_check(&solution, AVERAGING_TOL)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integral::random_walk;

    #[test]
    fn zero_coefficients_stay_put() {
        let p = SdeProblem::polynomial(vec![], vec![], 1.25, 6).unwrap();
        let sol = solve_full(&p).unwrap();
        assert!(sol.slices().iter().all(|x| x.values().iter().all(|&v| v == 1.25)));
    }

    #[test]
    fn unit_drift_is_forward_euler() {
        let p = SdeProblem::new(|_, _| 1.0, |_, _| 0.0, 0.5, 8).unwrap();
        let sol = solve_full(&p).unwrap();
        let mut expected = 0.5;
        for l in 0..=8 {
            assert!(sol.slice(l).values().iter().all(|&v| v == expected));
            expected += 1.0 / 8.0;
        }
    }

    #[test]
    fn unit_diffusion_is_the_walk() {
        let p = SdeProblem::new(|_, _| 0.0, |_, _| 1.0, 2.0, 7).unwrap();
        let sol = solve_full(&p).unwrap();
        let walk = random_walk(DyadicSpace::new(7).unwrap());
        for l in 0..=7 {
            let shifted = walk.slice(l).map(|v| v + 2.0).unwrap();
            assert!(sol.slice(l).max_abs_diff(&shifted).unwrap() < 1e-14);
        }
    }

    #[test]
    fn gbm_mean_follows_drift_recursion() {
        for n in [1u32, 4, 9] {
            let p = SdeProblem::gbm(0.05, 0.2, 1.0, n).unwrap();
            let e = weak_expectation(&p, |x| x).unwrap();
            assert!((e - (1.0 + 0.05 / n as f64).powi(n as i32)).abs() < 1e-13);
        }
    }

    #[test]
    fn weak_expectation_examples() {
        let p = SdeProblem::gbm(0.1, 0.3, 2.0, 6).unwrap();
        assert_eq!(weak_expectation(&p, |_| 1.0).unwrap(), 1.0);
        let p = SdeProblem::new(|_, _| 0.0, |_, _| 1.0, 0.75, 10).unwrap();
        let e2 = weak_expectation(&p, |x| x * x).unwrap();
        assert!((e2 - (0.75f64 * 0.75 + 1.0)).abs() < 1e-13);
    }

    #[test]
    fn diagnostic_examples() {
        let walk = SdeProblem::new(|_, _| 0.0, |_, _| 1.0, 0.0, 8).unwrap();
        assert!(martingale_diagnostic(&walk).unwrap().passed());
        let geometric = SdeProblem::new(|_, _| 0.0, |_, x| x, 1.0, 10).unwrap();
        assert!(martingale_diagnostic(&geometric).unwrap().passed());
        let drift = SdeProblem::new(|_, _| 1.0, |_, _| 0.0, 0.0, 4).unwrap();
        assert!(matches!(
            martingale_diagnostic(&drift).unwrap(),
            Diagnostic::NotApplicable { step: 0, .. }
        ));
    }

    #[test]
    fn sampled_full_count_equals_enumeration() {
        let p = SdeProblem::gbm(0.05, 0.2, 1.0, 6).unwrap();
        let full = solve_full(&p).unwrap();
        let sampled = solve_sampled(&p, 64, 99).unwrap();
        assert_eq!(sampled.atoms, (0..64).collect::<Vec<_>>());
        for (i, path) in sampled.paths.iter().enumerate() {
            for (l, &x) in path.iter().enumerate() {
                assert_eq!(x.to_bits(), full.slice(l).get(i).to_bits());
            }
        }
    }

    #[test]
    fn sampled_paths_are_reproducible_and_distinct() {
        let p = SdeProblem::ou(1.0, 0.0, 0.5, 1.0, 40).unwrap();
        let a = solve_sampled(&p, 100, 7).unwrap();
        assert_eq!(a, solve_sampled(&p, 100, 7).unwrap());
        assert_ne!(a.atoms, solve_sampled(&p, 100, 8).unwrap().atoms);
        assert!(a.atoms.windows(2).all(|w| w[0] < w[1]));
        assert!(solve_sampled(&p, 0, 7).is_err());
        assert!(matches!(solve_full(&p), Err(Error::Capacity { .. })));
    }

    #[test]
    fn non_finite_coefficients_are_reported() {
        let p = SdeProblem::new(|t, _| if t >= 0.5 { f64::NAN } else { 0.0 }, |_, _| 1.0, 0.0, 4).unwrap();
        match solve_full(&p) {
            Err(Error::Solver { what: "drift", step: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn horner_evaluates_polynomials() {
        assert_eq!(horner(&[1.0, 2.0, 3.0], 2.0), 17.0);
        assert_eq!(horner(&[], 5.0), 0.0);
    }
}
