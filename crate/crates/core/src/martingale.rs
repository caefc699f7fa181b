//! Adapted processes, discrete martingales and their representation as sums
//! of predictable coefficients times coin flips.
//!
//! A process on a depth-`n` space has `n + 1` slices `Y_0, …, Y_n`; slice `l`
//! must be measurable with respect to the first `l` coins. For a martingale
//! the increment `Y_j − Y_{j−1}` is `c_j · ω_j` with `c_j` depending only on
//! the first `j − 1` coins, and because `ω_j² = 1` the coefficient is read
//! off by multiplying the increment by `ω_j`.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtration::{
    cond_expectation, cond_expectation_at, measurability_violation, FiltrationLevel,
    MEASURABILITY_TOL,
};
use crate::space::{same_space, DyadicSpace, RandomVariable};

/// Tolerance used when a [`DiscreteMartingale`] is constructed.
pub const MARTINGALE_TOL: f64 = 1e-10;

/// Values closer than this are treated as the same outcome when building
/// joint distributions of increments.
pub const OUTCOME_MERGE_TOL: f64 = 1e-9;

/// A time-indexed family `Y_0, …, Y_n` with `Y_l` measurable at level `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedProcess {
    space: DyadicSpace,
    slices: Vec<RandomVariable>,
}

impl AdaptedProcess {
    /// Validates the slice count, the spaces and adaptedness (to
    /// [`MEASURABILITY_TOL`]).
    pub fn new(slices: Vec<RandomVariable>) -> Result<Self> {
        Self::with_tolerance(slices, MEASURABILITY_TOL)
    }

    pub fn with_tolerance(slices: Vec<RandomVariable>, tol: f64) -> Result<Self> {
        let process = Self::structural(slices)?;
        for (time, y) in process.slices.iter().enumerate() {
            let violation = measurability_violation(y, process.level(time))?;
            if violation > tol {
                return Err(Error::NotAdapted { time, violation });
            }
        }
        Ok(process)
    }

    /// Slice count and space checks only. Used by constructions that are
    /// adapted by their form.
    pub(crate) fn structural(slices: Vec<RandomVariable>) -> Result<Self> {
        let first = slices.first().ok_or(Error::SliceCount { expected: 2, found: 0 })?;
        let space = first.space();
        let expected = space.depth() as usize + 1;
        if slices.len() != expected {
            return Err(Error::SliceCount { expected, found: slices.len() });
        }
        for y in &slices[1..] {
            same_space(first, y)?;
        }
        Ok(AdaptedProcess { space, slices })
    }

    pub fn space(&self) -> DyadicSpace {
        self.space
    }

    /// Number of steps `n`; there are `n + 1` slices.
    pub fn steps(&self) -> usize {
        self.slices.len() - 1
    }

    pub fn slices(&self) -> &[RandomVariable] {
        &self.slices
    }

    pub fn slice(&self, time: usize) -> &RandomVariable {
        &self.slices[time]
    }

    pub fn into_slices(self) -> Vec<RandomVariable> {
        self.slices
    }

    /// `Y_b − Y_a`.
    pub fn increment(&self, a: usize, b: usize) -> RandomVariable {
        &self.slices[b] - &self.slices[a]
    }

    /// Largest pointwise difference between two processes over all slices.
    pub fn max_abs_diff(&self, other: &AdaptedProcess) -> Result<f64> {
        if self.slices.len() != other.slices.len() {
            return Err(Error::SliceCount { expected: self.slices.len(), found: other.slices.len() });
        }
        self.slices
            .iter()
            .zip(&other.slices)
            .try_fold(0.0f64, |m, (a, b)| Ok(m.max(a.max_abs_diff(b)?)))
    }

    fn level(&self, time: usize) -> FiltrationLevel {
        FiltrationLevel::new(self.space, time as u32).expect("time within depth")
    }
}

/// Outcome of [`martingale_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleReport {
    pub tolerance: f64,
    pub adapted: bool,
    /// Largest within-cell spread of any slice at its own level.
    pub adaptedness_violation: f64,
    /// `max_m |E(Y_{l+1} | C^l)(m) − Y_l(m)|` for each step `l`.
    pub step_violations: Vec<f64>,
    pub max_violation: f64,
    /// First step whose violation is the maximum, if any step exceeds the
    /// tolerance.
    pub worst_step: Option<usize>,
    pub pass: bool,
}

/// Checks adaptedness and the one-step martingale property
/// `E(Y_{l+1} | C^l) = Y_l` for every `l`; the tower law extends it to all
/// pairs of times.
pub fn martingale_check(y: &AdaptedProcess, tol: f64) -> Result<MartingaleReport> {
    let mut adaptedness_violation = 0.0f64;
    for (time, slice) in y.slices.iter().enumerate() {
        adaptedness_violation = adaptedness_violation.max(measurability_violation(slice, y.level(time))?);
    }
    let step_violations = (0..y.steps())
        .map(|l| cond_expectation(&y.slices[l + 1], y.level(l))?.max_abs_diff(&y.slices[l]))
        .collect::<Result<Vec<f64>>>()?;
    let max_violation = step_violations.iter().copied().fold(0.0, f64::max);
    let worst_step = if max_violation > tol {
        step_violations.iter().position(|&v| v == max_violation)
    } else {
        None
    };
    let adapted = adaptedness_violation <= tol;
    Ok(MartingaleReport {
        tolerance: tol,
        adapted,
        adaptedness_violation,
        pass: adapted && max_violation <= tol,
        step_violations,
        max_violation,
        worst_step,
    })
}

/// An adapted process that passed [`martingale_check`] at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMartingale {
    process: AdaptedProcess,
}

impl DiscreteMartingale {
    pub fn new(process: AdaptedProcess) -> Result<Self> {
        Self::with_tolerance(process, MARTINGALE_TOL)
    }

    pub fn with_tolerance(process: AdaptedProcess, tol: f64) -> Result<Self> {
        let report = martingale_check(&process, tol)?;
        if !report.adapted {
            let (time, violation) = process
                .slices
                .iter()
                .enumerate()
                .map(|(t, s)| (t, measurability_violation(s, process.level(t)).unwrap_or(f64::INFINITY)))
                .find(|(_, v)| *v > tol)
                .expect("some slice is not adapted");
            return Err(Error::NotAdapted { time, violation });
        }
        if let Some(step) = report.worst_step {
            return Err(Error::NotMartingale { step, violation: report.max_violation });
        }
        Ok(DiscreteMartingale { process })
    }

    pub fn process(&self) -> &AdaptedProcess {
        &self.process
    }

    pub fn into_process(self) -> AdaptedProcess {
        self.process
    }

    pub fn space(&self) -> DyadicSpace {
        self.process.space
    }

    pub fn terminal(&self) -> &RandomVariable {
        self.process.slices.last().expect("nonempty")
    }
}

impl AsRef<AdaptedProcess> for DiscreteMartingale {
    fn as_ref(&self) -> &AdaptedProcess {
        &self.process
    }
}

/// The martingale `Y_l = E(terminal | C^l)` closed by `terminal`.
pub fn close_martingale(terminal: &RandomVariable) -> DiscreteMartingale {
    let n = terminal.space().depth();
    let slices = (0..=n)
        .map(|l| cond_expectation_at(terminal, l).expect("level within depth"))
        .collect();
    let process = AdaptedProcess::structural(slices).expect("one slice per level");
    DiscreteMartingale { process }
}

/// Coefficients `c_1, …, c_n` with `Y_l = Y_0 + Σ_{j≤l} c_j ω_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    initial: f64,
    coeffs: Vec<RandomVariable>,
}

impl Representation {
    /// The constant `Y_0`.
    pub fn initial(&self) -> f64 {
        self.initial
    }

    /// `c_j` for `1 ≤ j ≤ n`.
    pub fn coeff(&self, j: usize) -> &RandomVariable {
        assert!(j >= 1 && j <= self.coeffs.len(), "coefficient index {j} out of range");
        &self.coeffs[j - 1]
    }

    /// `c_1, …, c_n` in order.
    pub fn coeffs(&self) -> &[RandomVariable] {
        &self.coeffs
    }

    /// Rebuilds `Y_0, …, Y_n` from the coefficients.
    pub fn reconstruct(&self, space: DyadicSpace) -> Result<Vec<RandomVariable>> {
        let mut slices = Vec::with_capacity(self.coeffs.len() + 1);
        let mut acc = space.constant(self.initial);
        slices.push(acc.clone());
        for (i, c) in self.coeffs.iter().enumerate() {
            let omega = space.rademacher(i as u32 + 1)?;
            acc = &acc + &(c * &omega);
            slices.push(acc.clone());
        }
        Ok(slices)
    }

    /// Largest deviation of each `c_j` from being `C^{j−1}`-measurable.
    pub fn predictability_violation(&self) -> Result<f64> {
        self.coeffs.iter().enumerate().try_fold(0.0f64, |m, (i, c)| {
            let level = FiltrationLevel::new(c.space(), i as u32)?;
            Ok(m.max(measurability_violation(c, level)?))
        })
    }
}

/// Extracts `c_j = (Y_j − Y_{j−1}) · ω_j` by pointwise differencing.
pub fn represent(y: &DiscreteMartingale) -> Result<Representation> {
    let space = y.space();
    let slices = y.process.slices();
    let coeffs = (1..slices.len())
        .map(|j| {
            let omega = space.rademacher(j as u32)?;
            Ok(&(&slices[j] - &slices[j - 1]) * &omega)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Representation { initial: slices[0].get(0), coeffs })
}

/// Extracts `c_j = E(Y_n ω_j | C^{j−1})` by projection. Agrees with
/// [`represent`] up to rounding; kept as an independent route.
pub fn represent_by_projection(y: &DiscreteMartingale) -> Result<Representation> {
    let space = y.space();
    let terminal = y.terminal();
    let coeffs = (1..=space.depth())
        .map(|j| {
            let omega = space.rademacher(j)?;
            cond_expectation_at(&(terminal * &omega), j - 1)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Representation { initial: y.process.slices[0].get(0), coeffs })
}

/// A family `H_0, …, H_{n−1}` with `H_j` measurable at level `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictableIntegrand {
    space: DyadicSpace,
    slices: Vec<RandomVariable>,
}

impl PredictableIntegrand {
    pub fn new(slices: Vec<RandomVariable>) -> Result<Self> {
        Self::with_tolerance(slices, MEASURABILITY_TOL)
    }

    pub fn with_tolerance(slices: Vec<RandomVariable>, tol: f64) -> Result<Self> {
        let first = slices.first().ok_or(Error::SliceCount { expected: 1, found: 0 })?;
        let space = first.space();
        let expected = space.depth() as usize;
        if slices.len() != expected {
            return Err(Error::SliceCount { expected, found: slices.len() });
        }
        for (j, h) in slices.iter().enumerate() {
            same_space(first, h)?;
            let violation = measurability_violation(h, FiltrationLevel::new(space, j as u32)?)?;
            if violation > tol {
                return Err(Error::NotPredictable { slice: j, violation });
            }
        }
        Ok(PredictableIntegrand { space, slices })
    }

    /// `H_j ≡ c` for every `j`.
    pub fn constant(space: DyadicSpace, c: f64) -> Self {
        PredictableIntegrand {
            space,
            slices: vec![space.constant(c); space.depth() as usize],
        }
    }

    pub fn space(&self) -> DyadicSpace {
        self.space
    }

    pub fn slices(&self) -> &[RandomVariable] {
        &self.slices
    }

    pub fn slice(&self, j: usize) -> &RandomVariable {
        &self.slices[j]
    }

    /// Pointwise `a·H + b·G`.
    pub fn combine(&self, a: f64, other: &PredictableIntegrand, b: f64) -> Result<Self> {
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(h, g)| h.zip_with(g, |x, y| a * x + b * y))
            .collect::<Result<Vec<_>>>()?;
        Ok(PredictableIntegrand { space: self.space, slices })
    }
}

/// `H_j = √n · c_{j+1}`, the integrand against the scaled walk.
pub fn integrand(y: &DiscreteMartingale) -> Result<PredictableIntegrand> {
    let rep = represent(y)?;
    let root_n = (y.space().depth() as f64).sqrt();
    let slices = rep.coeffs.iter().map(|c| c.scale(root_n)).collect();
    PredictableIntegrand::new(slices)
}

/// Which squared increments enter the quadratic variation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QvRange {
    /// Steps `j = 0, …, n − 2`, omitting the final increment.
    #[default]
    Truncated,
    /// Steps `j = 0, …, n − 1`.
    Full,
}

/// Pathwise `Σ_j (Y_{j+1} − Y_j)²`.
pub fn quadratic_variation(y: &AdaptedProcess, range: QvRange) -> RandomVariable {
    let n = y.steps();
    let last = match range {
        QvRange::Truncated => n.saturating_sub(1),
        QvRange::Full => n,
    };
    let mut acc = y.space.zeros();
    for j in 0..last {
        let d = y.increment(j, j + 1);
        acc = &acc + &(&d * &d);
    }
    acc
}

fn check_increment_order(y: &AdaptedProcess, a: usize, b: usize, c: usize, d: usize) -> Result<()> {
    if !(a < b && b <= c && c < d && d <= y.steps()) {
        return Err(Error::IncrementOrder { a, b, c, d, depth: y.space.depth() });
    }
    Ok(())
}

/// `(E(ΔU² ΔV²), E(ΔU²) E(ΔV²))` for `ΔU = Y_b − Y_a` and `ΔV = Y_d − Y_c`.
pub fn increment_product_check(
    y: &AdaptedProcess,
    a: usize,
    b: usize,
    c: usize,
    d: usize,
) -> Result<(f64, f64)> {
    check_increment_order(y, a, b, c, d)?;
    let u2 = {
        let u = y.increment(a, b);
        &u * &u
    };
    let v2 = {
        let v = y.increment(c, d);
        &v * &v
    };
    let lhs = (&u2 * &v2).expectation();
    let rhs = u2.expectation() * v2.expectation();
    Ok((lhs, rhs))
}

/// One increment pair `(a, b, c, d)`: `Y_b − Y_a` against `Y_d − Y_c`.
pub type IncrementPair = (usize, usize, usize, usize);

/// Outcome of [`independent_increments_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub pairs_checked: usize,
    pub tolerance: f64,
    /// Total-variation distance between the joint law and the product of
    /// marginals, per pair.
    pub discrepancies: Vec<f64>,
    pub max_discrepancy: f64,
    pub worst_pair: Option<IncrementPair>,
    pub pass: bool,
}

/// Labels each atom by the outcome of `x`, merging values within `tol`.
fn outcome_labels(x: &RandomVariable, tol: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.values().len()).collect();
    order.sort_by(|&i, &j| x.get(i).total_cmp(&x.get(j)));
    let mut labels = vec![0; order.len()];
    let mut label = 0;
    let mut anchor = x.get(order[0]);
    for &i in &order {
        if x.get(i) - anchor > tol {
            label += 1;
            anchor = x.get(i);
        }
        labels[i] = label;
    }
    labels
}

/// Total-variation distance between the joint law of `(u, v)` and the
/// product of their marginals, computed exactly from atom counts.
pub fn independence_discrepancy(u: &RandomVariable, v: &RandomVariable) -> Result<f64> {
    same_space(u, v)?;
    let lu = outcome_labels(u, OUTCOME_MERGE_TOL);
    let lv = outcome_labels(v, OUTCOME_MERGE_TOL);
    let nu = lu.iter().max().map_or(0, |m| m + 1);
    let nv = lv.iter().max().map_or(0, |m| m + 1);
    let mut cu = vec![0u128; nu];
    let mut cv = vec![0u128; nv];
    let mut joint: HashMap<(usize, usize), u128> = HashMap::new();
    for (&a, &b) in lu.iter().zip(&lv) {
        cu[a] += 1;
        cv[b] += 1;
        *joint.entry((a, b)).or_default() += 1;
    }
    let total = lu.len() as u128;
    // 2·TV·N² = Σ_{a,b} |N·c_ab − c_a·c_b|, all in integers.
    let mut twice_tv_scaled: u128 = 0;
    for (a, &ca) in cu.iter().enumerate() {
        for (b, &cb) in cv.iter().enumerate() {
            let cab = joint.get(&(a, b)).copied().unwrap_or(0);
            twice_tv_scaled += (total * cab).abs_diff(ca * cb);
        }
    }
    Ok(twice_tv_scaled as f64 / (2.0 * (total * total) as f64))
}

/// Compares, for every listed pair of disjoint increments, the joint
/// distribution over atoms with the product of the marginals.
pub fn independent_increments_check(
    y: &AdaptedProcess,
    pairs: &[IncrementPair],
    tol: f64,
) -> Result<IndependenceReport> {
    let mut discrepancies = Vec::with_capacity(pairs.len());
    for &(a, b, c, d) in pairs {
        check_increment_order(y, a, b, c, d)?;
        discrepancies.push(independence_discrepancy(&y.increment(a, b), &y.increment(c, d))?);
    }
    let max_discrepancy = discrepancies.iter().copied().fold(0.0, f64::max);
    let worst_pair = discrepancies
        .iter()
        .position(|&v| v > tol && v == max_discrepancy)
        .map(|i| pairs[i]);
    Ok(IndependenceReport {
        pairs_checked: pairs.len(),
        tolerance: tol,
        pass: worst_pair.is_none(),
        discrepancies,
        max_discrepancy,
        worst_pair,
    })
}

/// Every `(a, b, c, d)` with `0 ≤ a < b ≤ c < d ≤ steps`.
pub fn disjoint_increment_pairs(steps: usize) -> Vec<IncrementPair> {
    let mut pairs = Vec::new();
    for a in 0..=steps {
        for b in a + 1..=steps {
            for c in b..=steps {
                for d in c + 1..=steps {
                    pairs.push((a, b, c, d));
                }
            }
        }
    }
    pairs
}

/// Single-step pairs `(j, j+1, k, k+1)` with `j < k`.
pub fn single_step_pairs(steps: usize) -> Vec<IncrementPair> {
    let mut pairs = Vec::new();
    for j in 0..steps {
        for k in j + 1..steps {
            pairs.push((j, j + 1, k, k + 1));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::WalshMask;

    fn space(n: u32) -> DyadicSpace {
        DyadicSpace::new(n).unwrap()
    }

    fn constant_process(s: DyadicSpace, c: f64) -> AdaptedProcess {
        AdaptedProcess::new(vec![s.constant(c); s.depth() as usize + 1]).unwrap()
    }

    fn walk(s: DyadicSpace) -> AdaptedProcess {
        let scale = s.step_scale();
        let mut acc = s.zeros();
        let mut slices = vec![acc.clone()];
        for j in 1..=s.depth() {
            acc = &acc + &s.rademacher(j).unwrap().scale(scale);
            slices.push(acc.clone());
        }
        AdaptedProcess::new(slices).unwrap()
    }

    #[test]
    fn structural_errors() {
        let s = space(3);
        assert!(matches!(
            AdaptedProcess::new(vec![s.zeros(); 3]),
            Err(Error::SliceCount { expected: 4, found: 3 })
        ));
        let mut slices = vec![s.zeros(); 4];
        slices[1] = s.rademacher(2).unwrap();
        assert!(matches!(AdaptedProcess::new(slices), Err(Error::NotAdapted { time: 1, .. })));
    }

    #[test]
    fn martingale_check_examples() {
        let s = space(5);
        let r = martingale_check(&constant_process(s, 2.0), 1e-12).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_violation, 0.0);

        assert!(martingale_check(&walk(s), 1e-12).unwrap().pass);

        let n = 5.0;
        let drift: Vec<_> = (0..=5).map(|l| s.constant(l as f64 / n)).collect();
        let r = martingale_check(&AdaptedProcess::new(drift).unwrap(), 1e-12).unwrap();
        assert!(!r.pass);
        assert!(r.adapted);
        for v in &r.step_violations {
            assert!((v - 1.0 / n).abs() < 1e-15);
        }
        assert_eq!(r.worst_step.map(|s| s < 5), Some(true));
    }

    #[test]
    fn close_martingale_of_single_coin() {
        let s = space(6);
        for k in 1..=6u32 {
            let m = close_martingale(&s.rademacher(k).unwrap());
            for l in 0..=6u32 {
                let expected = if l < k { s.zeros() } else { s.rademacher(k).unwrap() };
                assert_eq!(m.process().slice(l as usize), &expected);
            }
            let rep = represent(&m).unwrap();
            for j in 1..=6 {
                let expected = if j == k as usize { 1.0 } else { 0.0 };
                assert_eq!(rep.coeff(j), &s.constant(expected));
            }
            let h = integrand(&m).unwrap();
            for j in 0..6 {
                let expected = if j + 1 == k as usize { 6f64.sqrt() } else { 0.0 };
                assert_eq!(h.slice(j), &s.constant(expected));
            }
        }
    }

    #[test]
    fn constant_martingale_representation() {
        let s = space(4);
        let m = close_martingale(&s.constant(-1.5));
        assert!(m.process().slices().iter().all(|y| y == &s.constant(-1.5)));
        let rep = represent(&m).unwrap();
        assert_eq!(rep.initial(), -1.5);
        assert!(rep.coeffs().iter().all(|c| c.max_abs() == 0.0));
        assert!(integrand(&m).unwrap().slices().iter().all(|h| h.max_abs() == 0.0));
    }

    #[test]
    fn walk_representation() {
        let s = space(7);
        let m = DiscreteMartingale::new(walk(s)).unwrap();
        let rep = represent(&m).unwrap();
        for c in rep.coeffs() {
            assert!(c.max_abs_diff(&s.constant(s.step_scale())).unwrap() < 1e-15);
        }
        for h in integrand(&m).unwrap().slices() {
            assert!(h.max_abs_diff(&s.constant(1.0)).unwrap() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_martingales() {
        let s = space(3);
        let drift: Vec<_> = (0..=3).map(|l| s.constant(l as f64)).collect();
        let p = AdaptedProcess::new(drift).unwrap();
        assert!(matches!(DiscreteMartingale::new(p), Err(Error::NotMartingale { step: 0, .. })));
    }

    #[test]
    fn predictability_rejection() {
        let s = space(3);
        let mut slices = vec![s.zeros(); 3];
        slices[1] = s.rademacher(2).unwrap();
        assert!(matches!(
            PredictableIntegrand::new(slices),
            Err(Error::NotPredictable { slice: 1, .. })
        ));
        assert!(PredictableIntegrand::new(vec![s.zeros(); 2]).is_err());
    }

    #[test]
    fn quadratic_variation_examples() {
        let s = space(6);
        assert_eq!(quadratic_variation(&constant_process(s, 3.0), QvRange::Truncated).max_abs(), 0.0);
        let qv = quadratic_variation(&walk(s), QvRange::Truncated);
        assert!(qv.max_abs_diff(&s.constant(5.0 / 6.0)).unwrap() < 1e-15);
        let qv = quadratic_variation(&walk(s), QvRange::Full);
        assert!(qv.max_abs_diff(&s.constant(1.0)).unwrap() < 1e-15);
    }

    #[test]
    fn increment_product_examples() {
        for n in 2..=6 {
            let s = space(n);
            let (l, r) = increment_product_check(&walk(s), 0, 1, 1, 2).unwrap();
            let expected = 1.0 / (n * n) as f64;
            assert!((l - expected).abs() < 1e-15 && (r - expected).abs() < 1e-15);
        }
        let s = space(4);
        assert_eq!(increment_product_check(&constant_process(s, 1.0), 0, 1, 2, 3).unwrap(), (0.0, 0.0));
        let (l, r) = increment_product_check(&walk(s), 0, 2, 2, 4).unwrap();
        assert!((l - r).abs() < 1e-15);
        assert!(matches!(
            increment_product_check(&walk(s), 1, 1, 2, 3),
            Err(Error::IncrementOrder { .. })
        ));
        assert!(increment_product_check(&walk(s), 0, 2, 1, 3).is_err());
        assert!(increment_product_check(&walk(s), 0, 1, 2, 5).is_err());
    }

    #[test]
    fn independence_examples() {
        for n in 1..=8 {
            let s = space(n);
            let r = independent_increments_check(&walk(s), &single_step_pairs(n as usize), 0.0).unwrap();
            assert!(r.pass);
            assert_eq!(r.max_discrepancy, 0.0);
        }
        let s = space(3);
        let r = independent_increments_check(&constant_process(s, 1.0), &disjoint_increment_pairs(3), 0.0)
            .unwrap();
        assert!(r.pass);
    }

    #[test]
    fn increments_of_a_product_terminal_are_independent() {
        // Closing ω1·ω2 gives a null first increment, which is independent of
        // anything.
        let s = space(2);
        let both = WalshMask::from_coins(&s, &[1, 2]).unwrap();
        let m = close_martingale(&s.walsh(both).unwrap());
        let r = independent_increments_check(m.process(), &[(0, 1, 1, 2)], 0.0).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn dependent_increments_are_detected() {
        // Y_2 = ω1 + (1 + ω1)·ω2: the second step only moves when ω1 = +1.
        let s = space(2);
        let w1 = s.rademacher(1).unwrap();
        let w2 = s.rademacher(2).unwrap();
        let terminal = &w1 + &(&(&s.constant(1.0) + &w1) * &w2);
        let m = close_martingale(&terminal);
        let r = independent_increments_check(m.process(), &[(0, 1, 1, 2)], 1e-12).unwrap();
        assert!(!r.pass);
        // joint: (−1, 0) w.p. 1/2, (+1, ±2) w.p. 1/4 each
        // TV = ½(|1/2 − 1/4| + |0 − 1/8|·2 + |0 − 1/4| + |1/4 − 1/8|·2) = 1/2
        assert_eq!(r.max_discrepancy, 0.5);
        assert_eq!(r.worst_pair, Some((0, 1, 1, 2)));
    }

    #[test]
    fn pair_enumeration_counts() {
        // a < b ≤ c < d ≤ 8: C(9,4) with b < c plus C(9,3) with b = c.
        assert_eq!(disjoint_increment_pairs(8).len(), 126 + 84);
        assert_eq!(single_step_pairs(4).len(), 6);
    }
}
