//! The scaled coin-flip walk, discrete stochastic integrals against it, and
//! the round trip martingale → integrand → integral → martingale.

use serde::Serialize;

use crate::error::Result;
use crate::martingale::{
    integrand, martingale_check, AdaptedProcess, DiscreteMartingale, MartingaleReport,
    PredictableIntegrand,
};
use crate::space::{DyadicSpace, RandomVariable};

/// Tolerance for checks whose exact value is built from `±1` arithmetic.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for checks that involve block averages of general reals.
pub const AVERAGING_TOL: f64 = 1e-10;

/// `χ_l = n^{-1/2} Σ_{i≤l} ω_i` for `l = 0, …, n`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomWalk {
    process: AdaptedProcess,
}

impl RandomWalk {
    pub fn process(&self) -> &AdaptedProcess {
        &self.process
    }

    pub fn into_process(self) -> AdaptedProcess {
        self.process
    }

    pub fn slice(&self, l: usize) -> &RandomVariable {
        self.process.slice(l)
    }

    pub fn terminal(&self) -> &RandomVariable {
        self.process.slice(self.process.steps())
    }

    /// The walk is a martingale by construction.
    pub fn as_martingale(&self) -> DiscreteMartingale {
        DiscreteMartingale::new(self.process.clone()).expect("walk is a martingale")
    }
}

/// Builds the walk. Each value is an integer partial sum of coin signs
/// divided once by `√n`.
pub fn random_walk(space: DyadicSpace) -> RandomWalk {
    let n = space.depth();
    let root_n = (n as f64).sqrt();
    let slices = (0..=n)
        .map(|l| {
            let keep = !((1usize << (n - l)) - 1);
            RandomVariable::from_trusted(
                space,
                (0..space.size())
                    .map(|m| {
                        // ones among the first l coins, minus zeros
                        let ones = (m & keep).count_ones() as i64;
                        (2 * ones - l as i64) as f64 / root_n
                    })
                    .collect(),
            )
        })
        .collect();
    RandomWalk { process: AdaptedProcess::structural(slices).expect("n + 1 slices") }
}

/// `E(χ_n^k)` by summing over all atoms.
pub fn walk_moment(space: DyadicSpace, k: i32) -> f64 {
    random_walk(space).terminal().moment(k)
}

/// `E(χ_n^k)` from the binomial law of the number of heads:
/// `2^{-n} Σ_h C(n,h) ((2h − n)/√n)^k`. Works for any depth without
/// enumerating atoms.
pub fn walk_moment_binomial(depth: u32, k: i32) -> f64 {
    let n = depth as f64;
    let mut log_binom = 0.0f64; // ln C(n, h)
    let mut acc = 0.0;
    for h in 0..=depth {
        if h > 0 {
            log_binom += ((depth - h + 1) as f64).ln() - (h as f64).ln();
        }
        let weight = (log_binom - n * std::f64::consts::LN_2).exp();
        acc += weight * ((2.0 * h as f64 - n) / n.sqrt()).powi(k);
    }
    acc
}

/// Closed forms `E(χ_n^k)` for `k = 1..4`: `0, 1, 0, 3 − 2/n`.
pub fn walk_moment_closed_form(depth: u32, k: u32) -> Option<f64> {
    let n = depth as f64;
    match k {
        1 | 3 => Some(0.0),
        2 => Some(1.0),
        4 => Some(3.0 - 2.0 / n),
        _ => None,
    }
}

/// All partial integrals `I_l = n^{-1/2} Σ_{j<l} H_j ω_{j+1}`, `l = 0, …, n`.
pub fn integral_process(h: &PredictableIntegrand) -> AdaptedProcess {
    let space = h.space();
    let scale = space.step_scale();
    let mut acc = space.zeros();
    let mut slices = Vec::with_capacity(space.depth() as usize + 1);
    slices.push(acc.clone());
    for (j, hj) in h.slices().iter().enumerate() {
        let omega = space.rademacher(j as u32 + 1).expect("coin within depth");
        acc = acc
            .zip_with(&(hj * &omega), |a, b| a + b * scale)
            .expect("integral overflowed");
        slices.push(acc.clone());
    }
    // H_j is C^j-measurable, so I_l is C^l-measurable.
    AdaptedProcess::structural(slices).expect("n + 1 slices")
}

/// `I_l` for a single `0 ≤ l ≤ n`.
pub fn stochastic_integral(h: &PredictableIntegrand, l: usize) -> Result<RandomVariable> {
    let n = h.space().depth() as usize;
    if l > n {
        return Err(crate::Error::LevelOutOfRange { level: l as u32, depth: n as u32 });
    }
    Ok(integral_process(h).slice(l).clone())
}

/// Martingale check of the integral process at [`EXACT_TOL`].
pub fn integral_is_martingale(h: &PredictableIntegrand) -> Result<MartingaleReport> {
    martingale_check(&integral_process(h), EXACT_TOL)
}

/// `(E(I_n²), n^{-1} Σ_j E(H_j²))`.
pub fn ito_isometry(h: &PredictableIntegrand) -> (f64, f64) {
    let i = integral_process(h);
    let lhs = i.slice(i.steps()).moment(2);
    let n = h.space().depth() as f64;
    let rhs = h.slices().iter().map(|hj| hj.moment(2)).sum::<f64>() / n;
    (lhs, rhs)
}

/// `n^{-1} Σ_j H_j²`, pointwise. Equals the full-range quadratic variation of
/// the integral process.
pub fn integrand_energy(h: &PredictableIntegrand) -> RandomVariable {
    let space = h.space();
    let n = space.depth() as f64;
    let sum = h
        .slices()
        .iter()
        .fold(space.zeros(), |acc, hj| &acc + &(hj * hj));
    sum.scale(n.recip())
}

/// Outcome of [`mrt_roundtrip`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundtripReport {
    /// `max_{l, m} |Y_l(m) − Y_0 − I_l(m)|`.
    pub max_error: f64,
    /// Largest deviation of the extracted integrand from predictability.
    pub predictability_violation: f64,
}

/// Extracts the integrand of `y`, integrates it against the walk and
/// compares `Y_0 + I_l` with `Y_l` at every time.
pub fn mrt_roundtrip(y: &DiscreteMartingale) -> Result<RoundtripReport> {
    let h = integrand(y)?;
    let rep = crate::martingale::represent(y)?;
    let integral = integral_process(&h);
    let y0 = y.process().slice(0).get(0);
    let mut max_error = 0.0f64;
    for (yl, il) in y.process().slices().iter().zip(integral.slices()) {
        let err = yl.zip_with(il, |a, b| (a - y0 - b).abs())?.max_abs();
        max_error = max_error.max(err);
    }
    Ok(RoundtripReport {
        max_error,
        predictability_violation: rep.predictability_violation()?,
    })
}
