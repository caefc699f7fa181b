//! The dyadic filtration `C^0 ⊆ C^1 ⊆ … ⊆ C^n`.
//!
//! `C^l` is generated by the first `l` coins. Its `2^l` cells are contiguous
//! blocks of `2^(n-l)` atoms, so conditional expectation is a block average.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::space::{wht_forward, wht_inverse, DyadicSpace, RandomVariable, WalshMask};
use crate::sum::pairwise_sum;

/// Default absolute tolerance for measurability tests.
pub const MEASURABILITY_TOL: f64 = 1e-10;

const PAR_THRESHOLD: usize = 1 << 16;

/// The algebra `C^l` on a given space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FiltrationLevel {
    space: DyadicSpace,
    level: u32,
}

impl FiltrationLevel {
    pub fn new(space: DyadicSpace, level: u32) -> Result<Self> {
        if level > space.depth() {
            return Err(Error::LevelOutOfRange { level, depth: space.depth() });
        }
        Ok(FiltrationLevel { space, level })
    }

    pub fn space(&self) -> DyadicSpace {
        self.space
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn cell_count(&self) -> usize {
        1usize << self.level
    }

    /// Atoms per cell, `2^(n-l)`.
    pub fn cell_len(&self) -> usize {
        1usize << (self.space.depth() - self.level)
    }

    pub fn cell_of(&self, atom: usize) -> usize {
        atom >> (self.space.depth() - self.level)
    }

    /// True if `mask` only involves coins `1..=l`.
    pub fn admits(&self, mask: WalshMask) -> bool {
        mask.bits() & (self.cell_len() as u64 - 1) == 0
    }
}

fn check_space(f: &RandomVariable, level: &FiltrationLevel) -> Result<()> {
    if f.space() != level.space {
        return Err(Error::SpaceMismatch { left: f.space().depth(), right: level.space.depth() });
    }
    Ok(())
}

/// `E(f | C^l)`: each cell is replaced by the mean of `f` over it.
pub fn cond_expectation(f: &RandomVariable, level: FiltrationLevel) -> Result<RandomVariable> {
    check_space(f, &level)?;
    let cell_len = level.cell_len();
    let scale = (cell_len as f64).recip();
    let mut out = f.values().to_vec();
    let average = |cell: &mut [f64]| {
        let mean = pairwise_sum(cell) * scale;
        cell.fill(mean);
    };
    if out.len() >= PAR_THRESHOLD {
        out.par_chunks_mut(cell_len).for_each(average);
    } else {
        out.chunks_mut(cell_len).for_each(average);
    }
    Ok(RandomVariable::from_trusted(f.space(), out))
}

/// `E(f | C^l)` for a level given as an integer.
pub fn cond_expectation_at(f: &RandomVariable, level: u32) -> Result<RandomVariable> {
    cond_expectation(f, FiltrationLevel::new(f.space(), level)?)
}

/// Largest spread of `f` inside a single level-`l` cell, measured against
/// the cell's first atom. Zero iff `f` is `C^l`-measurable.
pub fn measurability_violation(f: &RandomVariable, level: FiltrationLevel) -> Result<f64> {
    check_space(f, &level)?;
    let spread = |cell: &[f64]| {
        let first = cell[0];
        cell.iter().fold(0.0f64, |m, v| m.max((v - first).abs()))
    };
    let values = f.values();
    let cell_len = level.cell_len();
    Ok(if values.len() >= PAR_THRESHOLD {
        values.par_chunks(cell_len).map(spread).reduce(|| 0.0, f64::max)
    } else {
        values.chunks(cell_len).map(spread).fold(0.0, f64::max)
    })
}

/// Whether `f` is constant, to within `tol`, on every level-`l` cell.
pub fn is_measurable(f: &RandomVariable, level: FiltrationLevel, tol: f64) -> Result<bool> {
    Ok(measurability_violation(f, level)? <= tol)
}

/// Largest Walsh coefficient of `f` on a mask involving a coin beyond `l`.
/// This is the spectral form of [`measurability_violation`].
pub fn spectral_measurability_violation(f: &RandomVariable, level: FiltrationLevel) -> Result<f64> {
    check_space(f, &level)?;
    let spectrum = wht_forward(f);
    let low = level.cell_len() as u64 - 1;
    Ok(spectrum
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(k, _)| *k as u64 & low != 0)
        .fold(0.0, |m, (_, c)| m.max(c.abs())))
}

/// Walsh masks spanning the `C^l`-measurable functions: all masks whose
/// largest coin is at most `l`, including the empty mask.
///
/// Ordered by largest coin, and within that recursively by the remaining
/// coins, so the first `2^k` entries are the basis at level `k`.
pub fn filtration_basis(level: FiltrationLevel) -> Vec<WalshMask> {
    let space = level.space;
    (0..level.cell_count() as u64)
        .map(|k| {
            // bit i of k stands for coin i + 1
            let bits = (0..level.level)
                .filter(|i| k >> i & 1 == 1)
                .fold(0u64, |acc, i| acc | 1 << space.coin_bit(i + 1));
            WalshMask::from_bits(&space, bits).expect("basis mask within depth")
        })
        .collect()
}

/// Conditional expectation computed spectrally: drop every Walsh coefficient
/// on a mask involving a coin beyond `l`, then synthesize.
pub fn spectral_truncate(f: &RandomVariable, level: FiltrationLevel) -> Result<RandomVariable> {
    check_space(f, &level)?;
    let mut spectrum = wht_forward(f);
    let low = level.cell_len() as u64 - 1;
    for (k, c) in spectrum.coeffs_mut().iter_mut().enumerate() {
        if k as u64 & low != 0 {
            *c = 0.0;
        }
    }
    Ok(wht_inverse(&spectrum))
}
