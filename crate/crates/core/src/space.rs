//! The dyadic sample space, Rademacher and Walsh functions, expectations and
//! the Walsh expansion of random variables.
//!
//! Atom `m` of a depth-`n` space is identified with the `n` coin outcomes read
//! off its binary digits, most significant bit first: coin `j` is bit `n - j`
//! of `m`, and a set bit means the coin came up `+1`. With this ordering the
//! first `l` coins fix the top `l` bits, so the cells of the level-`l`
//! filtration are contiguous blocks of `2^(n-l)` atoms.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::sum::{pairwise_dot, pairwise_sum};
use crate::wht::fwht_in_place;

/// Depth cap used when `DYMART_DEPTH_CAP` is unset.
pub const DEFAULT_DEPTH_CAP: u32 = 24;
/// Environment variable overriding [`DEFAULT_DEPTH_CAP`].
pub const DEPTH_CAP_ENV: &str = "DYMART_DEPTH_CAP";

/// Hard ceiling on any depth: atom indices and masks are `u64`, and full
/// vectors must be addressable.
const ABSOLUTE_MAX_DEPTH: u32 = 40;

/// The active depth cap: `DYMART_DEPTH_CAP` if it parses, else 24.
pub fn depth_cap() -> u32 {
    std::env::var(DEPTH_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<u32>().ok())
        .map(|c| c.min(ABSOLUTE_MAX_DEPTH))
        .unwrap_or(DEFAULT_DEPTH_CAP)
}

/// The sample space `{0, …, 2^n − 1}` with the uniform measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicSpace {
    depth: u32,
}

impl DyadicSpace {
    /// A space of the given depth, bounded by [`depth_cap`].
    pub fn new(depth: u32) -> Result<Self> {
        Self::with_cap(depth, depth_cap())
    }

    pub fn with_cap(depth: u32, cap: u32) -> Result<Self> {
        if depth == 0 {
            return Err(Error::ZeroDepth(depth));
        }
        let cap = cap.min(ABSOLUTE_MAX_DEPTH);
        if depth > cap {
            return Err(Error::Capacity { depth, cap });
        }
        Ok(DyadicSpace { depth })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Number of atoms, `2^depth`.
    pub fn size(&self) -> usize {
        1usize << self.depth
    }

    /// Mass of a single atom, `2^-depth`.
    pub fn atom_mass(&self) -> f64 {
        (self.size() as f64).recip()
    }

    /// `1/√n`, the walk's step size.
    pub fn step_scale(&self) -> f64 {
        (self.depth as f64).sqrt().recip()
    }

    pub(crate) fn check_coin(&self, coin: u32) -> Result<()> {
        if coin == 0 || coin > self.depth {
            return Err(Error::CoinOutOfRange { coin, depth: self.depth });
        }
        Ok(())
    }

    /// Bit of the atom index that carries coin `coin` (1-based).
    pub(crate) fn coin_bit(&self, coin: u32) -> u32 {
        self.depth - coin
    }

    /// Sign pattern of `atom`; see [`binary_signs`].
    pub fn binary_signs(&self, atom: usize) -> Result<SignPath> {
        binary_signs(atom as u64, self.depth)
    }

    /// The `j`-th Rademacher function, `1 ≤ j ≤ n`.
    pub fn rademacher(&self, coin: u32) -> Result<RandomVariable> {
        self.check_coin(coin)?;
        let bit = self.coin_bit(coin);
        let values = (0..self.size())
            .map(|m| if (m >> bit) & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        Ok(RandomVariable::from_trusted(*self, values))
    }

    /// The Walsh function of `mask`; the empty mask is the constant 1.
    pub fn walsh(&self, mask: WalshMask) -> Result<RandomVariable> {
        mask.check(self)?;
        // ω_j = 2b_j − 1, so the product over the mask is
        // (−1)^|mask| · (−1)^popcount(m & mask).
        let flip = mask.bits.count_ones() % 2 == 1;
        let values = (0..self.size() as u64)
            .map(|m| {
                let odd = ((m & mask.bits).count_ones() % 2 == 1) ^ flip;
                if odd { -1.0 } else { 1.0 }
            })
            .collect();
        Ok(RandomVariable::from_trusted(*self, values))
    }

    pub fn constant(&self, c: f64) -> RandomVariable {
        assert!(c.is_finite(), "constant random variable must be finite");
        RandomVariable::from_trusted(*self, vec![c; self.size()])
    }

    pub fn zeros(&self) -> RandomVariable {
        self.constant(0.0)
    }

    /// Both sides of the product rule
    /// `μ(ω_{j_1} < α_1, …, ω_{j_k} < α_k) = Π_k μ(ω_{j_k} < α_k)`,
    /// each computed by counting atoms.
    ///
    /// `coins` must be a nonempty set of distinct coin indices, paired
    /// positionally with `thresholds`.
    pub fn check_star_independence(&self, coins: &[u32], thresholds: &[f64]) -> Result<(f64, f64)> {
        if coins.is_empty() {
            return Err(Error::InvalidArgument("coin set must be nonempty".into()));
        }
        if coins.len() != thresholds.len() {
            return Err(Error::LengthMismatch { expected: coins.len(), found: thresholds.len() });
        }
        let mut seen = 0u64;
        for &j in coins {
            self.check_coin(j)?;
            let bit = 1u64 << self.coin_bit(j);
            if seen & bit != 0 {
                return Err(Error::InvalidArgument(format!("coin {j} listed twice")));
            }
            seen |= bit;
        }
        let bits: Vec<u32> = coins.iter().map(|&j| self.coin_bit(j)).collect();
        let below = |m: usize, k: usize| {
            let sign = if (m >> bits[k]) & 1 == 1 { 1.0 } else { -1.0 };
            sign < thresholds[k]
        };

        let size = self.size();
        let joint = (0..size).filter(|&m| (0..coins.len()).all(|k| below(m, k))).count();
        let mass = self.atom_mass();
        let lhs = joint as f64 * mass;
        let rhs = (0..coins.len())
            .map(|k| (0..size).filter(|&m| below(m, k)).count() as f64 * mass)
            .product();
        Ok((lhs, rhs))
    }
}

/// The sign sequence `(±1, …, ±1)` attached to an atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignPath {
    signs: Vec<i8>,
}

impl SignPath {
    pub fn depth(&self) -> u32 {
        self.signs.len() as u32
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Sign of coin `j` (1-based).
    pub fn coin(&self, j: u32) -> Option<i8> {
        j.checked_sub(1).and_then(|i| self.signs.get(i as usize).copied())
    }
}

/// Signs of the `n`-bit binary representation of `atom`, most significant
/// bit first, with `1 ↦ +1` and `0 ↦ −1`.
pub fn binary_signs(atom: u64, depth: u32) -> Result<SignPath> {
    if depth == 0 {
        return Err(Error::ZeroDepth(depth));
    }
    if depth > 63 {
        return Err(Error::Capacity { depth, cap: 63 });
    }
    let size = 1u64 << depth;
    if atom >= size {
        return Err(Error::AtomOutOfRange { atom, size });
    }
    let signs = (1..=depth)
        .map(|j| if (atom >> (depth - j)) & 1 == 1 { 1 } else { -1 })
        .collect();
    Ok(SignPath { signs })
}

/// A set of coins, identifying a Walsh function.
///
/// Stored in atom-index bit layout: coin `j` is bit `depth - j`. This is the
/// index of the corresponding coefficient in a [`WalshSpectrum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WalshMask {
    bits: u64,
}

impl WalshMask {
    pub const EMPTY: WalshMask = WalshMask { bits: 0 };

    pub fn from_bits(space: &DyadicSpace, bits: u64) -> Result<Self> {
        let mask = WalshMask { bits };
        mask.check(space)?;
        Ok(mask)
    }

    pub fn from_coins(space: &DyadicSpace, coins: &[u32]) -> Result<Self> {
        let mut bits = 0;
        for &j in coins {
            space.check_coin(j)?;
            bits |= 1u64 << space.coin_bit(j);
        }
        Ok(WalshMask { bits })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn len(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Coin indices in increasing order.
    pub fn coins(&self, space: &DyadicSpace) -> Vec<u32> {
        (1..=space.depth())
            .filter(|&j| self.bits >> space.coin_bit(j) & 1 == 1)
            .collect()
    }

    /// Largest coin in the mask, `None` for the empty mask.
    pub fn max_coin(&self, space: &DyadicSpace) -> Option<u32> {
        (self.bits != 0).then(|| space.depth() - self.bits.trailing_zeros())
    }

    pub fn contains(&self, space: &DyadicSpace, coin: u32) -> bool {
        coin >= 1 && coin <= space.depth() && self.bits >> space.coin_bit(coin) & 1 == 1
    }

    /// Mask of the pointwise product `walsh(self) · walsh(other)`.
    pub fn symmetric_difference(&self, other: WalshMask) -> WalshMask {
        WalshMask { bits: self.bits ^ other.bits }
    }

    fn check(&self, space: &DyadicSpace) -> Result<()> {
        if self.bits >> space.depth() != 0 {
            return Err(Error::MaskOutOfRange { bits: self.bits, depth: space.depth() });
        }
        Ok(())
    }
}

/// A real function on the atoms of a [`DyadicSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct RandomVariable {
    space: DyadicSpace,
    values: Vec<f64>,
}

impl RandomVariable {
    /// Wraps `values`, checking the length and that every entry is finite.
    pub fn new(space: DyadicSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::LengthMismatch { expected: space.size(), found: values.len() });
        }
        check_finite(&values)?;
        Ok(RandomVariable { space, values })
    }

    pub fn from_fn<F: FnMut(usize) -> f64>(space: DyadicSpace, f: F) -> Result<Self> {
        let values: Vec<f64> = (0..space.size()).map(f).collect();
        check_finite(&values)?;
        Ok(RandomVariable { space, values })
    }

    pub(crate) fn from_trusted(space: DyadicSpace, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), space.size());
        RandomVariable { space, values }
    }

    pub fn space(&self) -> DyadicSpace {
        self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, atom: usize) -> f64 {
        self.values[atom]
    }

    pub fn expectation(&self) -> f64 {
        pairwise_sum(&self.values) * self.space.atom_mass()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.expectation();
        crate::sum::pairwise_sum_by(self.values.len(), |i| {
            let d = self.values[i] - mean;
            d * d
        }) * self.space.atom_mass()
    }

    /// `E(f^k)` for a non-negative integer power.
    pub fn moment(&self, k: i32) -> f64 {
        crate::sum::pairwise_sum_by(self.values.len(), |i| self.values[i].powi(k))
            * self.space.atom_mass()
    }

    /// Applies `f` pointwise; fails if any output is non-finite.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        RandomVariable::new(self.space, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &RandomVariable, f: F) -> Result<Self> {
        same_space(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        RandomVariable::new(self.space, values)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c).expect("scaling produced a non-finite value")
    }

    /// `max_m |self(m) − other(m)|`.
    pub fn max_abs_diff(&self, other: &RandomVariable) -> Result<f64> {
        same_space(self, other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Walsh spectrum via the fast transform.
    pub fn spectrum(&self) -> WalshSpectrum {
        wht_forward(self)
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index, value: values[index] }),
        None => Ok(()),
    }
}

pub(crate) fn same_space(a: &RandomVariable, b: &RandomVariable) -> Result<()> {
    if a.space != b.space {
        return Err(Error::SpaceMismatch { left: a.space.depth, right: b.space.depth });
    }
    Ok(())
}

// Pointwise arithmetic. These panic on a space mismatch or a non-finite
// result; use `zip_with` for the fallible form.
macro_rules! pointwise_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&RandomVariable> for &RandomVariable {
            type Output = RandomVariable;
            fn $method(self, rhs: &RandomVariable) -> RandomVariable {
                self.zip_with(rhs, |a, b| a $op b)
                    .unwrap_or_else(|e| panic!("{}: {e}", stringify!($method)))
            }
        }
        impl $trait<RandomVariable> for RandomVariable {
            type Output = RandomVariable;
            fn $method(self, rhs: RandomVariable) -> RandomVariable {
                (&self).$method(&rhs)
            }
        }
    };
}

pointwise_op!(Add, add, +);
pointwise_op!(Sub, sub, -);
pointwise_op!(Mul, mul, *);

impl Neg for &RandomVariable {
    type Output = RandomVariable;
    fn neg(self) -> RandomVariable {
        self.scale(-1.0)
    }
}

/// `E(f)`.
pub fn expectation(f: &RandomVariable) -> f64 {
    f.expectation()
}

/// `E(f g)`.
pub fn inner_product(f: &RandomVariable, g: &RandomVariable) -> Result<f64> {
    same_space(f, g)?;
    Ok(pairwise_dot(&f.values, &g.values) * f.space.atom_mass())
}

/// Coefficients of a random variable in the Walsh basis, indexed by
/// [`WalshMask::index`].
#[derive(Clone, Debug, PartialEq)]
pub struct WalshSpectrum {
    space: DyadicSpace,
    coeffs: Vec<f64>,
}

impl WalshSpectrum {
    pub fn new(space: DyadicSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.size() {
            return Err(Error::LengthMismatch { expected: space.size(), found: coeffs.len() });
        }
        check_finite(&coeffs)?;
        Ok(WalshSpectrum { space, coeffs })
    }

    pub fn zeros(space: DyadicSpace) -> Self {
        WalshSpectrum { space, coeffs: vec![0.0; space.size()] }
    }

    /// The spectrum with a single unit coefficient at `mask`.
    pub fn indicator(space: DyadicSpace, mask: WalshMask) -> Result<Self> {
        mask.check(&space)?;
        let mut s = Self::zeros(space);
        s.coeffs[mask.index()] = 1.0;
        Ok(s)
    }

    pub fn space(&self) -> DyadicSpace {
        self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, mask: WalshMask) -> f64 {
        self.coeffs[mask.index()]
    }

    /// `Σ_m λ_m²`, which equals `E(f²)` by Parseval.
    pub fn energy(&self) -> f64 {
        pairwise_dot(&self.coeffs, &self.coeffs)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl fmt::Display for WalshMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.bits)
    }
}

// Walsh functions pick up a factor (−1)^|mask| relative to the Hadamard
// kernel because coin value +1 corresponds to bit 1.
fn apply_mask_signs(values: &mut [f64]) {
    for (k, v) in values.iter_mut().enumerate() {
        if k.count_ones() % 2 == 1 {
            *v = -*v;
        }
    }
}

/// Walsh coefficients `λ_mask = E(f · walsh(mask))` for every mask.
pub fn wht_forward(f: &RandomVariable) -> WalshSpectrum {
    let mut coeffs = f.values.clone();
    fwht_in_place(&mut coeffs);
    let mass = f.space.atom_mass();
    for c in coeffs.iter_mut() {
        *c *= mass;
    }
    apply_mask_signs(&mut coeffs);
    WalshSpectrum { space: f.space, coeffs }
}

/// Synthesis `f(m) = Σ_mask λ_mask · walsh(mask)(m)`.
pub fn wht_inverse(s: &WalshSpectrum) -> RandomVariable {
    let mut values = s.coeffs.clone();
    apply_mask_signs(&mut values);
    fwht_in_place(&mut values);
    RandomVariable::new(s.space, values).expect("synthesis overflowed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: u32) -> DyadicSpace {
        DyadicSpace::new(n).unwrap()
    }

    #[test]
    fn binary_signs_examples() {
        assert_eq!(binary_signs(0, 2).unwrap().signs(), &[-1, -1]);
        assert_eq!(binary_signs(3, 2).unwrap().signs(), &[1, 1]);
        assert_eq!(binary_signs(2, 2).unwrap().signs(), &[1, -1]);
        assert!(matches!(binary_signs(4, 2), Err(Error::AtomOutOfRange { atom: 4, size: 4 })));
    }

    #[test]
    fn binary_signs_matches_digit_string() {
        for m in 0..64u64 {
            let digits = format!("{m:06b}");
            let expected: Vec<i8> = digits.chars().map(|c| if c == '1' { 1 } else { -1 }).collect();
            assert_eq!(binary_signs(m, 6).unwrap().signs(), &expected[..]);
        }
    }

    #[test]
    fn rademacher_examples() {
        let s = space(2);
        assert_eq!(s.rademacher(1).unwrap().values(), &[-1.0, -1.0, 1.0, 1.0]);
        assert_eq!(s.rademacher(2).unwrap().values(), &[-1.0, 1.0, -1.0, 1.0]);
        assert!(matches!(s.rademacher(0), Err(Error::CoinOutOfRange { .. })));
        assert!(matches!(s.rademacher(3), Err(Error::CoinOutOfRange { .. })));
        let s = space(9);
        for j in 1..=9 {
            assert_eq!(s.rademacher(j).unwrap().expectation(), 0.0);
        }
    }

    #[test]
    fn walsh_examples() {
        let s = space(2);
        assert_eq!(s.walsh(WalshMask::EMPTY).unwrap().values(), &[1.0; 4]);
        let both = WalshMask::from_coins(&s, &[1, 2]).unwrap();
        assert_eq!(s.walsh(both).unwrap().values(), &[1.0, -1.0, -1.0, 1.0]);
        let s = space(5);
        for j in 1..=5 {
            let m = WalshMask::from_coins(&s, &[j]).unwrap();
            assert_eq!(s.walsh(m).unwrap(), s.rademacher(j).unwrap());
        }
        assert!(WalshMask::from_bits(&s, 1 << 5).is_err());
    }

    #[test]
    fn mask_coin_bookkeeping() {
        let s = space(6);
        let m = WalshMask::from_coins(&s, &[2, 5]).unwrap();
        assert_eq!(m.coins(&s), vec![2, 5]);
        assert_eq!(m.max_coin(&s), Some(5));
        assert_eq!(WalshMask::EMPTY.max_coin(&s), None);
        assert!(m.contains(&s, 2) && !m.contains(&s, 3));
    }

    #[test]
    fn expectation_examples() {
        let s = space(7);
        assert_eq!(s.constant(2.5).expectation(), 2.5);
        for bits in 1..s.size() as u64 {
            let w = s.walsh(WalshMask::from_bits(&s, bits).unwrap()).unwrap();
            assert_eq!(w.expectation(), 0.0);
            assert_eq!(inner_product(&w, &w).unwrap(), 1.0);
        }
    }

    #[test]
    fn inner_product_against_one_is_expectation() {
        let s = space(4);
        let f = RandomVariable::from_fn(s, |m| (m as f64).sqrt()).unwrap();
        assert_eq!(inner_product(&f, &s.constant(1.0)).unwrap(), f.expectation());
        let g = space(3).constant(1.0);
        assert!(matches!(inner_product(&f, &g), Err(Error::SpaceMismatch { .. })));
    }

    #[test]
    fn walsh_product_law() {
        let s = space(5);
        for a in 0..32 {
            for b in 0..32 {
                let ma = WalshMask::from_bits(&s, a).unwrap();
                let mb = WalshMask::from_bits(&s, b).unwrap();
                let prod = &s.walsh(ma).unwrap() * &s.walsh(mb).unwrap();
                assert_eq!(prod, s.walsh(ma.symmetric_difference(mb)).unwrap());
            }
        }
    }

    #[test]
    fn wht_examples() {
        let s = space(4);
        let spec = wht_forward(&s.constant(3.0));
        assert_eq!(spec.coeff(WalshMask::EMPTY), 3.0);
        assert!(spec.coeffs()[1..].iter().all(|&c| c == 0.0));
        for bits in 0..16 {
            let mask = WalshMask::from_bits(&s, bits).unwrap();
            let spec = wht_forward(&s.walsh(mask).unwrap());
            assert_eq!(spec, WalshSpectrum::indicator(s, mask).unwrap());
            assert_eq!(wht_inverse(&spec), s.walsh(mask).unwrap());
        }
        assert_eq!(wht_inverse(&WalshSpectrum::zeros(s)), s.zeros());
    }

    #[test]
    fn star_independence_examples() {
        let s = space(2);
        assert_eq!(s.check_star_independence(&[1, 2], &[0.0, 0.0]).unwrap(), (0.25, 0.25));
        assert_eq!(s.check_star_independence(&[1, 2], &[-1.0, 0.5]).unwrap(), (0.0, 0.0));
        let s = space(3);
        assert_eq!(s.check_star_independence(&[1], &[2.0]).unwrap(), (1.0, 1.0));
        assert!(s.check_star_independence(&[], &[]).is_err());
        assert!(s.check_star_independence(&[1, 1], &[0.0, 0.0]).is_err());
        assert!(s.check_star_independence(&[4], &[0.0]).is_err());
    }

    #[test]
    fn depth_bounds() {
        assert!(matches!(DyadicSpace::new(0), Err(Error::ZeroDepth(0))));
        assert!(matches!(
            DyadicSpace::with_cap(25, 24),
            Err(Error::Capacity { depth: 25, cap: 24 })
        ));
        assert_eq!(DyadicSpace::with_cap(24, 24).unwrap().size(), 1 << 24);
    }

    #[test]
    fn rejects_non_finite_values() {
        let s = space(1);
        assert!(matches!(
            RandomVariable::new(s, vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(RandomVariable::new(s, vec![0.0]).is_err());
    }
}
