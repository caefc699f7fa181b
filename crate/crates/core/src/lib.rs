//! Discrete stochastic calculus on the dyadic sample space `{0, …, 2^n − 1}`.
//!
//! The crate provides Walsh–Rademacher analysis with a fast Walsh–Hadamard
//! transform, the dyadic filtration and conditional expectation, discrete
//! martingales and their exact representation as stochastic integrals
//! against the scaled coin-flip walk, and an Euler solver for SDEs driven by
//! that walk. All checks are exact enumerations over the `2^n` atoms.

pub mod cli;
pub mod error;
pub mod filtration;
pub mod generate;
pub mod integral;
pub mod io;
pub mod martingale;
pub mod sde;
pub mod space;
pub mod sum;
pub mod wht;

pub use error::{Error, Result};
pub use filtration::{
    cond_expectation, filtration_basis, is_measurable, spectral_truncate, FiltrationLevel,
};
pub use integral::{
    integral_is_martingale, integral_process, ito_isometry, mrt_roundtrip, random_walk,
    stochastic_integral, RandomWalk,
};
pub use martingale::{
    close_martingale, increment_product_check, independent_increments_check, integrand,
    martingale_check, quadratic_variation, represent, AdaptedProcess, DiscreteMartingale,
    PredictableIntegrand, QvRange,
};
pub use sde::{euler_solve, martingale_diagnostic, weak_expectation, SdeProblem, SolveMode};
pub use space::{
    binary_signs, expectation, inner_product, wht_forward, wht_inverse, DyadicSpace,
    RandomVariable, SignPath, WalshMask, WalshSpectrum,
};
