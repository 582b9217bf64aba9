//! Exact computation of super intersection numbers and super Weil-Petersson
//! volumes, with a numeric companion for their large-genus asymptotics.
//!
//! The exact side works in the closed domain of rational multiples of powers
//! of pi: brackets come out of a memoized recursion seeded by a single base
//! case, volumes are their all-zero specializations, and two further
//! recursions serve as independent cross-checks. The numeric side fits
//! inverse-genus expansions of exact ratio sequences against closed-form
//! coefficients, Richardson-extrapolates the universal volume constant, and
//! runs inequality suites at desk scale.

pub mod bigfloat;
pub mod bracket;
pub mod cache;
pub mod checks;
pub mod coeffs;
pub mod error;
pub mod fit;
pub mod pi_scalar;
pub mod rational;
pub mod ratios;
pub mod series;
pub mod sums;

pub use bigfloat::BigFloat;
pub use bracket::{
    bracket, empty_bracket, evaluate_volume, jt_normalize, materialize, volume,
    volume_polynomial, BracketKey, MemoStore, VolumePolynomial,
};
pub use cache::{cache_load, cache_save};
pub use error::{Error, Result};
pub use pi_scalar::{PiLaurent, PiScalar};
pub use rational::Rational;
pub use series::GSeries;
