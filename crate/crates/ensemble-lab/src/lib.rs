//! Weight-spectrum analysis for repeat-multiple-accumulate code ensembles.
//!
//! A code in these ensembles is an outer rate-`1/q` repetition code followed
//! by `M` accumulators separated by uniform interleavers, optionally with
//! random puncturing of the final output. The crate computes, for such
//! ensembles:
//!
//! * finite-length ensemble-average weight spectra and cumulative
//!   enumerators ([`enumerators`]),
//! * first-moment minimum-distance bounds at finite block length
//!   ([`enumerators::finite_length_dmin_bound`]),
//! * asymptotic spectral-shape exponents, their closed-form stationary-point
//!   chain, and minimum-distance growth-rate coefficients ([`asymptotic`]),
//! * the Gilbert-Varshamov benchmark ([`asymptotic::gvb_growth_rate`]),
//! * exact rational brute-force oracles at tiny block lengths that validate
//!   the closed forms ([`oracle`]).
//!
//! Floating-point work is generic over the scalar type through [`real::Real`]
//! (`f32` or `f64`); the aliases below fix `f64`, which all reference
//! tolerances assume. The oracle side is exact big-rational arithmetic and
//! not scalar-generic.

pub mod asymptotic;
pub mod combinatorics;
pub mod enumerators;
pub mod error;
pub mod oracle;
pub mod real;

pub use error::{Error, Result};
pub use real::Real;

/// Log-domain magnitude at the default `f64` precision.
pub type LogReal64 = combinatorics::LogReal<f64>;
/// Compensated log-domain accumulator at the default `f64` precision.
pub type LogSum64 = combinatorics::LogSum<f64>;
/// Weight spectrum at the default `f64` precision.
pub type WeightSpectrum64 = enumerators::WeightSpectrum<f64>;
/// Normalized-weight vector at the default `f64` precision.
pub type NormalizedWeights64 = asymptotic::NormalizedWeights<f64>;
/// Growth-rate solver output at the default `f64` precision.
pub type GrowthRateResult64 = asymptotic::GrowthRateResult<f64>;
