//! Higher-order asymptotic expansions of the normalized-maximum-likelihood
//! (NML) parametric complexity for natural exponential families.
//!
//! The parametric complexity of a model restricted to a compact parameter
//! region `K` admits the expansion
//!
//! ```text
//! COMP(K) = (d/2) log(n / 2π) + log ∫_K ( Σ_{i≤s} F_i(θ) n⁻ⁱ ) dπ_Θ(θ) + o(n⁻ˢ)
//! ```
//!
//! where `π_Θ` is the Jeffreys prior and the correction functions `F_i` are
//! contractions of cumulant tensors against inverse-metric Hermite numbers.
//! This crate computes the pieces of that expansion and validates them
//! against exact closed forms and Monte Carlo estimates:
//!
//! - [`multiindex`]: multi-index arithmetic and enumeration,
//! - [`tensors`]: sparse symmetric tensors and the Fisher [`Metric`],
//! - [`family`]: exponential families via exact log-partition derivatives,
//! - [`hermite`]: un-normalized Hermite numbers `h_α(0)` for a general
//!   inverse metric,
//! - [`expansion`]: the correction terms `F₀, F₁, F₂` and the
//!   Amari-Chentsov tensors,
//! - [`complexity`]: Jeffreys-prior quadrature of the expansion over a box,
//!   exact oracles, and seeded Monte Carlo validation.
//!
//! All numeric code is generic over the scalar type through [`Real`];
//! `f64` aliases are exported at the crate root.
//!
//! ```
//! use nmlcomp::{complexity, expansion, ExpFamily64, Region64};
//!
//! let family = ExpFamily64::exponential_1d();
//! let f1 = expansion::f1(&family, &[-1.0])?;
//! assert!((f1 + 1.0 / 12.0).abs() < 1e-12);
//!
//! let region = Region64::new(vec![(-std::f64::consts::E, -1.0)])?;
//! let report = complexity::comp_approx(&family, &region, 100, 2)?;
//! assert!((report.vol_k - 1.0).abs() < 1e-12);
//! # Ok::<(), nmlcomp::Error>(())
//! ```

pub mod complexity;
pub mod expansion;
pub mod family;
pub mod hermite;
pub mod multiindex;
pub mod quad;
pub mod special;
pub mod tensors;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};
use thiserror::Error;

/// Floating-point scalar for all numeric computation: `f32` or `f64`.
///
/// Tolerances quoted throughout the crate assume `f64`; `f32` works but
/// loses most of them.
pub trait Real:
    Float + FromPrimitive + NumCast + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

pub use complexity::{ComplexityReport, McEstimate, McReport, Region};
pub use expansion::{ExpansionTerms, LogExpansion};
pub use family::{CramerStatus, ExpFamily};
pub use multiindex::MultiIndex;
pub use tensors::{Metric, Pairing, SymTensor};

/// `f64` concretizations of the main domain types.
pub type SymTensor64 = SymTensor<f64>;
pub type Metric64 = Metric<f64>;
pub type ExpFamily64 = ExpFamily<f64>;
pub type Region64 = Region<f64>;

/// `f32` concretizations, for completeness.
pub type SymTensor32 = SymTensor<f32>;
pub type Metric32 = Metric<f32>;
pub type ExpFamily32 = ExpFamily<f32>;
pub type Region32 = Region<f32>;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("integer overflow in combinatorial computation")]
    Overflow,

    #[error("matrix is not symmetric positive definite (pivot ratio {pivot_ratio:.3e})")]
    NotPositiveDefinite { pivot_ratio: f64 },

    #[error("parameter point lies outside the natural parameter domain of `{family}`")]
    OutOfDomain { family: String },

    #[error("derivative order {order} exceeds the guarantee {max_order} of family `{family}`")]
    OrderUnavailable {
        family: String,
        order: usize,
        max_order: usize,
    },

    #[error("Hermite/tensor rank {rank} exceeds the supported maximum {max}")]
    RankTooLarge { rank: usize, max: usize },

    #[error("Amari-Chentsov rank {rank} unsupported (max 4)")]
    UnsupportedAcRank { rank: usize },

    #[error(
        "truncated expansion is non-positive at a quadrature node: \
         the order-{s} series is invalid at n = {n}"
    )]
    ExpansionInvalid { n: u64, s: usize },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("family `{0}` has no sampler")]
    NoSampler(String),

    #[error("bad family description: {0}")]
    BadFamilySpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
