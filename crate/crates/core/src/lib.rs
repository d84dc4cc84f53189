//! Exact computations around p-adic monodromy in characteristic `p`.
//!
//! The crate is layered bottom-up:
//!
//! * [`field`], [`rational`], [`series`]: finite fields, rationals and
//!   truncated Puiseux series over `F_q`, with per-value precision tracking.
//! * [`poly`], [`newton`], [`puiseux`]: power series over `F_q[[t]]`,
//!   Weierstrass preparation, Newton polygons and a Newton-Puiseux root finder.
//! * [`formal_group`], [`ladder`]: one-dimensional formal group laws, the
//!   `[p]`-series of a height-two formal group and the valuation ladder of its
//!   `p`-power torsion.
//! * [`tate`], [`galois`], [`classify`]: torsion towers of totally degenerate
//!   varieties, the block-matrix model of the Galois image and the reduction
//!   type classification.
//! * [`clifford`]: Clifford algebras of `(n, 2)` lattices and their boundary
//!   weight filtrations.
//!
//! Heavy exact linear algebra runs data-parallel through rayon when the
//! `parallel` feature is enabled (the default); see [`exec::Strategy`].

pub mod classify;
pub mod clifford;
pub mod exec;
pub mod field;
pub mod formal_group;
pub mod galois;
pub mod ladder;
pub mod newton;
pub mod poly;
pub mod puiseux;
pub mod rational;
pub mod series;
pub mod tate;

pub use exec::Strategy;
pub use field::{FiniteField, Fq};
pub use rational::Rational;
pub use series::{PuiseuxSeries, Valuation};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

use thiserror::Error;

/// Errors produced by the library.
///
/// Variants fall into two families: genuine computation failures and
/// precision exhaustion (see [`Error::is_precision`]), which callers usually
/// answer by retrying with larger truncation orders.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("characteristic or field mismatch between operands")]
    FieldMismatch,
    #[error("series is zero at precision {0}; its leading term is unknown")]
    ZeroAtPrecision(Rational),
    #[error("inverse of the exact non-monomial series {0} has no finite expansion; truncate it first")]
    UnboundedInverse(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("coefficients are not integral: {0}")]
    NotIntegral(String),
    #[error("series is zero modulo the maximal ideal at available precision")]
    ReducesToZero,
    #[error("duplicate index {0} in point set")]
    DuplicateIndex(i64),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("composition needs arguments of positive order")]
    NonPositiveOrder,
    #[error("[p]-series is not a series in x^p: coefficient of x^{0} is nonzero")]
    NotFrobeniusSeries(usize),
    #[error("generic fiber supersingular: c_1 vanishes at precision {0}")]
    GenericFiberSupersingular(String),
    #[error("special fiber not height 2 (good ordinary reduction): v(c_{0}) = 0")]
    GoodOrdinaryReduction(usize),
    #[error("special fiber has Weierstrass degree {0} in x^p, expected p = {1}")]
    UnexpectedHeight(usize, u64),
    #[error("residual equation has no root in the residue field for slope {0}")]
    NoResidueRoot(Rational),
    #[error("ladder mismatch at level {level}: ladder {ladder}, oracle {oracle}")]
    LadderMismatch { level: usize, ladder: String, oracle: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed block element: {0}")]
    MalformedBlock(String),
    #[error("group enumeration exceeded the bound of {0} elements")]
    EnumerationBound(usize),
    #[error("lattice error: {0}")]
    Lattice(String),
    #[error("vectors do not satisfy the required isotropy conditions: {0}")]
    NotIsotropic(String),
    #[error("duality conditions violated: {0}")]
    Duality(String),
    #[error("element is not homogeneous for the I_-1 + I_0 + I_1 decomposition")]
    NotHomogeneous,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for errors that more precision (larger `T`, `X` or `N`) could cure.
    pub fn is_precision(&self) -> bool {
        matches!(self, Error::ZeroAtPrecision(_) | Error::InsufficientPrecision(_) | Error::UnboundedInverse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
