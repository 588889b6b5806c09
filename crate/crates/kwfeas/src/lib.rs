//! D-optimality inequality systems for the Rasch Poisson counts model.
//!
//! A saturated design for the Rasch Poisson counts model with `k` binary
//! rules is a set of `p` rule settings, where `p` is the number of
//! regression terms up to interaction order `d`. The equivalence theorem
//! for D-optimality turns "is this support optimal somewhere in the
//! parameter space" into a finite system of polynomial inequalities
//! `g_j(mu) <= 0` over the open positive orthant `mu > 0`.
//!
//! This crate generates those systems exactly ([`kw`]), reduces the
//! collection of candidate supports by the hyperoctahedral symmetry of
//! the binary cube ([`symmetry`]), and decides feasibility of a system
//! with machine-checkable evidence ([`feasibility`]): exact rational
//! witnesses, nonnegativity certificates for infeasibility over the
//! whole orthant, and interval branch-and-bound for boxes. Floating
//! point is used only to steer searches; every reported verdict is
//! re-verified in exact arithmetic.
//!
//! The `kwfeas` binary drives the full pipeline and maintains a small
//! on-disk catalog of systems and verdicts.

pub mod catalog;
pub mod exec;
pub mod feasibility;
pub mod interval;
pub mod kw;
pub mod matrix;
pub mod model;
pub mod poly;
pub mod symmetry;

/// Exact scalar used throughout: arbitrary-precision rational.
pub type Rat = num_rational::BigRational;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("variable count mismatch: {0} vs {1}")]
    VarMismatch(usize, usize),
    #[error("expected {expected} coordinates, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cyclic substitution involving m{}", .0 + 1)]
    CyclicSubstitution(usize),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid support: {0}")]
    InvalidSupport(String),
    #[error("scale guard: {0}")]
    OutOfScale(String),
    #[error("group element does not act on {0} rules")]
    BadGroupElement(usize),
    #[error("set is not closed under the group action: missing image {0}")]
    NotClosed(String),
    #[error("invalid restriction: {0}")]
    InvalidRestriction(String),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("interval endpoint is NaN")]
    NanEndpoint,
    #[error("interval is empty: lo > hi")]
    EmptyInterval,
    #[error("certificate is not valid: {0}")]
    BadCertificate(String),
    #[error("witness is not valid: {0}")]
    BadWitness(String),
    #[error("unknown orbit id {0}")]
    UnknownOrbit(usize),
    #[error("catalog: {0}")]
    Catalog(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
