//! Exact computer algebra for two-index q-series of Andrews–Gordon type:
//!
//! - `algebra`: sparse polynomials in `x` and `q` over arbitrary-precision
//!   integers, rational functions, and q-truncated bivariate power series.
//! - `series`: the parameterized double series, its exact truncated
//!   evaluation, and periodic infinite-product expansion.
//! - `contiguous`: the three primary q-contiguous equation templates, their
//!   enumeration inside an index box, and the lattice/counting formulas used
//!   for pruning.
//! - `solver`: master linear combinations with unknown multipliers, exact
//!   annihilator nullspaces via fraction-free elimination, extraction of
//!   closed systems, and numeric + fixed-point verification.
//! - `euler`: the series-to-product peeling loop, periodicity detection, and
//!   the product scan over index pairs.
//! - `partitions`: brute-force enumerators for the partition classes used as
//!   independent oracles.
//! - `search`: the parallel end-to-end discovery driver with deterministic
//!   persistence.
//! - `repro`: named golden reproduction checks shared by the CLI and tests.

pub mod algebra;
pub mod contiguous;
pub mod euler;
pub mod partitions;
pub mod repro;
pub mod search;
pub mod series;
pub mod solver;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("truncation order mismatch: {0} vs {1}")]
    OrderMismatch(u32, u32),
    #[error("negative q-degree {qdeg} at x-degree {xdeg} cannot enter a truncated series")]
    NegativeQDegree { xdeg: u32, qdeg: i64 },
    #[error("parameters are inadmissible at (C1,C2)=({c1},{c2}): E({m},{n}) = {e} < 1")]
    Inadmissible { c1: i64, c2: i64, m: u32, n: u32, e: i64 },
    #[error("box span {span} along axis {axis} is not a multiple of the lattice step {step}")]
    StepMismatch { axis: u8, span: i64, step: i64 },
    #[error("coefficient matrix of kept series has rank {achieved}, need {needed}")]
    RankDeficient { achieved: usize, needed: usize },
    #[error("shifted-series identity with nonzero coefficients found; series are dependent")]
    DegenerateSystem,
    #[error("coefficient is not a polynomial: {0}")]
    RationalCoefficient(String),
    #[error("constant term must be 1, found {0}")]
    ConstantTermNotOne(String),
    #[error("row sums of x-constant coefficients differ from 1; initial values inconsistent")]
    InitialValueMismatch,
    #[error("fixed-point iteration did not stabilize within {0} rounds")]
    NonStabilizing(usize),
    #[error("fixed point disagrees with direct evaluation for pair ({0},{1})")]
    FixedPointMismatch(i64, i64),
    #[error("exponent at q^{0} does not fit in 64 bits")]
    ExponentOverflow(u32),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown artifact {0:?}")]
    UnknownArtifact(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
