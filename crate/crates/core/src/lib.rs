//! Leading-block probabilities for base-2 Benford's law, built as the fixed
//! point of a recursion over scaled probabilities.
//!
//! The crate is organised bottom-up:
//!
//! - [`dyadic`]: bit vectors, blocks, exact dyadic fractions and the `Q` kernel.
//! - [`matrix`]: the column-stochastic transition matrix, its dense and
//!   suffix-sum matvecs, and an integer-counting oracle for its entries.
//! - [`fixed_point`]: power iteration for the stationary block distribution,
//!   marginals, Benford reference values and the convergence table.
//! - [`analytic`]: numeric checks of the large-`k` limit (Riemann sums,
//!   telescoping series, harmonic block sums, normalization).
//! - [`empirical`]: leading-block statistics of Benford-prone sequences and
//!   the rearrangement (occurrence vs. cardinality) demonstration.
//!
//! ```
//! use benford_core::fixed_point::{solve, Backend, SolveOptions};
//!
//! let report = solve(1, &SolveOptions::default(), Backend::Fast).unwrap();
//! assert!((report.p10 - 4.0 / 7.0).abs() < 1e-12);
//! ```

#![forbid(unsafe_code)]

pub mod analytic;
pub mod dyadic;
pub mod empirical;
pub mod fixed_point;
pub mod matrix;

use thiserror::Error;

/// Largest depth for operations that allocate a vector of length `2^k`.
pub const MAX_VECTOR_DEPTH: usize = 24;

/// Largest depth for operations that materialize a dense `2^k x 2^k` matrix.
pub const MAX_DENSE_DEPTH: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("depth {depth} exceeds the limit of {limit} for {what}")]
    Depth {
        what: &'static str,
        depth: usize,
        limit: usize,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_depth(what: &'static str, depth: usize, limit: usize) -> Result<()> {
    if depth > limit {
        Err(Error::Depth { what, depth, limit })
    } else {
        Ok(())
    }
}
