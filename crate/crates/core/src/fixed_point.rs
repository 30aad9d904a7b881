//! Stationary block probabilities by power iteration.
//!
//! The unscaled probabilities `P` over `k`-bit blocks satisfy `P = M P` with `M`
//! from [`crate::matrix`]. Every entry of `M` is positive, so the normalized
//! fixed point is unique and power iteration from any positive start reaches it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::{BitVector, Block};
use crate::matrix::{apply_dense, apply_fast, build_dense};
use crate::{check_depth, Error, Result, MAX_DENSE_DEPTH, MAX_VECTOR_DEPTH};

pub const DEFAULT_TOLERANCE: f64 = 1e-14;
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Materialized matrix, `k <= 12`.
    Dense,
    /// Suffix-sum matvec, `k <= 24`.
    Fast,
}

impl Backend {
    pub fn max_depth(self) -> usize {
        match self {
            Backend::Dense => MAX_DENSE_DEPTH,
            Backend::Fast => MAX_VECTOR_DEPTH,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Dense => "dense",
            Backend::Fast => "fast",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Backend::Dense),
            "fast" => Ok(Backend::Fast),
            _ => Err(Error::arg(format!("unknown backend {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stop once the max-norm change between iterates is at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Probabilities over all `k`-bit blocks, indexed by packed bits in dyadic order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    depth: usize,
    values: Vec<f64>,
}

impl ProbabilityVector {
    /// Requires `2^depth` nonnegative values; does not renormalize.
    pub fn new(depth: usize, values: Vec<f64>) -> Result<Self> {
        check_depth("probability vector", depth, MAX_VECTOR_DEPTH)?;
        if values.len() != 1 << depth {
            return Err(Error::arg(format!(
                "expected {} probabilities for depth {depth}, got {}",
                1usize << depth,
                values.len()
            )));
        }
        if values.iter().any(|p| p.is_nan() || *p < 0.0) {
            return Err(Error::arg("probabilities must be nonnegative"));
        }
        Ok(ProbabilityVector { depth, values })
    }

    pub fn uniform(depth: usize) -> Result<Self> {
        check_depth("probability vector", depth, MAX_VECTOR_DEPTH)?;
        let n = 1usize << depth;
        ProbabilityVector::new(depth, vec![1.0 / n as f64; n])
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `(block, probability)` pairs in dyadic order.
    pub fn blocks(&self) -> impl Iterator<Item = (Block, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &p)| {
            let block = Block::new(BitVector::from_packed(i as u64, self.depth))
                .expect("depth already validated");
            (block, p)
        })
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] > w[1])
    }
}

/// Sums over all extensions of each `j`-bit prefix.
pub fn aggregate(p: &ProbabilityVector, j: usize) -> Result<ProbabilityVector> {
    if j > p.depth {
        return Err(Error::arg(format!(
            "cannot aggregate depth {} to depth {j}",
            p.depth
        )));
    }
    let group = 1usize << (p.depth - j);
    let values = p
        .values
        .chunks_exact(group)
        .map(|c| c.iter().sum())
        .collect();
    ProbabilityVector::new(j, values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub depth: usize,
    pub backend: Backend,
    pub iterations: usize,
    /// Max-norm difference of the last two iterates.
    pub residual: f64,
    pub solution: ProbabilityVector,
    pub p10: f64,
    pub p11: f64,
}

/// Power iteration from the uniform vector.
pub fn solve(k: usize, options: &SolveOptions, backend: Backend) -> Result<SolveReport> {
    validate(k, options, backend)?;
    solve_from(ProbabilityVector::uniform(k)?, options, backend)
}

fn validate(k: usize, options: &SolveOptions, backend: Backend) -> Result<()> {
    if k == 0 {
        return Err(Error::arg("depth must be at least 1"));
    }
    check_depth("solver", k, backend.max_depth())?;
    if options.tolerance.is_nan() || options.tolerance <= 0.0 {
        return Err(Error::arg("tolerance must be positive"));
    }
    if options.max_iterations == 0 {
        return Err(Error::arg("iteration cap must be positive"));
    }
    Ok(())
}

/// Power iteration from a caller-supplied start, which must have positive sum.
pub fn solve_from(
    start: ProbabilityVector,
    options: &SolveOptions,
    backend: Backend,
) -> Result<SolveReport> {
    let k = start.depth;
    validate(k, options, backend)?;
    let dense = match backend {
        Backend::Dense => Some(build_dense(k)?),
        Backend::Fast => None,
    };
    let step = |v: &[f64]| match &dense {
        Some(m) => apply_dense(m, v),
        None => apply_fast(v),
    };

    let mut current = start.values;
    normalize(&mut current)?;
    let mut residual = f64::INFINITY;
    for iteration in 1..=options.max_iterations {
        let mut next = step(&current)?;
        normalize(&mut next)?;
        residual = max_abs_diff(&next, &current);
        current = next;
        if residual <= options.tolerance {
            let solution = ProbabilityVector {
                depth: k,
                values: current,
            };
            let p10 = solution.values[..1 << (k - 1)].iter().sum();
            let p11 = solution.values[1 << (k - 1)..].iter().sum();
            return Ok(SolveReport {
                depth: k,
                backend,
                iterations: iteration,
                residual,
                solution,
                p10,
                p11,
            });
        }
    }
    Err(Error::Convergence {
        iterations: options.max_iterations,
        residual,
    })
}

fn normalize(v: &mut [f64]) -> Result<()> {
    let total: f64 = v.iter().sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::arg("iterate has no positive finite mass"));
    }
    v.iter_mut().for_each(|p| *p /= total);
    Ok(())
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `log_base(1 + 1/value)`: the Benford probability of the leading block whose
/// digits in `base` spell `value`.
pub fn benford_reference(value: u64, base: u32) -> Result<f64> {
    if base < 2 {
        return Err(Error::arg(format!("base must be at least 2, got {base}")));
    }
    if value == 0 {
        return Err(Error::arg("block value must be at least 1"));
    }
    Ok((1.0 / value as f64).ln_1p() / (base as f64).ln())
}

/// Base-2 Benford probability of a block, `log2((V + 1) / V)`.
pub fn benford_block_reference(block: &Block) -> f64 {
    benford_reference(block.value(), 2).expect("block values are at least 1")
}

/// `log2(3/2)`, the Benford probability of the two-bit block `10`.
pub fn benford_p10() -> f64 {
    1.5f64.log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub k: usize,
    pub p10: f64,
    pub benford_p10: f64,
    pub rel_err: f64,
}

/// One solve per `k = 1..=k_max`. Depths above the dense limit use the fast backend.
pub fn convergence_table(
    k_max: usize,
    options: &SolveOptions,
    backend: Backend,
) -> Result<Vec<ConvergenceRow>> {
    if k_max == 0 {
        return Err(Error::arg("k_max must be at least 1"));
    }
    check_depth("convergence table", k_max, MAX_VECTOR_DEPTH)?;
    let reference = benford_p10();
    (1..=k_max)
        .map(|k| {
            let backend = if k > backend.max_depth() {
                Backend::Fast
            } else {
                backend
            };
            let report = solve(k, options, backend)?;
            Ok(ConvergenceRow {
                k,
                p10: report.p10,
                benford_p10: reference,
                rel_err: (report.p10 - reference).abs() / reference,
            })
        })
        .collect()
}

/// `rel_err(k + 1) / rel_err(k)` for consecutive rows.
pub fn error_decay_ratios(rows: &[ConvergenceRow]) -> Result<Vec<f64>> {
    if rows.len() < 3 {
        return Err(Error::arg(format!(
            "need at least 3 rows for decay ratios, got {}",
            rows.len()
        )));
    }
    Ok(rows
        .windows(2)
        .map(|w| w[1].rel_err / w[0].rel_err)
        .collect())
}
