//! The scaled-probability transition matrix.
//!
//! Entry `(x, alpha)` is the frequency of the leading block `1x` among the
//! integers in `[0, 1alpha 0...0)`, in the limit of many trailing zeros:
//!
//! ```text
//! M[x, alpha] = (1 + Q(alpha, x)) / (2^k (1 + alpha)) = (1 + [alpha > x]) / (2^k + a)
//! ```
//!
//! where `a` is `alpha` packed as an integer. Rows and columns are indexed by
//! packed bit vectors in dyadic order.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::dyadic::{block_value, q_fast, q_packed, BitVector};
use crate::{check_depth, Error, Result, MAX_DENSE_DEPTH, MAX_VECTOR_DEPTH};

/// Largest `k + m` accepted by the counting oracle.
pub const MAX_ORACLE_BITS: usize = 40;

/// Dense `2^k x 2^k` transition matrix, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    depth: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        1 << self.depth
    }

    /// Entry at packed row `x`, packed column `alpha`.
    pub fn entry(&self, x: usize, alpha: usize) -> f64 {
        self.data[alpha * self.dim() + x]
    }

    pub fn column(&self, alpha: usize) -> &[f64] {
        let n = self.dim();
        &self.data[alpha * n..(alpha + 1) * n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim())
    }
}

/// Exact entry as a pair `(numerator, denominator) = (1 + Q, 2^k + a)`.
pub fn matrix_element_parts(x: &BitVector, alpha: &BitVector) -> Result<(u64, u64)> {
    let q = q_fast(alpha, x)?;
    Ok((1 + q as u64, block_value(alpha)?))
}

/// Exact entry as a rational.
pub fn matrix_element_exact(x: &BitVector, alpha: &BitVector) -> Result<BigRational> {
    let (n, d) = matrix_element_parts(x, alpha)?;
    Ok(BigRational::new(n.into(), d.into()))
}

/// `(1 + Q(alpha, x)) / (2^k (1 + alpha))`, rounded once.
pub fn matrix_element(x: &BitVector, alpha: &BitVector) -> Result<f64> {
    let (n, d) = matrix_element_parts(x, alpha)?;
    Ok(n as f64 / d as f64)
}

#[inline]
fn packed_element(k: usize, x: u64, alpha: u64) -> f64 {
    (1 + q_packed(alpha, x)) as f64 / ((1u64 << k) + alpha) as f64
}

/// Materializes all `4^k` entries.
pub fn build_dense(k: usize) -> Result<TransitionMatrix> {
    if k == 0 {
        return Err(Error::arg("dense matrix depth must be at least 1"));
    }
    check_depth("dense matrix", k, MAX_DENSE_DEPTH)?;
    let n = 1usize << k;
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(alpha, col)| {
        for (x, e) in col.iter_mut().enumerate() {
            *e = packed_element(k, x as u64, alpha as u64);
        }
    });
    Ok(TransitionMatrix { depth: k, data })
}

/// Plain `M v`, streaming columns. Rows are split across threads.
pub fn apply_dense(m: &TransitionMatrix, v: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    if v.len() != n {
        return Err(Error::arg(format!(
            "vector length {} does not match matrix dimension {n}",
            v.len()
        )));
    }
    let mut out = vec![0.0; n];
    let rows_per_task = (n / rayon::current_num_threads().max(1)).max(64);
    out.par_chunks_mut(rows_per_task)
        .enumerate()
        .for_each(|(chunk, rows)| {
            let start = chunk * rows_per_task;
            let end = start + rows.len();
            for (col, &va) in m.columns().zip(v) {
                for (o, &e) in rows.iter_mut().zip(&col[start..end]) {
                    *o += e * va;
                }
            }
        });
    Ok(out)
}

/// `M v` in `O(2^k)` without forming `M`.
///
/// With `u_a = v_a / (2^k + a)`, each output is `T + R_x` where `T = sum_a u_a`
/// and `R_x = sum_{a > x} u_a` is a suffix sum in dyadic order.
pub fn apply_fast(v: &[f64]) -> Result<Vec<f64>> {
    let n = v.len();
    if !n.is_power_of_two() {
        return Err(Error::arg(format!(
            "vector length {n} is not a power of two"
        )));
    }
    let k = n.trailing_zeros() as usize;
    check_depth("fast matvec", k, MAX_VECTOR_DEPTH)?;
    let scale = n as f64;
    let mut out = vec![0.0; n];
    let mut suffix = 0.0;
    for a in (0..n).rev() {
        out[a] = suffix;
        suffix += v[a] / (scale + a as f64);
    }
    let total = suffix;
    out.par_iter_mut().for_each(|o| *o += total);
    Ok(out)
}

/// Number of integers in `[lo, hi)` whose binary expansion starts with the
/// bits of `block` (which must be nonzero). Sums one clamped interval per bit
/// length instead of visiting integers.
pub fn count_leading_block(block: u64, lo: u64, hi: u64) -> u64 {
    assert!(block > 0, "leading block must be nonzero");
    let block_bits = 64 - block.leading_zeros();
    let top_bits = 64 - hi.saturating_sub(1).leading_zeros();
    (block_bits..=top_bits.max(block_bits))
        .map(|len| {
            let shift = len - block_bits;
            let start = (block as u128) << shift;
            let end = (block as u128 + 1) << shift;
            let (lo, hi) = (start.max(lo as u128), end.min(hi as u128));
            hi.saturating_sub(lo) as u64
        })
        .sum()
}

fn oracle_scale(alpha: &BitVector, m: usize) -> Result<u64> {
    if m == 0 {
        return Err(Error::arg("padding must be at least 1"));
    }
    check_depth("counting oracle (k + m)", alpha.len() + m, MAX_ORACLE_BITS)?;
    Ok(block_value(alpha)? << m)
}

/// Exact frequency of the block `1x` among integers in `[0, 1alpha 0^m)`,
/// by direct counting.
pub fn brute_force_element(x: &BitVector, alpha: &BitVector, m: usize) -> Result<BigRational> {
    if x.len() != alpha.len() {
        return Err(Error::arg(format!(
            "bit vectors differ in length: {} vs {}",
            x.len(),
            alpha.len()
        )));
    }
    let scale = oracle_scale(alpha, m)?;
    let count = count_leading_block(block_value(x)?, 0, scale);
    Ok(BigRational::new(count.into(), scale.into()))
}

/// Partition of `[0, 1alpha 0^m)` into `S_0 = [0, 2^(k+m))` and, for each
/// `r >= 1`, `S_r = [1a1..a(r-1)0 0.., 1a1..a(r-1)ar 0..)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkDecomposition {
    pub alpha: BitVector,
    pub padding: usize,
    /// `k + 2` endpoints; chunk `r` is `[boundaries[r], boundaries[r + 1])`.
    pub boundaries: Vec<u64>,
    pub sizes: Vec<u64>,
}

pub fn chunk_decomposition(alpha: &BitVector, m: usize) -> Result<ChunkDecomposition> {
    oracle_scale(alpha, m)?;
    let k = alpha.len();
    let mut boundaries = vec![0u64, 1u64 << (k + m)];
    let mut sizes = vec![1u64 << (k + m)];
    for r in 1..=k {
        let size = (alpha.get(r - 1).unwrap() as u64) << (m + k - r);
        sizes.push(size);
        boundaries.push(boundaries[r] + size);
    }
    Ok(ChunkDecomposition {
        alpha: alpha.clone(),
        padding: m,
        boundaries,
        sizes,
    })
}

impl ChunkDecomposition {
    pub fn depth(&self) -> usize {
        self.alpha.len()
    }

    pub fn total(&self) -> u64 {
        self.sizes.iter().sum()
    }

    /// Population fractions `p_0 .. p_k` of the target block `1x`:
    /// `p_0 = 2^-k` and `p_r = [prefix matches][x_r = 0] 2^-(k-r)`.
    pub fn population_fractions(&self, x: &BitVector) -> Result<Vec<BigRational>> {
        let k = self.depth();
        if x.len() != k {
            return Err(Error::arg(format!(
                "target has {} bits, decomposition has depth {k}",
                x.len()
            )));
        }
        let pow2 = |e: usize| BigInt::from(1u8) << e;
        let mut p = vec![BigRational::new(1.into(), pow2(k))];
        for r in 1..=k {
            let matches =
                (0..r - 1).all(|i| self.alpha.get(i) == x.get(i)) && !x.get(r - 1).unwrap();
            p.push(if matches {
                BigRational::new(1.into(), pow2(k - r))
            } else {
                BigRational::from_integer(0.into())
            });
        }
        Ok(p)
    }

    /// `sum p_r |S_r| / sum |S_r|`, the chunk-weighted scaled probability.
    pub fn scaled_probability(&self, x: &BitVector) -> Result<BigRational> {
        let weighted = self
            .population_fractions(x)?
            .into_iter()
            .zip(&self.sizes)
            .map(|(p, &s)| p * BigInt::from(s))
            .fold(BigRational::from_integer(0.into()), |acc, t| acc + t);
        Ok(weighted / BigInt::from(self.total()))
    }
}
