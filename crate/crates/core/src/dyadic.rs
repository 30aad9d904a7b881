//! Bit vectors, leading blocks and exact dyadic fractions.
//!
//! A [`BitVector`] `b1..bk` plays three roles: the tail of a leading block
//! `1 b1..bk`, the fractional part `0.b1..bk` of that block, and (packed
//! most-significant-bit first) an index into vectors of length `2^k`. Packing
//! MSB-first makes integer order on packed words equal to dyadic order.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::{check_depth, Error, Result, MAX_VECTOR_DEPTH};

/// An ordered sequence of binary digits, most significant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitVector {
    bits: Vec<bool>,
}

impl BitVector {
    pub fn new(bits: Vec<bool>) -> Self {
        BitVector { bits }
    }

    /// Builds from digits that must each be 0 or 1.
    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        digits
            .iter()
            .map(|&d| match d {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(Error::arg(format!("binary digit must be 0 or 1, got {d}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitVector::new)
    }

    pub fn zeros(k: usize) -> Self {
        BitVector::new(vec![false; k])
    }

    pub fn ones(k: usize) -> Self {
        BitVector::new(vec![true; k])
    }

    /// `1010...` of length `k`, starting with a one.
    pub fn alternating(k: usize) -> Self {
        BitVector::new((0..k).map(|i| i % 2 == 0).collect())
    }

    /// Unpacks the low `k` bits of `word`, MSB first. Requires `k <= 64`.
    pub fn from_packed(word: u64, k: usize) -> Self {
        assert!(k <= 64, "cannot unpack {k} bits from a u64");
        BitVector::new((0..k).map(|i| (word >> (k - 1 - i)) & 1 == 1).collect())
    }

    /// Packs MSB first: `sum b_i 2^(k-i)`.
    pub fn packed(&self) -> Result<u64> {
        check_depth("packed bit vector", self.len(), 64)?;
        Ok(self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Zero-based access: `get(0)` is `b1`.
    pub fn get(&self, i: usize) -> Option<bool> {
        self.bits.get(i).copied()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    /// Pads with trailing zeros up to length `k`; the dyadic value is unchanged.
    pub fn zero_extend(&self, k: usize) -> Result<Self> {
        if k < self.len() {
            return Err(Error::arg(format!(
                "cannot zero-extend {} bits to {k}",
                self.len()
            )));
        }
        let mut bits = self.bits.clone();
        bits.resize(k, false);
        Ok(BitVector::new(bits))
    }

    /// The first `r` bits.
    pub fn prefix(&self, r: usize) -> Result<Self> {
        if r > self.len() {
            return Err(Error::arg(format!(
                "prefix length {r} exceeds length {}",
                self.len()
            )));
        }
        Ok(BitVector::new(self.bits[..r].to_vec()))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::arg(format!("not a binary digit: {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitVector::new)
    }
}

impl From<Vec<bool>> for BitVector {
    fn from(bits: Vec<bool>) -> Self {
        BitVector::new(bits)
    }
}

/// A leading significant block `1 b1..bk` in base 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block {
    bits: BitVector,
    value: u64,
}

impl Block {
    pub fn new(bits: BitVector) -> Result<Self> {
        let value = block_value(&bits)?;
        Ok(Block { bits, value })
    }

    /// The block whose integer value is `value` (so its depth is `floor(log2 value)`).
    pub fn from_value(value: u64) -> Result<Self> {
        if value == 0 {
            return Err(Error::arg("a leading block has value at least 1"));
        }
        let depth = 63 - value.leading_zeros() as usize;
        check_depth("block", depth, MAX_VECTOR_DEPTH)?;
        let bits = BitVector::from_packed(value - (1 << depth), depth);
        Ok(Block { bits, value })
    }

    pub fn depth(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn value(&self) -> u64 {
        self.value
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1{}", self.bits)
    }
}

impl FromStr for Block {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix('1') {
            Some(rest) => Block::new(rest.parse()?),
            None => Err(Error::arg(format!("block {s:?} must start with 1"))),
        }
    }
}

/// An exact non-negative dyadic rational `numer / 2^exp`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numer: u64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { numer: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { numer: 1, exp: 0 };

    pub fn new(numer: u64, exp: u32) -> Self {
        assert!(exp < 64, "dyadic exponent {exp} out of range");
        if numer == 0 {
            return Dyadic::ZERO;
        }
        let shift = numer.trailing_zeros().min(exp);
        Dyadic {
            numer: numer >> shift,
            exp: exp - shift,
        }
    }

    /// `2^-r`.
    pub fn pow2_neg(r: u32) -> Self {
        Dyadic::new(1, r)
    }

    pub fn numer(&self) -> u64 {
        self.numer
    }

    /// Exponent of the (lowest-terms) power-of-two denominator.
    pub fn exp(&self) -> u32 {
        self.exp
    }

    /// Numerator over the common denominator `2^exp`, which must be at least `self.exp`.
    fn scaled_to(self, exp: u32) -> u128 {
        (self.numer as u128) << (exp - self.exp)
    }

    pub fn checked_sub(self, rhs: Dyadic) -> Option<Dyadic> {
        let exp = self.exp.max(rhs.exp);
        let diff = self.scaled_to(exp).checked_sub(rhs.scaled_to(exp))?;
        Some(Dyadic::from_wide(diff, exp))
    }

    fn from_wide(numer: u128, exp: u32) -> Dyadic {
        if numer == 0 {
            return Dyadic::ZERO;
        }
        let shift = numer.trailing_zeros().min(exp);
        let numer = numer >> shift;
        Dyadic {
            numer: u64::try_from(numer).expect("dyadic numerator overflow"),
            exp: exp - shift,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.numer as f64 / (self.exp as f64).exp2()
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.numer), BigInt::from(1u8) << self.exp)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        Dyadic::from_wide(self.scaled_to(exp) + rhs.scaled_to(exp), exp)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        self.scaled_to(exp).cmp(&other.scaled_to(exp))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/2^{}", self.numer, self.exp)
        }
    }
}

/// Integer value of the block `1 b1..bk`: `2^k + sum b_i 2^(k-i)`.
pub fn block_value(bits: &BitVector) -> Result<u64> {
    check_depth("block value", bits.len(), MAX_VECTOR_DEPTH)?;
    Ok((1u64 << bits.len()) | bits.packed()?)
}

/// `0.b1..bk = sum b_i 2^-i`, exactly.
pub fn dyadic_value(bits: &BitVector) -> Result<Dyadic> {
    check_depth("dyadic value", bits.len(), MAX_VECTOR_DEPTH)?;
    Ok(Dyadic::new(bits.packed()?, bits.len() as u32))
}

fn check_same_len(alpha: &BitVector, x: &BitVector) -> Result<()> {
    if alpha.len() != x.len() {
        return Err(Error::arg(format!(
            "bit vectors differ in length: {} vs {}",
            alpha.len(),
            x.len()
        )));
    }
    Ok(())
}

/// The `Q` kernel evaluated literally as a sum of delta products:
/// term `r` is `alpha_r [x_r = 0] prod_{i<r} [alpha_i = x_i]`.
pub fn q_definitional(alpha: &BitVector, x: &BitVector) -> Result<u32> {
    check_same_len(alpha, x)?;
    let mut total = 0;
    for r in 0..alpha.len() {
        let prefix_equal: u32 = (0..r)
            .map(|i| u32::from(alpha.bits[i] == x.bits[i]))
            .product();
        total += u32::from(alpha.bits[r]) * u32::from(!x.bits[r]) * prefix_equal;
    }
    Ok(total)
}

/// The `Q` kernel as a comparison: 1 iff `alpha > x` as binary fractions.
pub fn q_fast(alpha: &BitVector, x: &BitVector) -> Result<u8> {
    check_same_len(alpha, x)?;
    let first_diff = alpha.iter().zip(x.iter()).find(|(a, b)| a != b);
    Ok(matches!(first_diff, Some((true, false))) as u8)
}

/// [`q_fast`] on MSB-first packed words of equal length.
#[inline]
pub fn q_packed(alpha: u64, x: u64) -> u8 {
    (alpha > x) as u8
}

/// Flips every bit (`t_r = 1 - x_r`).
pub fn complement(x: &BitVector) -> BitVector {
    BitVector::new(x.iter().map(|b| !b).collect())
}

/// `t^[r] = t1/2 + ... + tr/2^r`, the first `r` places of `t`.
pub fn truncate(t: &BitVector, r: usize) -> Result<Dyadic> {
    if r > t.len() {
        return Err(Error::arg(format!(
            "truncation order {r} exceeds length {}",
            t.len()
        )));
    }
    dyadic_value(&t.prefix(r)?)
}
