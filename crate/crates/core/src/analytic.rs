//! Numeric checks of the large-`k` limit of the recursion.
//!
//! Four identities are exercised:
//!
//! - the Riemann sum `sum_alpha 2^-k (1 + Q(alpha, x)) / (1 + alpha)^2` tends
//!   to `1 / (1 + x)`;
//! - each `Q` term integrates to a closed form over `[a_r, b_r]`, and the
//!   terms telescope: `1/2 + sum_{r<=R} term_r = 1 / (2 - t^[R])` with `t = 1 - x`;
//! - the harmonic block sum `sum_n 1 / (2^l V + n)` tends to `ln((V + 1) / V)`;
//! - the base-2 Benford probabilities over all `k`-bit blocks sum to one.
//!
//! [`run_suite`] evaluates them over a parameter grid and returns one
//! [`VerificationReport`] per check.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dyadic::{
    block_value, dyadic_value, q_definitional, q_fast, q_packed, truncate, BitVector, Block, Dyadic,
};
use crate::fixed_point::{benford_block_reference, max_abs_diff};
use crate::matrix::{
    apply_dense, apply_fast, brute_force_element, build_dense, matrix_element_exact,
};
use crate::{check_depth, Error, Result, MAX_DENSE_DEPTH, MAX_VECTOR_DEPTH};

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        iter.into_iter().for_each(|x| acc.add(x));
        acc
    }
}

/// `sum_{alpha} 2^-k (1 + Q(alpha, x)) / (1 + alpha)^2` over all `2^k` values
/// of `alpha`; `x` is zero-extended to `k` bits.
pub fn riemann_sum(x: &BitVector, k: usize) -> Result<f64> {
    check_depth("riemann sum", k, MAX_VECTOR_DEPTH)?;
    let x = x.zero_extend(k)?.packed()?;
    let scale = (1u64 << k) as f64;
    // 2^-k / (1 + a/2^k)^2 = 2^k / (2^k + a)^2
    let sum: CompensatedSum = (0..1u64 << k)
        .map(|a| {
            let d = scale + a as f64;
            (1 + q_packed(a, x)) as f64 * scale / (d * d)
        })
        .collect();
    Ok(sum.value())
}

/// The `r`-th term of the expansion of `1 / (2 - t)`, with its integration bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTerm {
    pub index: usize,
    pub bit: bool,
    /// `a_r = 1 - t^[r-1] - 2^-r`
    pub lower: Dyadic,
    /// `b_r = 1 - t^[r-1]`
    pub upper: Dyadic,
    /// `t_r (1/(1 + a_r) - 1/(1 + b_r))`
    pub bound_form: BigRational,
    /// `t_r 2^-r / ((2 - t^[r-1]) (2 - t^[r-1] - 2^-r))`
    pub product_form: BigRational,
}

impl SeriesTerm {
    pub fn value(&self) -> &BigRational {
        &self.bound_form
    }

    pub fn value_f64(&self) -> f64 {
        to_f64(&self.bound_form)
    }
}

fn rat(d: Dyadic) -> BigRational {
    d.to_rational()
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Builds term `r` (1-based) of the series for `t`.
pub fn term_integral(t: &BitVector, r: usize) -> Result<SeriesTerm> {
    if r == 0 || r > t.len() {
        return Err(Error::arg(format!(
            "term index {r} outside 1..={}",
            t.len()
        )));
    }
    check_depth("series term", r, 62)?;
    let prefix = truncate(t, r - 1)?;
    let step = Dyadic::pow2_neg(r as u32);
    let upper = Dyadic::ONE
        .checked_sub(prefix)
        .expect("truncation is below one");
    let lower = upper.checked_sub(step).expect("b_r is at least 2^-r");
    let bit = t.get(r - 1).unwrap();

    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let (bound_form, product_form) = if bit {
        let bound = one.clone() / (one.clone() + rat(lower)) - one.clone() / (one + rat(upper));
        let outer = two.clone() - rat(prefix);
        let inner = outer.clone() - rat(step);
        (bound, rat(step) / (outer * inner))
    } else {
        (BigRational::zero(), BigRational::zero())
    };
    Ok(SeriesTerm {
        index: r,
        bit,
        lower,
        upper,
        bound_form,
        product_form,
    })
}

/// `1/2 + sum_{r=1}^{R} term_r`, exactly.
pub fn series_partial_sum(t: &BitVector, terms: usize) -> Result<BigRational> {
    if terms > t.len() {
        return Err(Error::arg(format!(
            "partial sum length {terms} exceeds {} bits",
            t.len()
        )));
    }
    let mut sum = BigRational::new(1.into(), 2.into());
    for r in 1..=terms {
        sum += term_integral(t, r)?.bound_form;
    }
    Ok(sum)
}

/// `1 / (2 - t^[R])`, the closed form the partial sums telescope to.
pub fn telescoped_value(t: &BitVector, terms: usize) -> Result<BigRational> {
    let two = BigRational::from_integer(BigInt::from(2));
    Ok((two - rat(truncate(t, terms)?)).recip())
}

fn harmonic_args(block: &Block, l: u32) -> Result<u64> {
    if l == 0 {
        return Err(Error::arg("harmonic level must be at least 1"));
    }
    check_depth("harmonic level", l as usize, 32)?;
    let start = block.value().checked_shl(l).filter(|s| *s < 1 << 53);
    start.ok_or(Error::Depth {
        what: "harmonic block sum (bits of 2^l V)",
        depth: 64 - block.value().leading_zeros() as usize + l as usize,
        limit: 53,
    })
}

/// `sum_{n=0}^{2^l - 1} 1 / (2^l V + n)`: the reciprocals of every integer
/// whose leading block is `V`, at `l` trailing places.
pub fn harmonic_block_sum(block: &Block, l: u32) -> Result<f64> {
    Ok(harmonic_bracket(block, l)?.1)
}

/// `(sum_{n=1}^{2^l}, sum_{n=0}^{2^l - 1})` of `1 / (2^l V + n)`; the
/// logarithm `ln((V + 1) / V)` lies between them.
pub fn harmonic_bracket(block: &Block, l: u32) -> Result<(f64, f64)> {
    let start = harmonic_args(block, l)?;
    let len = 1u64 << l;
    let upper: CompensatedSum = (0..len).map(|n| 1.0 / (start + n) as f64).collect();
    let mut lower = upper;
    lower.add(-1.0 / start as f64);
    lower.add(1.0 / (start + len) as f64);
    Ok((lower.value(), upper.value()))
}

/// Checks that `sum log2((V + 1) / V)` over all `k`-bit blocks is one.
pub fn normalization_check(k: usize) -> Result<VerificationReport> {
    check_depth("normalization check", k, MAX_VECTOR_DEPTH)?;
    let sum: CompensatedSum = (1u64 << k..2u64 << k)
        .map(|v| (1.0 / v as f64).ln_1p() / std::f64::consts::LN_2)
        .collect();
    Ok(VerificationReport::new(
        "normalization",
        format!("k={k}"),
        (sum.value() - 1.0).abs(),
        1e-12,
    ))
}

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub identity: String,
    pub params: String,
    pub error: f64,
    pub bound: f64,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(
        identity: impl Into<String>,
        params: impl Into<String>,
        error: f64,
        bound: f64,
    ) -> Self {
        VerificationReport {
            identity: identity.into(),
            params: params.into(),
            error,
            bound,
            passed: error <= bound,
        }
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} err={:e} bound={:e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.identity,
            self.params,
            self.error,
            self.bound
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Matrix,
    Series,
    Integral,
    Harmonic,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matrix" => Ok(Suite::Matrix),
            "series" => Ok(Suite::Series),
            "integral" => Ok(Suite::Integral),
            "harmonic" => Ok(Suite::Harmonic),
            "all" => Ok(Suite::All),
            _ => Err(Error::arg(format!("unknown verification suite {s:?}"))),
        }
    }
}

/// Parameter grid for [`run_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteBudget {
    /// Depths for the Riemann-sum checks.
    pub riemann_depths: Vec<usize>,
    /// Length of the test points `x` (and `t`); clipped to the smallest Riemann depth.
    pub point_bits: usize,
    /// Number of random test points added to all-zeros, all-ones and alternating.
    pub random_points: usize,
    /// Length of `t` for the telescoping checks (`R` runs over `0..=series_bits`).
    pub series_bits: usize,
    /// Harmonic levels `l`.
    pub harmonic_levels: Vec<u32>,
    /// All blocks up to this depth enter the harmonic checks.
    pub harmonic_block_depth: usize,
    /// Extra block values for the harmonic checks.
    pub harmonic_values: Vec<u64>,
    /// Normalization is checked for `k = 1..=normalization_depth`.
    pub normalization_depth: usize,
    /// Exhaustive `Q` kernel comparison up to this depth.
    pub kernel_depth: usize,
    /// Exact column-sum check up to this depth.
    pub column_depth: usize,
    /// Counting oracle, exhaustive up to this depth.
    pub oracle_depth: usize,
    pub oracle_paddings: Vec<usize>,
    /// Fast/dense matvec comparison up to this depth.
    pub matvec_depth: usize,
    pub seed: u64,
}

impl Default for SuiteBudget {
    fn default() -> Self {
        SuiteBudget {
            riemann_depths: vec![10, 14, 16],
            point_bits: 8,
            random_points: 8,
            series_bits: 12,
            harmonic_levels: vec![10, 16, 20],
            harmonic_block_depth: 6,
            harmonic_values: vec![2, 3, 1000],
            normalization_depth: 10,
            kernel_depth: 8,
            column_depth: 10,
            oracle_depth: 6,
            oracle_paddings: vec![8, 16, 24],
            matvec_depth: 10,
            seed: 0x5eed,
        }
    }
}

impl SuiteBudget {
    fn test_points(&self, bits: usize) -> Vec<BitVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut points = vec![
            BitVector::zeros(bits),
            BitVector::ones(bits),
            BitVector::alternating(bits),
        ];
        points.extend(
            (0..self.random_points).map(|_| BitVector::new((0..bits).map(|_| rng.gen()).collect())),
        );
        points
    }
}

/// Runs every check in the selected suites. An empty selection yields no reports.
pub fn run_suite(selection: &[Suite], budget: &SuiteBudget) -> Result<Vec<VerificationReport>> {
    let wants = |s: Suite| selection.iter().any(|&x| x == s || x == Suite::All);
    let mut reports = Vec::new();
    if wants(Suite::Matrix) {
        reports.extend(matrix_checks(budget)?);
    }
    if wants(Suite::Series) {
        reports.extend(series_checks(budget)?);
    }
    if wants(Suite::Integral) {
        reports.extend(integral_checks(budget)?);
    }
    if wants(Suite::Harmonic) {
        reports.extend(harmonic_checks(budget)?);
    }
    Ok(reports)
}

fn matrix_checks(budget: &SuiteBudget) -> Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();

    for k in 0..=budget.kernel_depth.min(MAX_VECTOR_DEPTH) {
        let mut mismatches = 0u64;
        for a in 0..1u64 << k {
            let av = BitVector::from_packed(a, k);
            for x in 0..1u64 << k {
                let xv = BitVector::from_packed(x, k);
                let def = q_definitional(&av, &xv)?;
                if def > 1 || def != q_fast(&av, &xv)? as u32 {
                    mismatches += 1;
                }
            }
        }
        reports.push(VerificationReport::new(
            "q_kernel",
            format!("k={k}"),
            mismatches as f64,
            0.0,
        ));
    }

    for k in 1..=budget.column_depth.min(MAX_VECTOR_DEPTH) {
        // all entries of column a share the denominator 2^k + a
        let bad_columns = (0..1u64 << k)
            .into_par_iter()
            .filter(|&a| {
                let numer: u64 = (0..1u64 << k).map(|x| 1 + q_packed(a, x) as u64).sum();
                numer != (1u64 << k) + a
            })
            .count();
        reports.push(VerificationReport::new(
            "column_sums_exact",
            format!("k={k}"),
            bad_columns as f64,
            0.0,
        ));
    }

    for k in 1..=budget.oracle_depth {
        for &m in &budget.oracle_paddings {
            let n = 1u64 << k;
            let worst = (0..n)
                .into_par_iter()
                .map(|a| -> Result<f64> {
                    let av = BitVector::from_packed(a, k);
                    let mut worst = 0.0f64;
                    for x in 0..n {
                        let xv = BitVector::from_packed(x, k);
                        let diff =
                            brute_force_element(&xv, &av, m)? - matrix_element_exact(&xv, &av)?;
                        worst = worst.max(to_f64(&diff.abs()));
                    }
                    Ok(worst)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            reports.push(VerificationReport::new(
                "counting_oracle",
                format!("k={k},m={m}"),
                worst,
                (1.0 - m as f64).exp2(),
            ));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for k in 1..=budget.matvec_depth.min(MAX_DENSE_DEPTH) {
        let m = build_dense(k)?;
        let n = 1usize << k;
        let mut worst = 0.0f64;
        for trial in 0..10 {
            let v: Vec<f64> = if trial == 0 {
                vec![1.0 / n as f64; n]
            } else {
                (0..n).map(|_| rng.gen()).collect()
            };
            worst = worst.max(max_abs_diff(&apply_dense(&m, &v)?, &apply_fast(&v)?));
        }
        reports.push(VerificationReport::new(
            "fast_dense_matvec",
            format!("k={k}"),
            worst,
            1e-12,
        ));
    }
    Ok(reports)
}

fn series_checks(budget: &SuiteBudget) -> Result<Vec<VerificationReport>> {
    let bits = budget.series_bits;
    let mut reports = Vec::new();
    for t in budget.test_points(bits) {
        let mut worst_forms = BigRational::zero();
        let mut worst_telescope = BigRational::zero();
        for r in 0..=bits {
            if r > 0 {
                let term = term_integral(&t, r)?;
                worst_forms = worst_forms.max((&term.bound_form - &term.product_form).abs());
            }
            let diff = series_partial_sum(&t, r)? - telescoped_value(&t, r)?;
            worst_telescope = worst_telescope.max(diff.abs());
        }
        reports.push(VerificationReport::new(
            "term_closed_forms",
            format!("t={t}"),
            to_f64(&worst_forms),
            0.0,
        ));
        reports.push(VerificationReport::new(
            "telescoping_exact",
            format!("t={t},R=0..{bits}"),
            to_f64(&worst_telescope),
            0.0,
        ));
        let two = BigRational::from_integer(BigInt::from(2));
        let limit = (two - rat(dyadic_value(&t)?)).recip();
        let tail = (series_partial_sum(&t, bits)? - limit).abs();
        reports.push(VerificationReport::new(
            "series_tail",
            format!("t={t},R={bits}"),
            to_f64(&tail),
            (1.0 - bits as f64).exp2(),
        ));
    }
    Ok(reports)
}

fn integral_checks(budget: &SuiteBudget) -> Result<Vec<VerificationReport>> {
    let min_depth = budget.riemann_depths.iter().copied().min().unwrap_or(0);
    let bits = budget.point_bits.min(min_depth);
    let mut reports = Vec::new();
    for x in budget.test_points(bits) {
        let target = 1.0 / (1.0 + dyadic_value(&x)?.to_f64());
        let mut previous: Option<(usize, f64)> = None;
        for &k in &budget.riemann_depths {
            let err = (riemann_sum(&x, k)? - target).abs();
            reports.push(VerificationReport::new(
                "riemann_sum",
                format!("x={x},k={k}"),
                err,
                8.0 * (-(k as f64)).exp2(),
            ));
            if let Some((pk, perr)) = previous {
                reports.push(VerificationReport::new(
                    "riemann_decay",
                    format!("x={x},k={pk}->{k}"),
                    err,
                    perr,
                ));
            }
            previous = Some((k, err));
        }
    }
    Ok(reports)
}

fn harmonic_checks(budget: &SuiteBudget) -> Result<Vec<VerificationReport>> {
    let mut blocks = Vec::new();
    for k in 0..=budget.harmonic_block_depth {
        for bits in 0..1u64 << k {
            blocks.push(Block::new(BitVector::from_packed(bits, k))?);
        }
    }
    for &v in &budget.harmonic_values {
        blocks.push(Block::from_value(v)?);
    }
    blocks.sort_by_key(Block::value);
    blocks.dedup();
    let mut cases = Vec::new();
    for b in &blocks {
        for &l in &budget.harmonic_levels {
            cases.push((b.clone(), l));
        }
    }
    let mut reports: Vec<VerificationReport> = cases
        .par_iter()
        .map(|(b, l)| -> Result<Vec<VerificationReport>> {
            let v = b.value() as f64;
            let log = (1.0 / v).ln_1p();
            let (lower, upper) = harmonic_bracket(b, *l)?;
            let outside = (lower - log).max(log - upper).max(0.0);
            let params = format!("B={b},l={l}");
            Ok(vec![
                VerificationReport::new(
                    "harmonic_block_sum",
                    params.clone(),
                    (upper - log).abs(),
                    1.0 / (v * (*l as f64).exp2()),
                ),
                VerificationReport::new("harmonic_bracket", params, outside, 0.0),
            ])
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    for k in 1..=budget.normalization_depth {
        reports.push(normalization_check(k)?);
    }
    // the harmonic limit normalized by ln 2 is the Benford value
    for b in blocks.iter().filter(|b| b.depth() >= 1) {
        let l = *budget.harmonic_levels.iter().max().unwrap_or(&1);
        let normalized = harmonic_block_sum(b, l)? / std::f64::consts::LN_2;
        reports.push(VerificationReport::new(
            "harmonic_log2_form",
            format!("B={b},l={l}"),
            (normalized - benford_block_reference(b)).abs(),
            1.0 / (block_value(b.bits())? as f64 * (l as f64).exp2() * std::f64::consts::LN_2),
        ));
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn riemann_examples() {
        assert!((riemann_sum(&bv("0000"), 16).unwrap() - 1.0).abs() <= (-13f64).exp2());
        assert!((riemann_sum(&bv("1"), 16).unwrap() - 2.0 / 3.0).abs() <= (-13f64).exp2());
        assert!((riemann_sum(&bv("01"), 18).unwrap() - 0.8).abs() <= (-15f64).exp2());
        assert!(riemann_sum(&bv("101"), 2).is_err());
        assert!(matches!(riemann_sum(&bv(""), 25), Err(Error::Depth { .. })));
    }

    #[test]
    fn riemann_sum_matches_definitional_kernel() {
        for k in 0..=8usize {
            for x in 0..1u64 << k {
                let xv = BitVector::from_packed(x, k);
                let direct: f64 = (0..1u64 << k)
                    .map(|a| {
                        let av = BitVector::from_packed(a, k);
                        let alpha = dyadic_value(&av).unwrap().to_f64();
                        let q = q_definitional(&av, &xv).unwrap() as f64;
                        (1.0 + q) / (1u64 << k) as f64 / ((1.0 + alpha) * (1.0 + alpha))
                    })
                    .sum();
                assert!((riemann_sum(&xv, k).unwrap() - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn riemann_error_bound_and_decay() {
        let budget = SuiteBudget::default();
        for x in budget.test_points(8) {
            let target = 1.0 / (1.0 + dyadic_value(&x).unwrap().to_f64());
            let errs: Vec<f64> = [10usize, 12, 14, 16]
                .iter()
                .map(|&k| {
                    let e = (riemann_sum(&x, k).unwrap() - target).abs();
                    assert!(e <= 8.0 * (-(k as f64)).exp2(), "x={x} k={k} e={e}");
                    e
                })
                .collect();
            assert!(errs.windows(2).all(|w| w[1] < w[0]), "x={x} {errs:?}");
        }
    }

    #[test]
    fn term_examples() {
        let t = term_integral(&bv("1"), 1).unwrap();
        assert_eq!(t.lower, Dyadic::new(1, 1));
        assert_eq!(t.upper, Dyadic::ONE);
        assert_eq!(t.bound_form, ratio(1, 6));
        assert_eq!(t.product_form, ratio(1, 6));

        let t = term_integral(&bv("11"), 2).unwrap();
        assert_eq!(t.lower, Dyadic::new(1, 2));
        assert_eq!(t.upper, Dyadic::new(1, 1));
        assert_eq!(t.bound_form, ratio(2, 15));
        assert_eq!(t.product_form, ratio(2, 15));

        let t = term_integral(&bv("10"), 2).unwrap();
        assert!(t.bound_form.is_zero() && t.product_form.is_zero());
        assert_eq!(t.upper.checked_sub(t.lower), Some(Dyadic::pow2_neg(2)));

        assert!(term_integral(&bv("10"), 0).is_err());
        assert!(term_integral(&bv("10"), 3).is_err());
    }

    #[test]
    fn closed_forms_agree_exhaustively() {
        for len in 1..=8usize {
            for bits in 0..1u64 << len {
                let t = BitVector::from_packed(bits, len);
                for r in 1..=len {
                    let term = term_integral(&t, r).unwrap();
                    assert_eq!(term.bound_form, term.product_form, "t={t} r={r}");
                    let width = term.upper.checked_sub(term.lower).unwrap();
                    assert_eq!(width, Dyadic::pow2_neg(r as u32));
                }
            }
        }
    }

    #[test]
    fn telescoping_is_exact() {
        for len in 0..=12usize {
            let step = if len <= 8 { 1 } else { 37 };
            for bits in (0..1u64 << len).step_by(step) {
                let t = BitVector::from_packed(bits, len);
                for r in 0..=len {
                    assert_eq!(
                        series_partial_sum(&t, r).unwrap(),
                        telescoped_value(&t, r).unwrap(),
                        "t={t} R={r}"
                    );
                }
                let sums: Vec<_> = (0..=len)
                    .map(|r| series_partial_sum(&t, r).unwrap())
                    .collect();
                assert!(sums.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn series_examples() {
        for r in 0..=10 {
            assert_eq!(
                series_partial_sum(&BitVector::zeros(10), r).unwrap(),
                ratio(1, 2)
            );
        }
        // all ones: 1 / (2 - (1 - 2^-R)) = 2^R / (2^R + 1)
        for r in 0..=20usize {
            let got = series_partial_sum(&BitVector::ones(20), r).unwrap();
            assert_eq!(got, ratio(1 << r, (1 << r) + 1));
        }
        let t = BitVector::alternating(24);
        let limit = 1.0 / (2.0 - dyadic_value(&t).unwrap().to_f64());
        for r in 1..=24usize {
            let got = to_f64(&series_partial_sum(&t, r).unwrap());
            assert!((got - limit).abs() <= (1.0 - r as f64).exp2());
        }
        assert!(series_partial_sum(&bv("01"), 3).is_err());
    }

    #[test]
    fn harmonic_examples() {
        let b2 = Block::from_value(2).unwrap();
        let b3 = Block::from_value(3).unwrap();
        let b1 = Block::from_value(1).unwrap();
        assert!((harmonic_block_sum(&b2, 20).unwrap() - 1.5f64.ln()).abs() < 1e-6);
        assert!((harmonic_block_sum(&b3, 20).unwrap() - (4.0f64 / 3.0).ln()).abs() < 1e-6);
        assert!((harmonic_block_sum(&b1, 20).unwrap() - 2f64.ln()).abs() < 1e-6);
        let log2_form = harmonic_block_sum(&b3, 20).unwrap() / std::f64::consts::LN_2;
        assert!((log2_form - 0.4150375).abs() < 1e-6);
        assert!(harmonic_block_sum(&b2, 0).is_err());
        assert!(matches!(
            harmonic_block_sum(&Block::from_value(1 << 20).unwrap(), 33),
            Err(Error::Depth { .. })
        ));
    }

    #[test]
    fn harmonic_bracket_contains_log() {
        for v in [1u64, 2, 3, 5, 17, 1000] {
            let b = Block::from_value(v).unwrap();
            for l in [1u32, 4, 10, 16] {
                let (lo, hi) = harmonic_bracket(&b, l).unwrap();
                let log = (1.0 / v as f64).ln_1p();
                assert!(lo <= log && log <= hi, "V={v} l={l}");
                assert!(hi - log <= 1.0 / (v as f64 * (l as f64).exp2()));
            }
        }
    }

    #[test]
    fn normalization() {
        for k in 1..=10 {
            assert!(normalization_check(k).unwrap().passed);
        }
        assert!(normalization_check(20).unwrap().passed);
        assert!(normalization_check(25).is_err());
    }

    #[test]
    fn report_rendering() {
        let r = VerificationReport::new("riemann_sum", "x=01,k=16", 1.5e-6, 1.2e-4);
        assert!(r.passed);
        assert_eq!(
            r.to_string(),
            "PASS riemann_sum x=01,k=16 err=1.5e-6 bound=1.2e-4"
        );
        assert!(!VerificationReport::new("a", "b", 2.0, 1.0).passed);
    }

    #[test]
    fn suite_selection() {
        assert!(run_suite(&[], &SuiteBudget::default()).unwrap().is_empty());
        assert_eq!("harmonic".parse::<Suite>().unwrap(), Suite::Harmonic);
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn tiny_budget_runs_with_scaled_bounds() {
        let budget = SuiteBudget {
            riemann_depths: vec![2],
            point_bits: 2,
            random_points: 2,
            series_bits: 4,
            harmonic_levels: vec![4],
            harmonic_block_depth: 2,
            harmonic_values: vec![2],
            normalization_depth: 2,
            kernel_depth: 2,
            column_depth: 2,
            oracle_depth: 2,
            oracle_paddings: vec![2],
            matvec_depth: 2,
            seed: 1,
        };
        let reports = run_suite(&[Suite::All], &budget).unwrap();
        assert!(!reports.is_empty());
        for r in &reports {
            assert!(r.error.is_finite() && r.bound.is_finite(), "{r}");
        }
        let riemann: Vec<_> = reports
            .iter()
            .filter(|r| r.identity == "riemann_sum")
            .collect();
        assert_eq!(riemann.len(), 5);
        assert!(riemann.iter().all(|r| r.bound == 2.0));
        let harmonic = reports
            .iter()
            .find(|r| r.identity == "harmonic_block_sum" && r.params == "B=10,l=4")
            .unwrap();
        assert_eq!(harmonic.bound, 1.0 / 32.0);
        assert!(harmonic.error > 1e-3);
    }

    #[test]
    fn harmonic_suite_defaults_pass() {
        let reports = run_suite(&[Suite::Harmonic], &SuiteBudget::default()).unwrap();
        assert!(reports
            .iter()
            .any(|r| r.identity == "harmonic_block_sum" && r.params == "B=10,l=20"));
        for r in &reports {
            assert!(r.passed, "{r}");
        }
    }
}
