//! CSV and JSON renderings for each subcommand.

use std::fmt::Write as _;

use benford_core::analytic::VerificationReport;
use benford_core::dyadic::{BitVector, Block};
use benford_core::empirical::{FrequencyReport, RearrangementDemo};
use benford_core::fixed_point::{benford_p10, ConvergenceRow, SolveReport};
use benford_core::matrix::matrix_element;
use serde::{Deserialize, Serialize};

/// Shortest round-trip decimal, switching to exponent form for tiny or huge values.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `x` truncated (toward zero) to six decimals.
pub fn six_decimals(x: f64) -> String {
    let full = format!("{x:.15}");
    let dot = full.find('.').expect("fixed formatting has a point");
    full[..dot + 7].to_string()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BlockProbability {
    pub block: String,
    pub p: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolveOutput {
    pub k: usize,
    pub backend: String,
    pub iterations: usize,
    pub residual: f64,
    pub p10: f64,
    pub p11: f64,
    pub benford_p10: f64,
    pub rel_err: f64,
    pub probabilities: Vec<BlockProbability>,
}

impl From<&SolveReport> for SolveOutput {
    fn from(r: &SolveReport) -> Self {
        let reference = benford_p10();
        SolveOutput {
            k: r.depth,
            backend: r.backend.to_string(),
            iterations: r.iterations,
            residual: r.residual,
            p10: r.p10,
            p11: r.p11,
            benford_p10: reference,
            rel_err: (r.p10 - reference).abs() / reference,
            probabilities: r
                .solution
                .blocks()
                .map(|(block, p)| BlockProbability {
                    block: block.to_string(),
                    p,
                })
                .collect(),
        }
    }
}

pub fn solve_json(r: &SolveReport) -> serde_json::Result<String> {
    serde_json::to_string_pretty(&SolveOutput::from(r)).map(|s| s + "\n")
}

pub fn solve_csv(r: &SolveReport) -> String {
    let mut out = String::from("block,p\n");
    for (block, p) in r.solution.blocks() {
        let _ = writeln!(out, "{block},{}", num(p));
    }
    let _ = writeln!(
        out,
        "p10={} p11={} iterations={} residual={} backend={}",
        num(r.p10),
        num(r.p11),
        r.iterations,
        num(r.residual),
        r.backend
    );
    out
}

pub fn table_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("k,p10,benford_p10,rel_err\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.k,
            six_decimals(row.p10),
            num(row.benford_p10),
            num(row.rel_err)
        );
    }
    out
}

pub fn table_json(rows: &[ConvergenceRow]) -> serde_json::Result<String> {
    serde_json::to_string_pretty(rows).map(|s| s + "\n")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub x_bits: String,
    pub alpha_bits: String,
    pub value: f64,
}

pub fn matrix_entries(k: usize) -> anyhow::Result<Vec<MatrixEntry>> {
    let n = 1u64 << k;
    let mut entries = Vec::with_capacity((n * n) as usize);
    for x in 0..n {
        let xv = BitVector::from_packed(x, k);
        for a in 0..n {
            let av = BitVector::from_packed(a, k);
            entries.push(MatrixEntry {
                x_bits: Block::new(xv.clone())?.to_string(),
                alpha_bits: Block::new(av.clone())?.to_string(),
                value: matrix_element(&xv, &av)?,
            });
        }
    }
    Ok(entries)
}

pub fn matrix_csv(entries: &[MatrixEntry]) -> String {
    let mut out = String::from("x_bits,alpha_bits,value\n");
    for e in entries {
        let _ = writeln!(out, "{},{},{}", e.x_bits, e.alpha_bits, num(e.value));
    }
    out
}

pub fn matrix_json(entries: &[MatrixEntry]) -> serde_json::Result<String> {
    serde_json::to_string_pretty(entries).map(|s| s + "\n")
}

pub fn verify_lines(reports: &[VerificationReport]) -> String {
    reports.iter().map(|r| format!("{r}\n")).collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FrequencyRowOutput {
    pub block: String,
    pub observed_count: u64,
    pub observed_freq: f64,
    pub expected_freq: f64,
    pub abs_dev: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EmpiricalOutput {
    pub family: String,
    pub n: usize,
    pub base: u32,
    pub bits: usize,
    pub counted: u64,
    pub excluded: u64,
    pub rows: Vec<FrequencyRowOutput>,
    pub chi2: f64,
    pub dof: usize,
    pub max_dev: f64,
}

pub fn empirical_output(family: &str, n: usize, r: &FrequencyReport) -> EmpiricalOutput {
    EmpiricalOutput {
        family: family.to_string(),
        n,
        base: r.base,
        bits: r.depth,
        counted: r.total,
        excluded: r.excluded,
        rows: r
            .rows
            .iter()
            .map(|row| FrequencyRowOutput {
                block: row.block.to_string(),
                observed_count: row.count,
                observed_freq: row.observed,
                expected_freq: row.expected,
                abs_dev: row.abs_dev,
            })
            .collect(),
        chi2: r.chi_square,
        dof: r.degrees_of_freedom,
        max_dev: r.max_deviation,
    }
}

pub fn empirical_csv(r: &FrequencyReport) -> String {
    let mut out = String::from("block,observed_count,observed_freq,expected_freq,abs_dev\n");
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.block,
            row.count,
            num(row.observed),
            num(row.expected),
            num(row.abs_dev)
        );
    }
    let _ = writeln!(
        out,
        "chi2={} dof={} max_dev={}",
        num(r.chi_square),
        r.degrees_of_freedom,
        num(r.max_deviation)
    );
    out
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MembershipRow {
    pub sequence: String,
    pub n: u64,
    pub multiples_of_4: u64,
    pub freq: f64,
}

pub fn demo_rows(d: &RearrangementDemo) -> Vec<MembershipRow> {
    vec![
        MembershipRow {
            sequence: "natural".into(),
            n: d.n,
            multiples_of_4: d.natural_hits,
            freq: d.natural(),
        },
        MembershipRow {
            sequence: "rearranged".into(),
            n: d.n,
            multiples_of_4: d.rearranged_hits,
            freq: d.rearranged(),
        },
    ]
}

pub fn demo_csv(rows: &[MembershipRow]) -> String {
    let mut out = String::from("sequence,n,multiples_of_4,freq\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.sequence,
            r.n,
            r.multiples_of_4,
            num(r.freq)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_to_six_places() {
        assert_eq!(six_decimals(4.0 / 7.0), "0.571428");
        assert_eq!(six_decimals(0.5849337261045292), "0.584933");
        assert_eq!(six_decimals(0.5), "0.500000");
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.4, 2.0 / 3.0, 1e-17, 3.5e-6, 0.0, 123456.789] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.4), "0.4");
        assert_eq!(num(1e-17), "1e-17");
    }

    #[test]
    fn matrix_rows_are_x_major() {
        let csv = matrix_csv(&matrix_entries(1).unwrap());
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "x_bits,alpha_bits,value");
        assert_eq!(lines[1], "10,10,0.5");
        assert_eq!(lines[2], format!("10,11,{}", 2.0 / 3.0));
        assert_eq!(lines[3], "11,10,0.5");
        assert_eq!(lines[4], format!("11,11,{}", 1.0 / 3.0));
    }
}
