use benford_core::empirical::{
    frequency_report, generate_blocks, leading_block, leading_block_big, Family, SequenceSpec,
};
use num_bigint::BigUint;
use proptest::prelude::*;

/// Terms built incrementally with big integers, independent of the window.
fn exact_terms(family: Family, count: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(count);
    match family {
        Family::PowersOfThree => {
            let mut v = BigUint::from(1u8);
            for _ in 0..count {
                v *= 3u8;
                out.push(v.clone());
            }
        }
        Family::Fibonacci => {
            let (mut a, mut b) = (BigUint::from(1u8), BigUint::from(1u8));
            for _ in 0..count {
                out.push(a.clone());
                let next = &a + &b;
                a = std::mem::replace(&mut b, next);
            }
        }
        Family::Factorial => {
            let mut v = BigUint::from(1u8);
            for i in 1..=count as u64 {
                v *= i;
                out.push(v.clone());
            }
        }
        Family::Rearranged => {
            let mut fours = (1u64..).map(|i| 4 * i);
            let mut rest = (1u64..).filter(|i| i % 4 != 0);
            for i in 0..count {
                let v = if i % 2 == 0 {
                    rest.next()
                } else {
                    fours.next()
                };
                out.push(BigUint::from(v.unwrap()));
            }
        }
    }
    out
}

const FAMILIES: [Family; 4] = [
    Family::PowersOfThree,
    Family::Fibonacci,
    Family::Factorial,
    Family::Rearranged,
];

#[test]
fn window_matches_exact_blocks_for_first_200_terms() {
    for family in FAMILIES {
        let exact = exact_terms(family, 200);
        for base in [2u32, 3, 10] {
            for depth in 0..=8usize {
                let spec = SequenceSpec {
                    family,
                    count: 200,
                    depth,
                    base,
                };
                let got: Vec<_> = generate_blocks(&spec).unwrap().collect();
                for (i, (g, e)) in got.iter().zip(&exact).enumerate() {
                    let want = leading_block_big(e, depth, base).unwrap();
                    assert_eq!(g, &want, "{family} base={base} j={depth} term {}", i + 1);
                }
            }
        }
    }
}

#[test]
fn window_matches_exact_blocks_deep_into_the_sequence() {
    for family in [Family::PowersOfThree, Family::Fibonacci, Family::Factorial] {
        let exact = exact_terms(family, 3000);
        for (base, depth) in [(2u32, 12usize), (10, 4)] {
            let spec = SequenceSpec {
                family,
                count: 3000,
                depth,
                base,
            };
            let mut stream = generate_blocks(&spec).unwrap();
            for (i, e) in exact.iter().enumerate() {
                let want = leading_block_big(e, depth, base).unwrap();
                assert_eq!(
                    stream.next().unwrap(),
                    want,
                    "{family} base={base} term {}",
                    i + 1
                );
            }
            assert!(stream.next().is_none());
        }
    }
}

#[test]
fn powers_of_three_follow_benford() {
    let spec = SequenceSpec {
        family: Family::PowersOfThree,
        count: 100_000,
        depth: 1,
        base: 2,
    };
    let r = frequency_report(generate_blocks(&spec).unwrap(), 1, 2).unwrap();
    assert!(r.max_deviation <= 0.01, "max_dev={}", r.max_deviation);
    assert_eq!((r.total, r.excluded), (100_000, 0));
}

#[test]
fn powers_of_three_first_decimal_digit() {
    let spec = SequenceSpec {
        family: Family::PowersOfThree,
        count: 100_000,
        depth: 0,
        base: 10,
    };
    let r = frequency_report(generate_blocks(&spec).unwrap(), 0, 10).unwrap();
    let ones = &r.rows[0];
    assert_eq!(ones.block.to_string(), "1");
    assert!((ones.observed - 0.301).abs() <= 0.01, "{}", ones.observed);
    assert_eq!(r.degrees_of_freedom, 8);
}

#[test]
fn clipped_terms_are_excluded() {
    // fibonacci 1, 1, 2, 3, 5: the two leading ones have a single bit
    let spec = SequenceSpec {
        family: Family::Fibonacci,
        count: 5,
        depth: 1,
        base: 2,
    };
    let r = frequency_report(generate_blocks(&spec).unwrap(), 1, 2).unwrap();
    assert_eq!(r.excluded, 2);
    assert_eq!(r.total, 3);
    assert_eq!(r.rows[0].count, 2); // 2 = 10, 5 = 101
    assert_eq!(r.rows[1].count, 1); // 3 = 11
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn leading_block_is_scale_free(v in 1u64.., m in 0u32..40, j in 0usize..6, base in 2u32..=16) {
        let scaled = BigUint::from(v) * BigUint::from(base).pow(m);
        prop_assert_eq!(
            leading_block(v, j, base).unwrap(),
            leading_block_big(&scaled, j, base).unwrap()
        );
    }
}
