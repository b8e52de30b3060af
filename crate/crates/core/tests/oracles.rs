//! Library results against oracles that live here and share no code with it.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use pdq_core::partitions::{
    enumerate_pd, partition_numbers, pd2_eta_series, pd_product_series, PartRestriction,
};
use pdq_core::{pochhammer_series, CoefficientRing};

/// `PD_2(0..25)`, counted by a brute-force walk over partitions into odd parts.
const PD2_SMALL: [u64; 25] = [
    1, 1, 2, 4, 5, 8, 12, 16, 22, 32, 42, 56, 76, 98, 128, 168, 213, 272, 348, 436, 548, 688, 852,
    1056, 1308,
];

/// `PD(0..25)`, same walk without the parity restriction.
const PD_SMALL: [u64; 25] = [
    1, 1, 3, 5, 10, 15, 28, 41, 69, 102, 160, 231, 352, 498, 732, 1027, 1470, 2031, 2856, 3896,
    5382, 7272, 9896, 13233, 17800,
];

/// `prod_{k >= 1} (1 - q^{rk})` below `order`, by multiplying in one
/// binomial at a time.
fn naive_f(r: usize, order: usize) -> Vec<i64> {
    let mut c = vec![0i64; order];
    c[0] = 1;
    let mut step = r;
    while step < order {
        for n in (step..order).rev() {
            c[n] -= c[n - step];
        }
        step += r;
    }
    c
}

/// Coefficients of `prod_{i odd} (1 + sum_j j q^{ij})` modulo 2^64.
fn pd2_wrapping(order: usize) -> Vec<u64> {
    let mut c = vec![0u64; order];
    c[0] = 1;
    for part in (1..order).step_by(2) {
        let old = c.clone();
        for n in part..order {
            let mut add = 0u64;
            let mut j = 1;
            while j * part <= n {
                add = add.wrapping_add((j as u64).wrapping_mul(old[n - j * part]));
                j += 1;
            }
            c[n] = old[n].wrapping_add(add);
        }
    }
    c
}

/// `p(n)` by the coin-change recurrence.
fn partition_counts(order: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::from(0); order];
    p[0] = BigInt::from(1);
    for part in 1..order {
        for n in part..order {
            let prev = p[n - part].clone();
            p[n] += prev;
        }
    }
    p
}

fn as_u64_wrapping(v: &BigInt) -> u64 {
    let m = BigInt::from(1u128 << 64);
    ((v % &m + &m) % &m).to_u64().unwrap()
}

#[test]
fn pochhammer_matches_naive_product() {
    let order = 2000;
    for r in 1..=24 {
        let s = pochhammer_series(r, order, CoefficientRing::Integers).unwrap();
        let naive = naive_f(r as usize, order);
        for (n, &expected) in naive.iter().enumerate() {
            assert_eq!(
                s.coefficient(n).unwrap(),
                BigInt::from(expected),
                "f{r} at q^{n}"
            );
        }
    }
}

#[test]
fn frozen_small_values() {
    let eta = pd2_eta_series(25, CoefficientRing::Integers).unwrap();
    let odd =
        pd_product_series(25, PartRestriction::KRegular(2), CoefficientRing::Integers).unwrap();
    let all = pd_product_series(25, PartRestriction::All, CoefficientRing::Integers).unwrap();
    for n in 0..25 {
        assert_eq!(
            eta.coefficient(n).unwrap(),
            BigInt::from(PD2_SMALL[n]),
            "n={n}"
        );
        assert_eq!(
            odd.coefficient(n).unwrap(),
            BigInt::from(PD2_SMALL[n]),
            "n={n}"
        );
        assert_eq!(
            all.coefficient(n).unwrap(),
            BigInt::from(PD_SMALL[n]),
            "n={n}"
        );
        assert_eq!(
            enumerate_pd(n as u32, PartRestriction::KRegular(2)).unwrap(),
            PD2_SMALL[n]
        );
        assert_eq!(
            enumerate_pd(n as u32, PartRestriction::All).unwrap(),
            PD_SMALL[n]
        );
    }
}

#[test]
fn eta_series_matches_wrapping_product_to_2000() {
    let order = 2000;
    let eta = pd2_eta_series(order, CoefficientRing::Integers).unwrap();
    let oracle = pd2_wrapping(order);
    for (n, &expected) in oracle.iter().enumerate() {
        assert_eq!(
            as_u64_wrapping(&eta.coefficient(n).unwrap()),
            expected,
            "n={n}"
        );
    }
}

#[test]
fn partition_numbers_match_recurrence() {
    let order = 600;
    let p = partition_numbers(order).unwrap();
    for (n, expected) in partition_counts(order).into_iter().enumerate() {
        assert_eq!(p.coefficient(n).unwrap(), expected, "p({n})");
    }
}

#[test]
fn modular_backend_matches_reduced_integers() {
    let order = 1500;
    let exact = pd2_eta_series(order, CoefficientRing::Integers).unwrap();
    for m in [2u64, 4, 8, 16, 3, 5, 1_000_003] {
        let fast = pd2_eta_series(order, CoefficientRing::modulo(m).unwrap()).unwrap();
        assert_eq!(fast, exact.reduce_mod(m).unwrap(), "mod {m}");
    }
}
