//! Partitions with designated summands, counted without eta quotients.
//!
//! A partition whose distinct parts occur with multiplicities `m_1..m_d`
//! yields `m_1 * ... * m_d` designated objects (one marked copy per distinct
//! part). Two oracles follow from that: direct enumeration for small weights,
//! and the per-part product `prod_i (1 + sum_{j>=1} j q^{ij})` for long
//! series. Neither touches the eta-quotient expander.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::pochhammer::{self, EtaError, EtaQuotient};
use crate::report::{VerificationReport, Witness};
use crate::series::{CoefficientRing, Comparison, SeriesError, TruncatedSeries};

/// Weights above this are refused by [`enumerate_pd`].
pub const ENUMERATION_BOUND: u32 = 40;

/// The eta-quotient generating function of `PD_2(n)`.
pub const PD2_GENERATING_FUNCTION: &str = "f4*f6^2/(f1*f3*f12)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("enumeration is limited to n <= {ENUMERATION_BOUND}, got {0}")]
    EnumerationBound(u32),
    #[error("k-regular restriction needs k >= 2, got {0}")]
    InvalidRestriction(u64),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Eta(#[from] EtaError),
}

/// Which part sizes a partition may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartRestriction {
    All,
    /// No part divisible by `k`; `k = 2` gives partitions into odd parts.
    KRegular(u64),
}

impl PartRestriction {
    pub fn k_regular(k: u64) -> Result<Self, PartitionError> {
        if k < 2 {
            return Err(PartitionError::InvalidRestriction(k));
        }
        Ok(PartRestriction::KRegular(k))
    }

    pub fn admits(&self, part: u64) -> bool {
        match self {
            PartRestriction::All => true,
            PartRestriction::KRegular(k) => !part.is_multiple_of(*k),
        }
    }

    fn validate(&self) -> Result<(), PartitionError> {
        match *self {
            PartRestriction::KRegular(k) if k < 2 => Err(PartitionError::InvalidRestriction(k)),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PartRestriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartRestriction::All => write!(f, "PD"),
            PartRestriction::KRegular(k) => write!(f, "PD_{k}"),
        }
    }
}

/// Counts designated-summand partitions of `n` by walking every partition
/// in nonincreasing order and summing the products of multiplicities.
pub fn enumerate_pd(n: u32, restriction: PartRestriction) -> Result<u64, PartitionError> {
    restriction.validate()?;
    if n > ENUMERATION_BOUND {
        return Err(PartitionError::EnumerationBound(n));
    }
    fn walk(remaining: u64, max_part: u64, restriction: PartRestriction) -> u64 {
        if remaining == 0 {
            return 1;
        }
        let mut total = 0;
        for part in (1..=max_part.min(remaining)).rev() {
            if !restriction.admits(part) {
                continue;
            }
            for mult in 1..=remaining / part {
                total += mult * walk(remaining - mult * part, part - 1, restriction);
            }
        }
        total
    }
    Ok(walk(n as u64, n as u64, restriction))
}

/// `prod_{admissible i < order} (1 + q^i/(1-q^i)^2)`, where part size `i`
/// used `j` times contributes `j` designations: `1 + sum_j j q^{ij}`.
pub fn pd_product_series(
    order: usize,
    restriction: PartRestriction,
    ring: CoefficientRing,
) -> Result<TruncatedSeries, PartitionError> {
    restriction.validate()?;
    let mut acc = TruncatedSeries::one(order, ring)?;
    for part in 1..order {
        if !restriction.admits(part as u64) {
            continue;
        }
        let terms = std::iter::once((0usize, 1u64)).chain(
            (1..)
                .map(|j| (part * j, j as u64))
                .take_while(|&(e, _)| e < order),
        );
        let factor = TruncatedSeries::from_terms(terms, order, ring)?;
        acc = acc.mul(&factor)?;
    }
    Ok(acc)
}

/// `sum PD_2(n) q^n` from its eta-quotient form.
pub fn pd2_eta_series(
    order: usize,
    ring: CoefficientRing,
) -> Result<TruncatedSeries, PartitionError> {
    let eq: EtaQuotient = PD2_GENERATING_FUNCTION
        .parse()
        .expect("built-in generating function parses");
    Ok(pochhammer::expand(&eq, order, ring)?)
}

/// Ordinary partition numbers `p(n)` from `1/f_1`.
pub fn partition_numbers(order: usize) -> Result<TruncatedSeries, PartitionError> {
    let f1 = pochhammer::pochhammer_series(1, order, CoefficientRing::Integers)?;
    Ok(f1.invert()?)
}

/// Enumeration against the product series for `n <= n_max`.
pub fn check_enumeration(
    n_max: u32,
    restriction: PartRestriction,
) -> Result<VerificationReport, PartitionError> {
    let order = n_max as usize + 1;
    let product = pd_product_series(order, restriction, CoefficientRing::Integers)?;
    let name = format!("enumerate-vs-product {restriction}");
    for n in 0..=n_max {
        let counted = BigInt::from(enumerate_pd(n, restriction)?);
        let generated = product.coefficient(n as usize)?;
        if counted != generated {
            return Ok(VerificationReport::fail(
                name,
                order,
                Witness {
                    n: n as usize,
                    index: n as usize,
                    left: counted,
                    right: generated,
                },
            ));
        }
    }
    Ok(VerificationReport::pass(name, order))
}

/// The eta-quotient series against the odd-part product series below `order`.
pub fn check_generating_function(order: usize) -> Result<VerificationReport, PartitionError> {
    let ring = CoefficientRing::Integers;
    let eta = pd2_eta_series(order, ring)?;
    let product = pd_product_series(order, PartRestriction::KRegular(2), ring)?;
    let name = "eta-vs-product PD_2";
    Ok(match eta.equals_up_to(&product, order)? {
        Comparison::Equal => VerificationReport::pass(name, order),
        Comparison::Differs(m) => VerificationReport::fail(
            name,
            order,
            Witness {
                n: m.index,
                index: m.index,
                left: m.left,
                right: m.right,
            },
        ),
    })
}

/// Hand-countable values: `PD(4) = 10` and `PD_2(4) = 5`.
pub const KNOWN_VALUES: [(PartRestriction, u32, u64); 2] = [
    (PartRestriction::All, 4, 10),
    (PartRestriction::KRegular(2), 4, 5),
];

/// Enumeration against [`KNOWN_VALUES`].
pub fn check_known_values() -> Result<Vec<VerificationReport>, PartitionError> {
    KNOWN_VALUES
        .iter()
        .map(|&(r, n, expected)| {
            let name = format!("{r}({n}) = {expected}");
            let counted = enumerate_pd(n, r)?;
            Ok(if counted == expected {
                VerificationReport::pass(name, n as usize)
            } else {
                let witness = Witness {
                    n: n as usize,
                    index: n as usize,
                    left: counted.into(),
                    right: expected.into(),
                };
                VerificationReport::fail(name, n as usize, witness)
            })
        })
        .collect()
}

/// Full three-way oracle run: the known small values, enumeration vs
/// product under `All` and `k = 2, 3, 4` for `n <= n_max_enum`, then eta
/// quotient vs product for `PD_2` below `product_order`.
pub fn oracle_check(
    n_max_enum: u32,
    product_order: usize,
) -> Result<Vec<VerificationReport>, PartitionError> {
    let mut reports = check_known_values()?;
    for restriction in [
        PartRestriction::All,
        PartRestriction::KRegular(2),
        PartRestriction::KRegular(3),
        PartRestriction::KRegular(4),
    ] {
        reports.push(check_enumeration(n_max_enum, restriction)?);
    }
    reports.push(check_generating_function(product_order)?);
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ODD: PartRestriction = PartRestriction::KRegular(2);

    #[test]
    fn weight_four_examples() {
        assert_eq!(enumerate_pd(4, PartRestriction::All).unwrap(), 10);
        assert_eq!(enumerate_pd(4, ODD).unwrap(), 5);
        // 3' and the three designations of 1+1+1.
        assert_eq!(enumerate_pd(3, ODD).unwrap(), 4);
    }

    #[test]
    fn empty_partition() {
        for r in [PartRestriction::All, ODD, PartRestriction::KRegular(5)] {
            assert_eq!(enumerate_pd(0, r).unwrap(), 1);
        }
    }

    #[test]
    fn enumeration_bound_and_restriction_checks() {
        assert_eq!(
            enumerate_pd(41, PartRestriction::All),
            Err(PartitionError::EnumerationBound(41))
        );
        assert!(enumerate_pd(40, ODD).is_ok());
        assert_eq!(
            PartRestriction::k_regular(1),
            Err(PartitionError::InvalidRestriction(1))
        );
        assert!(enumerate_pd(3, PartRestriction::KRegular(0)).is_err());
    }

    #[test]
    fn product_series_small_values() {
        let z = CoefficientRing::Integers;
        let all = pd_product_series(5, PartRestriction::All, z).unwrap();
        assert_eq!(all.coefficient(4).unwrap(), BigInt::from(10));
        let odd = pd_product_series(5, ODD, z).unwrap();
        assert_eq!(odd.coefficient(4).unwrap(), BigInt::from(5));
    }

    #[test]
    fn eta_series_small_values() {
        let s = pd2_eta_series(5, CoefficientRing::Integers).unwrap();
        assert_eq!(s.coefficient(3).unwrap(), BigInt::from(4));
        assert_eq!(s.coefficient(4).unwrap(), BigInt::from(5));
    }

    #[test]
    fn enumeration_matches_product_for_small_n() {
        for r in [PartRestriction::All, ODD, PartRestriction::KRegular(3)] {
            assert!(check_enumeration(15, r).unwrap().passed(), "{r}");
        }
    }

    #[test]
    fn zero_enumeration_bound_is_trivial() {
        let reports = oracle_check(0, 2).unwrap();
        assert!(reports.iter().all(VerificationReport::passed));
    }

    #[test]
    fn partition_numbers_start() {
        let p = partition_numbers(8).unwrap();
        let expected =
            TruncatedSeries::from_coeffs([1, 1, 2, 3, 5, 7, 11, 15], 8, CoefficientRing::Integers)
                .unwrap();
        assert_eq!(p, expected);
    }
}
