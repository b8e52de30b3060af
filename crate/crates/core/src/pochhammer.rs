//! Expansion of `f_r = (q^r; q^r)_inf` and of eta quotients built from them.
//!
//! `f_r` is expanded with Euler's pentagonal number theorem,
//! `f_1 = sum_{k in Z} (-1)^k q^{k(3k-1)/2}`, so a truncation at `q^N` has
//! only `O(sqrt(N/r))` nonzero terms. Eta quotients are then built by
//! multiplying or dividing by those sparse factors one at a time.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::expr::{self, ExprError};
use crate::report::{VerificationReport, Witness};
use crate::series::{CoefficientRing, Comparison, SeriesError, TruncatedSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EtaError {
    #[error("f_r needs r >= 1")]
    ZeroIndex,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Expr(#[from] Box<ExprError>),
}

/// `scalar * q^qshift * prod_r f_r^{e_r}` with the factors kept in canonical
/// form: sorted by `r`, no zero exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EtaQuotient {
    factors: BTreeMap<u64, i64>,
    scalar: i64,
    qshift: usize,
}

impl Default for EtaQuotient {
    fn default() -> Self {
        EtaQuotient {
            factors: BTreeMap::new(),
            scalar: 1,
            qshift: 0,
        }
    }
}

impl EtaQuotient {
    /// The empty quotient, i.e. the constant 1.
    pub fn one() -> Self {
        Self::default()
    }

    /// Builds a quotient from `(r, e_r)` pairs; repeated `r` accumulate.
    pub fn from_factors<I>(factors: I) -> Result<Self, EtaError>
    where
        I: IntoIterator<Item = (u64, i64)>,
    {
        let mut eq = Self::one();
        for (r, e) in factors {
            eq.push_factor(r, e)?;
        }
        Ok(eq)
    }

    pub fn with_scalar(mut self, scalar: i64) -> Self {
        self.scalar = scalar;
        self
    }

    pub fn with_qshift(mut self, qshift: usize) -> Self {
        self.qshift = qshift;
        self
    }

    pub fn scalar(&self) -> i64 {
        self.scalar
    }

    pub fn qshift(&self) -> usize {
        self.qshift
    }

    /// Exponent of `f_r` (0 when absent).
    pub fn exponent(&self, r: u64) -> i64 {
        self.factors.get(&r).copied().unwrap_or(0)
    }

    pub fn factors(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.factors.iter().map(|(&r, &e)| (r, e))
    }

    pub fn push_factor(&mut self, r: u64, e: i64) -> Result<(), EtaError> {
        if r == 0 {
            return Err(EtaError::ZeroIndex);
        }
        let entry = self.factors.entry(r).or_insert(0);
        *entry += e;
        if *entry == 0 {
            self.factors.remove(&r);
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (r, e) in other.factors() {
            out.push_factor(r, e)
                .expect("indices of a valid quotient are positive");
        }
        out.scalar *= other.scalar;
        out.qshift += other.qshift;
        out
    }
}

impl fmt::Display for EtaQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let power = |r: u64, e: i64| {
            if e == 1 {
                format!("f{r}")
            } else {
                format!("f{r}^{e}")
            }
        };
        let mut numerator: Vec<String> = Vec::new();
        if self.scalar != 1 {
            numerator.push(self.scalar.to_string());
        }
        match self.qshift {
            0 => {}
            1 => numerator.push("q".into()),
            t => numerator.push(format!("q^{t}")),
        }
        numerator.extend(
            self.factors()
                .filter(|&(_, e)| e > 0)
                .map(|(r, e)| power(r, e)),
        );
        let denominator: Vec<String> = self
            .factors()
            .filter(|&(_, e)| e < 0)
            .map(|(r, e)| power(r, -e))
            .collect();
        if numerator.is_empty() {
            write!(f, "1")?;
        } else {
            write!(f, "{}", numerator.join("*"))?;
        }
        match denominator.len() {
            0 => Ok(()),
            1 => write!(f, "/{}", denominator[0]),
            _ => write!(f, "/({})", denominator.join("*")),
        }
    }
}

impl FromStr for EtaQuotient {
    type Err = EtaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ast = expr::parse(s).map_err(|e| EtaError::Expr(Box::new(e)))?;
        ast.to_eta_quotient()
            .map_err(|e| EtaError::Expr(Box::new(e)))
    }
}

/// `f_r` truncated at `q^order`, from the pentagonal number theorem.
pub fn pochhammer_series(
    r: u64,
    order: usize,
    ring: CoefficientRing,
) -> Result<TruncatedSeries, EtaError> {
    if r == 0 {
        return Err(EtaError::ZeroIndex);
    }
    let r = r as u128;
    let mut terms: Vec<(usize, i64)> = vec![(0, 1)];
    for k in 1u128.. {
        let sign = if k % 2 == 1 { -1 } else { 1 };
        // k(3k-1)/2 and k(3k+1)/2 are the pentagonal numbers for k and -k.
        let low = r * (k * (3 * k - 1) / 2);
        if low >= order as u128 {
            break;
        }
        terms.push((low as usize, sign));
        let high = r * (k * (3 * k + 1) / 2);
        if high < order as u128 {
            terms.push((high as usize, sign));
        }
    }
    Ok(TruncatedSeries::from_terms(terms, order, ring)?)
}

/// Expands an eta quotient to `order` coefficients.
pub fn expand(
    eq: &EtaQuotient,
    order: usize,
    ring: CoefficientRing,
) -> Result<TruncatedSeries, EtaError> {
    let mut acc = TruncatedSeries::monomial(eq.scalar, eq.qshift, order, ring)?;
    if acc.is_zero() {
        return Ok(acc);
    }
    for (r, e) in eq.factors() {
        let f = pochhammer_series(r, order, ring)?;
        for _ in 0..e.unsigned_abs() {
            acc = if e > 0 { acc.mul(&f)? } else { acc.div(&f)? };
        }
    }
    Ok(acc)
}

/// Parameters of `f_m^{p^j k} = f_{pm}^{p^{j-1} k} (mod p^j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrobeniusParams {
    pub m: u64,
    pub p: u64,
    pub j: u32,
    pub k: u64,
}

impl FrobeniusParams {
    fn validate(&self) -> Result<(), EtaError> {
        if self.m == 0 || self.j == 0 || self.k == 0 {
            return Err(EtaError::InvalidParameter(format!(
                "m, j, k must be positive in {self}"
            )));
        }
        if !is_prime(self.p) {
            return Err(EtaError::NotPrime(self.p));
        }
        Ok(())
    }

    /// `p^j`, the modulus at which the congruence holds.
    pub fn natural_modulus(&self) -> Result<u64, EtaError> {
        self.p
            .checked_pow(self.j)
            .ok_or_else(|| EtaError::InvalidParameter(format!("p^j overflows in {self}")))
    }

    fn sides(&self) -> Result<(EtaQuotient, EtaQuotient), EtaError> {
        let pj = self.natural_modulus()?;
        let exponent = |v: u64| {
            v.checked_mul(self.k)
                .and_then(|x| i64::try_from(x).ok())
                .ok_or_else(|| EtaError::InvalidParameter(format!("exponent overflows in {self}")))
        };
        let left = EtaQuotient::from_factors([(self.m, exponent(pj)?)])?;
        let pm = self
            .m
            .checked_mul(self.p)
            .ok_or_else(|| EtaError::InvalidParameter(format!("p*m overflows in {self}")))?;
        let right = EtaQuotient::from_factors([(pm, exponent(pj / self.p)?)])?;
        Ok((left, right))
    }
}

impl fmt::Display for FrobeniusParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "frobenius(m={},p={},j={},k={})",
            self.m, self.p, self.j, self.k
        )
    }
}

/// Checks `f_m^{p^j k} = f_{pm}^{p^{j-1} k}` over `Z/p^jZ` to `order`.
pub fn verify_frobenius(
    params: FrobeniusParams,
    order: usize,
) -> Result<VerificationReport, EtaError> {
    params.validate()?;
    verify_frobenius_mod(params, order, params.natural_modulus()?)
}

/// Same comparison at an arbitrary modulus; a modulus stronger than `p^j`
/// is expected to fail and produces a witness.
pub fn verify_frobenius_mod(
    params: FrobeniusParams,
    order: usize,
    modulus: u64,
) -> Result<VerificationReport, EtaError> {
    params.validate()?;
    let ring = CoefficientRing::modulo(modulus)?;
    let (left, right) = params.sides()?;
    let lhs = expand(&left, order, ring)?;
    let rhs = expand(&right, order, ring)?;
    let name = format!("{params} mod {modulus}");
    Ok(match lhs.equals_up_to(&rhs, order)? {
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

/// Rewrites every `f_m^e` with `p^j | e` as `f_{pm}^{e/p}`; the result is
/// congruent to the input modulo `p^j`. Other factors are left alone.
pub fn frobenius_reduce(eq: &EtaQuotient, p: u64, j: u32) -> Result<EtaQuotient, EtaError> {
    if !is_prime(p) {
        return Err(EtaError::NotPrime(p));
    }
    if j == 0 {
        return Err(EtaError::InvalidParameter("j must be positive".into()));
    }
    let pj = p
        .checked_pow(j)
        .and_then(|x| i64::try_from(x).ok())
        .ok_or_else(|| EtaError::InvalidParameter(format!("{p}^{j} overflows")))?;
    let mut out = EtaQuotient::one()
        .with_scalar(eq.scalar)
        .with_qshift(eq.qshift);
    for (r, e) in eq.factors() {
        if e % pj == 0 {
            let pr = r
                .checked_mul(p)
                .ok_or_else(|| EtaError::InvalidParameter(format!("{p}*{r} overflows")))?;
            out.push_factor(pr, e / p as i64)?;
        } else {
            out.push_factor(r, e)?;
        }
    }
    Ok(out)
}

fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn z() -> CoefficientRing {
        CoefficientRing::Integers
    }

    fn naive(r: u64, order: usize) -> TruncatedSeries {
        let mut acc = TruncatedSeries::one(order, z()).unwrap();
        let mut n = 1usize;
        while n * (r as usize) < order {
            let factor =
                TruncatedSeries::from_terms([(0, 1), (n * r as usize, -1)], order, z()).unwrap();
            acc = acc.mul_schoolbook(&factor).unwrap();
            n += 1;
        }
        acc
    }

    #[test]
    fn f1_to_order_8() {
        let s = pochhammer_series(1, 8, z()).unwrap();
        let expected = TruncatedSeries::from_coeffs([1, -1, -1, 0, 0, 1, 0, 1], 8, z()).unwrap();
        assert_eq!(s, expected);
        assert_eq!(s, naive(1, 8));
    }

    #[test]
    fn large_index_is_one() {
        assert_eq!(
            pochhammer_series(9, 9, z()).unwrap(),
            TruncatedSeries::one(9, z()).unwrap()
        );
        assert_eq!(pochhammer_series(0, 9, z()), Err(EtaError::ZeroIndex));
    }

    #[test]
    fn f2_is_f1_of_q_squared() {
        let f2 = pochhammer_series(2, 12, z()).unwrap();
        let f1 = pochhammer_series(1, 12, z()).unwrap();
        assert_eq!(f2, f1.substitute_power(2).unwrap());
    }

    #[test]
    fn pochhammer_matches_naive_product_small() {
        for r in 1..=6 {
            assert_eq!(
                pochhammer_series(r, 120, z()).unwrap(),
                naive(r, 120),
                "r={r}"
            );
        }
    }

    #[test]
    fn canonical_form_merges_and_drops_zeros() {
        let eq = EtaQuotient::from_factors([(3, 2), (1, 1), (3, -2), (2, 5)]).unwrap();
        assert_eq!(eq.factors().collect::<Vec<_>>(), vec![(1, 1), (2, 5)]);
        assert_eq!(
            EtaQuotient::from_factors([(0, 1)]),
            Err(EtaError::ZeroIndex)
        );
    }

    #[test]
    fn display_form() {
        let eq = EtaQuotient::from_factors([(4, 2), (8, 4), (2, -10)])
            .unwrap()
            .with_scalar(4)
            .with_qshift(1);
        assert_eq!(eq.to_string(), "4*q*f4^2*f8^4/f2^10");
        let pd2 = EtaQuotient::from_factors([(4, 1), (6, 2), (1, -1), (3, -1), (12, -1)]).unwrap();
        assert_eq!(pd2.to_string(), "f4*f6^2/(f1*f3*f12)");
        assert_eq!(EtaQuotient::one().to_string(), "1");
        assert_eq!(
            EtaQuotient::from_factors([(1, -1)]).unwrap().to_string(),
            "1/f1"
        );
    }

    #[test]
    fn display_parses_back() {
        for text in [
            "4*q*f4^2*f8^4/f2^10",
            "f4*f6^2/(f1*f3*f12)",
            "1",
            "-2*q^3*f5",
            "1/f1",
        ] {
            let eq: EtaQuotient = text.parse().unwrap();
            assert_eq!(eq.to_string(), text);
        }
    }

    #[test]
    fn expand_pd2_low_terms() {
        let eq: EtaQuotient = "f4*f6^2/(f1*f3*f12)".parse().unwrap();
        let s = expand(&eq, 5, z()).unwrap();
        assert_eq!(
            s,
            TruncatedSeries::from_coeffs([1, 1, 2, 4, 5], 5, z()).unwrap()
        );
    }

    #[test]
    fn expand_trivial_quotients() {
        let one = TruncatedSeries::one(100, z()).unwrap();
        assert_eq!(expand(&EtaQuotient::one(), 100, z()).unwrap(), one);
        let cancel = EtaQuotient::from_factors([(1, 1), (1, -1)]).unwrap();
        assert_eq!(expand(&cancel, 100, z()).unwrap(), one);
        let shifted = EtaQuotient::one().with_qshift(200);
        assert!(expand(&shifted, 100, z()).unwrap().is_zero());
    }

    #[test]
    fn expand_agrees_with_pow_route() {
        let eq = EtaQuotient::from_factors([(1, -3), (2, 5), (3, -1)])
            .unwrap()
            .with_scalar(-3);
        let f = |r| pochhammer_series(r, 80, z()).unwrap();
        let by_pow = f(1)
            .pow(-3)
            .unwrap()
            .mul(&f(2).pow(5).unwrap())
            .unwrap()
            .mul(&f(3).pow(-1).unwrap())
            .unwrap()
            .scale(&BigInt::from(-3));
        assert_eq!(expand(&eq, 80, z()).unwrap(), by_pow);
    }

    #[test]
    fn frobenius_examples() {
        let p = |m, p, j, k| FrobeniusParams { m, p, j, k };
        assert!(verify_frobenius(p(1, 2, 1, 1), 200).unwrap().passed());
        assert!(verify_frobenius(p(3, 2, 2, 1), 200).unwrap().passed());
        let r = verify_frobenius_mod(p(1, 2, 1, 1), 200, 4).unwrap();
        assert!(!r.passed());
        let w = r.witness.unwrap();
        // f1^2 = 1 - 2q - q^2 + ..., f2 = 1 - q^2 - ...: first difference at q^1.
        assert_eq!(
            (w.index, w.left, w.right),
            (1, BigInt::from(2), BigInt::from(0))
        );
        assert_eq!(
            verify_frobenius(p(1, 4, 1, 1), 10),
            Err(EtaError::NotPrime(4))
        );
        assert!(verify_frobenius(p(0, 2, 1, 1), 10).is_err());
    }

    #[test]
    fn frobenius_reduce_examples() {
        let f14: EtaQuotient = "f1^4".parse().unwrap();
        assert_eq!(frobenius_reduce(&f14, 2, 2).unwrap().to_string(), "f2^2");
        let f53: EtaQuotient = "f5^3".parse().unwrap();
        assert_eq!(frobenius_reduce(&f53, 2, 2).unwrap(), f53);
        let mixed: EtaQuotient = "f2^8*f3^2".parse().unwrap();
        let reduced = frobenius_reduce(&mixed, 2, 1).unwrap();
        assert_eq!(reduced.to_string(), "f4^4*f6");
        let ring = CoefficientRing::modulo(2).unwrap();
        let a = expand(&mixed, 200, ring).unwrap();
        let b = expand(&reduced, 200, ring).unwrap();
        assert!(a.equals_up_to(&b, 200).unwrap().is_equal());
    }

    #[test]
    fn frobenius_reduce_merges_into_existing_factor() {
        let eq: EtaQuotient = "f2^4/(f1^4*f4)".parse().unwrap();
        // f1^-4 -> f2^-2 and f2^4 -> f4^2, which merges with f4^-1.
        assert_eq!(frobenius_reduce(&eq, 2, 2).unwrap().to_string(), "f4/f2^2");
    }

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }
}
