//! Truncated formal power series over the integers or the integers modulo m.
//!
//! A [`TruncatedSeries`] stores the dense coefficient vector of a power series
//! in `q` together with its truncation order `N`: coefficients of `q^0..q^{N-1}`
//! are exact, nothing is claimed beyond. Binary operations truncate to the
//! smaller order of their operands.
//!
//! Two backends share one interface. [`CoefficientRing::Integers`] uses
//! arbitrary-precision integers; [`CoefficientRing::IntegersMod`] stores
//! residues in `u64` and is the fast path for congruence sweeps.
#![allow(clippy::should_implement_trait)]

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Largest modulus (exclusive) supported by the residue backend. Keeping
/// residues below 2^32 lets a multiply-accumulate stay inside a `u64`.
pub const MAX_MODULUS: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("truncation order must be positive")]
    ZeroOrder,
    #[error("{len} coefficients do not fit below truncation order {order}")]
    TooManyCoefficients { len: usize, order: usize },
    #[error("modulus {0} outside the supported range 2..2^32")]
    InvalidModulus(u64),
    #[error("ring mismatch: {left} vs {right}")]
    RingMismatch {
        left: CoefficientRing,
        right: CoefficientRing,
    },
    #[error("constant term {constant} is not a unit in {ring}")]
    NonUnitConstant {
        constant: BigInt,
        ring: CoefficientRing,
    },
    #[error("substitution q -> q^k needs k >= 1")]
    ZeroSubstitution,
    #[error("progression modulus must be positive")]
    ZeroProgressionModulus,
    #[error("residue {residue} must be below progression modulus {modulus}")]
    ResidueOutOfRange { residue: usize, modulus: usize },
    #[error("progression {modulus}n+{residue} has no terms below order {order}")]
    EmptyProgression {
        modulus: usize,
        residue: usize,
        order: usize,
    },
    #[error("cannot reduce {ring} modulo {modulus}")]
    IncompatibleModulus { ring: CoefficientRing, modulus: u64 },
    #[error("index {index} is beyond truncation order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("requested comparison to order {requested} but only {available} is guaranteed")]
    InsufficientOrder { requested: usize, available: usize },
}

pub type Result<T, E = SeriesError> = std::result::Result<T, E>;

/// A modulus in `2..2^32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(m: u64) -> Result<Self> {
        if (2..MAX_MODULUS).contains(&m) {
            Ok(Modulus(m))
        } else {
            Err(SeriesError::InvalidModulus(m))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientRing {
    Integers,
    IntegersMod(Modulus),
}

impl CoefficientRing {
    pub fn modulo(m: u64) -> Result<Self> {
        Modulus::new(m).map(CoefficientRing::IntegersMod)
    }

    pub fn modulus(&self) -> Option<u64> {
        match self {
            CoefficientRing::Integers => None,
            CoefficientRing::IntegersMod(m) => Some(m.get()),
        }
    }

    /// Canonical representative of `value` in this ring.
    pub fn reduce(&self, value: &BigInt) -> BigInt {
        match self {
            CoefficientRing::Integers => value.clone(),
            CoefficientRing::IntegersMod(m) => value.mod_floor(&BigInt::from(m.get())),
        }
    }
}

impl fmt::Display for CoefficientRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientRing::Integers => write!(f, "Z"),
            CoefficientRing::IntegersMod(m) => write!(f, "Z/{m}Z"),
        }
    }
}

/// Residue arithmetic for one modulus. Powers of two reduce with a mask and
/// may defer reduction, since wrapping `u64` arithmetic is exact mod 2^64.
#[derive(Debug, Clone, Copy)]
struct ModArith {
    m: u64,
    mask: Option<u64>,
}

impl ModArith {
    fn new(m: Modulus) -> Self {
        let m = m.get();
        ModArith {
            m,
            mask: m.is_power_of_two().then(|| m - 1),
        }
    }

    #[inline]
    fn reduce(self, x: u64) -> u64 {
        match self.mask {
            Some(mask) => x & mask,
            None => x % self.m,
        }
    }

    #[inline]
    fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    fn mul(self, a: u64, b: u64) -> u64 {
        self.reduce(a * b)
    }

    fn residue_of(self, v: &BigInt) -> u64 {
        v.mod_floor(&BigInt::from(self.m))
            .to_u64()
            .expect("residue below modulus fits in u64")
    }

    fn inverse(self, a: u64) -> Option<u64> {
        let ext = (a as i64).extended_gcd(&(self.m as i64));
        (ext.gcd == 1).then(|| ext.x.rem_euclid(self.m as i64) as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Coeffs {
    Int(Vec<BigInt>),
    Mod(Vec<u64>),
}

/// A power series known exactly below its truncation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    ring: CoefficientRing,
    coeffs: Coeffs,
}

/// First coefficient at which two series disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub index: usize,
    pub left: BigInt,
    pub right: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    Differs(Mismatch),
}

impl Comparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, Comparison::Equal)
    }

    pub fn mismatch(&self) -> Option<&Mismatch> {
        match self {
            Comparison::Equal => None,
            Comparison::Differs(m) => Some(m),
        }
    }
}

impl TruncatedSeries {
    /// Builds a series from low-order coefficients; missing high coefficients
    /// are zero and residues are reduced into `[0, m)`.
    pub fn from_coeffs<I, T>(coeffs: I, order: usize, ring: CoefficientRing) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        if order == 0 {
            return Err(SeriesError::ZeroOrder);
        }
        let values: Vec<BigInt> = coeffs.into_iter().map(Into::into).collect();
        if values.len() > order {
            return Err(SeriesError::TooManyCoefficients {
                len: values.len(),
                order,
            });
        }
        let coeffs = match ring {
            CoefficientRing::Integers => {
                let mut v = values;
                v.resize(order, BigInt::zero());
                Coeffs::Int(v)
            }
            CoefficientRing::IntegersMod(m) => {
                let ar = ModArith::new(m);
                let mut v: Vec<u64> = values.iter().map(|x| ar.residue_of(x)).collect();
                v.resize(order, 0);
                Coeffs::Mod(v)
            }
        };
        Ok(TruncatedSeries { ring, coeffs })
    }

    pub fn zero(order: usize, ring: CoefficientRing) -> Result<Self> {
        Self::from_coeffs(std::iter::empty::<i64>(), order, ring)
    }

    pub fn one(order: usize, ring: CoefficientRing) -> Result<Self> {
        Self::constant(1, order, ring)
    }

    pub fn constant(c: impl Into<BigInt>, order: usize, ring: CoefficientRing) -> Result<Self> {
        Self::monomial(c, 0, order, ring)
    }

    /// `c * q^exponent`; a monomial at or past the truncation order is zero.
    pub fn monomial(
        c: impl Into<BigInt>,
        exponent: usize,
        order: usize,
        ring: CoefficientRing,
    ) -> Result<Self> {
        let mut s = Self::zero(order, ring)?;
        if exponent < order {
            s.set(exponent, &c.into());
        }
        Ok(s)
    }

    /// Builds a series from `(exponent, coefficient)` pairs, dropping
    /// exponents at or past the truncation order. Repeated exponents add.
    pub fn from_terms<I, T>(terms: I, order: usize, ring: CoefficientRing) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, T)>,
        T: Into<BigInt>,
    {
        let mut s = Self::zero(order, ring)?;
        for (e, c) in terms {
            if e < order {
                let c = s.value(e) + c.into();
                s.set(e, &c);
            }
        }
        Ok(s)
    }

    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    pub fn order(&self) -> usize {
        match &self.coeffs {
            Coeffs::Int(v) => v.len(),
            Coeffs::Mod(v) => v.len(),
        }
    }

    pub fn coefficient(&self, n: usize) -> Result<BigInt> {
        if n >= self.order() {
            return Err(SeriesError::IndexOutOfRange {
                index: n,
                order: self.order(),
            });
        }
        Ok(self.value(n))
    }

    /// Residue of the `n`-th coefficient modulo `m`. Over `Z/MZ` this needs
    /// `m | M`.
    pub fn coefficient_residue(&self, n: usize, m: u64) -> Result<u64> {
        self.check_reducible(m)?;
        let c = self.coefficient(n)?;
        Ok(c.mod_floor(&BigInt::from(m))
            .to_u64()
            .expect("residue below modulus fits in u64"))
    }

    /// Raw residues when the series lives in `Z/mZ`.
    pub fn residues(&self) -> Option<&[u64]> {
        match &self.coeffs {
            Coeffs::Mod(v) => Some(v),
            Coeffs::Int(_) => None,
        }
    }

    /// Raw coefficients when the series lives in `Z`.
    pub fn integers(&self) -> Option<&[BigInt]> {
        match &self.coeffs {
            Coeffs::Int(v) => Some(v),
            Coeffs::Mod(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.coeffs {
            Coeffs::Int(v) => v.iter().all(Zero::is_zero),
            Coeffs::Mod(v) => v.iter().all(|&x| x == 0),
        }
    }

    /// Nonzero coefficients in ascending exponent order.
    pub fn nonzero_terms(&self) -> Vec<(usize, BigInt)> {
        match &self.coeffs {
            Coeffs::Int(v) => v
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i, c.clone()))
                .collect(),
            Coeffs::Mod(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| (i, BigInt::from(c)))
                .collect(),
        }
    }

    /// Same coefficients, cut down to a smaller order.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(SeriesError::ZeroOrder);
        }
        if order > self.order() {
            return Err(SeriesError::InsufficientOrder {
                requested: order,
                available: self.order(),
            });
        }
        let coeffs = match &self.coeffs {
            Coeffs::Int(v) => Coeffs::Int(v[..order].to_vec()),
            Coeffs::Mod(v) => Coeffs::Mod(v[..order].to_vec()),
        };
        Ok(TruncatedSeries {
            ring: self.ring,
            coeffs,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b, ModArith::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b, ModArith::sub)
    }

    pub fn neg(&self) -> Self {
        let coeffs = match &self.coeffs {
            Coeffs::Int(v) => Coeffs::Int(v.iter().map(|c| -c).collect()),
            Coeffs::Mod(v) => {
                let ar = self.arith();
                Coeffs::Mod(v.iter().map(|&c| ar.sub(0, c)).collect())
            }
        };
        TruncatedSeries {
            ring: self.ring,
            coeffs,
        }
    }

    /// Multiplies every coefficient by an integer scalar.
    pub fn scale(&self, c: &BigInt) -> Self {
        let coeffs = match &self.coeffs {
            Coeffs::Int(v) => Coeffs::Int(v.iter().map(|x| x * c).collect()),
            Coeffs::Mod(v) => {
                let ar = self.arith();
                let c = ar.residue_of(c);
                Coeffs::Mod(v.iter().map(|&x| ar.mul(x, c)).collect())
            }
        };
        TruncatedSeries {
            ring: self.ring,
            coeffs,
        }
    }

    /// Multiplies by `q^t`, keeping the truncation order.
    pub fn shift(&self, t: usize) -> Self {
        let n = self.order();
        let coeffs = match &self.coeffs {
            Coeffs::Int(v) => {
                let mut out = vec![BigInt::zero(); n];
                if t < n {
                    out[t..].clone_from_slice(&v[..n - t]);
                }
                Coeffs::Int(out)
            }
            Coeffs::Mod(v) => {
                let mut out = vec![0; n];
                if t < n {
                    out[t..].copy_from_slice(&v[..n - t]);
                }
                Coeffs::Mod(out)
            }
        };
        TruncatedSeries {
            ring: self.ring,
            coeffs,
        }
    }

    /// Cauchy product truncated at the smaller order.
    ///
    /// This is the schoolbook product, iterated over the nonzero coefficients
    /// of the sparser operand. Eta-quotient factors are very sparse, so this
    /// is where the expander gets its speed.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let n = self.order().min(other.order());
        let (sparse, dense) = if self.nonzero_count() <= other.nonzero_count() {
            (self, other)
        } else {
            (other, self)
        };
        let coeffs = match (&sparse.coeffs, &dense.coeffs) {
            (Coeffs::Int(s), Coeffs::Int(d)) => {
                let mut out = vec![BigInt::zero(); n];
                for (k, v) in s[..n].iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                    let target = &mut out[k..];
                    if v.is_one() {
                        for (r, x) in target.iter_mut().zip(d) {
                            *r += x;
                        }
                    } else if (-v).is_one() {
                        for (r, x) in target.iter_mut().zip(d) {
                            *r -= x;
                        }
                    } else {
                        for (r, x) in target.iter_mut().zip(d) {
                            if !x.is_zero() {
                                *r += x * v;
                            }
                        }
                    }
                }
                Coeffs::Int(out)
            }
            (Coeffs::Mod(s), Coeffs::Mod(d)) => {
                let ar = self.arith();
                let mut out = vec![0u64; n];
                for (k, &v) in s[..n].iter().enumerate().filter(|(_, &v)| v != 0) {
                    let target = &mut out[k..];
                    match ar.mask {
                        Some(mask) => {
                            for (r, &x) in target.iter_mut().zip(d) {
                                *r = r.wrapping_add(v.wrapping_mul(x)) & mask;
                            }
                        }
                        None => {
                            for (r, &x) in target.iter_mut().zip(d) {
                                *r = (*r + v * x) % ar.m;
                            }
                        }
                    }
                }
                Coeffs::Mod(out)
            }
            _ => unreachable!("ring check guarantees matching backends"),
        };
        Ok(TruncatedSeries {
            ring: self.ring,
            coeffs,
        })
    }

    /// Plain O(N^2) Cauchy product with no zero skipping. Reference for
    /// [`TruncatedSeries::mul`].
    pub fn mul_schoolbook(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let n = self.order().min(other.order());
        let coeffs = match (&self.coeffs, &other.coeffs) {
            (Coeffs::Int(a), Coeffs::Int(b)) => Coeffs::Int(
                (0..n)
                    .map(|i| (0..=i).map(|k| &a[k] * &b[i - k]).sum())
                    .collect(),
            ),
            (Coeffs::Mod(a), Coeffs::Mod(b)) => {
                let ar = self.arith();
                Coeffs::Mod(
                    (0..n)
                        .map(|i| (0..=i).fold(0, |acc, k| ar.add(acc, ar.mul(a[k], b[i - k]))))
                        .collect(),
                )
            }
            _ => unreachable!("ring check guarantees matching backends"),
        };
        Ok(TruncatedSeries {
            ring: self.ring,
            coeffs,
        })
    }

    /// `self / divisor`, by forward substitution on `divisor * result = self`.
    ///
    /// Mathematically this is `self * divisor.invert()`; the fused form costs
    /// O(N * nonzeros(divisor)) instead of materialising a dense inverse.
    /// The unit check on the constant term lives here and nowhere else.
    pub fn div(&self, divisor: &Self) -> Result<Self> {
        self.check_ring(divisor)?;
        let n = self.order().min(divisor.order());
        let coeffs = match (&self.coeffs, &divisor.coeffs) {
            (Coeffs::Int(a), Coeffs::Int(b)) => {
                let c0 = &b[0];
                let sign = if c0.is_one() {
                    1
                } else if (-c0).is_one() {
                    -1
                } else {
                    return Err(SeriesError::NonUnitConstant {
                        constant: c0.clone(),
                        ring: self.ring,
                    });
                };
                let terms: Vec<(usize, &BigInt)> = b[1..n]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(k, v)| (k + 1, v))
                    .collect();
                let mut out: Vec<BigInt> = Vec::with_capacity(n);
                for i in 0..n {
                    let mut acc = a[i].clone();
                    for &(k, v) in terms.iter().take_while(|(k, _)| *k <= i) {
                        let prev = &out[i - k];
                        if prev.is_zero() {
                            continue;
                        }
                        if v.is_one() {
                            acc -= prev;
                        } else if (-v).is_one() {
                            acc += prev;
                        } else {
                            acc -= prev * v;
                        }
                    }
                    if sign < 0 {
                        acc = -acc;
                    }
                    out.push(acc);
                }
                Coeffs::Int(out)
            }
            (Coeffs::Mod(a), Coeffs::Mod(b)) => {
                let ar = self.arith();
                let inv0 = ar
                    .inverse(b[0])
                    .ok_or_else(|| SeriesError::NonUnitConstant {
                        constant: BigInt::from(b[0]),
                        ring: self.ring,
                    })?;
                let terms: Vec<(usize, u64)> = b[1..n]
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(k, &v)| (k + 1, v))
                    .collect();
                let mut out: Vec<u64> = Vec::with_capacity(n);
                for i in 0..n {
                    let relevant = terms.iter().take_while(|(k, _)| *k <= i);
                    let s = match ar.mask {
                        Some(mask) => {
                            relevant.fold(0u64, |s, &(k, v)| {
                                s.wrapping_add(v.wrapping_mul(out[i - k]))
                            }) & mask
                        }
                        None => relevant.fold(0u64, |s, &(k, v)| (s + v * out[i - k]) % ar.m),
                    };
                    out.push(ar.mul(ar.sub(a[i], s), inv0));
                }
                Coeffs::Mod(out)
            }
            _ => unreachable!("ring check guarantees matching backends"),
        };
        Ok(TruncatedSeries {
            ring: self.ring,
            coeffs,
        })
    }

    /// Multiplicative inverse; the constant term must be a unit.
    pub fn invert(&self) -> Result<Self> {
        Self::one(self.order(), self.ring)?.div(self)
    }

    /// Integer power by repeated squaring; negative exponents go through
    /// [`TruncatedSeries::invert`].
    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.invert()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut result = Self::one(self.order(), self.ring)?;
        let mut square = base;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&square)?;
            }
            e >>= 1;
            if e > 0 {
                square = square.mul(&square)?;
            }
        }
        Ok(result)
    }

    /// `q -> q^k`: `result[k*n] = self[n]`, order preserved.
    pub fn substitute_power(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(SeriesError::ZeroSubstitution);
        }
        let n = self.order();
        let coeffs = match &self.coeffs {
            Coeffs::Int(v) => {
                let mut out = vec![BigInt::zero(); n];
                for (i, c) in v.iter().enumerate().take(n.div_ceil(k)) {
                    out[i * k] = c.clone();
                }
                Coeffs::Int(out)
            }
            Coeffs::Mod(v) => {
                let mut out = vec![0; n];
                for (i, &c) in v.iter().enumerate().take(n.div_ceil(k)) {
                    out[i * k] = c;
                }
                Coeffs::Mod(out)
            }
        };
        Ok(TruncatedSeries {
            ring: self.ring,
            coeffs,
        })
    }

    /// `sum_n a(m*n + j) q^n`, with order `ceil((N - j) / m)`.
    pub fn extract_progression(&self, m: usize, j: usize) -> Result<Self> {
        if m == 0 {
            return Err(SeriesError::ZeroProgressionModulus);
        }
        if j >= m {
            return Err(SeriesError::ResidueOutOfRange {
                residue: j,
                modulus: m,
            });
        }
        if j >= self.order() {
            return Err(SeriesError::EmptyProgression {
                modulus: m,
                residue: j,
                order: self.order(),
            });
        }
        let coeffs = match &self.coeffs {
            Coeffs::Int(v) => Coeffs::Int(v[j..].iter().step_by(m).cloned().collect()),
            Coeffs::Mod(v) => Coeffs::Mod(v[j..].iter().step_by(m).copied().collect()),
        };
        Ok(TruncatedSeries {
            ring: self.ring,
            coeffs,
        })
    }

    /// Maps into `Z/mZ`. Over `Z/MZ` this needs `m | M`.
    pub fn reduce_mod(&self, m: u64) -> Result<Self> {
        self.check_reducible(m)?;
        let target = CoefficientRing::modulo(m)?;
        let coeffs = match &self.coeffs {
            Coeffs::Int(v) => {
                let ar = ModArith::new(Modulus(m));
                Coeffs::Mod(v.iter().map(|c| ar.residue_of(c)).collect())
            }
            Coeffs::Mod(v) => Coeffs::Mod(v.iter().map(|&c| c % m).collect()),
        };
        Ok(TruncatedSeries {
            ring: target,
            coeffs,
        })
    }

    /// Moves the series into `ring`: a reduction when `ring` is `Z/mZ`,
    /// a no-op when the rings already agree.
    pub fn into_ring(self, ring: CoefficientRing) -> Result<Self> {
        if ring == self.ring {
            return Ok(self);
        }
        match ring {
            CoefficientRing::IntegersMod(m) => self.reduce_mod(m.get()),
            CoefficientRing::Integers => Err(SeriesError::RingMismatch {
                left: self.ring,
                right: ring,
            }),
        }
    }

    /// Compares coefficients `0..n`. Refuses `n` beyond either operand's
    /// guaranteed order.
    pub fn equals_up_to(&self, other: &Self, n: usize) -> Result<Comparison> {
        self.check_ring(other)?;
        let available = self.order().min(other.order());
        if n > available {
            return Err(SeriesError::InsufficientOrder {
                requested: n,
                available,
            });
        }
        let first = match (&self.coeffs, &other.coeffs) {
            (Coeffs::Int(a), Coeffs::Int(b)) => (0..n).find(|&i| a[i] != b[i]),
            (Coeffs::Mod(a), Coeffs::Mod(b)) => (0..n).find(|&i| a[i] != b[i]),
            _ => unreachable!("ring check guarantees matching backends"),
        };
        Ok(match first {
            None => Comparison::Equal,
            Some(index) => Comparison::Differs(Mismatch {
                index,
                left: self.value(index),
                right: other.value(index),
            }),
        })
    }

    /// One line per nonzero coefficient, `n<TAB>value`, ascending `n`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (n, c) in self.nonzero_terms() {
            out.push_str(&format!("{n}\t{c}\n"));
        }
        out
    }

    pub fn nonzero_count(&self) -> usize {
        match &self.coeffs {
            Coeffs::Int(v) => v.iter().filter(|c| !c.is_zero()).count(),
            Coeffs::Mod(v) => v.iter().filter(|&&c| c != 0).count(),
        }
    }

    fn value(&self, n: usize) -> BigInt {
        match &self.coeffs {
            Coeffs::Int(v) => v[n].clone(),
            Coeffs::Mod(v) => BigInt::from(v[n]),
        }
    }

    fn set(&mut self, n: usize, c: &BigInt) {
        match &mut self.coeffs {
            Coeffs::Int(v) => v[n] = c.clone(),
            Coeffs::Mod(v) => {
                let CoefficientRing::IntegersMod(m) = self.ring else {
                    unreachable!("residue storage implies a modulus")
                };
                v[n] = ModArith::new(m).residue_of(c);
            }
        }
    }

    fn arith(&self) -> ModArith {
        match self.ring {
            CoefficientRing::IntegersMod(m) => ModArith::new(m),
            CoefficientRing::Integers => unreachable!("integer series has no residue arithmetic"),
        }
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(SeriesError::RingMismatch {
                left: self.ring,
                right: other.ring,
            })
        }
    }

    fn check_reducible(&self, m: u64) -> Result<()> {
        Modulus::new(m)?;
        match self.ring {
            CoefficientRing::Integers => Ok(()),
            CoefficientRing::IntegersMod(big) if big.get() % m == 0 => Ok(()),
            ring => Err(SeriesError::IncompatibleModulus { ring, modulus: m }),
        }
    }

    fn zip_with(
        &self,
        other: &Self,
        int_op: impl Fn(&BigInt, &BigInt) -> BigInt,
        mod_op: impl Fn(ModArith, u64, u64) -> u64,
    ) -> Result<Self> {
        self.check_ring(other)?;
        let coeffs = match (&self.coeffs, &other.coeffs) {
            (Coeffs::Int(a), Coeffs::Int(b)) => {
                Coeffs::Int(a.iter().zip(b).map(|(x, y)| int_op(x, y)).collect())
            }
            (Coeffs::Mod(a), Coeffs::Mod(b)) => {
                let ar = self.arith();
                Coeffs::Mod(a.iter().zip(b).map(|(&x, &y)| mod_op(ar, x, y)).collect())
            }
            _ => unreachable!("ring check guarantees matching backends"),
        };
        Ok(TruncatedSeries {
            ring: self.ring,
            coeffs,
        })
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.nonzero_terms();
        if terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (n, c)) in terms.iter().enumerate() {
            let (sign, mag) = if c.is_negative() {
                ("-", -c)
            } else {
                ("+", c.clone())
            };
            match (i, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            match (*n, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "q")?,
                (1, false) => write!(f, "{mag}q")?,
                (_, true) => write!(f, "q^{n}")?,
                (_, false) => write!(f, "{mag}q^{n}")?,
            }
        }
        write!(f, " + O(q^{})", self.order())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> CoefficientRing {
        CoefficientRing::Integers
    }

    fn zm(m: u64) -> CoefficientRing {
        CoefficientRing::modulo(m).unwrap()
    }

    fn series(c: &[i64], order: usize, ring: CoefficientRing) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(c.iter().copied(), order, ring).unwrap()
    }

    #[test]
    fn from_coeffs_pads_and_reduces() {
        let s = series(&[1], 4, z());
        assert_eq!(s.order(), 4);
        assert_eq!(s.nonzero_terms(), vec![(0, BigInt::from(1))]);
        assert_eq!(
            series(&[0, 1], 3, zm(4)),
            TruncatedSeries::monomial(1, 1, 3, zm(4)).unwrap()
        );
        assert_eq!(
            series(&[-1], 3, zm(4)).coefficient(0).unwrap(),
            BigInt::from(3)
        );
    }

    #[test]
    fn from_coeffs_rejects_bad_shapes() {
        assert_eq!(
            TruncatedSeries::from_coeffs([1], 0, z()),
            Err(SeriesError::ZeroOrder)
        );
        assert!(matches!(
            TruncatedSeries::from_coeffs([1, 2, 3], 2, z()),
            Err(SeriesError::TooManyCoefficients { len: 3, order: 2 })
        ));
        assert_eq!(
            CoefficientRing::modulo(1),
            Err(SeriesError::InvalidModulus(1))
        );
        assert!(CoefficientRing::modulo(MAX_MODULUS).is_err());
    }

    #[test]
    fn add_examples() {
        let a = series(&[1, -1], 4, z());
        let b = series(&[0, 1], 4, z());
        assert_eq!(a.add(&b).unwrap(), series(&[1], 4, z()));
        let t = TruncatedSeries::monomial(2, 3, 5, zm(4)).unwrap();
        assert!(t.add(&t).unwrap().is_zero());
        assert!(matches!(a.add(&t), Err(SeriesError::RingMismatch { .. })));
    }

    #[test]
    fn add_truncates_to_min_order() {
        let a = series(&[1, 2, 3], 3, z());
        let b = series(&[1], 5, z());
        assert_eq!(a.add(&b).unwrap().order(), 3);
    }

    #[test]
    fn mul_examples() {
        let a = series(&[1, -1], 6, z());
        let b = series(&[1, 1], 6, z());
        assert_eq!(a.mul(&b).unwrap(), series(&[1, 0, -1], 6, z()));
        let one = TruncatedSeries::one(6, z()).unwrap();
        assert_eq!(a.mul(&one).unwrap(), a);
        assert_eq!(a.invert().unwrap().mul(&a).unwrap(), one);
    }

    #[test]
    fn invert_examples() {
        let geo = series(&[1, -1], 6, z()).invert().unwrap();
        assert_eq!(geo, series(&[1, 1, 1, 1, 1, 1], 6, z()));
        let one = TruncatedSeries::one(6, z()).unwrap();
        assert_eq!(one.invert().unwrap(), one);
        let err = series(&[2, 1], 4, zm(4)).invert().unwrap_err();
        assert_eq!(
            err,
            SeriesError::NonUnitConstant {
                constant: BigInt::from(2),
                ring: zm(4)
            }
        );
        assert!(err.to_string().contains("constant term 2"));
        assert!(err.to_string().contains("Z/4Z"));
        assert!(series(&[3, 1], 4, z()).invert().is_err());
        assert_eq!(
            series(&[-1], 3, z()).invert().unwrap(),
            series(&[-1], 3, z())
        );
    }

    #[test]
    fn invert_mod_uses_modular_inverse() {
        let a = series(&[3, 1, 4], 10, zm(8));
        let one = TruncatedSeries::one(10, zm(8)).unwrap();
        assert_eq!(a.mul(&a.invert().unwrap()).unwrap(), one);
        let b = series(&[5, 2], 10, zm(9));
        let one9 = TruncatedSeries::one(10, zm(9)).unwrap();
        assert_eq!(b.mul(&b.invert().unwrap()).unwrap(), one9);
    }

    #[test]
    fn pow_examples() {
        let a = series(&[1, -1], 5, z());
        assert_eq!(a.pow(2).unwrap(), series(&[1, -2, 1], 5, z()));
        assert_eq!(a.pow(0).unwrap(), TruncatedSeries::one(5, z()).unwrap());
        assert_eq!(a.pow(-1).unwrap(), series(&[1, 1, 1, 1, 1], 5, z()));
        assert!(series(&[2], 3, zm(4)).pow(-2).is_err());
    }

    #[test]
    fn substitute_power_examples() {
        let a = series(&[1, 1], 6, z());
        assert_eq!(
            a.substitute_power(3).unwrap(),
            series(&[1, 0, 0, 1], 6, z())
        );
        assert_eq!(a.substitute_power(1).unwrap(), a);
        assert_eq!(a.substitute_power(0), Err(SeriesError::ZeroSubstitution));
    }

    #[test]
    fn extract_progression_examples() {
        let a = series(&[1, 2, 3, 4], 4, z());
        assert_eq!(
            a.extract_progression(2, 1).unwrap(),
            series(&[2, 4], 2, z())
        );
        assert_eq!(a.extract_progression(1, 0).unwrap(), a);
        assert!(matches!(
            a.extract_progression(2, 2),
            Err(SeriesError::ResidueOutOfRange { .. })
        ));
        assert_eq!(
            a.extract_progression(0, 0),
            Err(SeriesError::ZeroProgressionModulus)
        );
        // ceil((5 - 1) / 3) = 2
        let b = series(&[0, 1, 2, 3, 4], 5, z());
        assert_eq!(b.extract_progression(3, 1).unwrap().order(), 2);
        assert!(matches!(
            series(&[1], 2, z()).extract_progression(5, 3),
            Err(SeriesError::EmptyProgression { .. })
        ));
    }

    #[test]
    fn reduce_mod_examples() {
        let a = series(&[1, -4, 7], 3, z());
        assert_eq!(a.reduce_mod(4).unwrap(), series(&[1, 0, 3], 3, zm(4)));
        let b = series(&[7, 5, 6], 3, zm(8));
        assert_eq!(b.reduce_mod(4).unwrap(), series(&[3, 1, 2], 3, zm(4)));
        assert!(matches!(
            b.reduce_mod(3),
            Err(SeriesError::IncompatibleModulus { .. })
        ));
    }

    #[test]
    fn coefficient_bounds() {
        let a = series(&[1, 5], 2, z());
        assert_eq!(a.coefficient(0).unwrap(), BigInt::from(1));
        assert_eq!(
            a.coefficient(2),
            Err(SeriesError::IndexOutOfRange { index: 2, order: 2 })
        );
        assert_eq!(series(&[-3], 2, z()).coefficient_residue(0, 4).unwrap(), 1);
        assert!(series(&[1], 2, zm(8)).coefficient_residue(0, 3).is_err());
    }

    #[test]
    fn equals_up_to_examples() {
        let a = series(&[1, 1], 2, z());
        let b = series(&[1, -1], 2, z());
        assert!(a.equals_up_to(&a, 2).unwrap().is_equal());
        let cmp = a.equals_up_to(&b, 2).unwrap();
        assert_eq!(
            cmp.mismatch().unwrap(),
            &Mismatch {
                index: 1,
                left: BigInt::from(1),
                right: BigInt::from(-1)
            }
        );
        assert!(matches!(
            a.equals_up_to(&b, 3),
            Err(SeriesError::InsufficientOrder {
                requested: 3,
                available: 2
            })
        ));
    }

    #[test]
    fn tsv_and_display() {
        let a = series(&[1, 0, -2, 0, 1], 5, z());
        assert_eq!(a.to_tsv(), "0\t1\n2\t-2\n4\t1\n");
        assert_eq!(a.to_string(), "1 - 2q^2 + q^4 + O(q^5)");
        assert_eq!(series(&[0, 1], 2, z()).to_string(), "q + O(q^2)");
    }

    #[test]
    fn shift_keeps_order() {
        let a = series(&[1, 2, 3], 3, z());
        assert_eq!(a.shift(1), series(&[0, 1, 2], 3, z()));
        assert!(a.shift(5).is_zero());
    }

    #[test]
    fn odd_modulus_mul_matches_schoolbook() {
        let a = series(&[2, 5, 0, 6, 1, 3], 6, zm(7));
        let b = series(&[1, 0, 4, 4, 0, 2], 6, zm(7));
        assert_eq!(a.mul(&b).unwrap(), a.mul_schoolbook(&b).unwrap());
    }
}
