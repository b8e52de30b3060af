//! Sweeps of congruences `PD_2(s^alpha (An+B)) = 0 (mod m)` and of internal
//! congruences `PD_2(an) = PD_2(bn) (mod m)` over a precomputed series.
//!
//! Every sweep reads coefficients from one immutable series, so the caller
//! decides the backend. A modular series is enough for a sweep; an integer
//! series of smaller order can be used to spot-check it.

use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::report::{LevelReport, Outcome, VerificationReport, Witness};
use crate::series::{SeriesError, TruncatedSeries};

pub const DEFAULT_BUDGET: usize = 200_000;
pub const DEFAULT_ALPHA_MAX: u32 = 5;
/// Order that lets the default budget read index `DEFAULT_BUDGET` itself.
pub const DEFAULT_SWEEP_ORDER: usize = DEFAULT_BUDGET + 1;
pub const CONJECTURAL_NOTE: &str = "conjectural: numeric evidence only";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CongruenceError {
    #[error("insufficient truncation: {what} needs order {needed}, series has order {order}")]
    InsufficientTruncation {
        what: String,
        needed: usize,
        order: usize,
    },
    #[error("invalid congruence family {name}: {reason}")]
    InvalidFamily { name: String, reason: String },
    #[error("invalid internal congruence {name}: {reason}")]
    InvalidInternal { name: String, reason: String },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofStatus {
    Proved,
    Conjectural,
}

impl fmt::Display for ProofStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProofStatus::Proved => "proved",
            ProofStatus::Conjectural => "conjectural",
        })
    }
}

/// `PD_2(scale_base^alpha * (a*n + b)) = 0 (mod modulus)` for all `n >= 0`.
/// With `scale_base = 1` the family is a single progression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceFamily {
    pub name: String,
    pub a: usize,
    pub b: usize,
    pub scale_base: usize,
    pub modulus: u64,
    pub status: ProofStatus,
    pub source: String,
    /// `(tower, alpha)` when this progression is one level of a tower.
    pub instance_of: Option<(String, u32)>,
}

impl CongruenceFamily {
    pub fn new(
        name: impl Into<String>,
        (a, b): (usize, usize),
        scale_base: usize,
        modulus: u64,
        status: ProofStatus,
        source: impl Into<String>,
    ) -> Result<Self, CongruenceError> {
        let name = name.into();
        let invalid = |reason: String| CongruenceError::InvalidFamily {
            name: name.clone(),
            reason,
        };
        if a == 0 || b >= a {
            return Err(invalid(format!("progression {a}n+{b} needs 0 <= B < A")));
        }
        if ![1, 2, 4].contains(&scale_base) {
            return Err(invalid(format!("scale base {scale_base} is not 1, 2 or 4")));
        }
        if modulus < 2 {
            return Err(invalid(format!("modulus {modulus} is below 2")));
        }
        Ok(CongruenceFamily {
            name,
            a,
            b,
            scale_base,
            modulus,
            status,
            source: source.into(),
            instance_of: None,
        })
    }

    pub fn instance_of(mut self, tower: impl Into<String>, alpha: u32) -> Self {
        self.instance_of = Some((tower.into(), alpha));
        self
    }

    pub fn is_tower(&self) -> bool {
        self.scale_base > 1
    }

    /// `scale_base^alpha`, or `None` on overflow.
    pub fn scale(&self, alpha: u32) -> Option<usize> {
        self.scale_base.checked_pow(alpha)
    }

    /// Levels swept for a given `alpha_max`; single progressions only have 0.
    pub fn alphas(&self, alpha_max: u32) -> std::ops::RangeInclusive<u32> {
        if self.is_tower() {
            0..=alpha_max
        } else {
            0..=0
        }
    }
}

impl fmt::Display for CongruenceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prog = format!("{}n+{}", self.a, self.b);
        if self.is_tower() {
            write!(
                f,
                "PD_2({}^a({prog})) = 0 mod {}",
                self.scale_base, self.modulus
            )
        } else {
            write!(f, "PD_2({prog}) = 0 mod {}", self.modulus)
        }
    }
}

/// `PD_2(a*n) = PD_2(b*n) (mod modulus)` for all `n >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InternalCongruence {
    pub name: String,
    pub a: usize,
    pub b: usize,
    pub modulus: u64,
    pub source: String,
}

impl InternalCongruence {
    /// Requires `a > b >= 1` and `a/b` a power of the prime dividing `modulus`.
    pub fn new(
        name: impl Into<String>,
        a: usize,
        b: usize,
        modulus: u64,
        source: impl Into<String>,
    ) -> Result<Self, CongruenceError> {
        let name = name.into();
        let invalid = |reason: String| CongruenceError::InvalidInternal {
            name: name.clone(),
            reason,
        };
        if b == 0 || a <= b {
            return Err(invalid(format!(
                "multipliers need a > b >= 1, got a={a}, b={b}"
            )));
        }
        let p = prime_of_prime_power(modulus)
            .ok_or_else(|| invalid(format!("modulus {modulus} is not a prime power")))?;
        if !a.is_multiple_of(b) || prime_of_prime_power((a / b) as u64) != Some(p) {
            return Err(invalid(format!("a/b = {a}/{b} is not a power of {p}")));
        }
        Ok(InternalCongruence {
            name,
            a,
            b,
            modulus,
            source: source.into(),
        })
    }
}

impl fmt::Display for InternalCongruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PD_2({}n) = PD_2({}n) mod {}",
            self.a, self.b, self.modulus
        )
    }
}

fn prime_of_prime_power(mut x: u64) -> Option<u64> {
    if x < 2 {
        return None;
    }
    let p = (2..)
        .find(|&d| x.is_multiple_of(d) || d * d > x)
        .filter(|&d| x.is_multiple_of(d))
        .unwrap_or(x);
    while x.is_multiple_of(p) {
        x /= p;
    }
    (x == 1).then_some(p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CatalogEntry {
    Family(CongruenceFamily),
    Internal(InternalCongruence),
}

impl CatalogEntry {
    pub fn name(&self) -> &str {
        match self {
            CatalogEntry::Family(f) => &f.name,
            CatalogEntry::Internal(i) => &i.name,
        }
    }

    pub fn modulus(&self) -> u64 {
        match self {
            CatalogEntry::Family(f) => f.modulus,
            CatalogEntry::Internal(i) => i.modulus,
        }
    }

    pub fn status(&self) -> ProofStatus {
        match self {
            CatalogEntry::Family(f) => f.status,
            CatalogEntry::Internal(_) => ProofStatus::Proved,
        }
    }
}

fn residue(s: &TruncatedSeries, index: usize, m: u64) -> Result<u64, SeriesError> {
    s.coefficient_residue(index, m)
}

/// Checks `s[A*n+B] = 0 (mod m)` for `0 <= n <= n_max`.
pub fn verify_progression(
    s: &TruncatedSeries,
    (a, b): (usize, usize),
    m: u64,
    n_max: usize,
) -> Result<VerificationReport, CongruenceError> {
    let name = format!("{a}n+{b} mod {m}");
    let last = a
        .checked_mul(n_max)
        .and_then(|x| x.checked_add(b))
        .unwrap_or(usize::MAX);
    if last >= s.order() {
        return Err(CongruenceError::InsufficientTruncation {
            what: name,
            needed: last.saturating_add(1),
            order: s.order(),
        });
    }
    for n in 0..=n_max {
        let index = a * n + b;
        let r = residue(s, index, m)?;
        if r != 0 {
            let witness = Witness {
                n,
                index,
                left: BigInt::from(r),
                right: BigInt::from(0),
            };
            return Ok(VerificationReport::fail(name, n_max, witness));
        }
    }
    Ok(VerificationReport::pass(name, n_max))
}

/// Arguments `scale_base^alpha * (A*n + B)` below `limit`, in increasing `n`.
pub fn family_indices(fam: &CongruenceFamily, alpha: u32, limit: usize) -> Vec<usize> {
    let Some(scale) = fam.scale(alpha) else {
        return Vec::new();
    };
    (0..)
        .map_while(|n: usize| {
            let arg = fam
                .a
                .checked_mul(n)?
                .checked_add(fam.b)?
                .checked_mul(scale)?;
            (arg < limit).then_some(arg)
        })
        .collect()
}

fn sweep_level(
    s: &TruncatedSeries,
    fam: &CongruenceFamily,
    alpha: u32,
    limit: usize,
) -> Result<LevelReport, SeriesError> {
    let indices = family_indices(fam, alpha, limit);
    for (n, &index) in indices.iter().enumerate() {
        let r = residue(s, index, fam.modulus)?;
        if r != 0 {
            return Ok(LevelReport {
                alpha,
                count: n + 1,
                outcome: Outcome::Fail,
                witness: Some(Witness {
                    n,
                    index,
                    left: BigInt::from(r),
                    right: BigInt::from(0),
                }),
            });
        }
    }
    let outcome = if indices.is_empty() {
        Outcome::Uncovered
    } else {
        Outcome::Pass
    };
    Ok(LevelReport {
        alpha,
        count: indices.len(),
        outcome,
        witness: None,
    })
}

/// Sweeps every level `alpha <= alpha_max` over arguments below `budget`.
/// Levels with no argument below the budget are reported as uncovered.
pub fn verify_family(
    s: &TruncatedSeries,
    fam: &CongruenceFamily,
    alpha_max: u32,
    budget: usize,
) -> Result<VerificationReport, CongruenceError> {
    if budget > s.order() {
        return Err(CongruenceError::InsufficientTruncation {
            what: format!("{} with budget {budget}", fam.name),
            needed: budget,
            order: s.order(),
        });
    }
    let levels = fam
        .alphas(alpha_max)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|alpha| sweep_level(s, fam, alpha, budget))
        .collect::<Result<Vec<_>, _>>()?;
    let report = VerificationReport::from_levels(fam.name.clone(), budget, levels);
    Ok(match fam.status {
        ProofStatus::Conjectural => report.with_note(CONJECTURAL_NOTE),
        ProofStatus::Proved => report,
    })
}

/// Checks `s[a*n] = s[b*n] (mod m)` for `0 <= n <= n_max`. The witness
/// records both residues, with `index = a*n`.
pub fn verify_internal(
    s: &TruncatedSeries,
    ic: &InternalCongruence,
    n_max: usize,
) -> Result<VerificationReport, CongruenceError> {
    let needed = ic.a.saturating_mul(n_max);
    if needed >= s.order() {
        return Err(CongruenceError::InsufficientTruncation {
            what: ic.name.clone(),
            needed: needed.saturating_add(1),
            order: s.order(),
        });
    }
    for n in 0..=n_max {
        let left = residue(s, ic.a * n, ic.modulus)?;
        let right = residue(s, ic.b * n, ic.modulus)?;
        if left != right {
            let witness = Witness {
                n,
                index: ic.a * n,
                left: BigInt::from(left),
                right: BigInt::from(right),
            };
            return Ok(VerificationReport::fail(ic.name.clone(), n_max, witness));
        }
    }
    Ok(VerificationReport::pass(ic.name.clone(), n_max))
}

/// Congruence families and internal congruences for `PD_2`, with their
/// status. Single progressions that are one level of a tower say so.
pub fn theorem_catalog() -> Vec<CatalogEntry> {
    use ProofStatus::*;
    let fam = |name: &str, ab, scale, m, status, source: &str| {
        CongruenceFamily::new(name, ab, scale, m, status, source)
            .expect("catalog entries are valid")
    };
    let single = |name: &str, ab, m, source: &str| fam(name, ab, 1, m, Proved, source);
    let tower_4n3 = "2^a(4n+3) mod 4";
    let tower_8n7 = "2^a(8n+7) mod 8";
    let tower_6n5 = "4^a(6n+5) mod 4";
    let families = vec![
        fam(tower_4n3, (4, 3), 2, 4, Proved, "tower over 4n+3 modulo 4"),
        fam(tower_8n7, (8, 7), 2, 8, Proved, "tower over 8n+7 modulo 8"),
        fam(tower_6n5, (6, 5), 4, 4, Proved, "tower over 6n+5 modulo 4"),
        single("4n+3 mod 4", (4, 3), 4, "residue 3 mod 4 vanishes").instance_of(tower_4n3, 0),
        single("6n+3 mod 4", (6, 3), 4, "residue 3 mod 6 vanishes"),
        single("6n+5 mod 4", (6, 5), 4, "residue 5 mod 6 vanishes").instance_of(tower_6n5, 0),
        single("8n+6 mod 4", (8, 6), 4, "residue 6 mod 8 vanishes").instance_of(tower_4n3, 1),
        single(
            "16n+12 mod 4",
            (16, 12),
            4,
            "conjectured earlier, now a tower level",
        )
        .instance_of(tower_4n3, 2),
        single(
            "24n+20 mod 4",
            (24, 20),
            4,
            "conjectured earlier, now a tower level",
        )
        .instance_of(tower_6n5, 1),
        single(
            "32n+24 mod 4",
            (32, 24),
            4,
            "conjectured earlier, twice 16n+12",
        )
        .instance_of(tower_4n3, 3),
        single(
            "48n+26 mod 4",
            (48, 26),
            4,
            "conjectured earlier, proved via 16n+10",
        ),
        fam("25n+5 mod 4", (25, 5), 1, 4, Conjectural, "open conjecture"),
        single("8n+7 mod 8", (8, 7), 8, "residue 7 mod 8 vanishes").instance_of(tower_8n7, 0),
        single("16n+14 mod 8", (16, 14), 8, "residue 14 mod 16 vanishes").instance_of(tower_8n7, 1),
        single("32n+28 mod 8", (32, 28), 8, "residue 28 mod 32 vanishes").instance_of(tower_8n7, 2),
        single("64n+56 mod 8", (64, 56), 8, "residue 56 mod 64 vanishes").instance_of(tower_8n7, 3),
    ];
    let internals = vec![
        InternalCongruence::new(
            "PD_2(4n) = PD_2(n) mod 4",
            4,
            1,
            4,
            "internal congruence modulo 4",
        ),
        InternalCongruence::new(
            "PD_2(16n) = PD_2(4n) mod 8",
            16,
            4,
            8,
            "internal congruence modulo 8",
        ),
    ];
    families
        .into_iter()
        .map(CatalogEntry::Family)
        .chain(
            internals
                .into_iter()
                .map(|ic| CatalogEntry::Internal(ic.expect("catalog entries are valid"))),
        )
        .collect()
}

/// Largest `n` with `a*n <= budget` and `a*n` inside the series.
pub fn internal_n_max(s: &TruncatedSeries, ic: &InternalCongruence, budget: usize) -> usize {
    budget.min(s.order().saturating_sub(1)) / ic.a
}

/// Runs `entries` against one series. Families sweep up to `budget`;
/// internal congruences check every `n` with `a*n <= budget`. Reports keep
/// the order of `entries`.
pub fn run_catalog(
    s: &TruncatedSeries,
    entries: &[CatalogEntry],
    alpha_max: u32,
    budget: usize,
) -> Result<Vec<VerificationReport>, CongruenceError> {
    if budget > s.order() {
        return Err(CongruenceError::InsufficientTruncation {
            what: format!("budget {budget}"),
            needed: budget,
            order: s.order(),
        });
    }
    entries
        .par_iter()
        .map(|entry| match entry {
            CatalogEntry::Family(f) => verify_family(s, f, alpha_max, budget),
            CatalogEntry::Internal(ic) => verify_internal(s, ic, internal_n_max(s, ic, budget)),
        })
        .collect()
}

/// Compares `count` seeded random indices of `modular` against the exact
/// coefficients of `exact`, below the smaller of the two orders.
pub fn spot_check_backends(
    modular: &TruncatedSeries,
    exact: &TruncatedSeries,
    count: usize,
    seed: u64,
) -> Result<VerificationReport, CongruenceError> {
    let m = modular
        .ring()
        .modulus()
        .ok_or(SeriesError::IncompatibleModulus {
            ring: modular.ring(),
            modulus: 0,
        })?;
    let limit = modular.order().min(exact.order());
    let name = format!("backend spot check mod {m}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let index = rng.gen_range(0..limit);
        let fast = modular.coefficient_residue(index, m)?;
        let slow = exact.coefficient_residue(index, m)?;
        if fast != slow {
            let witness = Witness {
                n: index,
                index,
                left: BigInt::from(fast),
                right: BigInt::from(slow),
            };
            return Ok(VerificationReport::fail(name, limit, witness));
        }
    }
    Ok(VerificationReport::pass(name, limit))
}
