//! Dissections and the catalog of identities they satisfy.
//!
//! An [`IdentityFixture`] states `lhs = rhs` exactly or modulo `m`. The left
//! side may be a progression of an expression, `sum_n a(An+B) q^n`, which is
//! how every dissection of the `PD_2` generating function is written. A
//! fixture whose left side is itself a dissection component of an earlier
//! fixture's right side carries that [`Section`] and is checked both ways.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{self, ExprAst, ExprError};
use crate::partitions::PD2_GENERATING_FUNCTION;
use crate::report::{VerificationReport, Witness};
use crate::series::{CoefficientRing, Comparison, SeriesError, TruncatedSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("fixture {fixture}: {source}")]
    Expr { fixture: String, source: ExprError },
    #[error("fixture {fixture}: {source}")]
    Series {
        fixture: String,
        source: SeriesError,
    },
    #[error("fixture {fixture}: verification order must be at least 2, got {order}")]
    OrderTooSmall { fixture: String, order: usize },
    #[error("unknown fixture `{0}`")]
    Unknown(String),
    #[error("identity file line {line}: {message}")]
    File { line: usize, message: String },
}

/// `A n + B` with `0 <= B < A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Progression {
    pub modulus: usize,
    pub residue: usize,
}

impl Progression {
    pub fn new(modulus: usize, residue: usize) -> Result<Self, SeriesError> {
        if modulus == 0 {
            return Err(SeriesError::ZeroProgressionModulus);
        }
        if residue >= modulus {
            return Err(SeriesError::ResidueOutOfRange { residue, modulus });
        }
        Ok(Progression { modulus, residue })
    }

    /// Order the undissected series needs so that the component reaches
    /// `order`.
    fn source_order(&self, order: usize) -> usize {
        self.modulus * order + self.residue
    }
}

impl fmt::Display for Progression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}n+{}", self.modulus, self.residue)
    }
}

/// `lhs` is also the `progression` component of `expr` (named `parent`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub parent: String,
    pub expr: ExprAst,
    pub progression: Progression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureStatus {
    ExactIdentity,
    Congruence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityFixture {
    pub name: String,
    pub lhs: ExprAst,
    /// When set, the left side is `sum_n lhs[An+B] q^n`.
    pub lhs_progression: Option<Progression>,
    pub rhs: ExprAst,
    pub modulus: Option<u64>,
    pub source: String,
    pub section: Option<Section>,
}

impl IdentityFixture {
    pub fn status(&self) -> FixtureStatus {
        match self.modulus {
            None => FixtureStatus::ExactIdentity,
            Some(_) => FixtureStatus::Congruence,
        }
    }

    /// Same statement checked at a different modulus.
    pub fn with_modulus(&self, modulus: Option<u64>) -> Self {
        IdentityFixture {
            modulus,
            ..self.clone()
        }
    }

    fn ring(&self) -> Result<CoefficientRing, FixtureError> {
        match self.modulus {
            None => Ok(CoefficientRing::Integers),
            Some(m) => CoefficientRing::modulo(m).map_err(|source| FixtureError::Series {
                fixture: self.name.clone(),
                source,
            }),
        }
    }

    fn expr_err(&self) -> impl Fn(ExprError) -> FixtureError + '_ {
        move |source| FixtureError::Expr {
            fixture: self.name.clone(),
            source,
        }
    }

    fn series_err(&self) -> impl Fn(SeriesError) -> FixtureError + '_ {
        move |source| FixtureError::Series {
            fixture: self.name.clone(),
            source,
        }
    }

    fn lhs_text(&self) -> String {
        match self.lhs_progression {
            None => expr::format(&self.lhs),
            Some(p) => format!("[{p}] {}", expr::format(&self.lhs)),
        }
    }
}

impl fmt::Display for IdentityFixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.modulus {
            None => "=".to_string(),
            Some(m) => format!("= (mod {m})"),
        };
        write!(f, "{}: {} {rel} {}", self.name, self.lhs_text(), self.rhs)
    }
}

/// Splits `s` into its `m` progression components `sum_n a(mn+j) q^n`.
pub fn dissect(s: &TruncatedSeries, m: usize) -> Result<Vec<TruncatedSeries>, SeriesError> {
    if m == 0 {
        return Err(SeriesError::ZeroProgressionModulus);
    }
    (0..m).map(|j| s.extract_progression(m, j)).collect()
}

/// Inverse of [`dissect`]: `sum_j q^j * component_j(q^m)` at `order`.
pub fn reassemble(
    components: &[TruncatedSeries],
    order: usize,
) -> Result<TruncatedSeries, SeriesError> {
    let m = components.len();
    if m == 0 {
        return Err(SeriesError::ZeroProgressionModulus);
    }
    let ring = components[0].ring();
    let mut acc = TruncatedSeries::zero(order, ring)?;
    for (j, c) in components.iter().enumerate() {
        let mut padded = vec![num_bigint::BigInt::from(0); order];
        for (n, v) in c.nonzero_terms() {
            let e = m * n + j;
            if e < order {
                padded[e] = v;
            }
        }
        acc = acc.add(&TruncatedSeries::from_coeffs(padded, order, ring)?)?;
    }
    Ok(acc)
}

/// Expands both sides (modulo the fixture modulus, if any) and compares the
/// first `order` coefficients. Fixtures with a [`Section`] must also match
/// the dissected parent.
pub fn verify_fixture(
    fixture: &IdentityFixture,
    order: usize,
) -> Result<VerificationReport, FixtureError> {
    if order < 2 {
        return Err(FixtureError::OrderTooSmall {
            fixture: fixture.name.clone(),
            order,
        });
    }
    let ring = fixture.ring()?;
    let rhs = expr::evaluate(&fixture.rhs, order, ring).map_err(fixture.expr_err())?;
    let lhs = section_series(fixture, &fixture.lhs, fixture.lhs_progression, order, ring)?;
    let mut report = compare(&fixture.name, &lhs, &rhs, order)?;
    if report.passed() {
        if let Some(section) = &fixture.section {
            let via = section_series(
                fixture,
                &section.expr,
                Some(section.progression),
                order,
                ring,
            )?;
            report = compare(&fixture.name, &via, &rhs, order)?;
            report = report.with_note(format!(
                "also checked as {} of {}",
                section.progression, section.parent
            ));
        }
    }
    Ok(report)
}

fn section_series(
    fixture: &IdentityFixture,
    ast: &ExprAst,
    progression: Option<Progression>,
    order: usize,
    ring: CoefficientRing,
) -> Result<TruncatedSeries, FixtureError> {
    match progression {
        None => expr::evaluate(ast, order, ring).map_err(fixture.expr_err()),
        Some(p) => expr::evaluate(ast, p.source_order(order), ring)
            .map_err(fixture.expr_err())?
            .extract_progression(p.modulus, p.residue)
            .map_err(fixture.series_err())?
            .truncate(order)
            .map_err(fixture.series_err()),
    }
}

fn compare(
    name: &str,
    lhs: &TruncatedSeries,
    rhs: &TruncatedSeries,
    order: usize,
) -> Result<VerificationReport, FixtureError> {
    let cmp = lhs
        .equals_up_to(rhs, order)
        .map_err(|source| FixtureError::Series {
            fixture: name.to_string(),
            source,
        })?;
    Ok(match cmp {
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

/// Verifies fixtures in parallel; results keep the input order.
pub fn verify_all(
    fixtures: &[IdentityFixture],
    order: usize,
) -> Vec<Result<VerificationReport, FixtureError>> {
    fixtures
        .par_iter()
        .map(|f| verify_fixture(f, order))
        .collect()
}

/// A congruence checked at a modulus it does not hold at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeControl {
    pub fixture: String,
    pub modulus: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeControlReport {
    pub control: NegativeControl,
    /// The raw verification at the stronger modulus; expected to fail.
    pub report: VerificationReport,
}

impl NegativeControlReport {
    /// The control behaved: verification failed and produced a witness.
    pub fn as_expected(&self) -> bool {
        !self.report.passed() && self.report.witness.is_some()
    }
}

/// Stronger moduli at which catalog congruences must fail.
pub fn negative_controls() -> Vec<NegativeControl> {
    [("M4_2n1", 8), ("M4_4n", 8), ("M8_4n3", 16)]
        .into_iter()
        .map(|(fixture, modulus)| NegativeControl {
            fixture: fixture.to_string(),
            modulus,
        })
        .collect()
}

pub fn run_negative_control(
    catalog: &[IdentityFixture],
    control: &NegativeControl,
    order: usize,
) -> Result<NegativeControlReport, FixtureError> {
    let fixture = find(catalog, &control.fixture)?;
    let mut stronger = fixture.with_modulus(Some(control.modulus));
    stronger.name = format!("{}@mod{}", fixture.name, control.modulus);
    let report = verify_fixture(&stronger, order)?;
    Ok(NegativeControlReport {
        control: control.clone(),
        report,
    })
}

pub fn find<'a>(
    catalog: &'a [IdentityFixture],
    name: &str,
) -> Result<&'a IdentityFixture, FixtureError> {
    catalog
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| FixtureError::Unknown(name.to_string()))
}

struct Spec<'a> {
    name: &'a str,
    lhs: &'a str,
    progression: Option<(usize, usize)>,
    rhs: String,
    modulus: Option<u64>,
    source: &'a str,
    section: Option<(&'a str, usize, usize)>,
}

const PD2: &str = PD2_GENERATING_FUNCTION;
const L3A_RHS: &str = "f8^2*f12^5/(f2^2*f4*f6^4*f24^2) + q*f4^5*f24^2/(f2^4*f6^2*f8^2*f12)";

fn catalog_specs() -> Vec<Spec<'static>> {
    let pd2 = |name, (a, b), rhs: &str, modulus, source, section| Spec {
        name,
        lhs: PD2,
        progression: Some((a, b)),
        rhs: rhs.to_string(),
        modulus,
        source,
        section,
    };
    let plain = |name, lhs, rhs: &str, source| Spec {
        name,
        lhs,
        progression: None,
        rhs: rhs.to_string(),
        modulus: None,
        source,
        section: None,
    };
    vec![
        plain(
            "L4",
            "1/f1^4",
            "f4^14/(f2^14*f8^4) + 4*q*f4^2*f8^4/f2^10",
            "2-dissection of 1/f1^4",
        ),
        plain(
            "L12",
            "f1^2",
            "f2*f8^5/(f4^2*f16^2) - 2*q*f2*f16^2/f8",
            "2-dissection of f1^2",
        ),
        plain("L3a", "1/(f1*f3)", L3A_RHS, "2-dissection of 1/(f1*f3)"),
        plain(
            "L3b",
            "f1*f3",
            "f2*f8^2*f12^4/(f4^2*f6*f24^2) - q*f4^4*f6*f24^2/(f2*f8^2*f12^2)",
            "2-dissection of f1*f3",
        ),
        pd2(
            "D2_even",
            (2, 0),
            "f4^2*f6^4/(f1^2*f3^2*f12^2)",
            None,
            "2-dissection of the generating function, even part",
            None,
        ),
        pd2(
            "D2_odd",
            (2, 1),
            "f2^6*f12^2/(f1^4*f4^2*f6^2)",
            None,
            "2-dissection of the generating function, odd part",
            None,
        ),
        pd2(
            "D2_even_L3",
            (2, 0),
            "(f8^4*f12^10/(f2^4*f4^2*f6^8*f24^4) \
              + 2*q*f8^2*f12^5/(f2^2*f4*f6^4*f24^2)*f4^5*f24^2/(f2^4*f6^2*f8^2*f12) \
              + q^2*f4^10*f24^4/(f2^8*f6^4*f8^4*f12^2))*f4^2*f6^4/f12^2",
            None,
            "even part with 1/(f1*f3) dissected and squared",
            None,
        ),
        pd2(
            "D4_0",
            (4, 0),
            "f4^4*f6^8/(f1^4*f3^4*f12^4) + q*f2^12*f12^4/(f1^8*f4^4*f6^4)",
            None,
            "4-dissection, residue 0",
            Some(("D2_even", 2, 0)),
        ),
        pd2(
            "D4_1",
            (4, 1),
            "f2^12*f6^2/(f1^8*f3^2*f4^4)",
            None,
            "4-dissection, residue 1",
            Some(("D2_odd", 2, 0)),
        ),
        pd2(
            "D4_2",
            (4, 2),
            "2*f2^6*f6^2/(f1^6*f3^2)",
            None,
            "4-dissection, residue 2",
            Some(("D2_even", 2, 1)),
        ),
        pd2(
            "D4_3",
            (4, 3),
            "4*f4^4*f6^2/(f1^4*f3^2)",
            None,
            "4-dissection, residue 3",
            Some(("D2_odd", 2, 1)),
        ),
        pd2(
            "M4_2n",
            (2, 0),
            "f4^2/(f1^2*f3^2)",
            Some(4),
            "even part reduced mod 4",
            None,
        ),
        pd2(
            "M4_2n1",
            (2, 1),
            "f6^2",
            Some(4),
            "odd part reduced mod 4",
            None,
        ),
        pd2(
            "M4_4n0_4n2",
            (2, 0),
            "f8^4*f12^10/(f2^4*f6^8*f24^4) + q^2*f4^12*f24^4/(f2^8*f6^4*f8^4*f12^2) \
              + 2*q*f4^6*f12^4/(f2^6*f6^6)",
            Some(4),
            "residues 0 and 2 mod 4 before splitting",
            None,
        ),
        pd2(
            "M4_4n",
            (4, 0),
            "(f2^3/f6)^2 + q*f12^2",
            Some(4),
            "residue 0 mod 4",
            Some(("M4_2n", 2, 0)),
        ),
        pd2(
            "M4_4n2",
            (4, 2),
            "2*f2^3*f6",
            Some(4),
            "residue 2 mod 4",
            Some(("M4_2n", 2, 1)),
        ),
        pd2(
            "M4_8n",
            (8, 0),
            "(f1^3/f3)^2",
            Some(4),
            "residue 0 mod 8",
            Some(("M4_4n", 2, 0)),
        ),
        pd2(
            "M4_8n4",
            (8, 4),
            "f6^2",
            Some(4),
            "residue 4 mod 8",
            Some(("M4_4n", 2, 1)),
        ),
        pd2(
            "M4_full",
            (1, 0),
            "(f2^3/f6)^2 + q*f12^2",
            Some(4),
            "full series mod 4",
            None,
        ),
        pd2(
            "M8_4n3",
            (4, 3),
            "4*f4^4*f6^2/(f2^2*f6)",
            Some(8),
            "residue 3 mod 4, mod 8",
            Some(("D2_odd", 2, 1)),
        ),
        pd2(
            "M8_4n2_L3",
            (4, 2),
            &format!("2*f4^14*f6^2/(f2^8*f8^4)*({L3A_RHS})^2"),
            Some(8),
            "residue 2 mod 4, mod 8, after dissecting 1/f1^4 and 1/(f1*f3)",
            None,
        ),
        pd2(
            "M8_8n6",
            (8, 6),
            "4*f2^11*f6^2/f4^4",
            Some(8),
            "residue 6 mod 8, mod 8",
            Some(("D4_2", 2, 1)),
        ),
        pd2(
            "M8_4n_overall",
            (4, 0),
            "(f4/(f1*f3))^4 + q*(f12/f6)^4",
            Some(8),
            "residue 0 mod 4, mod 8, as powers of f4/(f1*f3)",
            Some(("D2_even", 2, 0)),
        ),
        pd2(
            "M8_4n_L3",
            (4, 0),
            &format!("f4^4*({L3A_RHS})^4 + q*f12^4/f6^4"),
            Some(8),
            "residue 0 mod 4, mod 8, after dissecting 1/(f1*f3)",
            None,
        ),
        pd2(
            "M8_8n4",
            (8, 4),
            "4*f2^9/f6 + 4*q*f2^3*f6^5 + f6^4/f3^4",
            Some(8),
            "residue 4 mod 8, mod 8",
            Some(("M8_4n_overall", 2, 1)),
        ),
        pd2(
            "M8_16n12",
            (16, 12),
            "4*f1^3*f3^5 + 4*q*f6^2*f12^4/f3^6",
            Some(8),
            "residue 12 mod 16, mod 8",
            Some(("M8_8n4", 2, 1)),
        ),
        pd2(
            "M8_16n12_L3",
            (16, 12),
            "4*f2^2*f6*f8^2*f12^4/(f4^2*f24^2) + 4*q*f4^4*f6^3*f24^2/(f8^2*f12^2) + 4*q*f6^7",
            Some(8),
            "residue 12 mod 16, mod 8, after dissecting f1*f3",
            None,
        ),
        pd2(
            "M8_32n28",
            (32, 28),
            "0",
            Some(8),
            "residue 28 mod 32 vanishes mod 8",
            Some(("M8_16n12_L3", 2, 1)),
        ),
        pd2(
            "M8_8n",
            (8, 0),
            "f8^4/(f2^4*f6^4) + 6*q*f2^14*f6^10/(f2^8*f6^8) + q^2*f2^24*f24^4/(f2^8*f12^4*f4^8)",
            Some(8),
            "residue 0 mod 8, mod 8, three-term form",
            Some(("M8_4n_overall", 2, 0)),
        ),
        pd2(
            "M8_16n8",
            (16, 8),
            "6*f1^6*f3^2",
            Some(8),
            "residue 8 mod 16, mod 8",
            Some(("M8_8n", 2, 1)),
        ),
        pd2(
            "M8_32n24",
            (32, 24),
            "4*f6^2*f8/f2",
            Some(8),
            "residue 24 mod 32, mod 8",
            Some(("M8_16n8", 2, 1)),
        ),
        pd2(
            "M8_16n",
            (16, 0),
            "f4^4/(f1^4*f3^4) + q*f12^4/f6^4",
            Some(8),
            "residue 0 mod 16, mod 8",
            Some(("M8_8n", 2, 0)),
        ),
        pd2(
            "M4_8n2",
            (8, 2),
            "2*f1^3*f3",
            Some(4),
            "residue 2 mod 8, mod 4",
            Some(("M4_4n2", 2, 0)),
        ),
        pd2(
            "M4_8n2_L3",
            (8, 2),
            "2*f2^2*f8^7*f12^4/(f4^4*f6*f16^2*f24^2) - 2*q*f2*f4^4*f6*f8^5*f24^2/(f2*f4^2*f8^2*f12^2*f16^2)",
            Some(4),
            "residue 2 mod 8, mod 4, after dissecting f1^2 and f1*f3",
            None,
        ),
        pd2(
            "M4_16n10",
            (16, 10),
            "2*f3*f6^2",
            Some(4),
            "residue 10 mod 16, mod 4",
            Some(("M4_8n2", 2, 1)),
        ),
        pd2(
            "M4_4n_pre",
            (4, 0),
            "f4^4*f6^10/(f1^4*f3^8*f12^4) + q*f2^12*f12^4/(f1^8*f3^4*f4^4*f6^2)",
            Some(4),
            "residue 0 mod 4, mod 4, before reducing f1^4 and f3^4",
            None,
        ),
        pd2(
            "M4_4n2_pre",
            (4, 2),
            "2*f2^6*f6^4/(f1^6*f3^6)",
            Some(4),
            "residue 2 mod 4, mod 4, before reducing f1^2 and f3^2",
            None,
        ),
        pd2(
            "M4_8n2_product",
            (8, 2),
            "2*(f2*f8^2*f12^4/(f4^2*f6*f24^2) - q*f4^4*f6*f24^2/(f2*f8^2*f12^2)) \
              *(f2*f8^5/(f4^2*f16^2) - 2*q*f2*f16^2/f8)",
            Some(4),
            "residue 2 mod 8, mod 4, as a product of the f1*f3 and f1^2 dissections",
            None,
        ),
        pd2(
            "M8_8n6_pre",
            (8, 6),
            "4*f2^18*f6^4/(f1^14*f3^4*f4^4)",
            Some(8),
            "residue 6 mod 8, mod 8, before reducing powers of f1 and f3",
            None,
        ),
        pd2(
            "M8_8n4_pre",
            (8, 4),
            "4*f2^9*f4^6*f6^15*f12^2/(f1^10*f2^3*f3^14*f4^2*f6*f12^6) \
              + 4*q*f2^19*f4^2*f6^5*f12^6/(f1^14*f2*f3^10*f4^6*f6^3*f12^2) + f6^4/f3^4",
            Some(8),
            "residue 4 mod 8, mod 8, before reducing powers of f1 and f3",
            None,
        ),
        pd2(
            "M8_8n4_dissected",
            (8, 4),
            "4*f2^9/f6 + 4*q*f2^3*f6^5 + f6^4*(f12^14/(f6^14*f24^4) + 4*q^3*f12^2*f24^4/f6^10)",
            Some(8),
            "residue 4 mod 8, mod 8, with 1/f3^4 dissected",
            None,
        ),
        pd2(
            "M8_16n12_pre",
            (16, 12),
            "4*f1*f2*f3*f6^2 + 4*q*f6^7",
            Some(8),
            "residue 12 mod 16, mod 8, reduced form",
            None,
        ),
        pd2(
            "M8_32n28_pre",
            (32, 28),
            "4*f2^4*f3^3*f12^2/(f4^2*f6^2) + 4*f3^7",
            Some(8),
            "residue 28 mod 32, mod 8, before cancelling",
            None,
        ),
        pd2(
            "M8_8n_pre",
            (8, 0),
            "f4^8*f6^20/(f1^8*f3^16*f12^8) + 6*q*f2^14*f6^10/(f1^12*f2^2*f3^12*f6^2) \
              + q^2*f2^24*f12^8/(f1^16*f3^8*f4^8*f6^4)",
            Some(8),
            "residue 0 mod 8, mod 8, before reducing powers of f1 and f3",
            None,
        ),
        pd2(
            "M8_16n8_product",
            (16, 8),
            "6*(f2*f8^5/(f4^2*f16^2) - 2*q*f2*f16^2/f8)^2 \
              *(f2*f8^2*f12^4/(f4^2*f6*f24^2) - q*f4^4*f6*f24^2/(f2*f8^2*f12^2))^2",
            Some(8),
            "residue 8 mod 16, mod 8, as squares of the f1^2 and f1*f3 dissections",
            None,
        ),
        pd2(
            "PD2_16n12_mod4",
            (16, 12),
            "0",
            Some(4),
            "residue 12 mod 16 vanishes mod 4",
            None,
        ),
    ]
}

/// Every displayed identity and intermediate congruence, in dependency
/// order (a fixture's section parent precedes it).
pub fn builtin_catalog() -> Vec<IdentityFixture> {
    let mut out: Vec<IdentityFixture> = Vec::new();
    for spec in catalog_specs() {
        let parse = |text: &str| expr::parse(text).expect("built-in fixture parses");
        let section = spec.section.map(|(parent, m, j)| {
            let parent_fixture = out
                .iter()
                .find(|f| f.name == parent)
                .expect("section parent precedes fixture");
            Section {
                parent: parent.to_string(),
                expr: parent_fixture.rhs.clone(),
                progression: Progression::new(m, j).expect("valid built-in progression"),
            }
        });
        out.push(IdentityFixture {
            name: spec.name.to_string(),
            lhs: parse(spec.lhs),
            lhs_progression: spec
                .progression
                .map(|(a, b)| Progression::new(a, b).expect("valid built-in progression")),
            rhs: parse(&spec.rhs),
            modulus: spec.modulus,
            source: spec.source.to_string(),
            section,
        });
    }
    out
}

/// Parses identity files: blocks of `key=value` lines separated by blank
/// lines or by a new `name=`. Keys are `name`, `lhs`, `rhs`, optional `mod`,
/// `source`, and optional `progression=A,B` (the left side is then the
/// `An+B` component of `lhs`). `#` starts a comment line.
pub fn parse_identity_file(text: &str) -> Result<Vec<IdentityFixture>, FixtureError> {
    #[derive(Default)]
    struct Draft {
        start: usize,
        name: Option<String>,
        lhs: Option<ExprAst>,
        rhs: Option<ExprAst>,
        modulus: Option<u64>,
        source: Option<String>,
        progression: Option<Progression>,
    }

    fn finish(d: Draft, out: &mut Vec<IdentityFixture>) -> Result<(), FixtureError> {
        let missing = |key: &str| FixtureError::File {
            line: d.start,
            message: format!("fixture is missing `{key}=`"),
        };
        let fixture = IdentityFixture {
            name: d.name.clone().ok_or_else(|| missing("name"))?,
            lhs: d.lhs.clone().ok_or_else(|| missing("lhs"))?,
            lhs_progression: d.progression,
            rhs: d.rhs.clone().ok_or_else(|| missing("rhs"))?,
            modulus: d.modulus,
            source: d.source.clone().unwrap_or_default(),
            section: None,
        };
        if out.iter().any(|f| f.name == fixture.name) {
            return Err(FixtureError::File {
                line: d.start,
                message: format!("duplicate fixture name `{}`", fixture.name),
            });
        }
        out.push(fixture);
        Ok(())
    }

    let mut out = Vec::new();
    let mut draft: Option<Draft> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if let Some(d) = draft.take() {
                finish(d, &mut out)?;
            }
            continue;
        }
        let err = |message: String| FixtureError::File {
            line: line_no,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key=value`, found `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "name" {
            if let Some(d) = draft.take() {
                finish(d, &mut out)?;
            }
        }
        let d = draft.get_or_insert_with(|| Draft {
            start: line_no,
            ..Draft::default()
        });
        let parse_expr = |v: &str| expr::parse(v).map_err(|e| err(e.to_string()));
        let duplicate = |set: bool| {
            if set {
                Err(err(format!("repeated key `{key}`")))
            } else {
                Ok(())
            }
        };
        match key {
            "name" => {
                if value.is_empty() {
                    return Err(err("empty fixture name".into()));
                }
                d.name = Some(value.to_string());
            }
            "lhs" => {
                duplicate(d.lhs.is_some())?;
                d.lhs = Some(parse_expr(value)?);
            }
            "rhs" => {
                duplicate(d.rhs.is_some())?;
                d.rhs = Some(parse_expr(value)?);
            }
            "mod" => {
                duplicate(d.modulus.is_some())?;
                let m: u64 = value
                    .parse()
                    .map_err(|_| err(format!("modulus `{value}` is not an integer")))?;
                CoefficientRing::modulo(m).map_err(|e| err(e.to_string()))?;
                d.modulus = Some(m);
            }
            "source" => d.source = Some(value.to_string()),
            "progression" => {
                duplicate(d.progression.is_some())?;
                let (a, b) = value
                    .split_once(',')
                    .ok_or_else(|| err(format!("progression `{value}` must be `A,B`")))?;
                let parse_usize = |s: &str| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| err(format!("progression `{value}` must be `A,B`")))
                };
                let p = Progression::new(parse_usize(a)?, parse_usize(b)?)
                    .map_err(|e| err(e.to_string()))?;
                d.progression = Some(p);
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    if let Some(d) = draft.take() {
        finish(d, &mut out)?;
    }
    Ok(out)
}

/// Renders fixtures in the identity-file format read by
/// [`parse_identity_file`].
pub fn to_identity_file(fixtures: &[IdentityFixture]) -> String {
    let mut out = String::new();
    for f in fixtures {
        out.push_str(&format!("name={}\n", f.name));
        out.push_str(&format!("lhs={}\n", f.lhs));
        if let Some(p) = f.lhs_progression {
            out.push_str(&format!("progression={},{}\n", p.modulus, p.residue));
        }
        out.push_str(&format!("rhs={}\n", f.rhs));
        if let Some(m) = f.modulus {
            out.push_str(&format!("mod={m}\n"));
        }
        if !f.source.is_empty() {
            out.push_str(&format!("source={}\n", f.source));
        }
        out.push('\n');
    }
    out
}

/// Names must be unique within a catalog.
pub fn has_unique_names(fixtures: &[IdentityFixture]) -> bool {
    let mut seen = HashSet::new();
    fixtures.iter().all(|f| seen.insert(f.name.as_str()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn z() -> CoefficientRing {
        CoefficientRing::Integers
    }

    #[test]
    fn dissect_constant() {
        let one = TruncatedSeries::one(6, z()).unwrap();
        let parts = dissect(&one, 2).unwrap();
        assert_eq!(parts[0], TruncatedSeries::one(3, z()).unwrap());
        assert!(parts[1].is_zero());
        assert_eq!(dissect(&one, 0), Err(SeriesError::ZeroProgressionModulus));
        assert_eq!(reassemble(&parts, 6).unwrap(), one);
    }

    #[test]
    fn catalog_is_large_and_unique() {
        let catalog = builtin_catalog();
        assert!(catalog.len() >= 20, "{}", catalog.len());
        assert!(has_unique_names(&catalog));
        assert!(catalog.iter().all(|f| !f.source.is_empty()));
    }

    #[test]
    fn every_fixture_passes_at_small_order() {
        let catalog = builtin_catalog();
        for (f, r) in catalog.iter().zip(verify_all(&catalog, 120)) {
            let r = r.unwrap();
            assert!(r.passed(), "{f}\n{r}");
        }
    }

    #[test]
    fn planted_defect_reports_index() {
        let catalog = builtin_catalog();
        let mut f = find(&catalog, "L4").unwrap().clone();
        f.rhs = ExprAst::add(f.rhs.clone(), ExprAst::pow(ExprAst::Q, 17));
        let r = verify_fixture(&f, 100).unwrap();
        assert!(!r.passed());
        let w = r.witness.unwrap();
        assert_eq!(w.index, 17);
        assert_eq!(&w.right - &w.left, BigInt::from(1));
    }

    #[test]
    fn negative_controls_fail_with_witness() {
        let catalog = builtin_catalog();
        for control in negative_controls() {
            let r = run_negative_control(&catalog, &control, 200).unwrap();
            assert!(r.as_expected(), "{:?}", r);
        }
    }

    #[test]
    fn order_below_two_rejected() {
        let catalog = builtin_catalog();
        assert!(matches!(
            verify_fixture(&catalog[0], 1),
            Err(FixtureError::OrderTooSmall { .. })
        ));
        assert!(matches!(
            find(&catalog, "nope"),
            Err(FixtureError::Unknown(_))
        ));
    }

    #[test]
    fn identity_file_round_trip() {
        let catalog = builtin_catalog();
        let text = to_identity_file(&catalog);
        let parsed = parse_identity_file(&text).unwrap();
        assert_eq!(parsed.len(), catalog.len());
        for (a, b) in catalog.iter().zip(&parsed) {
            assert_eq!(
                (&a.name, &a.lhs, &a.rhs, a.modulus, a.lhs_progression),
                (&b.name, &b.lhs, &b.rhs, b.modulus, b.lhs_progression)
            );
        }
    }

    #[test]
    fn identity_file_errors() {
        let bad = "name=x\nlhs=f1\n";
        assert!(matches!(
            parse_identity_file(bad),
            Err(FixtureError::File { line: 1, .. })
        ));
        let bad_expr = "name=x\nlhs=f1 f2\nrhs=1\n";
        assert!(matches!(
            parse_identity_file(bad_expr),
            Err(FixtureError::File { line: 2, .. })
        ));
        let unknown = "name=x\nfoo=1\n";
        assert!(parse_identity_file(unknown).is_err());
        let dup = "name=x\nlhs=1\nrhs=1\n\nname=x\nlhs=1\nrhs=1\n";
        assert!(parse_identity_file(dup).is_err());
        let good = "# comment\nname=a\nlhs=f1^2\nrhs=f2\nmod=2\nsource=test\nname=b\nlhs=f4*f6^2/(f1*f3*f12)\nprogression=4,3\nrhs=4*f4^4*f6^2/(f1^4*f3^2)\n";
        let parsed = parse_identity_file(good).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].modulus, Some(2));
        assert_eq!(
            parsed[1].lhs_progression,
            Some(Progression {
                modulus: 4,
                residue: 3
            })
        );
        for f in &parsed {
            assert!(verify_fixture(f, 50).unwrap().passed());
        }
    }
}
