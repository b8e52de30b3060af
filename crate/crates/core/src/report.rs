//! Verification outcomes shared by fixtures, Frobenius checks and sweeps.

use std::fmt;

use num_bigint::BigInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// The bound admitted no instance, so nothing was checked.
    Uncovered,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Uncovered => "uncovered",
        }
    }

    /// Combines two outcomes: any failure wins, then any gap in coverage.
    pub fn and(self, other: Outcome) -> Outcome {
        match (self, other) {
            (Outcome::Fail, _) | (_, Outcome::Fail) => Outcome::Fail,
            (Outcome::Uncovered, _) | (_, Outcome::Uncovered) => Outcome::Uncovered,
            _ => Outcome::Pass,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A concrete counterexample.
///
/// `index` is the coefficient index of the left-hand side, so the witness
/// can be re-read with `TruncatedSeries::coefficient`. `n` is the progression
/// parameter that produced it (equal to `index` for plain series comparisons).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub n: usize,
    pub index: usize,
    pub left: BigInt,
    pub right: BigInt,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={};index={};lhs={};rhs={}",
            self.n, self.index, self.left, self.right
        )
    }
}

/// One level `alpha` of a congruence tower.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelReport {
    pub alpha: u32,
    pub count: usize,
    pub outcome: Outcome,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub name: String,
    /// Coefficients compared (identities) or largest argument bound (sweeps).
    pub bound: usize,
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    /// Per-level breakdown for sweeps; empty for single comparisons.
    pub levels: Vec<LevelReport>,
    pub note: Option<String>,
}

impl VerificationReport {
    pub fn pass(name: impl Into<String>, bound: usize) -> Self {
        VerificationReport {
            name: name.into(),
            bound,
            outcome: Outcome::Pass,
            witness: None,
            levels: Vec::new(),
            note: None,
        }
    }

    pub fn fail(name: impl Into<String>, bound: usize, witness: Witness) -> Self {
        VerificationReport {
            name: name.into(),
            bound,
            outcome: Outcome::Fail,
            witness: Some(witness),
            levels: Vec::new(),
            note: None,
        }
    }

    /// Builds a report from per-level results; the overall witness is the
    /// first failing level's.
    pub fn from_levels(name: impl Into<String>, bound: usize, levels: Vec<LevelReport>) -> Self {
        let outcome = if levels.is_empty() {
            Outcome::Uncovered
        } else {
            levels
                .iter()
                .fold(Outcome::Pass, |acc, l| acc.and(l.outcome))
        };
        let witness = levels.iter().find_map(|l| l.witness.clone());
        VerificationReport {
            name: name.into(),
            bound,
            outcome,
            witness,
            levels,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    /// Report lines `name<TAB>alpha<TAB>count<TAB>status<TAB>witness`.
    /// Single comparisons print `-` for alpha and the compared order as count.
    pub fn tsv_lines(&self) -> Vec<String> {
        let witness = |w: &Option<Witness>| w.as_ref().map(|w| w.to_string()).unwrap_or_default();
        if self.levels.is_empty() {
            return vec![format!(
                "{}\t-\t{}\t{}\t{}",
                self.name,
                self.bound,
                self.outcome,
                witness(&self.witness)
            )];
        }
        self.levels
            .iter()
            .map(|l| {
                format!(
                    "{}\t{}\t{}\t{}\t{}",
                    self.name,
                    l.alpha,
                    l.count,
                    l.outcome,
                    witness(&l.witness)
                )
            })
            .collect()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<8} {} (bound {})",
            self.outcome.as_str().to_uppercase(),
            self.name,
            self.bound
        )?;
        if let Some(note) = &self.note {
            write!(f, " [{note}]")?;
        }
        if let Some(w) = &self.witness {
            write!(f, "\n    witness: {w}")?;
        }
        for l in &self.levels {
            write!(f, "\n    alpha={} count={} {}", l.alpha, l.count, l.outcome)?;
            if let Some(w) = &l.witness {
                write!(f, " witness: {w}")?;
            }
        }
        Ok(())
    }
}
