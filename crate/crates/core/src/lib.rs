//! q-series machinery for partitions with designated summands into odd parts.
//!
//! The crate expands eta quotients `prod f_r^{e_r}` as truncated power
//! series, splits them into arithmetic progressions, and checks dissection
//! identities and congruences coefficient by coefficient.
//!
//! - [`series`]: truncated power series over `Z` or `Z/mZ`
//! - [`pochhammer`]: `f_r` via the pentagonal number theorem, eta quotients
//! - [`partitions`]: combinatorial oracles for `PD(n)` and `PD_k(n)`
//! - [`expr`]: the expression language used by fixtures and the CLI
//! - [`dissection`]: the identity catalog and its verifier
//! - [`congruence`]: progression, tower and internal-congruence sweeps

pub mod congruence;
pub mod dissection;
pub mod expr;
pub mod partitions;
pub mod pochhammer;
pub mod report;
pub mod series;

pub use congruence::{
    theorem_catalog, CatalogEntry, CongruenceFamily, InternalCongruence, ProofStatus,
};
pub use dissection::{builtin_catalog, IdentityFixture};
pub use expr::{evaluate, format, parse, ExprAst, ExprError};
pub use pochhammer::{expand, pochhammer_series, EtaQuotient};
pub use report::{LevelReport, Outcome, VerificationReport, Witness};
pub use series::{CoefficientRing, Modulus, SeriesError, TruncatedSeries};
