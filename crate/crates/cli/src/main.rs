use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdq_core::congruence::{
    self, CatalogEntry, CongruenceError, ProofStatus, DEFAULT_ALPHA_MAX, DEFAULT_BUDGET,
    DEFAULT_SWEEP_ORDER,
};
use pdq_core::dissection::{self, IdentityFixture};
use pdq_core::partitions::{self, pd2_eta_series};
use pdq_core::{evaluate, parse, CoefficientRing, Outcome, VerificationReport};

const DEFAULT_ORDER: usize = 2000;
const DEFAULT_SWEEP_MODULUS: u64 = 8;
const DEFAULT_ENUM_MAX: u32 = 30;

#[derive(Parser)]
#[command(
    name = "pdq",
    version,
    about = "Eta-quotient expansion and congruence checks for PD_2(n)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand an expression and print nonzero coefficients as `n<TAB>value`.
    Expand(ExpandArgs),
    /// Verify the identity catalog, or the fixtures in a file.
    VerifyIdentities(IdentityArgs),
    /// Sweep congruence families and internal congruences.
    VerifyCongruences(CongruenceArgs),
    /// Cross-check enumeration, the product formula and the eta quotient.
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct ExpandArgs {
    expr: String,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    /// Reduce coefficients modulo this integer.
    #[arg(long = "mod")]
    modulus: Option<u64>,
    /// Take the progression `M n + J` of the expansion (with --residue).
    #[arg(long, requires = "residue")]
    dissect: Option<usize>,
    #[arg(long, requires = "dissect")]
    residue: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Tsv,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Keep entries whose name contains this text; repeatable.
    #[arg(long)]
    filter: Vec<String>,
}

#[derive(Args)]
struct IdentityArgs {
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    /// Check every selected fixture modulo this integer instead of its own.
    #[arg(long = "mod")]
    modulus: Option<u64>,
    #[arg(long)]
    identities_file: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CongruenceArgs {
    #[arg(long, default_value_t = DEFAULT_SWEEP_ORDER)]
    order: usize,
    /// Modulus of the series backend; every selected entry's modulus must divide it.
    #[arg(long = "mod", default_value_t = DEFAULT_SWEEP_MODULUS)]
    modulus: u64,
    #[arg(long, default_value_t = DEFAULT_ALPHA_MAX)]
    alpha_max: u32,
    /// Sweep arguments below this bound.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Let conjectural entries affect the exit status.
    #[arg(long)]
    gate_conjectural: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct OracleArgs {
    /// Largest weight checked by direct enumeration.
    #[arg(long, default_value_t = DEFAULT_ENUM_MAX)]
    enum_max: u32,
    /// Order of the product and eta-quotient comparison.
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

/// Usage or configuration problem; exit status 2.
struct UsageError(String);

impl<E: Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CmdResult = Result<ExitCode, UsageError>;

const PASS: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Expand(a) => expand(a),
        Command::VerifyIdentities(a) => verify_identities(a),
        Command::VerifyCongruences(a) => verify_congruences(a),
        Command::OracleCheck(a) => oracle_check(a),
    };
    result.unwrap_or_else(|UsageError(msg)| {
        eprintln!("error: {msg}");
        ExitCode::from(USAGE)
    })
}

fn ring(modulus: Option<u64>) -> Result<CoefficientRing, UsageError> {
    Ok(match modulus {
        Some(m) => CoefficientRing::modulo(m)?,
        None => CoefficientRing::Integers,
    })
}

fn check_order(order: usize) -> Result<(), UsageError> {
    if order < 2 {
        return Err(UsageError(format!(
            "--order must be at least 2, got {order}"
        )));
    }
    Ok(())
}

fn expand(args: ExpandArgs) -> CmdResult {
    check_order(args.order)?;
    let ast = parse(&args.expr)?;
    let ring = ring(args.modulus)?;
    let series = match (args.dissect, args.residue) {
        (Some(m), Some(j)) => {
            if m == 0 || j >= m {
                return Err(UsageError(format!(
                    "--residue must be below --dissect, got {j} and {m}"
                )));
            }
            let source_order = m
                .checked_mul(args.order)
                .ok_or_else(|| UsageError("order times dissection modulus overflows".into()))?;
            evaluate(&ast, source_order, ring)?
                .extract_progression(m, j)?
                .truncate(args.order)?
        }
        _ => evaluate(&ast, args.order, ring)?,
    };
    print!("{}", series.to_tsv());
    Ok(ExitCode::from(PASS))
}

fn select<'a, T>(
    items: &'a [T],
    filters: &[String],
    name: impl Fn(&T) -> &str,
) -> Result<Vec<&'a T>, UsageError> {
    if filters.is_empty() {
        return Ok(items.iter().collect());
    }
    for f in filters {
        if !items.iter().any(|x| name(x).contains(f.as_str())) {
            return Err(UsageError(format!("no entry matches filter `{f}`")));
        }
    }
    Ok(items
        .iter()
        .filter(|x| filters.iter().any(|f| name(x).contains(f.as_str())))
        .collect())
}

fn print_reports<'a>(reports: impl IntoIterator<Item = &'a VerificationReport>, format: Format) {
    for r in reports {
        match format {
            Format::Human => println!("{r}"),
            Format::Tsv => r.tsv_lines().iter().for_each(|l| println!("{l}")),
        }
    }
}

fn summary(reports: &[VerificationReport], format: Format) {
    if format == Format::Tsv {
        return;
    }
    let count = |o| reports.iter().filter(|r| r.outcome == o).count();
    println!(
        "{} checked: {} pass, {} fail, {} uncovered",
        reports.len(),
        count(Outcome::Pass),
        count(Outcome::Fail),
        count(Outcome::Uncovered)
    );
}

fn verify_identities(args: IdentityArgs) -> CmdResult {
    check_order(args.order)?;
    let builtin = args.identities_file.is_none();
    let catalog = match &args.identities_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            dissection::parse_identity_file(&text)?
        }
        None => dissection::builtin_catalog(),
    };
    let selected: Vec<IdentityFixture> = select(&catalog, &args.output.filter, |f| &f.name)?
        .into_iter()
        .map(|f| match args.modulus {
            Some(m) => f.with_modulus(Some(m)),
            None => f.clone(),
        })
        .collect();
    let reports = dissection::verify_all(&selected, args.order)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    print_reports(&reports, args.output.format);
    let mut ok = reports.iter().all(VerificationReport::passed);

    // Controls only make sense against the catalog's own moduli.
    if builtin && args.modulus.is_none() {
        for control in dissection::negative_controls() {
            if !selected.iter().any(|f| f.name == control.fixture) {
                continue;
            }
            let c = dissection::run_negative_control(&catalog, &control, args.order)?;
            let status = if c.as_expected() {
                "expected-fail"
            } else {
                "UNEXPECTED-PASS"
            };
            let witness = c
                .report
                .witness
                .as_ref()
                .map(ToString::to_string)
                .unwrap_or_default();
            match args.output.format {
                Format::Human => println!("CONTROL  {} {status} {witness}", c.report.name),
                Format::Tsv => {
                    println!("{}\t-\t{}\t{status}\t{witness}", c.report.name, args.order)
                }
            }
            ok &= c.as_expected();
        }
    }
    summary(&reports, args.output.format);
    Ok(ExitCode::from(if ok { PASS } else { FAIL }))
}

fn verify_congruences(args: CongruenceArgs) -> CmdResult {
    check_order(args.order)?;
    if args.budget > args.order {
        return Err(CongruenceError::InsufficientTruncation {
            what: format!("budget {}", args.budget),
            needed: args.budget,
            order: args.order,
        }
        .into());
    }
    let catalog = congruence::theorem_catalog();
    let selected: Vec<CatalogEntry> = select(&catalog, &args.output.filter, CatalogEntry::name)?
        .into_iter()
        .cloned()
        .collect();
    if let Some(e) = selected
        .iter()
        .find(|e| !args.modulus.is_multiple_of(e.modulus()))
    {
        return Err(UsageError(format!(
            "{} needs a modulus divisible by {}, got --mod {}",
            e.name(),
            e.modulus(),
            args.modulus
        )));
    }
    let series = pd2_eta_series(args.order, CoefficientRing::modulo(args.modulus)?)?;
    let reports = congruence::run_catalog(&series, &selected, args.alpha_max, args.budget)?;
    let (proved, conjectural): (Vec<_>, Vec<_>) = selected
        .iter()
        .zip(&reports)
        .partition(|(e, _)| e.status() == ProofStatus::Proved);
    let proved: Vec<VerificationReport> = proved.into_iter().map(|(_, r)| r.clone()).collect();
    let conjectural: Vec<VerificationReport> =
        conjectural.into_iter().map(|(_, r)| r.clone()).collect();

    print_reports(&proved, args.output.format);
    if !conjectural.is_empty() {
        let gate = if args.gate_conjectural {
            "gating"
        } else {
            "not gating"
        };
        let banner = format!("== conjectural entries: evidence only, {gate} the exit status ==");
        match args.output.format {
            Format::Human => println!("{banner}"),
            Format::Tsv => eprintln!("{banner}"),
        }
        print_reports(&conjectural, args.output.format);
    }
    summary(&reports, args.output.format);

    let gated: Vec<&VerificationReport> = if args.gate_conjectural {
        reports.iter().collect()
    } else {
        proved.iter().collect()
    };
    let outcome = gated
        .iter()
        .fold(Outcome::Pass, |acc, r| acc.and(r.outcome));
    Ok(match outcome {
        Outcome::Pass => ExitCode::from(PASS),
        Outcome::Fail => ExitCode::from(FAIL),
        Outcome::Uncovered => {
            eprintln!("error: some gated levels have no argument below the budget");
            ExitCode::from(USAGE)
        }
    })
}

fn oracle_check(args: OracleArgs) -> CmdResult {
    check_order(args.order)?;
    let reports = partitions::oracle_check(args.enum_max, args.order)?;
    print_reports(&reports, args.format);
    summary(&reports, args.format);
    let ok = reports.iter().all(VerificationReport::passed);
    Ok(ExitCode::from(if ok { PASS } else { FAIL }))
}
