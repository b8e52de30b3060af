use std::io::Write;
use std::process::{Command, Output};

fn pdq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn identity_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn expand_generating_function() {
    let o = pdq(&["expand", "f4*f6^2/(f1*f3*f12)", "--order", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0\t1\n1\t1\n2\t2\n3\t4\n4\t5\n");
}

#[test]
fn expand_constant() {
    let o = pdq(&["expand", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0\t1\n");
}

#[test]
fn expand_progression_mod_4_is_zero() {
    let o = pdq(&[
        "expand",
        "f4*f6^2/(f1*f3*f12)",
        "--order",
        "2000",
        "--mod",
        "4",
        "--dissect",
        "4",
        "--residue",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");
}

#[test]
fn expand_progression_matches_manual_indices() {
    let full = pdq(&["expand", "f4*f6^2/(f1*f3*f12)", "--order", "40"]);
    let values: Vec<String> = stdout(&full)
        .lines()
        .map(|l| l.split('\t').nth(1).unwrap().to_string())
        .collect();
    let part = pdq(&[
        "expand",
        "f4*f6^2/(f1*f3*f12)",
        "--order",
        "10",
        "--dissect",
        "4",
        "--residue",
        "1",
    ]);
    for line in stdout(&part).lines() {
        let (n, v) = line.split_once('\t').unwrap();
        let n: usize = n.parse().unwrap();
        assert_eq!(values[4 * n + 1], v);
    }
}

#[test]
fn expand_errors_exit_2() {
    for args in [
        &["expand", "f1 f2"][..],
        &["expand", "f0"],
        &["expand", "1/(1-f1)"],
        &["expand", "f1", "--mod", "1"],
        &["expand", "f1", "--order", "1"],
        &["expand", "f1", "--dissect", "3", "--residue", "3"],
    ] {
        let o = pdq(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).starts_with("error:"), "{args:?}");
    }
}

#[test]
fn verify_identities_default_catalog_passes() {
    let o = pdq(&["verify-identities", "--order", "500"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("CONTROL  M4_2n1@mod8 expected-fail n=1"));
    assert!(!out.contains("FAIL "));
}

#[test]
fn verify_identities_tsv_is_stable() {
    let args = [
        "verify-identities",
        "--order",
        "200",
        "--format",
        "tsv",
        "--filter",
        "M4_",
    ];
    let a = pdq(&args);
    let b = pdq(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    for line in stdout(&a).lines() {
        assert_eq!(line.split('\t').count(), 5, "{line}");
    }
}

#[test]
fn unknown_fixture_exit_2() {
    let o = pdq(&["verify-identities", "--filter", "NoSuchFixture"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn planted_defect_file_exit_1() {
    let f = identity_file(
        "# squared f1 with a stray q^17\n\
         name=planted\n\
         lhs=f1^2\n\
         rhs=f2*f8^5/(f4^2*f16^2) - 2*q*f2*f16^2/f8 + q^17\n\
         source=planted defect\n",
    );
    let o = pdq(&[
        "verify-identities",
        "--order",
        "100",
        "--identities-file",
        f.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("index=17"));
}

#[test]
fn identity_file_with_progression_passes() {
    let f = identity_file(
        "name=even\n\
         lhs=f4*f6^2/(f1*f3*f12)\n\
         progression=2,1\n\
         rhs=f6^2\n\
         mod=4\n",
    );
    let o = pdq(&[
        "verify-identities",
        "--order",
        "300",
        "--identities-file",
        f.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn malformed_identity_file_exit_2() {
    let f = identity_file("name=x\nlhs=f1\n");
    let o = pdq(&[
        "verify-identities",
        "--identities-file",
        f.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = pdq(&[
        "verify-identities",
        "--identities-file",
        "/nonexistent/identities.txt",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stronger_modulus_override_fails() {
    let o = pdq(&[
        "verify-identities",
        "--order",
        "200",
        "--filter",
        "M4_2n1",
        "--mod",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_congruences_default_run() {
    let o = pdq(&["verify-congruences"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("evidence only"));
    assert!(out.contains("[conjectural: numeric evidence only]"));
}

#[test]
fn budget_above_order_is_insufficient_truncation() {
    let o = pdq(&["verify-congruences", "--order", "1000", "--budget", "2000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("insufficient truncation"));
}

#[test]
fn conjectural_only_run_exits_0_with_banner() {
    let o = pdq(&[
        "verify-congruences",
        "--order",
        "20001",
        "--budget",
        "20000",
        "--filter",
        "25n+5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("evidence"));
}

#[test]
fn uncovered_levels_never_exit_0() {
    let o = pdq(&[
        "verify-congruences",
        "--order",
        "101",
        "--budget",
        "100",
        "--filter",
        "2^a(8n+7)",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("uncovered"));
}

#[test]
fn incompatible_sweep_modulus_exit_2() {
    let o = pdq(&[
        "verify-congruences",
        "--order",
        "1001",
        "--budget",
        "1000",
        "--mod",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn congruence_tsv_columns() {
    let o = pdq(&[
        "verify-congruences",
        "--order",
        "5001",
        "--budget",
        "5000",
        "--alpha-max",
        "2",
        "--format",
        "tsv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("2^a(4n+3) mod 4\t1\t625\tpass\t"));
    assert!(out.contains("PD_2(4n) = PD_2(n) mod 4\t-\t1250\tpass\t"));
    assert!(stderr(&o).contains("evidence"));
}

#[test]
fn oracle_check_runs() {
    let o = pdq(&["oracle-check", "--enum-max", "30", "--order", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("PASS     PD(4) = 10"));
    assert!(out.contains("PASS     PD_2(4) = 5"));
    let o = pdq(&["oracle-check", "--enum-max", "0", "--order", "2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn oracle_enumeration_bound_exit_2() {
    let o = pdq(&["oracle-check", "--enum-max", "41"]);
    assert_eq!(o.status.code(), Some(2));
}
