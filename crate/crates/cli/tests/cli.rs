//! Black-box tests of the installed binary: artifacts, resume behavior,
//! determinism, and exit codes, all through `std::process::Command`.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dessin-homology"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    binary()
        .args(args)
        .args(["--workdir", dir.to_str().unwrap()])
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn genus_one_run_writes_betti_one_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["all", "--genus", "1", "--seed", "5"]);
    assert_success(&out);

    let betti: serde_json::Value = serde_json::from_str(&read(dir.path(), "betti.json")).unwrap();
    assert_eq!(betti["betti"], serde_json::json!([1, 2]));
    let chi: serde_json::Value = serde_json::from_str(&read(dir.path(), "chi.json")).unwrap();
    assert_eq!(chi["chi"], serde_json::json!(-1));
    assert_eq!(chi["chi_over_group"]["numerator"], serde_json::json!(-1));
    assert_eq!(chi["chi_over_group"]["denominator"], serde_json::json!(6));

    assert_eq!(read(dir.path(), "cells.csv"), "dimension,cells\n0,2\n1,3\n");

    let verify = run_in(dir.path(), &["verify", "--genus", "1", "--seed", "5"]);
    assert_success(&verify);
    let report = String::from_utf8_lossy(&verify.stdout).to_string();
    assert!(report.contains("check euler-characteristic: ok"), "{report}");
    assert!(!report.contains("FAIL"), "{report}");
}

#[test]
fn genus_two_schemes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["schemes", "--genus", "2"]);
    assert_success(&out);
    let expected = "edges,symmetry_order,count\n\
                    9,1,3\n9,2,5\n9,3,1\n\
                    8,1,24\n8,2,4\n8,4,1\n\
                    7,1,41\n7,2,11\n\
                    6,1,37\n6,2,5\n6,3,1\n6,4,1\n6,6,1\n\
                    5,1,14\n5,2,5\n5,5,1\n5,10,1\n\
                    4,1,2\n4,2,1\n4,8,1\n";
    assert_eq!(read(dir.path(), "schemes.csv"), expected);
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    // two-step run in one directory, single-shot in the other
    assert_success(&run_in(
        first.path(),
        &["complex", "--genus", "1", "--seed", "9"],
    ));
    let resumed = run_in(first.path(), &["all", "--genus", "1", "--seed", "9"]);
    assert_success(&resumed);
    let text = String::from_utf8_lossy(&resumed.stdout).to_string();
    assert!(text.contains("stage complex: already complete"), "{text}");
    assert_success(&run_in(second.path(), &["all", "--genus", "1", "--seed", "9"]));

    for name in [
        "schemes.csv",
        "bases.csv",
        "cells.csv",
        "boundary_1.sms",
        "ranks.json",
        "betti.json",
        "chi.json",
        "config.json",
    ] {
        assert_eq!(
            read(first.path(), name),
            read(second.path(), name),
            "{name} differs between resumed and uninterrupted runs"
        );
    }
}

#[test]
fn changed_seed_in_same_directory_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&run_in(dir.path(), &["schemes", "--genus", "1", "--seed", "1"]));
    let clash = run_in(dir.path(), &["betti", "--genus", "1", "--seed", "2"]);
    assert_eq!(clash.status.code(), Some(3), "config clash must exit 3");
    let err = String::from_utf8_lossy(&clash.stderr).to_string();
    assert!(err.contains("different configuration"), "{err}");
}

#[test]
fn verify_flags_corrupted_matrix_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&run_in(dir.path(), &["all", "--genus", "1", "--seed", "3"]));

    // swap the boundary matrix for one of a different rank
    let path = dir.path().join("boundary_1.sms");
    let original = fs::read_to_string(&path).unwrap();
    let header = original.lines().next().unwrap().to_string();
    fs::write(&path, format!("{header}\n1 1 1\n2 2 1\n0 0 0\n")).unwrap();

    let verify = run_in(dir.path(), &["verify", "--genus", "1", "--seed", "3"]);
    assert_eq!(verify.status.code(), Some(2), "corruption must exit 2");
    let report = String::from_utf8_lossy(&verify.stdout).to_string();
    assert!(
        report.contains("check dense-certificates-reproduce: FAIL"),
        "{report}"
    );
}

#[test]
fn genus_three_requires_allow_large() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["schemes", "--genus", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("--allow-large"), "{err}");
    assert!(err.contains("9170703360"), "upfront size estimate: {err}");
}

#[test]
fn stage_list_must_be_a_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["all", "--genus", "1", "--stages", "bases,complex"],
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("prefix"), "{err}");

    let ok = run_in(
        dir.path(),
        &["all", "--genus", "1", "--stages", "schemes,bases"],
    );
    assert_success(&ok);
    assert!(dir.path().join("bases.csv").exists());
    assert!(!dir.path().join("cells.csv").exists());
}
