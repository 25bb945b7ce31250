//! End-to-end checks of the command-line surface: output documents, exit
//! codes, and the on-disk product cache.

use std::path::PathBuf;
use std::process::{Command, Output};

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_hecke")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hecke-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_in(cache: &PathBuf, args: &[&str]) -> Output {
    Command::new(exe())
        .args(args)
        .env("HECKE_CACHE_DIR", cache)
        .output()
        .unwrap()
}

#[test]
fn mul_document_carries_the_expected_terms() {
    let cache = scratch("mul-json");
    let out = run_in(&cache, &["mul", "--r", "2", "--p", "3", "--json", "0,1", "0,1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["schema"], "hecke.element/1");
    assert_eq!(doc["system"], "gl(r=2,p=3)");
    let terms = doc["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 2);
    assert_eq!(terms[0]["key"], "0,2");
    assert_eq!(terms[0]["coeff"], "1");
    assert_eq!(terms[1]["key"], "1,1");
    assert_eq!(terms[1]["coeff"], "4");
    let _ = std::fs::remove_dir_all(&cache);
}

#[test]
fn mul_by_the_unit_is_the_identity() {
    let cache = scratch("mul-unit");
    let out = run_in(&cache, &["mul", "--p", "3", "0,0", "0,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "T(0,1)\n");
    let _ = std::fs::remove_dir_all(&cache);
}

#[test]
fn series_rows_show_vanishing_odd_levels() {
    let cache = scratch("series");
    let out = run_in(&cache, &["series", "--system", "heis", "--p", "2", "--N", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("series heis(p=2) N=4"));
    assert_eq!(lines.next(), Some("X^0: T([[1,0],[0,1]];(0,0))"));
    assert_eq!(lines.next(), Some("X^1: 0"));
    assert!(lines.next().unwrap().starts_with("X^2: T([[1,0],[0,2]];(0,0))"));
    assert_eq!(lines.next(), Some("X^3: 0"));
    let _ = std::fs::remove_dir_all(&cache);
}

#[test]
fn double_coset_listing_reports_degrees() {
    let cache = scratch("cosets");
    let out = run_in(&cache, &["double-cosets", "--p", "2", "--N", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        text,
        "double-cosets gl(r=2,p=2) N=2\n(0,2) degree=6\n(1,1) degree=1\n"
    );
    let json = run_in(&cache, &["double-cosets", "--p", "2", "--N", "2", "--json"]);
    let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(doc["schema"], "hecke.double-cosets/1");
    assert_eq!(doc["cosets"][0]["key"], "0,2");
    assert_eq!(doc["cosets"][0]["degree"], "6");
    let _ = std::fs::remove_dir_all(&cache);
}

#[test]
fn usage_errors_exit_with_code_two() {
    let cache = scratch("usage");
    for args in [
        &["mul", "--p", "3", "0,x", "0,1"][..],
        &["series", "--p", "4", "--N", "2"][..],
        &["verify", "heisenberg", "--p", "2", "--N", "3"][..],
        &["mul", "--system", "heis", "--r", "3", "1,0,0,1;0,0", "1,0,0,1;0,0"][..],
        &["verify", "euler", "--N", "2"][..],
        &["verify", "nonsense"][..],
    ] {
        let out = run_in(&cache, args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "args {args:?} → stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let _ = std::fs::remove_dir_all(&cache);
}

#[test]
fn heisenberg_keys_normalize_before_multiplying() {
    let cache = scratch("heis-keys");
    // diag(2,1) is a non-canonical representative of the class of diag(1,2);
    // the product document must match the one computed from the canonical key.
    let a = run_in(
        &cache,
        &["mul", "--system", "heis", "--p", "2", "2,0,0,1;0,0", "1,0,0,2;0,0"],
    );
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run_in(
        &cache,
        &["mul", "--system", "heis", "--p", "2", "1,0,0,2;0,0", "1,0,0,2;0,0"],
    );
    assert_eq!(a.stdout, b.stdout);
    let _ = std::fs::remove_dir_all(&cache);
}

#[test]
fn cache_round_trip_and_corruption_recovery() {
    let cache = scratch("cache");
    let args = ["mul", "--r", "2", "--p", "3", "--json", "0,1", "1,1"];
    let cold = run_in(&cache, &args);
    assert_eq!(cold.status.code(), Some(0));
    let records: Vec<PathBuf> = std::fs::read_dir(&cache)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    assert!(!records.is_empty(), "cold run left no cache records");
    let warm = run_in(&cache, &args);
    assert_eq!(cold.stdout, warm.stdout);
    // Damage every record: the engine must fall back to recomputing and
    // produce the same bytes.
    for r in &records {
        std::fs::write(r, b"{ not json").unwrap();
    }
    let healed = run_in(&cache, &args);
    assert_eq!(cold.stdout, healed.stdout);
    let _ = std::fs::remove_dir_all(&cache);
}

#[test]
fn cache_dir_flag_wins_over_the_environment() {
    let env_dir = scratch("cache-env");
    let flag_dir = scratch("cache-flag");
    let out = Command::new(exe())
        .args([
            "mul",
            "--r",
            "2",
            "--p",
            "2",
            "--cache-dir",
            flag_dir.to_str().unwrap(),
            "0,1",
            "0,1",
        ])
        .env("HECKE_CACHE_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let count = |d: &PathBuf| std::fs::read_dir(d).unwrap().count();
    assert!(count(&flag_dir) > 0, "flag directory unused");
    assert_eq!(count(&env_dir), 0, "environment directory used despite flag");
    let _ = std::fs::remove_dir_all(&env_dir);
    let _ = std::fs::remove_dir_all(&flag_dir);
}

#[test]
fn verify_target_reports_and_exits_cleanly() {
    let cache = scratch("verify");
    let out = run_in(
        &cache,
        &["verify", "rationality", "--r", "2", "--p", "3", "--N", "5"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("verify rationality"));
    assert!(text.contains("result: ok"));
    assert!(!text.contains("FAIL"));
    let json = run_in(
        &cache,
        &[
            "verify",
            "rationality",
            "--r",
            "2",
            "--p",
            "3",
            "--N",
            "5",
            "--json",
        ],
    );
    let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(doc["schema"], "hecke.report/1");
    assert!(doc["reports"][0]["checks"].as_array().unwrap().len() >= 5);
    let _ = std::fs::remove_dir_all(&cache);
}
