//! End-to-end runs of the `qlc` binary: exit codes and golden JSON reports.
//! Set `QLC_BLESS=1` to rewrite the golden files.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qlc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlc"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("qlc runs")
}

fn code(args: &[&str]) -> i32 {
    qlc(args).status.code().expect("exit code")
}

fn json(args: &[&str]) -> Value {
    let out = qlc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn golden(name: &str, mut actual: Value) {
    if let Some(obj) = actual.as_object_mut() {
        for volatile in ["operational_ms", "denotational_ms", "difference"] {
            obj.remove(volatile);
        }
    }
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"));
    if std::env::var_os("QLC_BLESS").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(&actual).unwrap() + "\n").unwrap();
    }
    let expected: Value = serde_json::from_str(&std::fs::read_to_string(&path).expect("golden file")).unwrap();
    assert_eq!(actual, expected, "{name} differs from its golden file");
}

#[test]
fn check_golden() {
    golden("check_coin", json(&["check", "corpus/coin.qlc", "--json"]));
    golden("check_higher_order", json(&["check", "corpus/higher_order.qlc", "--json"]));
}

#[test]
fn enumerate_golden() {
    golden("enumerate_bell_one", json(&["enumerate", "corpus/bell_one.qlc", "--json"]));
    golden("enumerate_teleport", json(&["enumerate", "corpus/teleport.qlc", "--json"]));
}

#[test]
fn denote_golden() {
    golden("denote_coin", json(&["denote", "corpus/coin.qlc", "--json"]));
    golden("denote_dup_function_biased", json(&["denote", "corpus/dup_function_biased.qlc", "--json"]));
}

#[test]
fn adequacy_golden() {
    golden("adequacy_deutsch_balanced", json(&["adequacy", "corpus/deutsch_balanced.qlc", "--json"]));
}

#[test]
fn run_is_reproducible() {
    let a = json(&["run", "corpus/teleport.qlc", "--seed", "3", "--json"]);
    let b = json(&["run", "corpus/teleport.qlc", "--seed", "3", "--json"]);
    assert_eq!(a, b);
    assert_eq!(a["value"], "tt^0");
}

#[test]
fn threads_do_not_change_the_distribution() {
    let seq = json(&["enumerate", "corpus/teleport_then_h.qlc", "--json"]);
    let par = json(&["enumerate", "corpus/teleport_then_h.qlc", "--threads", "4", "--json"]);
    assert_eq!(seq, par);
}

#[test]
fn every_corpus_program_is_adequate() {
    for entry in std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")).unwrap() {
        let path = entry.unwrap().path();
        let r = json(&["adequacy", path.to_str().unwrap(), "--json"]);
        assert_eq!(r["pass"], true, "{}", path.display());
    }
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["check", "corpus/coin.qlc"]), 0);
    assert_eq!(code(&["adequacy", "corpus/coin.qlc", "--tol", "1e-12"]), 0);
    assert_eq!(code(&["check", "tests/inputs/clone.qlc"]), 1);
    assert_eq!(code(&["check", "tests/inputs/unbalanced.qlc"]), 1);
    assert_eq!(code(&["adequacy", "tests/inputs/identity.qlc"]), 1);
    assert_eq!(code(&["denote", "tests/inputs/identity.qlc"]), 1);
    assert_eq!(code(&["run", "corpus/coin.qlc", "--max-steps", "1"]), 1);
    assert_eq!(code(&["check", "tests/inputs/missing.qlc"]), 2);
    assert_eq!(code(&["frobnicate", "corpus/coin.qlc"]), 2);
    assert_eq!(code(&["run", "corpus/coin.qlc", "--seed", "many"]), 2);
    assert_eq!(code(&["check"]), 2);
}

#[test]
fn text_output_names_the_type() {
    let out = qlc(&["check", "corpus/higher_order.qlc"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "bit");
}
