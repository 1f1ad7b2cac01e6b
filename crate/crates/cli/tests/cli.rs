use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use wce_core::fock::GeneratorSet;
use wce_core::numfield::{rat, CycScalar};
use wce_core::rootdata::RootDatum;
use wce_core::tausolver::{LogSeries, TauSeries};
use wce_core::twist::TwistedOperator;

fn wce(cache: Option<&Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wce"));
    cmd.args(args).env_remove("WCE_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("WCE_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("stdout is JSON")
}

fn q(p: i64, r: i64) -> CycScalar {
    CycScalar::from_rational(&rat(p, r))
}

#[test]
fn a1_kernel_generator_is_the_square() {
    let o = wce(None, &["generators", "--type", "A1", "--strategy", "kernel_solve"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("w_1  degree 2  source kernel_solve  terms 1"), "{out}");
    assert!(out.contains("(1/2)·u[1,1]^2"), "{out}");
}

#[test]
fn invalid_configurations_are_usage_errors() {
    for args in [
        &["generators", "--type", "E6", "--strategy", "builtin"][..],
        &["generators", "--type", "A2", "--strategy", "mode_construction"],
        &["generators", "--type", "D4", "--conductor", "10"],
        &["generators", "--type", "B3"],
        &["tau", "--type", "A1"],
        &["tau", "--type", "D4", "--goal", "(5,0)"],
        &["potential", "--type", "A2"],
        &["potential", "--type", "A2", "--form", "fjrw", "--no-reference"],
        &["operators", "--type", "A1", "--i", "2"],
    ] {
        let o = wce(None, args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty(), "{args:?} printed partial output");
    }
}

#[test]
fn a1_tau_json_round_trips_and_has_the_known_log_coefficients() {
    let o = wce(None, &["tau", "--type", "A1", "--max-degree-num", "9", "--log", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    let datum = RootDatum::build("A1".parse().unwrap()).unwrap();

    let tau_text = serde_json::to_string(&v["tau"]).unwrap();
    let tau = TauSeries::from_json(&tau_text).unwrap();
    assert_eq!(tau.coeffs.len(), 33);
    assert_eq!(TauSeries::from_json(&tau.to_json(&datum)).unwrap(), tau);

    let log = LogSeries::from_json(&serde_json::to_string(&v["log"]).unwrap()).unwrap();
    assert_eq!(LogSeries::from_json(&log.to_json(&datum)).unwrap(), log);
    assert_eq!(log.coeffs.get(&vec![(0, 0); 3]), Some(&(q(1, 6), 0)));
    assert_eq!(log.coeffs.get(&vec![(0, 1)]), Some(&(q(1, 24), 1)));
}

#[test]
fn a2_potential_without_reference() {
    let o = wce(None, &["potential", "--type", "A2", "--no-reference", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["wdvv"], true);
    assert_eq!(v["quasi_homogeneous"], true);
    assert!(v["reference"].is_null());
    let coeffs: Vec<(&str, &str)> = v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| (t["monomial"].as_str().unwrap(), t["display"].as_str().unwrap()))
        .collect();
    assert_eq!(coeffs.len(), 2);
    assert!(coeffs.contains(&("v1^2*v2", "1/2")));
    assert!(coeffs.contains(&("v2^4", "-1/1944")));
}

#[test]
fn a1_selfcheck_survives_a_corrupted_cache() {
    let dir = tempfile::tempdir().unwrap();
    let first = wce(Some(dir.path()), &["selfcheck", "--type", "A1"]);
    assert_eq!(code(&first), 0, "{}{}", stdout(&first), stderr(&first));
    assert!(stdout(&first).contains("selfcheck: 10 of 10 suites passed"), "{}", stdout(&first));
    assert!(!stdout(&first).contains("FAIL"));

    // Change one coefficient inside a cached τ payload; the JSON stays valid.
    let mut damaged = 0;
    for entry in fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if name.starts_with("tau-") && name.contains("frontier") {
            let text = fs::read_to_string(&path).unwrap();
            let bad = text.replacen("1/24", "1/25", 1);
            assert_ne!(bad, text);
            fs::write(&path, bad).unwrap();
            damaged += 1;
        }
    }
    assert!(damaged > 0);

    let second = wce(Some(dir.path()), &["selfcheck", "--type", "A1"]);
    assert_eq!(code(&second), 0, "{}", stderr(&second));
    assert!(stderr(&second).contains("checksum mismatch"), "{}", stderr(&second));
    assert_eq!(stdout(&first), stdout(&second));
}

/// The D4 examples share one cache so the generators are built once.
#[test]
fn d4_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Some(dir.path());
    let datum = RootDatum::build("D4".parse().unwrap()).unwrap();

    // Goal-directed coefficient, then byte-identical output from a warm cache.
    let goal = ["tau", "--type", "D4", "--goal", "(1,0)^2 (4,0)"];
    let cold = wce(cache, &goal);
    assert_eq!(code(&cold), 0, "{}", stderr(&cold));
    assert!(stdout(&cold).contains("  tau  1/2  (≈ 0.5)"), "{}", stdout(&cold));
    assert!(stderr(&cold).contains("w_4 fails the screening check"), "{}", stderr(&cold));
    let warm = wce(cache, &goal);
    assert_eq!(code(&warm), 0);
    assert_eq!(cold.stdout, warm.stdout);
    assert!(!stderr(&warm).contains("generators: built"), "warm run rebuilt generators");

    let goal_json = wce(cache, &["tau", "--type", "D4", "--goal", "(1,0)^2 (4,0)", "--format", "json"]);
    let goal_row = &json(&goal_json)["goals"][0];
    assert_eq!(goal_row["tau_display"], "1/2");
    assert_eq!(CycScalar::parse_text(goal_row["tau"].as_str().unwrap()).unwrap(), q(1, 2));

    // The printed sextic is reported and the run fails, while the set in use verifies.
    let g = wce(cache, &["generators", "--type", "D4", "--strategy", "builtin", "--verify"]);
    assert_eq!(code(&g), 1);
    let out = stdout(&g);
    assert!(out.contains("discrepancy: builtin w_4 has screening residual terms [196, 196, 180, 180]"), "{out}");
    assert!(out.contains("w_4  degree 6  source kernel_solve"), "{out}");
    assert_eq!(out.matches("screening residual terms [0, 0, 0, 0]  in W").count(), 4, "{out}");
    assert!(out.contains("(degrees 2,4,4,6)"));
    let plain = wce(cache, &["generators", "--type", "D4"]);
    assert_eq!(code(&plain), 0, "{}", stderr(&plain));

    let gj = wce(cache, &["generators", "--type", "D4", "--format", "json"]);
    let set_text = serde_json::to_string(&json(&gj)["generator_set"]).unwrap();
    let set = GeneratorSet::from_json(&set_text).unwrap();
    assert_eq!(set.replaced.len(), 1);
    assert_eq!(GeneratorSet::from_json(&set.to_json(&datum)).unwrap(), set);

    // The small-phase potential in all three coordinate forms.
    let p = wce(cache, &["potential", "--type", "D4"]);
    assert_eq!(code(&p), 0, "{}", stderr(&p));
    let out = stdout(&p);
    for line in ["v1^2*v4     1/2", "v1*v2*v3    1", "v2*v3*v4^3  1/108", "v4^7        1/272160"] {
        assert!(out.contains(line), "missing {line} in\n{out}");
    }
    assert!(out.contains("small-phase monomials up to degree 35/6: 2708"));
    assert!(out.contains("WDVV: true") && out.contains("reference: exact match (6 terms)"), "{out}");

    let dub = json(&wce(cache, &["potential", "--type", "D4", "--form", "dubrovin", "--format", "json"]));
    let coeff = |v: &Value, m: &str| {
        v["terms"].as_array().unwrap().iter().find(|t| t["monomial"] == m).map(|t| t["display"].clone())
    };
    assert_eq!(coeff(&dub, "v4^7"), Some(Value::from("54/35")));
    assert_eq!(coeff(&dub, "v2*v3*v4^3"), Some(Value::from("6")));
    assert_eq!(coeff(&dub, "v2^3*v4"), Some(Value::from("1")));
    assert_eq!(dub["reference"]["matched"], true);

    let fjrw = json(&wce(cache, &["potential", "--type", "D4", "--form", "fjrw", "--format", "json"]));
    assert_eq!(coeff(&fjrw, "t_X2^7"), Some(Value::from("1/1632960")));
    assert_eq!(fjrw["wdvv"], true);

    // Operator dumps round-trip through both the text and the JSON form.
    let op_text = wce(cache, &["operators", "--type", "D4", "--i", "2", "--m", "1"]);
    assert_eq!(code(&op_text), 0, "{}", stderr(&op_text));
    let text = stdout(&op_text);
    assert!(text.contains("strategy builtin+w4:kernel_solve"), "{text}");
    let op = TwistedOperator::parse_text(&text).unwrap();
    assert_eq!(op.i, 1);
    assert_eq!(op.to_text(&datum, "builtin+w4:kernel_solve"), text);
    let op_json = wce(cache, &["operators", "--type", "D4", "--i", "2", "--m", "1", "--format", "json"]);
    let from_json = TwistedOperator::from_json(&stdout(&op_json)).unwrap();
    assert_eq!(from_json, op);

    let quick = wce(cache, &["selfcheck", "--type", "D4", "--quick"]);
    assert_eq!(code(&quick), 0, "{}", stdout(&quick));
    assert!(stdout(&quick).contains("selfcheck: 8 of 8 suites passed"));
}
