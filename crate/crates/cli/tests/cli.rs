use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::NamedTempFile;

fn system(json: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(json.as_bytes()).unwrap();
    f
}

fn dagg(args: &[&str], file: &NamedTempFile) -> Output {
    dagg_env(args, file, &[])
}

fn dagg_env(args: &[&str], file: &NamedTempFile, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dagg"));
    cmd.arg(args[0]).arg(file.path()).args(&args[1..]);
    cmd.env_remove("DAGG_ENUM_CAP");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad report ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

const INTRO_BOUNDED: &str = r#"{"A": [[1, 2], [2, 1]], "b": [3, 3], "u": [3, 3]}"#;
const INTRO: &str = r#"{"A": [[1, 2], [2, 1]], "b": [3, 3]}"#;

#[test]
fn aggregate_intro_bounded() {
    let out = dagg(&["aggregate"], &system(INTRO_BOUNDED));
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["k"], 1);
    assert_eq!(r["kind"], "strong");
    assert_eq!(r["verdict"], "ok");
    assert_eq!(r["T"], serde_json::json!([["35/16", "-1/1"]]));
    assert_eq!(r["provenance"]["q"], serde_json::json!([16]));
}

#[test]
fn aggregate_pointed_intro() {
    let r = report(&dagg(&["aggregate"], &system(INTRO)));
    assert_eq!(r["T"], serde_json::json!([["129/64", "163/81"]]));
    assert_eq!(r["provenance"]["h"], serde_json::json!([[2, 2]]));
    assert_eq!(r["provenance"]["r"], 0);
}

#[test]
fn output_keys_are_sorted() {
    let out = dagg(&["aggregate"], &system(INTRO_BOUNDED));
    let text = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn lattice_infeasible_exits_2() {
    let out = dagg(&["aggregate"], &system(r#"{"A": [[2, 4]], "b": [3]}"#));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["verdict"], "infeasible");
}

#[test]
fn too_much_lineality_exits_3() {
    let out = dagg(&["aggregate"], &system(r#"{"A": [[1, -1]], "b": [0]}"#));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn explicit_without_bounds_exits_3() {
    let out = dagg(&["aggregate", "--explicit"], &system(INTRO));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn explicit_form() {
    let r = report(&dagg(&["aggregate", "--explicit"], &system(INTRO_BOUNDED)));
    assert_eq!(r["T"], serde_json::json!([["1/16", "-1/1"]]));
}

#[test]
fn malformed_input_exits_1() {
    for bad in [
        "not json",
        r#"{"A": [[1, 2], [3]], "b": [1, 1]}"#,
        r#"{"A": [[1, 2]], "b": [1, 2]}"#,
        r#"{"A": [[1.5, 2]], "b": [1]}"#,
        r#"{"A": [[1, 2]], "b": [1], "u": [-1, 0]}"#,
    ] {
        let out = dagg(&["count"], &system(bad));
        assert_eq!(out.status.code(), Some(1), "{bad}");
    }
}

#[test]
fn big_integers_in_strings() {
    let out = dagg(
        &["count"],
        &system(r#"{"A": [["100000000000000000000"]], "b": ["300000000000000000000"]}"#),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["count"], 1);
}

#[test]
fn count_intro_both_methods() {
    let r = report(&dagg(
        &["count", "--method", "both"],
        &system(INTRO_BOUNDED),
    ));
    assert_eq!(r["count"], 1);
    assert_eq!(r["methods_agree"], true);
    assert_eq!(r["feasible"], true);
    assert!(r["error_bound"].as_f64().unwrap() < 0.5);
}

#[test]
fn count_infeasible_is_zero() {
    let out = dagg(&["count"], &system(r#"{"A": [[2, 4]], "b": [3]}"#));
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["count"], 0);
    assert_eq!(r["feasible"], false);
}

#[test]
fn count_non_pointed_reports_feasibility() {
    let r = report(&dagg(&["count"], &system(r#"{"A": [[1, -1]], "b": [2]}"#)));
    assert_eq!(r["count"], Value::Null);
    assert_eq!(r["feasible"], true);
}

#[test]
fn count_spectral_unbounded() {
    let r = report(&dagg(
        &["count", "--method", "spectral"],
        &system(r#"{"A": [[1, 2]], "b": [4]}"#),
    ));
    assert_eq!(r["count"], 3);
}

#[test]
fn verify_intro() {
    let r = report(&dagg(&["verify"], &system(INTRO)));
    assert_eq!(r["equal"], true);
    assert_eq!(r["counterexample"], Value::Null);
}

#[test]
fn verify_forced_t() {
    let r = report(&dagg(&["verify", "--force-T", "1,1"], &system(INTRO)));
    assert_eq!(r["equal"], false);
    let x = &r["counterexample"];
    assert!(*x == serde_json::json!([2, 0]) || *x == serde_json::json!([0, 2]));
}

#[test]
fn verify_trivial_system() {
    let r = report(&dagg(&["verify"], &system(r#"{"A": [[2]], "b": [4]}"#)));
    assert_eq!(r["equal"], true);
}

#[test]
fn verify_lineal_system_in_window() {
    let file = system(r#"{"A": [[1, -1, 0], [0, 0, 1]], "b": [0, 1]}"#);
    let agg = report(&dagg(&["aggregate"], &file));
    assert_eq!(agg["k"], 2);
    let r = report(&dagg(&["verify", "--window", "3,3,3"], &file));
    assert_eq!(r["equal"], true);
    // no finite window exists without one
    assert_eq!(dagg(&["verify"], &file).status.code(), Some(4));
}

#[test]
fn enumeration_cap_from_environment() {
    let file = system(r#"{"A": [[1, -1, 0], [0, 0, 1]], "b": [0, 1]}"#);
    let out = dagg_env(
        &["verify", "--window", "3"],
        &file,
        &[("DAGG_ENUM_CAP", "10")],
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn reported_t_round_trips() {
    for json in [
        INTRO,
        INTRO_BOUNDED,
        r#"{"A": [[3, 5, 7], [1, 0, 2]], "b": [15, 3]}"#,
    ] {
        let file = system(json);
        let agg = report(&dagg(&["aggregate"], &file));
        let csv = agg["T"]
            .as_array()
            .unwrap()
            .iter()
            .map(|row| {
                row.as_array()
                    .unwrap()
                    .iter()
                    .map(|e| e.as_str().unwrap().to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";");
        let direct = report(&dagg(&["verify"], &file));
        let forced = report(&dagg(&["verify", "--force-T", &csv], &file));
        assert_eq!(direct["equal"], true);
        assert_eq!(forced["equal"], direct["equal"]);
        assert_eq!(forced["T"], agg["T"]);
    }
}
