use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use saturex::cli::{parse_fixture_list, regenerate_golden, render_golden, to_json, CURVE_POINTS};
use saturex::saturation::GoldenRecord;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_saturex"));
    c.env_remove("SATUREX_GRID");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn approx_reports_certified_result() {
    let o = run(&["approx", "--f", "x^2", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["levelled_error"].as_f64().unwrap(), 0.5);
    assert_eq!(v["result"]["converged"], true);
    assert_eq!(v["certificate"]["points"].as_array().unwrap().len(), 3);
    for key in ["poly", "reference", "sign", "iterations", "trace", "n", "sup_norm", "degenerate"] {
        assert!(v["result"].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn exit_codes() {
    let o = run(&["verdict", "--f", "sin(", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("syntax error at offset 4"));
    assert_eq!(run(&["approx", "--f", "x/2", "--n", "1"]).status.code(), Some(2));
    assert_eq!(run(&["approx", "--f", "x", "--n", "13"]).status.code(), Some(2));
    assert_eq!(run(&["approx", "--f", "x", "--n", "1", "--unknown"]).status.code(), Some(2));
    assert_eq!(run(&["prop2", "--f", "x", "--n", "1", "--format", "csv"]).status.code(), Some(2));

    let o = run(&["approx", "--f", "exp(x)", "--n", "5", "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["converged"], false);

    // a degree-(n+1) polynomial checked at a tolerance below rounding
    let o = run(&["verdict", "--f", "2*x^4 - 3*x + 1", "--n", "3", "--verdict-tol", "1e-18"]);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));

    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Usage"));
}

#[test]
fn verdicts() {
    for (f, n, verdict) in [("x^3 - x", 2, "saturating"), ("exp(x)", 3, "strict"), ("x^2 + 1", 4, "degenerate")] {
        let o = run(&["verdict", "--f", f, "--n", &n.to_string()]);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", stderr(&o));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["report"]["verdict"], verdict, "{f}");
    }
}

#[test]
fn grid_override_from_environment() {
    let args = ["bounds", "--f", "sin(3*x)", "--n", "2"];
    let default = run(&args);
    let coarse = bin().args(args).env("SATUREX_GRID", "64").output().unwrap();
    assert_eq!(coarse.status.code(), Some(0));
    assert_ne!(default.stdout, coarse.stdout);
    let explicit = run(&["bounds", "--f", "sin(3*x)", "--n", "2", "--grid", "64"]);
    assert_eq!(explicit.stdout, coarse.stdout);

    assert_eq!(bin().args(args).env("SATUREX_GRID", "many").output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(args).env("SATUREX_GRID", "10").output().unwrap().status.code(), Some(2));
}

#[test]
fn csv_curve() {
    let o = run(&["approx", "--f", "exp(x)", "--n", "4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,residual,t_n_plus_1"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), CURVE_POINTS);
    assert_eq!(rows[0][0], -1.0);
    assert_eq!(rows[CURVE_POINTS - 1][0], 1.0);
    assert_eq!(rows[0][2], -1.0);
    assert!(rows.iter().all(|r| r[2].abs() <= 1.0));
}

#[test]
fn lemma_command() {
    let o =
        run(&["lemmas", "--seed", "3", "--lemma1-instances", "12", "--lemma2-instances", "6", "--perturbations", "40"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["lemma1_passed"], 12);
    assert_eq!(v["lemma2_passed"], 6);
    assert_eq!(v["chebyshev_instance_seminorm"].as_f64().unwrap(), 24.0);
}

#[test]
fn identical_runs_are_byte_identical() {
    for args in [
        vec!["approx", "--f", "sin(2*x)", "--n", "6"],
        vec!["verdict", "--f", "exp(x) + x^3", "--n", "4"],
        vec!["prop2", "--f", "cos(x)", "--n", "3"],
        vec!["lemmas", "--seed", "11", "--lemma1-instances", "8", "--lemma2-instances", "4", "--perturbations", "16"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn oracle_regen_default_matches_stored_golden() {
    let out = scratch("golden.jsonl");
    let o = run(&["oracle-regen", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fresh = std::fs::read_to_string(&out).unwrap();
    let stored = std::fs::read_to_string(fixture("golden.jsonl")).unwrap();
    assert_eq!(fresh, stored);
    assert_eq!(fresh.lines().count(), 48);
}

#[test]
fn oracle_regen_fixture_files() {
    let out = scratch("empty.jsonl");
    let o =
        run(&["oracle-regen", "--fixtures", fixture("empty.txt").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "");

    let o = run(&["oracle-regen", "--fixtures", fixture("out_of_range.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["oracle-regen", "--fixtures", "/nonexistent/list.txt"]).status.code(), Some(2));

    // records follow the fixture order and agree with the stored values
    let o = run(&["oracle-regen", "--fixtures", fixture("reverse.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let stored: Vec<GoldenRecord> = std::fs::read_to_string(fixture("golden.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let got: Vec<GoldenRecord> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let order: Vec<(&str, usize)> = got.iter().map(|r| (r.f.as_str(), r.n)).collect();
    assert_eq!(order, [("sin(2*x)", 3), ("exp(x) + x^3", 2), ("cos(x)", 1)]);
    for r in &got {
        let s = stored.iter().find(|s| s.f == r.f && s.n == r.n).unwrap();
        assert_eq!(to_json(r), to_json(s));
    }
}

#[test]
fn golden_library_path_matches_binary() {
    let pairs = parse_fixture_list(&std::fs::read_to_string(fixture("reverse.txt")).unwrap()).unwrap();
    let text = render_golden(&regenerate_golden(&pairs, 4001).unwrap());
    let o = run(&["oracle-regen", "--fixtures", fixture("reverse.txt").to_str().unwrap()]);
    assert_eq!(stdout(&o), text);
}

fn schema_keys(schema: &serde_json::Value, def: &str) -> Vec<String> {
    let mut keys: Vec<String> = schema["$defs"][def]["required"]
        .as_array()
        .unwrap_or_else(|| panic!("no definition {def}"))
        .iter()
        .map(|k| k.as_str().unwrap().to_string())
        .collect();
    keys.sort();
    keys
}

fn object_keys(v: &serde_json::Value) -> Vec<String> {
    let mut keys: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    keys
}

#[test]
fn reports_follow_documented_schema() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report-schema.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let parse = |o: Output| -> serde_json::Value { serde_json::from_str(&stdout(&o)).unwrap() };

    let v = parse(run(&["approx", "--f", "exp(x)", "--n", "3"]));
    assert_eq!(object_keys(&v), schema_keys(&schema, "ApproxReport"));
    assert_eq!(object_keys(&v["result"]), schema_keys(&schema, "RemezResult"));
    assert_eq!(object_keys(&v["result"]["trace"][0]), schema_keys(&schema, "RemezStep"));
    assert_eq!(object_keys(&v["certificate"]), schema_keys(&schema, "EquioscillationCertificate"));

    let v = parse(run(&["bounds", "--f", "exp(x)", "--n", "3"]));
    assert_eq!(object_keys(&v), schema_keys(&schema, "BoundsReport"));
    assert_eq!(object_keys(&v["seminorm"]), schema_keys(&schema, "DerivativeRange"));

    let v = parse(run(&["verdict", "--f", "exp(x)", "--n", "3"]));
    assert_eq!(object_keys(&v), schema_keys(&schema, "VerdictReport"));
    assert_eq!(object_keys(&v["report"]), schema_keys(&schema, "SaturationReport"));
    assert_eq!(object_keys(&v["poly_info"]), schema_keys(&schema, "PolyInfo"));

    let v = parse(run(&["prop2", "--f", "exp(x)", "--n", "3"]));
    assert_eq!(object_keys(&v), schema_keys(&schema, "Prop2Output"));
    assert_eq!(object_keys(&v["report"]), schema_keys(&schema, "Prop2Report"));

    let v = parse(run(&["lemmas", "--lemma1-instances", "2", "--lemma2-instances", "1", "--perturbations", "8"]));
    assert_eq!(object_keys(&v), schema_keys(&schema, "LemmaSummary"));

    let o = run(&["oracle-regen", "--fixtures", fixture("reverse.txt").to_str().unwrap()]);
    let line: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(object_keys(&line), schema_keys(&schema, "GoldenRecord"));
}
