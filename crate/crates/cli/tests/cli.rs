use std::path::{Path, PathBuf};
use std::process::Command as Process;

use clap::Parser;
use fracoint_cli::{fmt_num, load_csv, run, validate_report, Cli, CliError, LoadOptions, Output, Results};
use serde_json::Value;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic_panel.csv")
}

fn cli(args: &[&str]) -> Cli {
    let mut full = vec!["fracoint"];
    full.extend_from_slice(args);
    Cli::try_parse_from(full).unwrap()
}

fn exec(args: &[&str]) -> Output {
    run(&cli(args)).unwrap()
}

fn binary(args: &[&str]) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_fracoint")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn floats(v: &Value, out: &mut Vec<f64>) {
    match v {
        Value::Number(n) if !n.is_u64() && !n.is_i64() => out.push(n.as_f64().unwrap()),
        Value::Array(a) => a.iter().for_each(|x| floats(x, out)),
        Value::Object(o) => o.values().for_each(|x| floats(x, out)),
        _ => {}
    }
}

#[test]
fn load_csv_with_time_column() {
    let panel = load_csv(fixture(), &LoadOptions { time_column: true, ..Default::default() }).unwrap();
    assert_eq!(panel.nobs(), 66);
    assert_eq!(panel.labels(), ["s1", "s2", "s3", "s4", "s5"]);
    let idx = panel.time_index().unwrap();
    assert_eq!((idx[0].as_str(), idx[65].as_str()), ("1955", "2020"));
}

#[test]
fn load_csv_semicolon_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let opts = LoadOptions { delimiter: b';', time_column: false };
    let ok = write(dir.path(), "ok.csv", "a;b\n1;2\n3;4.5\n-1e-3;7\n");
    let panel = load_csv(&ok, &opts).unwrap();
    assert_eq!(panel.nobs(), 3);
    assert_eq!(panel.column(1), [2.0, 4.5, 7.0]);

    let cases = [
        ("a,b\n1,2\n3,\n", "missing value at row 3, column `b`"),
        ("a,b\n1,2\nx,4\n", "non-numeric value `x` at row 3, column `a`"),
        ("a,a\n1,2\n3,4\n", "duplicate column label `a`"),
        ("a,b\n1,2\n3\n", "row 3 has 1 fields, the header has 2"),
        ("a,b\n1,2\n", "need at least two data rows"),
    ];
    for (body, msg) in cases {
        let path = write(dir.path(), "bad.csv", body);
        let err = load_csv(&path, &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, CliError::Data { .. }), "{err:?}");
        assert!(err.to_string().contains(msg), "{err} / {msg}");
        assert_eq!(err.exit_code(), 2);
    }
    let err = load_csv(dir.path().join("absent.csv"), &LoadOptions::default()).unwrap_err();
    assert!(matches!(err, CliError::Read { .. }));
}

#[test]
fn simulate_cv_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let base = ["simulate-cv", "-t", "40", "--max-dim", "3", "--reps", "1000", "--seed", "9", "--output"];
    for path in [&a, &b] {
        let mut args = base.to_vec();
        args.push(path.to_str().unwrap());
        exec(&args);
    }
    let mut args = base.to_vec();
    args[8] = "10";
    args.push(c.to_str().unwrap());
    exec(&args);
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(String::from_utf8(a).unwrap().starts_with("case,T,d1,xi,p_r,cv,reps,seed\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.csv");
    let out = binary(&["memory", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("none.csv"));

    assert_eq!(binary(&["memory"]).status.code(), Some(2));
    assert_eq!(binary(&["memory", fixture().to_str().unwrap(), "--time-column", "-m", "40"]).status.code(), Some(2));
    let out = binary(&["xstar", fixture().to_str().unwrap(), "--time-column", "--columns", "s1,zz"]);
    assert_eq!(out.status.code(), Some(2));

    let mut body = String::from("a,b\n");
    for t in 0..64 {
        body += &format!("1.5,{}\n", (t as f64 * 0.7).sin());
    }
    let flat = write(dir.path(), "flat.csv", &body);
    let out = binary(&["memory", flat.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("memory"));

    let out = binary(&["memory", fixture().to_str().unwrap(), "--time-column", "--transform", "log-diff"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("m=28"));
}

fn all_commands(dir: &Path) -> Vec<Vec<String>> {
    let f = fixture().to_str().unwrap().to_string();
    let table = dir.join("cv.csv").to_str().unwrap().to_string();
    let strs = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    vec![
        strs(&["memory", &f, "--time-column", "--transform", "log-diff"]),
        strs(&["memory", &f, "--time-column", "--transform", "log", "--estimator", "elw", "-m", "20"]),
        strs(&["xstar", &f, "--time-column", "--transform", "log-diff", "--columns", "s1,s3", "-m", "23"]),
        strs(&["xstar", &f, "--time-column", "--transform", "log-diff", "--weights", "1,0,0,0,0"]),
        strs(&["rank-hualde", &f, "--time-column", "--transform", "log-diff"]),
        strs(&["rank-hualde", &f, "--time-column", "--transform", "log-diff", "--threshold", "2.5", "-m", "18"]),
        strs(&["rank-nielsen", &f, "--time-column", "--transform", "log"]),
        strs(&["simulate-cv", "-t", "66", "--max-dim", "5", "--reps", "1000", "--output", &table]),
        strs(&["rank-nielsen", &f, "--time-column", "--transform", "log", "--cv-table", &table, "--xi", "0.1"]),
        strs(&["rank-nielsen", &f, "--time-column", "--transform", "log", "--reps", "1000", "--case", "const"]),
        strs(&["sigma", &f, "--time-column", "--transform", "log"]),
        strs(&["simulate-panel", "-t", "30", "--d", "0.2,-0.3,1"]),
    ]
}

#[test]
fn json_reports_validate_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for args in all_commands(dir.path()) {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = exec(&args);
        let json = out.json();
        let back = validate_report(&json).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert_eq!(back, out.report, "{args:?}");
        assert_eq!(back.command, args[0]);

        let mut doc: Value = serde_json::from_str(&json).unwrap();
        doc["results"].as_object_mut().unwrap().insert("extra".into(), Value::Null);
        assert!(validate_report(&doc.to_string()).is_err());
    }
}

#[test]
fn text_reports_show_every_number_to_six_digits() {
    let dir = tempfile::tempdir().unwrap();
    for args in all_commands(dir.path()) {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = exec(&args);
        let mut nums = Vec::new();
        floats(&serde_json::to_value(&out.report.results).unwrap(), &mut nums);
        assert!(!nums.is_empty() || args[0] == "simulate-panel");
        for x in nums {
            let s = fmt_num(x);
            assert!(out.text.contains(&s), "{args:?}: {x} as {s} missing from\n{}", out.text);
        }
    }
}

#[test]
fn csv_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    for args in all_commands(dir.path()) {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = exec(&args);
        let mut rdr = csv::Reader::from_reader(out.csv.as_bytes());
        let width = rdr.headers().unwrap().len();
        assert!(width >= 2, "{args:?}");
        for rec in rdr.records() {
            assert_eq!(rec.unwrap().len(), width, "{args:?}");
        }
    }
}

#[test]
fn sigma_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sigma.csv");
    let svg_path = dir.path().join("sigma.svg");
    let f = fixture();
    exec(&[
        "sigma",
        f.to_str().unwrap(),
        "--time-column",
        "--transform",
        "log",
        "--output",
        csv_path.to_str().unwrap(),
        "--plot",
        svg_path.to_str().unwrap(),
    ]);
    let body = std::fs::read_to_string(csv_path).unwrap();
    assert!(body.starts_with("period,sigma\n1955,"));
    assert_eq!(body.lines().count(), 67);
    assert!(std::fs::read_to_string(svg_path).unwrap().contains("<polyline"));
}

#[test]
fn nielsen_without_table_for_unknown_sample_size_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    exec(&["simulate-panel", "-t", "80", "--d", "1,1", "--output", path.to_str().unwrap()]);
    let err = run(&cli(&["rank-nielsen", path.to_str().unwrap()])).unwrap_err();
    assert!(matches!(err, CliError::Usage(_)));
    assert!(err.to_string().contains("--reps"));
}

#[test]
fn nielsen_keeps_size_on_seventeen_random_walks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rw.csv");
    let d = vec!["1"; 17].join(",");
    let seeds = 300;
    let mut zero = 0;
    for seed in 0..seeds {
        let seed = seed.to_string();
        exec(&["simulate-panel", "-t", "66", "--d", &d, "--seed", &seed, "--output", path.to_str().unwrap()]);
        let out = exec(&["rank-nielsen", path.to_str().unwrap()]);
        let Results::RankNielsen(res) = &out.report.results else { panic!() };
        assert_eq!(res.rows.len(), 17);
        zero += usize::from(res.r_hat == 0);
    }
    let rate = zero as f64 / seeds as f64;
    assert!((0.91..=0.99).contains(&rate), "share of r_hat = 0: {rate}");
}
