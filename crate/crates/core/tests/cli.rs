use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn opa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn compute_writes_the_hilbert_solution() {
    let out = opa(&[
        "compute", "--coeffs", "1,-1", "--p", "2", "--alpha", "0", "--n", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let coeffs: Vec<(f64, f64)> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(complex)
        .collect();
    for (got, want) in coeffs.iter().zip([0.75, 0.5, 0.25]) {
        assert!(
            close(got.0, want, 1e-12) && close(got.1, 0.0, 1e-12),
            "{got:?}"
        );
    }
    assert!(close(v["optimal_norm"].as_f64().unwrap(), 0.5, 1e-12));
    assert!(close(v["norm_sq"].as_f64().unwrap(), 0.25, 1e-12));
    assert_eq!(v["converged"], Value::Bool(true));
    assert_eq!(v["solver"], "convex");
    assert_eq!(v["residual"].as_array().unwrap().len(), 4);
}

#[test]
fn floats_are_written_with_full_precision() {
    let out = opa(&[
        "compute", "--roots", "0:1", "--p", "2", "--alpha", "0", "--n", "1",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("6.6666666666666"), "{text}");
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!(close(v["norm_sq"].as_f64().unwrap(), 1.0 / 3.0, 1e-15));
}

#[test]
fn roots_are_normalized_at_the_origin() {
    let out = opa(&[
        "compute", "--roots", "pi:2", "--p", "3", "--alpha", "0", "--n", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let f: Vec<(f64, f64)> = json(&out)["f"]
        .as_array()
        .unwrap()
        .iter()
        .map(complex)
        .collect();
    let want = [1.0, 2.0, 1.0];
    for (got, w) in f.iter().zip(want) {
        assert!(close(got.0, w, 1e-12) && close(got.1, 0.0, 1e-12), "{f:?}");
    }
}

#[test]
fn output_file_receives_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("result.json");
    let out = opa(&[
        "compute",
        "--coeffs",
        "1,-1",
        "--p",
        "inf",
        "--alpha",
        "0",
        "--n",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["solver"], "flat");
    assert!(close(v["optimal_norm"].as_f64().unwrap(), 0.2, 1e-6));
    assert!(v["flat"]["gap_bound"].as_f64().unwrap() <= 1e-6 * (1.0 + 1e-12));
}

#[test]
fn sweep_writes_the_rates_table() {
    let out = opa(&[
        "sweep", "--roots", "0:1", "--p", "2", "--alpha", "0", "--n", "1..16",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        [
            "n",
            "d",
            "p",
            "alpha",
            "optimal_norm",
            "norm_p_power",
            "lower_bound",
            "predicted_value",
            "solver",
            "converged",
            "iterations",
            "wall_ms"
        ]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let degrees: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(degrees, [1, 2, 4, 8, 16]);
    for row in &rows {
        let n: f64 = row[0].parse().unwrap();
        let value: f64 = row[5].parse().unwrap();
        assert!(close(value, 1.0 / (n + 2.0), 1e-12), "{row:?}");
        assert_eq!(&row[9], "true");
        assert_eq!(&row[11], "0");
    }
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("fitted exponent -1.0000"), "{summary}");
}

#[test]
fn timing_flag_reports_wall_clock() {
    let out = opa(&[
        "sweep", "--roots", "0:1", "--p", "3", "--alpha", "0", "--n", "64..128", "--timing",
        "--solver", "convex",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    for row in reader.records() {
        let ms: f64 = row.unwrap()[11].parse().unwrap();
        assert!(ms >= 0.0);
    }
}

#[test]
fn closed_form_reports_the_formula() {
    let out = opa(&[
        "closed-form",
        "--d",
        "2",
        "--p",
        "3",
        "--alpha",
        "0",
        "--n",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let coeffs: Vec<(f64, f64)> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(complex)
        .collect();
    assert_eq!(coeffs.len(), 3);
    assert!(close(coeffs[0].0, 2.0 / 3.0, 1e-15) && close(coeffs[2].0, 1.0 / 3.0, 1e-15));
    assert!(close(v["norm_p_power"].as_f64().unwrap(), 1.0 / 9.0, 1e-15));
    assert!(v["formula"].as_str().unwrap().contains("D_{N+1}"));
}

#[test]
fn classify_text_and_json() {
    let text = opa(&["classify", "--p", "2", "--alpha", "0"]);
    assert_eq!(text.status.code(), Some(0));
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.starts_with("cyclic\n"), "{text}");

    let out = opa(&["classify", "--p", "2", "--alpha", "3", "--json"]);
    let v = json(&out);
    assert_eq!(v["cyclic"], Value::Bool(false));
    assert_eq!(v["regime"]["kind"], "stagnation");

    let out = opa(&["classify", "--p", "2", "--alpha", "1", "--json"]);
    let v = json(&out);
    assert_eq!(v["cyclic"], Value::Bool(true));
    assert_eq!(v["regime"]["kind"], "log_decay");

    let out = opa(&["classify", "--p", "2", "--alpha", "-1", "--json"]);
    let v = json(&out);
    assert_eq!(v["regime"]["kind"], "power_decay");
    assert!(close(
        v["regime"]["exponent"].as_f64().unwrap(),
        -2.0,
        1e-15
    ));

    let wiener = String::from_utf8(opa(&["classify", "--p", "1", "--alpha", "0"]).stdout).unwrap();
    assert!(wiener.starts_with("not cyclic"), "{wiener}");
}

#[test]
fn verify_suite_passes_and_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = opa(&["verify", "--seed", "3", "--out", path.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let (ra, rb) = (
        std::fs::read_to_string(&a).unwrap(),
        std::fs::read_to_string(&b).unwrap(),
    );
    assert_eq!(ra, rb);
    let v: Value = serde_json::from_str(&ra).unwrap();
    assert_eq!(v["passed"], Value::Bool(true));
    assert_eq!(v["seed"], 3);
    assert!(v["checks"].as_array().unwrap().len() >= 5);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_executes_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.csv");
    let config = serde_json::json!({
        "command": "sweep",
        "problem": {"circle_roots": [{"angle": "0", "mult": 1}]},
        "space": {"p": 2, "weight": {"kind": "power", "alpha": -1}},
        "n": "4..32",
        "output": {"path": out_path, "format": "csv"}
    });
    let config_path = write(dir.path(), "config.json", &config.to_string());
    let out = opa(&["run", &config_path]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(table.lines().count(), 1 + 4);
}

#[test]
fn weight_and_problem_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let weight = write(
        dir.path(),
        "w.json",
        r#"{"kind":"table","values":[1,2,3,4],"tail":"constant"}"#,
    );
    let problem = write(dir.path(), "f.json", r#"{"coeffs":[[1,0],[-1,0]]}"#);
    let out = opa(&[
        "compute",
        "--problem-file",
        &problem,
        "--p",
        "2",
        "--weight-file",
        &weight,
        "--n",
        "3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["weight"]["kind"], "table");
    assert_eq!(v["converged"], Value::Bool(true));
}

#[test]
fn invalid_input_exits_two() {
    let cases: &[&[&str]] = &[
        &[
            "compute", "--coeffs", "1,-1", "--p", "0.5", "--alpha", "0", "--n", "2",
        ],
        &[
            "compute", "--coeffs", "0", "--p", "2", "--alpha", "0", "--n", "2",
        ],
        &[
            "compute", "--coeffs", "1,x", "--p", "2", "--alpha", "0", "--n", "2",
        ],
        &[
            "compute",
            "--coeffs",
            "1,-1",
            "--p",
            "2",
            "--alpha",
            "0",
            "--n",
            "2",
            "--solver",
            "structural",
        ],
        &[
            "compute", "--coeffs", "1,-1", "--p", "1", "--alpha", "0", "--n", "2", "--solver",
            "hilbert",
        ],
        &[
            "compute", "--roots", "0:0", "--p", "2", "--alpha", "0", "--n", "2",
        ],
        &[
            "sweep", "--roots", "0:1", "--p", "2", "--alpha", "0", "--n", "8..2",
        ],
        &["compute", "--coeffs", "1,-1", "--p", "2", "--n", "2"],
        &["run", "/nonexistent/config.json"],
    ];
    for args in cases {
        let out = opa(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn non_convergence_exits_three_after_writing() {
    let out = opa(&[
        "compute",
        "--roots",
        "0:1",
        "--p",
        "3",
        "--alpha",
        "0",
        "--n",
        "200",
        "--max-iters",
        "1",
        "--cold-start",
        "--solver",
        "convex",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["converged"], Value::Bool(false));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));
}
