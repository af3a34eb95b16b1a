use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn graphs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../graphs")
}

fn graph(name: &str) -> String {
    graphs().join(name).display().to_string()
}

fn qgvac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgvac"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn interval_spectrum() {
    let out = stdout(&qgvac(&[
        "spectrum",
        "--graph",
        &graph("interval.g"),
        "--kmax",
        "50",
    ]));
    let rows: Vec<&str> = out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 15);
    for (n, row) in rows.iter().enumerate() {
        let (k, m) = row.split_once(',').unwrap();
        let k: f64 = k.parse().unwrap();
        assert!(
            (k - (n + 1) as f64 * std::f64::consts::PI).abs() < 1e-10,
            "{k}"
        );
        assert_eq!(m, "1");
    }
    assert!(out.contains("# zero_modes=1"));
}

#[test]
fn star_energy_table() {
    let out = stdout(&qgvac(&[
        "energy",
        "--graph",
        &graph("star3.g"),
        "--kmax",
        "1200",
    ]));
    let v: Value = serde_json::from_str(&out).unwrap();
    let methods = v["methods"].as_array().unwrap();
    let names: Vec<&str> = methods
        .iter()
        .map(|m| m["method"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["logdet", "orbit_sum", "bernoulli", "spectral"]);
    assert_eq!(v["agree"], true);
    for m in methods {
        let value = m["value"].as_f64().unwrap();
        let unc = m["uncertainty"].as_f64().unwrap();
        assert!(value.abs() <= unc, "{m}");
    }
    assert!(methods[0]["value"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn irrational_lengths_skip_bernoulli() {
    let out = stdout(&qgvac(&[
        "energy",
        "--graph",
        &graph("star3_irrational.g"),
        "--nmax",
        "12",
    ]));
    let v: Value = serde_json::from_str(&out).unwrap();
    let names: Vec<&str> = v["methods"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["method"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["logdet", "orbit_sum"]);
    assert_eq!(v["agree"], true);
}

#[test]
fn breakdown_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("terms.jsonl");
    stdout(&qgvac(&[
        "energy",
        "--graph",
        &graph("interval.g"),
        "--nmax",
        "10",
        "--breakdown",
        path.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 10);
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["n"], 10);
    // Interval: only even periods contribute, sigma_2 = 1/2.
    let second: Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
    assert_eq!(second["sigma_n"], 0.5);
    assert!(last["tail_bound"].as_f64().unwrap() > 0.0);
}

#[test]
fn images_table() {
    let out = stdout(&qgvac(&[
        "images",
        "--graph",
        &graph("star3.g"),
        "--t-grid",
        "0.5:4:4",
    ]));
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,spectral,reconstructed,abs_diff,bound"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(r[3] <= r[4], "{r:?}");
    }
}

#[test]
fn rmt_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let args = |p: &PathBuf| {
        vec![
            "rmt".to_string(),
            "--kind".into(),
            "cue,coe".into(),
            "--B".into(),
            "1,3".into(),
            "--samples".into(),
            "2000".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            p.display().to_string(),
        ]
    };
    let run = |p: &PathBuf, threads: &str| {
        let mut v = args(p);
        v.extend(["--threads".to_string(), threads.to_string()]);
        let o = Command::new(env!("CARGO_BIN_EXE_qgvac"))
            .args(&v)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run(&a, "1");
    run(&b, "3");
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert_eq!(text.lines().count(), 4);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["kind"], "cue");
    assert_eq!(first["B"], 1);
}

#[test]
fn energy_output_is_reproducible() {
    let args = ["energy", "--graph", &graph("theta.g"), "--nmax", "10"];
    assert_eq!(stdout(&qgvac(&args)), stdout(&qgvac(&args)));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec![],
        vec!["energy"],
        vec!["frobnicate"],
        vec!["spectrum", "--graph", "x.g"],
        vec!["images", "--graph", "x.g", "--t-grid", "1:2"],
        vec!["rmt", "--B", "two"],
        vec!["rmt", "--kind", "gue", "--B", "2"],
    ] {
        let o = qgvac(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn computation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.g");
    std::fs::write(&bad, "vertex a kirchhoff\nbond e a b 1\n").unwrap();
    let negative = dir.path().join("neg.g");
    std::fs::write(
        &negative,
        "vertex a kirchhoff\nvertex b kirchhoff\nbond e a b -1\n",
    )
    .unwrap();
    for args in [
        vec![
            "energy".to_string(),
            "--graph".into(),
            bad.display().to_string(),
        ],
        vec![
            "energy".to_string(),
            "--graph".into(),
            negative.display().to_string(),
        ],
        vec![
            "energy".to_string(),
            "--graph".into(),
            "/nonexistent/graph.g".into(),
        ],
        vec!["energy".to_string(), "--graph".into(), graph("dft_star.g")],
        vec![
            "rmt".to_string(),
            "--B".into(),
            "2".into(),
            "--samples".into(),
            "5".into(),
        ],
    ] {
        let o = Command::new(env!("CARGO_BIN_EXE_qgvac"))
            .args(&args)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}
