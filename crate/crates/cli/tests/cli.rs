use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qv"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("qv runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = qv(dir, args);
    assert!(
        out.status.success(),
        "qv {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json_file(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn dist_prints_distance_and_matching() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("a.json"), "[[0],[10]]").unwrap();
    fs::write(dir.path().join("b.json"), "[[9],[1]]").unwrap();
    let out: Value = serde_json::from_str(&ok(
        dir.path(),
        &["dist", "--kind", "g1", "--a", "a.json", "--b", "b.json"],
    ))
    .unwrap();
    assert_eq!(out["distance"], 2.0);
    assert_eq!(out["matching"], serde_json::json!([1, 0]));
    let out: Value = serde_json::from_str(&ok(
        dir.path(),
        &["dist", "--kind", "ginf", "--a", "a.json", "--b", "b.json"],
    ))
    .unwrap();
    assert_eq!(out["distance"], 1.0);
}

#[test]
fn frame_embed_decode_round_trip() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["frame", "--n", "2", "--q", "2", "--seed", "3", "--out", "f.json"]);
    let frame = json_file(d, "f.json");
    assert_eq!(frame["n"], 2);
    assert_eq!(
        frame["K"].as_u64().unwrap() as usize,
        frame["bases"].as_array().unwrap().len()
    );
    fs::write(d.join("t.json"), "[[0.25,-1.5],[1.0,0.5]]").unwrap();
    let z = ok(d, &["embed", "--frame", "f.json", "--tuple", "t.json"]);
    fs::write(d.join("z.csv"), &z).unwrap();
    let back: Vec<Vec<f64>> = serde_json::from_str(&ok(d, &["decode", "--frame", "f.json", "--in", "z.csv"])).unwrap();
    let want = [[0.25, -1.5], [1.0, 0.5]];
    for (p, w) in back.iter().zip(want) {
        for (a, b) in p.iter().zip(w) {
            assert!((a - b).abs() < 1e-8, "{back:?}");
        }
    }
}

#[test]
fn extension_methods() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(
        d.join("cone.json"),
        r#"{"radius":1,"points":[{"location":[1,0],"value":[[1]]},{"location":[-1,0],"value":[[-1]]}]}"#,
    )
    .unwrap();
    fs::write(d.join("q.csv"), "1,0\n0.5,0\n").unwrap();
    ok(
        d,
        &[
            "extend",
            "cone",
            "--in",
            "cone.json",
            "--query",
            "q.csv",
            "--out",
            "vals.json",
        ],
    );
    let vals = json_file(d, "vals.json");
    assert_eq!(vals[0]["value"], serde_json::json!([[1.0]]));

    fs::write(
        d.join("w.json"),
        r#"{"domain":{"lo":[0],"hi":[1]},"points":[{"location":[0],"value":[[0]]},{"location":[1],"value":[[1]]}]}"#,
    )
    .unwrap();
    fs::write(d.join("wq.csv"), "0\n1\n0.3\n").unwrap();
    let out: Value =
        serde_json::from_str(&ok(d, &["extend", "whitney", "--in", "w.json", "--query", "wq.csv"])).unwrap();
    assert_eq!(out[0]["value"], serde_json::json!([[0.0]]));
    assert_eq!(out[1]["value"], serde_json::json!([[1.0]]));

    ok(d, &["gen", "affine", "--grid", "9", "--out", "g.json"]);
    let plane: Value = serde_json::from_str(&ok(d, &["extend", "plane", "--in", "g.json"])).unwrap();
    assert_eq!(plane["m"], 2);
}

#[test]
fn solve_energy_trace_truncate() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "gen", "affine", "--a", "0.3,-1.2", "--c", "0.5", "--grid", "9", "--out", "b.json",
        ],
    );
    ok(
        d,
        &[
            "solve",
            "--boundary",
            "b.json",
            "--p",
            "2",
            "--tol",
            "1e-12",
            "--out",
            "sol.json",
            "--history",
            "hist.csv",
        ],
    );
    let hist = fs::read_to_string(d.join("hist.csv")).unwrap();
    let mut lines = hist.lines();
    assert_eq!(lines.next(), Some("iteration,total_energy"));
    let energies: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0]));

    let sol = json_file(d, "sol.json");
    let h = 0.25;
    let values = sol["values"].as_array().unwrap();
    let mut k = 0;
    for i in 0..9 {
        for j in 0..9 {
            let x = -1.0 + h * i as f64;
            let y = -1.0 + h * j as f64;
            let v = values[k][0][0].as_f64().unwrap();
            assert!((v - (0.3 * x - 1.2 * y + 0.5)).abs() < 1e-9);
            k += 1;
        }
    }

    let e: Value =
        serde_json::from_str(&ok(d, &["energy", "--in", "sol.json", "--p", "2", "--edges", "e.csv"])).unwrap();
    let closed = 2.0 * 8.0 * 9.0 * h * h * (0.09 + 1.44) / 2.0;
    assert!((e["total"].as_f64().unwrap() - closed).abs() < 1e-9, "{e}");
    assert_eq!(fs::read_to_string(d.join("e.csv")).unwrap().lines().count(), 145);

    ok(d, &["trace", "--in", "sol.json", "--out", "t.json"]);
    ok(d, &["trace", "--in", "b.json", "--out", "tb.json"]);
    assert_eq!(json_file(d, "t.json"), json_file(d, "tb.json"));
}

#[test]
fn solve_accepts_curve_samples() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["gen", "sqrt2", "--samples", "256", "--out", "s.json"]);
    let out: Value =
        serde_json::from_str(&ok(d, &["solve", "--boundary", "s.json", "--grid", "17", "--p", "2"])).unwrap();
    assert_eq!(out["converged"], true);
    assert!(d.join("sol.json").exists() && d.join("hist.csv").exists());
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("cfg.json"), r#"{"seed":7,"trials":20,"Q_range":[1,3]}"#).unwrap();
    let out = ok(d, &["verify", "--config", "cfg.json", "--report", "r.json"]);
    assert_eq!(out.lines().count(), 6);
    let report = json_file(d, "r.json");
    for r in report.as_array().unwrap() {
        assert_eq!(r["failures"], 0);
    }
    ok(d, &["verify", "--config", "cfg.json", "--report", "r2.json"]);
    assert_eq!(
        fs::read(d.join("r.json")).unwrap(),
        fs::read(d.join("r2.json")).unwrap()
    );
}

#[test]
fn seeded_generation_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = ok(dir.path(), &["gen", "tuple", "--q", "3", "--n", "2", "--seed", "11"]);
    let b = ok(dir.path(), &["gen", "tuple", "--q", "3", "--n", "2", "--seed", "11"]);
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(qv(d, &["dist", "--bogus"]).status.code(), Some(2));
    assert_eq!(qv(d, &["nothing"]).status.code(), Some(2));
    fs::write(
        d.join("bad.json"),
        r#"{"m":1,"n":1,"Q":1,"shape":[2],"h":1.0,"mask":[2,2]}"#,
    )
    .unwrap();
    let out = qv(d, &["energy", "--in", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("values"));
    fs::write(d.join("a.json"), "[[0],[1]]").unwrap();
    fs::write(d.join("b.json"), "[[0]]").unwrap();
    assert_eq!(
        qv(d, &["dist", "--a", "a.json", "--b", "b.json"]).status.code(),
        Some(1)
    );
    assert_eq!(qv(d, &["energy", "--in", "missing.json"]).status.code(), Some(1));
}
