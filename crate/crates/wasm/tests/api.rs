use qv_wasm::{cone_extension_json, distances_json, solve_disk_json};
use serde_json::Value;

fn circle_samples(count: usize) -> String {
    let samples: Vec<Value> = (0..count)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / count as f64;
            let (s, c) = (t / 2.0).sin_cos();
            serde_json::json!({"location": [t.cos(), t.sin()], "value": [[c, s], [-c, -s]]})
        })
        .collect();
    serde_json::to_string(&samples).unwrap()
}

#[test]
fn distances_report_all_three_metrics() {
    let out: Value = serde_json::from_str(&distances_json("[[0,0],[3,0]]", "[[3,4],[0,4]]").unwrap()).unwrap();
    assert_eq!(out["g2"]["distance"], serde_json::json!(32f64.sqrt()));
    assert_eq!(out["g1"]["distance"], serde_json::json!(8.0));
    assert_eq!(out["ginf"]["distance"], serde_json::json!(4.0));
    assert_eq!(out["g2"]["matching"], serde_json::json!([1, 0]));
}

#[test]
fn malformed_input_is_an_error() {
    assert!(distances_json("[[0,0]", "[[1,1]]").unwrap_err().contains("malformed"));
    assert!(distances_json("[[0,0]]", "[[1,1],[2,2]]").is_err());
}

#[test]
fn cone_field_covers_the_disk_with_pairs() {
    let out: Vec<Value> = serde_json::from_str(&cone_extension_json(&circle_samples(64), 21).unwrap()).unwrap();
    assert!(!out.is_empty());
    for node in &out {
        let x = node["location"][0].as_f64().unwrap();
        let y = node["location"][1].as_f64().unwrap();
        assert!(x * x + y * y <= 1.0);
        assert_eq!(node["value"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn disk_solve_returns_a_monotone_history() {
    let out: Value = serde_json::from_str(&solve_disk_json(&circle_samples(128), 12, 2.0, 2, 1).unwrap()).unwrap();
    let history: Vec<f64> = out["history"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(history.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(out["runs"].as_array().unwrap().len(), 2);
    assert!(out["energy"].as_f64().unwrap() > 0.0);
}
