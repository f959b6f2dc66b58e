//! Browser entry points. Every function takes and returns JSON strings.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use qv_core::energy::{solve_dirichlet, BoundaryData, DomainShape, GridFunction, SolveOptions};
use qv_core::extend::{BoundarySample, ConeExtension, SamplePoint};
use qv_core::{dist, Matching, MetricKind, QTuple};

type Out = Result<String, String>;

fn err_text(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn parse<T: for<'de> Deserialize<'de>>(what: &str, json: &str) -> Result<T, String> {
    serde_json::from_str(json).map_err(|e| format!("malformed {what}: {e}"))
}

fn to_json(v: &impl Serialize) -> Out {
    serde_json::to_string(v).map_err(err_text)
}

fn exported(r: Out) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[derive(Serialize)]
struct MetricResult {
    distance: f64,
    matching: Matching,
}

#[derive(Serialize)]
struct Distances {
    g1: MetricResult,
    g2: MetricResult,
    ginf: MetricResult,
}

/// `a` and `b` are arrays of points, e.g. `[[0,0],[1,2]]`.
pub fn distances_json(a: &str, b: &str) -> Out {
    let a: QTuple = parse("first tuple", a)?;
    let b: QTuple = parse("second tuple", b)?;
    let run = |kind| {
        dist(&a, &b, kind)
            .map(|(distance, matching)| MetricResult { distance, matching })
            .map_err(err_text)
    };
    to_json(&Distances {
        g1: run(MetricKind::G1)?,
        g2: run(MetricKind::G2)?,
        ginf: run(MetricKind::GInf)?,
    })
}

#[derive(Serialize)]
struct NodeValue {
    location: Vec<f64>,
    value: QTuple,
}

fn nodes(f: &GridFunction) -> Vec<NodeValue> {
    let grid = f.grid();
    grid.active_nodes()
        .map(|i| NodeValue {
            location: grid.coord(i),
            value: f.value(i).canonical(),
        })
        .collect()
}

/// Cone extension of samples on the unit circle, evaluated on a square
/// lattice with `resolution` points per axis clipped to the unit disk.
pub fn cone_extension_json(samples: &str, resolution: usize) -> Out {
    let samples: Vec<SamplePoint> = parse("samples", samples)?;
    let ext = ConeExtension::new(BoundarySample::new(1.0, samples).map_err(err_text)?).map_err(err_text)?;
    let res = resolution.clamp(2, 200);
    let mut out = Vec::new();
    for i in 0..res {
        for j in 0..res {
            let x = vec![
                -1.0 + 2.0 * i as f64 / (res - 1) as f64,
                -1.0 + 2.0 * j as f64 / (res - 1) as f64,
            ];
            if x[0] * x[0] + x[1] * x[1] <= 1.0 {
                let value = ext.evaluate(&x).map_err(err_text)?.canonical();
                out.push(NodeValue { location: x, value });
            }
        }
    }
    to_json(&out)
}

#[derive(Serialize)]
struct Solved {
    energy: f64,
    runs: Vec<f64>,
    history: Vec<f64>,
    h: f64,
    nodes: Vec<NodeValue>,
}

/// Minimizes the discrete p-energy on a disk grid with `grid` nodes per
/// axis, for boundary samples on the unit circle.
pub fn solve_disk_json(samples: &str, grid: usize, p: f64, restarts: usize, seed: u64) -> Out {
    let samples: Vec<SamplePoint> = parse("samples", samples)?;
    let data = BoundaryData::new(DomainShape::Disk, samples).map_err(err_text)?;
    let g = data.grid(grid.clamp(5, 48)).map_err(err_text)?;
    let f = data.on_grid(&g).map_err(err_text)?;
    let opts = SolveOptions {
        restarts: restarts.clamp(1, 8),
        seed,
        ..SolveOptions::default()
    };
    let sol = solve_dirichlet(&f, p, &opts).map_err(err_text)?;
    to_json(&Solved {
        energy: sol.report.total,
        runs: sol.runs.iter().map(|r| r.energy).collect(),
        history: sol.history.clone(),
        h: g.h(),
        nodes: nodes(&sol.solution),
    })
}

#[wasm_bindgen]
pub fn distances(a: &str, b: &str) -> Result<String, JsError> {
    exported(distances_json(a, b))
}

#[wasm_bindgen]
pub fn cone_extension(samples: &str, resolution: usize) -> Result<String, JsError> {
    exported(cone_extension_json(samples, resolution))
}

#[wasm_bindgen]
pub fn solve_disk(samples: &str, grid: usize, p: f64, restarts: usize, seed: u64) -> Result<String, JsError> {
    exported(solve_disk_json(samples, grid, p, restarts, seed))
}
