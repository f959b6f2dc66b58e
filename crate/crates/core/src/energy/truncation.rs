//! Replacing a grid function by a Lipschitz one off a small bad set.

use serde::Serialize;

use super::fill::fill_from;
use super::grid::GridFunction;
use crate::error::{invalid, Result};
use crate::qspace::{distance_value, MetricKind, QTuple};

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzTruncation {
    pub function: GridFunction,
    /// Nodes where the function is left unchanged, in increasing order.
    pub kept: Vec<usize>,
    /// Largest edge difference quotient of `function`.
    pub lipschitz: f64,
    /// `lipschitz / t`.
    pub constant: f64,
}

/// Largest difference quotient `G2(f(x), f(y)) / h` over the axis edges at each node.
pub fn local_quotients(f: &GridFunction) -> Result<Vec<f64>> {
    let grid = f.grid();
    let mut out = vec![0.0f64; grid.len()];
    for e in grid.edges() {
        let d = distance_value(f.value(e.a), f.value(e.b), MetricKind::G2)? / grid.h();
        out[e.a] = out[e.a].max(d);
        out[e.b] = out[e.b].max(d);
    }
    Ok(out)
}

/// Keeps the nodes where `|f|^p + (local quotient)^p <= t^p` and refills the
/// rest by extension from the kept nodes. With nothing kept the result is
/// `Q[[0]]` everywhere.
pub fn lipschitz_truncation(f: &GridFunction, t: f64, p: f64) -> Result<LipschitzTruncation> {
    if !(t > 0.0 && p >= 1.0 && p.is_finite()) {
        return invalid(format!("need t > 0 and finite p >= 1, got t = {t}, p = {p}"));
    }
    let grid = f.grid();
    let zero = QTuple::zero(f.q(), f.n());
    let quotients = local_quotients(f)?;
    let mut kept = Vec::new();
    let mut rest = Vec::new();
    for i in grid.active_nodes() {
        let size = distance_value(f.value(i), &zero, MetricKind::G2)?;
        if size.powf(p) + quotients[i].powf(p) <= t.powf(p) {
            kept.push(i);
        } else {
            rest.push(i);
        }
    }
    let function = if kept.is_empty() {
        f.map_values(|_| Ok(zero.clone()))?
    } else {
        let mut values = f.values().to_vec();
        for (i, v) in fill_from(f, &kept, &rest) {
            values[i] = Some(v);
        }
        GridFunction::new(grid.clone(), values)?
    };
    let lipschitz = local_quotients(&function)?.into_iter().fold(0.0, f64::max);
    Ok(LipschitzTruncation {
        function,
        kept,
        lipschitz,
        constant: lipschitz / t,
    })
}
