//! Decomposing a grid-sampled Q-valued map into Q single-valued fields.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::metric::{dist, distance, MetricKind};
use super::split::split_distance;
use super::tuple::{lex_cmp, QTuple};
use crate::energy::grid::{Edge, GridFunction};
use crate::error::Result;

/// Q single-valued fields whose pointwise union is the original map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchSelection {
    /// `branches[k][node]` is the point of branch `k` at `node`, `None`
    /// outside the domain.
    pub branches: Vec<Vec<Option<Vec<f64>>>>,
    /// Edges where labels could not be carried continuously: either the
    /// fallback ordering was used, or the two labelings disagree with the
    /// optimal matching across the edge.
    pub collisions: Vec<Edge>,
    /// Number of nodes labelled by the lexicographic fallback.
    pub fallbacks: usize,
}

impl BranchSelection {
    /// The tuple formed by all branches at a node.
    pub fn reassemble(&self, node: usize) -> Option<QTuple> {
        let pts: Option<Vec<Vec<f64>>> = self.branches.iter().map(|b| b[node].clone()).collect();
        pts.and_then(|p| QTuple::new(p).ok())
    }
}

fn canonical_order(v: &QTuple) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.q()).collect();
    order.sort_by(|&a, &b| lex_cmp(v.point(a), v.point(b)));
    order
}

/// Breadth-first region growing: labels travel along optimal G2 matchings
/// and fall back to lexicographic order when a matched pair moves by half the
/// local splitting distance or more.
pub fn select_branches(f: &GridFunction) -> Result<BranchSelection> {
    let grid = f.grid();
    let q = f.q();
    let mut labels: Vec<Option<Vec<usize>>> = vec![None; grid.len()];
    let mut fallbacks = 0;
    let mut collisions = Vec::new();

    for seed in grid.active_nodes() {
        if labels[seed].is_some() {
            continue;
        }
        labels[seed] = Some(canonical_order(f.value(seed)));
        let mut queue = VecDeque::from([seed]);
        while let Some(u) = queue.pop_front() {
            let ordered_u = f.value(u).permuted(labels[u].as_ref().unwrap());
            let radius = split_distance(f.value(u)) / 2.0;
            for axis in 0..grid.dim() {
                for forward in [false, true] {
                    let Some(v) = grid.neighbor(u, axis, forward) else {
                        continue;
                    };
                    if !grid.kind(v).is_active() || labels[v].is_some() {
                        continue;
                    }
                    let fv = f.value(v);
                    let (_, m) = dist(&ordered_u, fv, MetricKind::G2)?;
                    let worst = m
                        .perm()
                        .iter()
                        .enumerate()
                        .map(|(k, &j)| distance(ordered_u.point(k), fv.point(j)))
                        .fold(0.0, f64::max);
                    if worst < radius {
                        labels[v] = Some(m.perm().to_vec());
                    } else {
                        labels[v] = Some(canonical_order(fv));
                        fallbacks += 1;
                        let (a, b) = if forward { (u, v) } else { (v, u) };
                        collisions.push(Edge { a, b, axis });
                    }
                    queue.push_back(v);
                }
            }
        }
    }

    // Non-tree edges whose labelings disagree with the optimal matching.
    for e in grid.edges() {
        if collisions.contains(&e) {
            continue;
        }
        let la = f.value(e.a).permuted(labels[e.a].as_ref().unwrap());
        let lb = f.value(e.b).permuted(labels[e.b].as_ref().unwrap());
        let (d, _) = dist(&la, &lb, MetricKind::G2)?;
        let labelled: f64 = (0..q)
            .map(|k| {
                let d = distance(la.point(k), lb.point(k));
                d * d
            })
            .sum::<f64>()
            .sqrt();
        if labelled > d + 1e-12 * (1.0 + d) {
            collisions.push(e);
        }
    }
    collisions.sort_by_key(|e| (e.a, e.axis));

    let mut branches = vec![vec![None; grid.len()]; q];
    for node in grid.active_nodes() {
        let order = labels[node].as_ref().unwrap();
        let v = f.value(node);
        for (k, &i) in order.iter().enumerate() {
            branches[k][node] = Some(v.point(i).to_vec());
        }
    }
    Ok(BranchSelection {
        branches,
        collisions,
        fallbacks,
    })
}
