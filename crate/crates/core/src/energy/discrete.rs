//! Semimetric, discrete p-energy, coordinate truncation and trace.

use serde::{Deserialize, Serialize};

use super::grid::{Edge, GridFunction};
use crate::error::{invalid, Error, Result};
use crate::extend::SamplePoint;
use crate::qspace::{dist, distance_value, Matching, MetricKind, QTuple};

/// Contribution of one axis edge to the discrete energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEnergy {
    pub edge: Edge,
    pub contribution: f64,
    /// Optimal G2 pairing from the value at `edge.a` to the value at `edge.b`.
    pub matching: Matching,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total: f64,
    pub per_edge: Vec<EdgeEnergy>,
    pub p: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `h^m (d / h)^p` for an edge whose endpoint values are at G2 distance `d`.
#[inline]
pub fn edge_term(d: f64, h: f64, m: usize, p: f64) -> f64 {
    h.powi(m as i32) * (d / h).powf(p)
}

/// `(sum over active nodes of G2(f, g)^p h^m)^(1/p)`.
pub fn dp_distance(f: &GridFunction, g: &GridFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return invalid(format!("p must be a finite number >= 1, got {p}"));
    }
    f.same_grid(g)?;
    let grid = f.grid();
    let mut sum = 0.0;
    for i in grid.active_nodes() {
        let d = distance_value(f.value(i), g.value(i), MetricKind::G2)?;
        sum += d.powf(p);
    }
    Ok((sum * grid.cell_volume()).powf(1.0 / p))
}

fn edge_energy(f: &GridFunction, edge: Edge, p: f64) -> Result<EdgeEnergy> {
    let grid = f.grid();
    let (d, matching) = dist(f.value(edge.a), f.value(edge.b), MetricKind::G2)?;
    Ok(EdgeEnergy {
        edge,
        contribution: edge_term(d, grid.h(), grid.dim(), p),
        matching,
    })
}

/// Sum over axis edges of `h^m (G2(f(a), f(b)) / h)^p`, with the optimal
/// matching of every edge.
pub fn discrete_energy(f: &GridFunction, p: f64) -> Result<EnergyReport> {
    if !(p > 1.0 && p.is_finite()) {
        return invalid(format!("p must be a finite number > 1, got {p}"));
    }
    let edges = f.grid().edges();
    let per_edge = crate::par::map(&edges, |&e| edge_energy(f, e, p))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let total = per_edge.iter().map(|e| e.contribution).sum();
    Ok(EnergyReport {
        total,
        per_edge,
        p,
        iterations: 0,
        converged: true,
    })
}

/// Keeps the first `n_keep` coordinates of every point.
pub fn truncate_coords(f: &GridFunction, n_keep: usize) -> Result<GridFunction> {
    if n_keep == 0 || n_keep > f.n() {
        return invalid(format!("n_keep must lie in 1..={}, got {n_keep}", f.n()));
    }
    f.map_values(|v| v.truncated(n_keep))
}

/// Values of a grid function on its boundary nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub nodes: Vec<usize>,
    pub points: Vec<SamplePoint>,
}

impl Trace {
    pub fn values(&self) -> impl Iterator<Item = &QTuple> + '_ {
        self.points.iter().map(|p| &p.value)
    }
}

pub fn trace(f: &GridFunction) -> Result<Trace> {
    let grid = f.grid();
    let nodes: Vec<usize> = grid.boundary_nodes().collect();
    if nodes.is_empty() {
        return Err(Error::NoBoundary);
    }
    let points = nodes
        .iter()
        .map(|&i| SamplePoint {
            location: grid.coord(i),
            value: f.value(i).clone(),
        })
        .collect();
    Ok(Trace { nodes, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::grid::{Grid, NodeKind};

    fn line(nodes: usize) -> Grid {
        Grid::cube(1, nodes, 0.0, 1.0).unwrap()
    }

    #[test]
    fn single_node_distance() {
        let g = Grid::new(vec![1], 1.0, vec![0.0], vec![NodeKind::Boundary]).unwrap();
        let a = GridFunction::new(g.clone(), vec![Some(QTuple::scalars(&[0.0]).unwrap())]).unwrap();
        let b = GridFunction::new(g, vec![Some(QTuple::scalars(&[2.0]).unwrap())]).unwrap();
        assert_eq!(dp_distance(&a, &b, 2.0).unwrap(), 2.0);
        assert_eq!(dp_distance(&a, &a, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn identity_has_unit_dirichlet_energy() {
        let f = GridFunction::from_fn(line(11), |x| QTuple::scalars(&[x[0]]).unwrap()).unwrap();
        let e = discrete_energy(&f, 2.0).unwrap();
        assert!((e.total - 1.0).abs() < 1e-12);
        assert_eq!(e.per_edge.len(), 10);
    }

    #[test]
    fn symmetric_pair_doubles_the_energy() {
        let one = GridFunction::from_fn(line(9), |x| QTuple::scalars(&[x[0]]).unwrap()).unwrap();
        let two = GridFunction::from_fn(line(9), |x| QTuple::scalars(&[x[0], -x[0]]).unwrap()).unwrap();
        let e1 = discrete_energy(&one, 2.0).unwrap().total;
        let e2 = discrete_energy(&two, 2.0).unwrap().total;
        assert!((e2 - 2.0 * e1).abs() < 1e-12);
    }

    #[test]
    fn truncation_and_trace() {
        let g = Grid::cube(2, 3, 0.0, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| QTuple::new(vec![vec![x[0], x[1], 3.0]]).unwrap()).unwrap();
        let t = truncate_coords(&f, 2).unwrap();
        assert_eq!(t.n(), 2);
        assert_eq!(truncate_coords(&f, 3).unwrap(), f);
        assert!(truncate_coords(&f, 0).is_err());
        let tr = trace(&f).unwrap();
        assert_eq!(tr.nodes.len(), 8);
        for (i, v) in tr.nodes.iter().zip(tr.values()) {
            assert_eq!(v, f.value(*i));
        }
    }
}
