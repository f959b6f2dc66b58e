//! Extension of a map on the unit ball to all of R^m, vanishing outside the
//! ball of radius 3/2.

use crate::energy::grid::{norm, Grid, GridFunction, NodeKind};
use crate::error::{invalid, Result};
use crate::qspace::QTuple;

const SPHERE_TOL: f64 = 1e-9;

fn nearest_active(f: &GridFunction, x: &[f64]) -> usize {
    let grid = f.grid();
    if let Some(i) = grid.nearest_index(x) {
        if grid.kind(i).is_active() {
            return i;
        }
    }
    let mut best = (f64::INFINITY, 0);
    for i in grid.active_nodes() {
        let d = crate::qspace::squared_distance(&grid.coord(i), x);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Lattice on `[-2, 2]^m` aligned with the input nodes. Nodes in the closed
/// unit ball keep their values; for `1 < |x| < 3/2` the value is the input
/// at the node nearest to `phi(x) = (2/|x| - 1) x`, with every point scaled by
/// `2|phi(x)| - 1`; beyond `3/2` the value is `Q[[0]]`.
pub fn extend_to_plane(f: &GridFunction) -> Result<GridFunction> {
    let grid = f.grid();
    let h = grid.h();
    let m = grid.dim();
    let covered = grid.active_nodes().all(|i| norm(&grid.coord(i)) < 2.0);
    let ball = grid
        .interior_nodes()
        .chain(grid.boundary_nodes())
        .any(|i| norm(&grid.coord(i)) <= 1.0 + SPHERE_TOL);
    if !covered || !ball {
        return invalid("input must be a grid function on (a neighbourhood of) the unit ball");
    }
    let mut origin = Vec::with_capacity(m);
    let mut shape = Vec::with_capacity(m);
    for axis in 0..m {
        let lo = grid.origin()[axis];
        let hi = lo + (grid.shape()[axis] - 1) as f64 * h;
        let before = ((lo + 2.0) / h).round().max(0.0) as usize;
        let after = ((2.0 - hi) / h).round().max(0.0) as usize;
        origin.push(lo - before as f64 * h);
        shape.push(grid.shape()[axis] + before + after);
    }
    let count: usize = shape.iter().product();
    let mut mask = vec![NodeKind::Interior; count];
    let probe = Grid::new(shape.clone(), h, origin.clone(), vec![NodeKind::Boundary; count])?;
    for (i, kind) in mask.iter_mut().enumerate() {
        let idx = probe.multi_index(i);
        if idx.iter().zip(&shape).any(|(&k, &s)| k == 0 || k + 1 == s) {
            *kind = NodeKind::Boundary;
        }
    }
    let out = Grid::new(shape, h, origin, mask)?;
    let zero = QTuple::zero(f.q(), f.n());
    let values = (0..out.len())
        .map(|i| {
            let x = out.coord(i);
            let r = norm(&x);
            let v = if r <= 1.0 + SPHERE_TOL {
                f.value(nearest_active(f, &x)).clone()
            } else if r < 1.5 {
                let s = 2.0 / r - 1.0;
                let phi: Vec<f64> = x.iter().map(|c| s * c).collect();
                f.value(nearest_active(f, &phi)).scaled(2.0 * norm(&phi) - 1.0)
            } else {
                zero.clone()
            };
            Some(v)
        })
        .collect();
    GridFunction::new(out, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_map_scales_radially() {
        let grid = Grid::ball(2, 9, 1.0).unwrap();
        let c = QTuple::new(vec![vec![1.0, -2.0], vec![1.0, -2.0]]).unwrap();
        let f = GridFunction::from_fn(grid, |_| c.clone()).unwrap();
        let e = extend_to_plane(&f).unwrap();
        assert_eq!(e.grid().h(), f.grid().h());
        for i in 0..e.grid().len() {
            let x = e.grid().coord(i);
            let r = norm(&x);
            let v = e.value(i);
            if r >= 1.5 {
                assert_eq!(v, &QTuple::zero(2, 2));
            } else if r <= 1.0 {
                assert_eq!(v, &c);
            } else if (r - 1.25).abs() < 1e-12 {
                assert!(v
                    .coords()
                    .iter()
                    .zip(c.coords())
                    .all(|(a, b)| (a - 0.5 * b).abs() < 1e-12));
            }
        }
    }
}
