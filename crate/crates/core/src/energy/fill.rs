//! Filling grid values from a subset of nodes.

use super::grid::GridFunction;
use crate::extend::{depth_cap, DataPoint, DomainBox, WhitneyExtension};
use crate::qspace::{squared_distance, QTuple};

/// Values at `targets` extended from the values at `sources`: the dyadic
/// Whitney extension for m <= 2, the nearest source value otherwise or when
/// the extension cannot be evaluated. `sources` must be nonempty.
pub(crate) fn fill_from(f: &GridFunction, sources: &[usize], targets: &[usize]) -> Vec<(usize, QTuple)> {
    let grid = f.grid();
    let m = grid.dim();
    let extension = (m <= 2)
        .then(|| {
            let lo = grid.origin().to_vec();
            let hi: Vec<f64> = (0..m)
                .map(|k| lo[k] + (grid.shape()[k] - 1) as f64 * grid.h())
                .collect();
            let extent = (0..m).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
            let depth = ((extent / grid.h()).log2().ceil().max(0.0) as u32 + 1).min(depth_cap(m));
            let data = sources
                .iter()
                .map(|&i| DataPoint {
                    location: grid.coord(i),
                    value: f.value(i).clone(),
                })
                .collect();
            DomainBox::new(lo, hi)
                .and_then(|d| WhitneyExtension::new(data, &d, depth))
                .ok()
        })
        .flatten();
    let nearest = |x: &[f64]| {
        let j = sources
            .iter()
            .copied()
            .min_by(|&a, &b| squared_distance(&grid.coord(a), x).total_cmp(&squared_distance(&grid.coord(b), x)))
            .expect("sources are nonempty");
        f.value(j).clone()
    };
    crate::par::map(targets, |&i| {
        let x = grid.coord(i);
        let v = extension.as_ref().and_then(|e| e.evaluate(&x).ok());
        (i, v.unwrap_or_else(|| nearest(&x)))
    })
}
