//! Lower and upper bounds for the dual norm of `zeta(v) - zeta(w)`, where
//! `zeta(v)` acts on Lipschitz functions by `u -> sum_i u(y_i)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::qspace::{dist, distance, MetricKind, QTuple};
use crate::random::seeded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaGap {
    pub lower: f64,
    pub upper: f64,
    /// Anchor of the dictionary function attaining `lower`.
    pub anchor: Vec<f64>,
}

/// `upper` is G1(v, w). `lower` maximizes `|sum u(y_i) - sum u(y'_i)|` over
/// the 1-Lipschitz functions `u(y) = d(y, a) - d(a, basepoint)` with anchors
/// `a` taken from the points of both tuples and `dictionary_size` random
/// anchors around them.
pub fn zeta_dual_gap(v: &QTuple, w: &QTuple, dictionary_size: usize, basepoint: &[f64], seed: u64) -> Result<ZetaGap> {
    v.check_compatible(w)?;
    if basepoint.len() != v.dim() {
        return invalid(format!(
            "basepoint has {} coordinates, points have {}",
            basepoint.len(),
            v.dim()
        ));
    }
    let (upper, _) = dist(v, w, MetricKind::G1)?;
    let n = v.dim();
    let mut anchors: Vec<Vec<f64>> = v.points().chain(w.points()).map(<[f64]>::to_vec).collect();
    if dictionary_size > 0 {
        let mut lo = basepoint.to_vec();
        let mut hi = basepoint.to_vec();
        for p in v.points().chain(w.points()) {
            for c in 0..n {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        let mut rng = seeded(seed);
        for _ in 0..dictionary_size {
            let a = (0..n)
                .map(|c| {
                    let pad = 0.5 * (hi[c] - lo[c]) + 1e-3;
                    rng.random_range(lo[c] - pad..=hi[c] + pad)
                })
                .collect();
            anchors.push(a);
        }
    }
    let mut lower = 0.0;
    let mut best = anchors[0].clone();
    for a in anchors {
        let offset = distance(&a, basepoint);
        let sv: f64 = v.points().map(|y| distance(y, &a) - offset).sum();
        let sw: f64 = w.points().map(|y| distance(y, &a) - offset).sum();
        let gap = (sv - sw).abs();
        if gap > lower {
            lower = gap;
            best = a;
        }
    }
    Ok(ZetaGap {
        lower: lower.min(upper),
        upper,
        anchor: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_tuples_have_no_gap() {
        let v = QTuple::scalars(&[1.0, 2.0]).unwrap();
        let g = zeta_dual_gap(&v, &v, 10, &[0.0], 1).unwrap();
        assert_eq!((g.lower, g.upper), (0.0, 0.0));
    }

    #[test]
    fn single_points_are_exact() {
        let v = QTuple::new(vec![vec![0.2, -1.0]]).unwrap();
        let w = QTuple::new(vec![vec![1.5, 0.5]]).unwrap();
        let g = zeta_dual_gap(&v, &w, 0, &[0.0, 0.0], 1).unwrap();
        assert_eq!(g.lower, g.upper);
        assert_eq!(g.upper, distance(v.point(0), w.point(0)));
    }
}
