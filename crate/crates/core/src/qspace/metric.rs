use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::assignment::{min_max, min_sum, CostMatrix};
use super::tuple::QTuple;
use crate::error::{invalid, Error, Result};

/// Which aggregation of pointwise distances defines the metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    G1,
    G2,
    #[serde(rename = "ginf")]
    GInf,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::G1, MetricKind::G2, MetricKind::GInf];
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::G1 => "g1",
            MetricKind::G2 => "g2",
            MetricKind::GInf => "ginf",
        })
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g1" => Ok(MetricKind::G1),
            "g2" => Ok(MetricKind::G2),
            "ginf" | "g_inf" | "inf" => Ok(MetricKind::GInf),
            other => invalid(format!("unknown metric kind '{other}' (expected g1, g2 or ginf)")),
        }
    }
}

/// A pairing of the points of two tuples: point `i` of the first with point
/// `perm[i]` of the second.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Matching(Vec<usize>);

impl Matching {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &j in &perm {
            if j >= perm.len() || std::mem::replace(&mut seen[j], true) {
                return invalid(format!("{perm:?} is not a permutation"));
            }
        }
        Ok(Self(perm))
    }

    pub fn identity(q: usize) -> Self {
        Self((0..q).collect())
    }

    pub fn perm(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn inverse(&self) -> Matching {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Matching(inv)
    }
}

impl TryFrom<Vec<usize>> for Matching {
    type Error = Error;

    fn try_from(perm: Vec<usize>) -> Result<Self> {
        Matching::new(perm)
    }
}

impl From<Matching> for Vec<usize> {
    fn from(m: Matching) -> Self {
        m.0
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Cost of a given pairing under the chosen aggregation.
pub fn pairing_cost(v: &QTuple, w: &QTuple, perm: &[usize], kind: MetricKind) -> f64 {
    let d = perm.iter().enumerate().map(|(i, &j)| (i, j));
    match kind {
        MetricKind::G1 => d.map(|(i, j)| distance(v.point(i), w.point(j))).sum(),
        MetricKind::G2 => d
            .map(|(i, j)| squared_distance(v.point(i), w.point(j)))
            .sum::<f64>()
            .sqrt(),
        MetricKind::GInf => d.map(|(i, j)| distance(v.point(i), w.point(j))).fold(0.0, f64::max),
    }
}

/// Distance between two Q-tuples together with an optimal pairing.
pub fn dist(v: &QTuple, w: &QTuple, kind: MetricKind) -> Result<(f64, Matching)> {
    v.check_compatible(w)?;
    let q = v.q();
    let (perm, value) = match kind {
        MetricKind::G1 => {
            let cost = CostMatrix::from_fn(q, |i, j| distance(v.point(i), w.point(j)));
            min_sum(&cost)
        }
        MetricKind::G2 => {
            let cost = CostMatrix::from_fn(q, |i, j| squared_distance(v.point(i), w.point(j)));
            let (perm, total) = min_sum(&cost);
            (perm, total.sqrt())
        }
        MetricKind::GInf => {
            let cost = CostMatrix::from_fn(q, |i, j| distance(v.point(i), w.point(j)));
            min_max(&cost)
        }
    };
    Ok((value, Matching(perm)))
}

/// Shorthand for the distance value only.
pub fn distance_value(v: &QTuple, w: &QTuple, kind: MetricKind) -> Result<f64> {
    dist(v, w, kind).map(|(d, _)| d)
}

/// G2 between scalar tuples by pairing sorted values.
pub fn dist_sorted_1d(v: &QTuple, w: &QTuple) -> Result<f64> {
    v.check_compatible(w)?;
    if v.dim() != 1 {
        return invalid(format!("sorted matching needs n = 1, got n = {}", v.dim()));
    }
    let mut a = v.coords().to_vec();
    let mut b = w.coords().to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(points: &[&[f64]]) -> QTuple {
        QTuple::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn single_point_distance() {
        let (d, m) = dist(&t(&[&[3.0]]), &t(&[&[5.0]]), MetricKind::G2).unwrap();
        assert_eq!(d, 2.0);
        assert_eq!(m.perm(), &[0]);
    }

    #[test]
    fn two_point_planar_example() {
        let v = t(&[&[-1.0, 1.0], &[1.0, 0.0]]);
        let w = t(&[&[-1.0, 0.0], &[1.0, 1.0]]);
        let (d2, m2) = dist(&v, &w, MetricKind::G2).unwrap();
        assert!((d2 - 2f64.sqrt()).abs() < 1e-15);
        assert!(m2.is_identity());
        let (d1, _) = dist(&v, &w, MetricKind::G1).unwrap();
        assert!((d1 - 2.0).abs() < 1e-15);
        let (dinf, _) = dist(&v, &w, MetricKind::GInf).unwrap();
        assert_eq!(dinf, 1.0);
    }

    #[test]
    fn identical_tuples_pair_identically() {
        let v = t(&[&[0.5, 0.5], &[0.5, 0.5], &[2.0, -1.0]]);
        for kind in MetricKind::ALL {
            let (d, m) = dist(&v, &v, kind).unwrap();
            assert_eq!(d, 0.0);
            assert!(m.is_identity(), "{kind}: {m:?}");
        }
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let a = t(&[&[0.0], &[1.0]]);
        assert!(dist(&a, &t(&[&[0.0]]), MetricKind::G2).is_err());
        assert!(dist(&a, &t(&[&[0.0, 1.0], &[1.0, 1.0]]), MetricKind::G2).is_err());
    }

    #[test]
    fn sorted_scalar_matching() {
        let v = QTuple::scalars(&[1.0, 5.0, 2.0]).unwrap();
        let w = QTuple::scalars(&[0.0, 2.0, 6.0]).unwrap();
        let d = dist_sorted_1d(&v, &w).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert!((d - distance_value(&v, &w, MetricKind::G2).unwrap()).abs() < 1e-15);
        assert_eq!(dist_sorted_1d(&v, &v).unwrap(), 0.0);
        assert!(dist_sorted_1d(&t(&[&[0.0, 1.0]]), &t(&[&[0.0, 1.0]])).is_err());
    }

    #[test]
    fn matching_rejects_non_permutations() {
        assert!(Matching::new(vec![0, 0]).is_err());
        assert!(Matching::new(vec![2, 0]).is_err());
        assert_eq!(Matching::new(vec![2, 0, 1]).unwrap().inverse().perm(), &[1, 2, 0]);
    }

    #[test]
    fn kind_parses() {
        assert_eq!("G2".parse::<MetricKind>().unwrap(), MetricKind::G2);
        assert_eq!("ginf".parse::<MetricKind>().unwrap(), MetricKind::GInf);
        assert!("g3".parse::<MetricKind>().is_err());
    }
}
