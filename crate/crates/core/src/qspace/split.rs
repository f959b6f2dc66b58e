use serde::{Deserialize, Serialize};

use super::metric::{dist, distance, Matching, MetricKind};
use super::tuple::{lex_cmp, QTuple};
use crate::error::{invalid, Error, Result};

/// Smallest distance between two distinct points of `v`; infinite when all
/// points coincide. Distinctness is exact coordinate equality.
pub fn split_distance(v: &QTuple) -> f64 {
    let q = v.q();
    let mut best = f64::INFINITY;
    for i in 0..q {
        for j in i + 1..q {
            let (a, b) = (v.point(i), v.point(j));
            if a != b {
                best = best.min(distance(a, b));
            }
        }
    }
    best
}

/// The concatenation `v ⊕ w`.
pub fn concatenate(v: &QTuple, w: &QTuple) -> Result<QTuple> {
    if v.dim() != w.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", v.dim(), w.dim()));
    }
    let mut coords = v.coords().to_vec();
    coords.extend_from_slice(w.coords());
    QTuple::from_flat(v.dim(), coords)
}

/// Concatenation of a non-empty list of tuples.
pub fn concatenate_all(parts: &[QTuple]) -> Result<QTuple> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::InvalidInput("nothing to concatenate".into()))?;
    rest.iter().try_fold(first.clone(), |acc, p| concatenate(&acc, p))
}

/// One distinct point of a tuple together with how often it occurs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub point: Vec<f64>,
    pub multiplicity: usize,
}

/// Distinct points in lexicographic order with multiplicities, and their count.
pub fn support_sigma(v: &QTuple) -> (Vec<SupportPoint>, usize) {
    let canon = v.canonical();
    let mut support: Vec<SupportPoint> = Vec::new();
    for p in canon.points() {
        match support.last_mut() {
            Some(last) if last.point == p => last.multiplicity += 1,
            _ => support.push(SupportPoint {
                point: p.to_vec(),
                multiplicity: 1,
            }),
        }
    }
    let sigma = support.len();
    (support, sigma)
}

/// Result of splitting a tuple near `center` along the support of `center`.
#[derive(Debug, Clone)]
pub struct LocalSplit {
    /// One part per distinct support point of the center, in lexicographic
    /// order of those points; part `j` has the multiplicity of point `j`.
    pub parts: Vec<QTuple>,
    /// Optimal G_inf pairing from the center's points to `v`'s points.
    pub assignment: Matching,
}

/// Splits `v` into groups clustered around the distinct points of `center`.
///
/// Requires `G_inf(center, v) < split_distance(center) / 2`; then every point
/// of `v` lies within half the splitting distance of exactly one support
/// point and the grouping is forced.
pub fn local_split(center: &QTuple, v: &QTuple) -> Result<LocalSplit> {
    center.check_compatible(v)?;
    let radius = split_distance(center);
    let (d_inf, assignment) = dist(center, v, MetricKind::GInf)?;
    if d_inf.is_nan() || d_inf >= radius / 2.0 {
        return Err(Error::SplitRadius {
            distance: d_inf,
            radius,
        });
    }
    let (support, _) = support_sigma(center);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); support.len()];
    for (i, &j) in assignment.perm().iter().enumerate() {
        let k = support
            .binary_search_by(|s| lex_cmp(&s.point, center.point(i)))
            .expect("center point belongs to its support");
        groups[k].push(j);
    }
    let parts = groups.iter().map(|g| v.select(g)).collect::<Result<Vec<_>>>()?;
    Ok(LocalSplit { parts, assignment })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_distance_examples() {
        assert_eq!(split_distance(&QTuple::scalars(&[0.0, 0.0, 3.0]).unwrap()), 3.0);
        assert_eq!(split_distance(&QTuple::repeated(&[1.5, -2.0], 4)), f64::INFINITY);
        let v = QTuple::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 0.0]]).unwrap();
        assert_eq!(split_distance(&v), 1.0);
    }

    #[test]
    fn concatenation() {
        let a = QTuple::scalars(&[1.0, 2.0]).unwrap();
        let b = QTuple::scalars(&[2.0]).unwrap();
        let ab = concatenate(&a, &b).unwrap();
        assert_eq!(ab, QTuple::scalars(&[1.0, 2.0, 2.0]).unwrap());
        let (support, sigma) = support_sigma(&ab);
        assert_eq!(sigma, 2);
        assert_eq!(support[1].multiplicity, 2);
        assert!(concatenate(&a, &QTuple::zero(1, 2)).is_err());
    }

    #[test]
    fn support_of_examples() {
        let (s, sigma) = support_sigma(&QTuple::scalars(&[1.0, 1.0, 3.0]).unwrap());
        assert_eq!(sigma, 2);
        assert_eq!(
            s[0],
            SupportPoint {
                point: vec![1.0],
                multiplicity: 2
            }
        );
        assert_eq!(
            s[1],
            SupportPoint {
                point: vec![3.0],
                multiplicity: 1
            }
        );
        assert_eq!(support_sigma(&QTuple::zero(5, 3)).1, 1);
        assert_eq!(support_sigma(&QTuple::scalars(&[1.0, 2.0, 3.0]).unwrap()).1, 3);
    }

    #[test]
    fn local_split_groups_near_support() {
        let center = QTuple::scalars(&[0.0, 0.0, 10.0]).unwrap();
        let v = QTuple::scalars(&[0.1, -0.1, 9.8]).unwrap();
        let split = local_split(&center, &v).unwrap();
        assert_eq!(split.parts.len(), 2);
        assert_eq!(split.parts[0], QTuple::scalars(&[0.1, -0.1]).unwrap());
        assert_eq!(split.parts[1], QTuple::scalars(&[9.8]).unwrap());
        assert_eq!(concatenate_all(&split.parts).unwrap(), v);
    }

    #[test]
    fn local_split_of_center_is_its_support_classes() {
        let center = QTuple::scalars(&[4.0, 1.0, 4.0, 2.0]).unwrap();
        let split = local_split(&center, &center).unwrap();
        let expected = [vec![1.0], vec![2.0], vec![4.0, 4.0]];
        for (part, want) in split.parts.iter().zip(expected) {
            assert_eq!(part, &QTuple::scalars(&want).unwrap());
        }
    }

    #[test]
    fn local_split_outside_radius_errors() {
        let center = QTuple::scalars(&[0.0, 10.0]).unwrap();
        let v = QTuple::scalars(&[6.0, 6.0]).unwrap();
        match local_split(&center, &v) {
            Err(Error::SplitRadius { distance, radius }) => {
                assert_eq!(distance, 6.0);
                assert_eq!(radius, 10.0);
            }
            other => panic!("expected split-radius error, got {other:?}"),
        }
    }
}
