use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// An unordered Q-tuple of points in R^n.
///
/// Points are stored in the order they were given; that order carries no
/// meaning beyond being a numbering. Equality is multiset equality, decided by
/// comparing canonical forms.
#[derive(Clone)]
pub struct QTuple {
    dim: usize,
    coords: Vec<f64>,
}

impl QTuple {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return invalid("a Q-tuple needs at least one point");
        }
        let dim = points[0].len();
        if dim == 0 {
            return invalid("points must have at least one coordinate");
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return invalid(format!("point {i} has {} coordinates, expected {dim}", p.len()));
            }
            if let Some(x) = p.iter().find(|x| !x.is_finite()) {
                return invalid(format!("point {i} has a non-finite coordinate {x}"));
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { dim, coords })
    }

    /// Builds a tuple from row-major coordinates, `q * dim` of them.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return invalid(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            ));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return invalid("non-finite coordinate");
        }
        Ok(Self { dim, coords })
    }

    /// Scalar points, n = 1.
    pub fn scalars(values: &[f64]) -> Result<Self> {
        Self::from_flat(1, values.to_vec())
    }

    /// `q` copies of a single point.
    pub fn repeated(point: &[f64], q: usize) -> Self {
        assert!(q > 0 && !point.is_empty());
        let mut coords = Vec::with_capacity(q * point.len());
        for _ in 0..q {
            coords.extend_from_slice(point);
        }
        Self {
            dim: point.len(),
            coords,
        }
    }

    /// Q copies of the origin of R^n.
    pub fn zero(q: usize, dim: usize) -> Self {
        Self::repeated(&vec![0.0; dim], q)
    }

    pub fn q(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// Points sorted lexicographically, coordinate by coordinate.
    pub fn canonical(&self) -> QTuple {
        let mut order: Vec<usize> = (0..self.q()).collect();
        order.sort_by(|&a, &b| lex_cmp(self.point(a), self.point(b)));
        self.permuted(&order)
    }

    /// The tuple whose i-th point is `self.point(order[i])`.
    pub fn permuted(&self, order: &[usize]) -> QTuple {
        let mut coords = Vec::with_capacity(self.coords.len());
        for &i in order {
            coords.extend_from_slice(self.point(i));
        }
        QTuple { dim: self.dim, coords }
    }

    /// The sub-tuple formed by the listed point indices.
    pub fn select(&self, indices: &[usize]) -> Result<QTuple> {
        if indices.is_empty() {
            return invalid("cannot select an empty sub-tuple");
        }
        Ok(self.permuted(indices))
    }

    /// Applies `f` to every coordinate.
    pub fn map_coords(&self, f: impl Fn(f64) -> f64) -> QTuple {
        QTuple {
            dim: self.dim,
            coords: self.coords.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scaled(&self, t: f64) -> QTuple {
        self.map_coords(|x| t * x)
    }

    /// Keeps the first `keep` coordinates of every point.
    pub fn truncated(&self, keep: usize) -> Result<QTuple> {
        if keep == 0 || keep > self.dim {
            return invalid(format!("cannot keep {keep} of {} coordinates", self.dim));
        }
        let coords = self.points().flat_map(|p| p[..keep].iter().copied()).collect();
        Ok(QTuple { dim: keep, coords })
    }

    /// Multiset equality.
    pub fn same_multiset(&self, other: &QTuple) -> bool {
        self.dim == other.dim && self.q() == other.q() && self.canonical().coords == other.canonical().coords
    }

    pub(crate) fn check_compatible(&self, other: &QTuple) -> Result<()> {
        if self.dim != other.dim {
            return invalid(format!("dimension mismatch: {} vs {}", self.dim, other.dim));
        }
        if self.q() != other.q() {
            return invalid(format!("multiplicity mismatch: Q={} vs Q={}", self.q(), other.q()));
        }
        Ok(())
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        // Coordinates are finite, so partial_cmp is total here and
        // treats -0.0 and 0.0 as equal, like `==` does.
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

impl PartialEq for QTuple {
    fn eq(&self, other: &Self) -> bool {
        self.same_multiset(other)
    }
}

impl fmt::Debug for QTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[[")?;
        for (i, p) in self.points().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p:?}")?;
        }
        f.write_str("]]")
    }
}

impl Serialize for QTuple {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.points())
    }
}

impl<'de> Deserialize<'de> for QTuple {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let points = Vec::<Vec<f64>>::deserialize(deserializer)?;
        QTuple::new(points).map_err(|e| match e {
            Error::InvalidInput(msg) => serde::de::Error::custom(msg),
            other => serde::de::Error::custom(other.to_string()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_equality_ignores_order() {
        let a = QTuple::new(vec![vec![1.0, 2.0], vec![0.0, 5.0]]).unwrap();
        let b = QTuple::new(vec![vec![0.0, 5.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(a, b);
        let c = QTuple::new(vec![vec![0.0, 5.0], vec![1.0, 2.5]]).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(QTuple::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(QTuple::new(vec![vec![f64::NAN]]).is_err());
        assert!(QTuple::new(vec![]).is_err());
    }

    #[test]
    fn json_form_round_trips() {
        let v = QTuple::new(vec![vec![0.1, -3.0], vec![1.0 / 3.0, 2.0e-17]]).unwrap();
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, "[[0.1,-3.0],[0.3333333333333333,2e-17]]");
        let back: QTuple = serde_json::from_str(&text).unwrap();
        assert_eq!(back.coords(), v.coords());
    }

    #[test]
    fn truncation_keeps_leading_coordinates() {
        let v = QTuple::new(vec![vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(v.truncated(2).unwrap().coords(), &[1.0, 2.0]);
        assert!(v.truncated(0).is_err());
        assert!(v.truncated(4).is_err());
    }
}
