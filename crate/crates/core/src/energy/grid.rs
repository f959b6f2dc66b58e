//! Regular grids with interior/boundary masks and Q-valued samples on them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qspace::QTuple;

/// Role of a grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Outside,
    Interior,
    Boundary,
}

impl NodeKind {
    pub fn code(self) -> u8 {
        match self {
            NodeKind::Outside => 0,
            NodeKind::Interior => 1,
            NodeKind::Boundary => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(NodeKind::Outside),
            1 => Ok(NodeKind::Interior),
            2 => Ok(NodeKind::Boundary),
            other => invalid(format!(
                "mask code {other} is not 0 (outside), 1 (interior) or 2 (boundary)"
            )),
        }
    }

    pub fn is_active(self) -> bool {
        self != NodeKind::Outside
    }
}

/// A regular grid in R^m, row-major with the last axis fastest.
/// Node `i` sits at `origin + h * multi_index(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    shape: Vec<usize>,
    h: f64,
    origin: Vec<f64>,
    mask: Vec<NodeKind>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, h: f64, origin: Vec<f64>, mask: Vec<NodeKind>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return invalid(format!("bad grid shape {shape:?}"));
        }
        if !(h > 0.0 && h.is_finite()) {
            return invalid(format!("grid spacing must be positive, got {h}"));
        }
        if origin.len() != shape.len() || origin.iter().any(|x| !x.is_finite()) {
            return invalid("origin must have one finite coordinate per axis");
        }
        let count: usize = shape.iter().product();
        if mask.len() != count {
            return invalid(format!("mask has {} entries, grid has {count} nodes", mask.len()));
        }
        let grid = Self { shape, h, origin, mask };
        grid.check_enclosed()?;
        Ok(grid)
    }

    /// Every interior node must have all axis neighbours present and active.
    fn check_enclosed(&self) -> Result<()> {
        for idx in 0..self.len() {
            if self.mask[idx] != NodeKind::Interior {
                continue;
            }
            for axis in 0..self.dim() {
                for forward in [false, true] {
                    match self.neighbor(idx, axis, forward) {
                        Some(nb) if self.mask[nb].is_active() => {}
                        _ => {
                            return invalid(format!(
                                "interior node {idx} is not enclosed by boundary nodes along axis {axis}"
                            ))
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Centered origin: the grid is symmetric about 0.
    pub fn centered_origin(shape: &[usize], h: f64) -> Vec<f64> {
        shape.iter().map(|&s| -0.5 * (s as f64 - 1.0) * h).collect()
    }

    /// Box `[lo, hi]^m` sampled with `nodes` points per axis; the outer layer
    /// is boundary, everything else interior.
    pub fn cube(m: usize, nodes: usize, lo: f64, hi: f64) -> Result<Self> {
        if m == 0 || nodes < 2 || !(hi > lo) {
            return invalid("a cube grid needs m >= 1, at least 2 nodes per axis and hi > lo");
        }
        let shape = vec![nodes; m];
        let h = (hi - lo) / (nodes - 1) as f64;
        let count = nodes.pow(m as u32);
        let mut mask = vec![NodeKind::Interior; count];
        let tmp = Self {
            shape: shape.clone(),
            h,
            origin: vec![lo; m],
            mask: Vec::new(),
        };
        for (idx, kind) in mask.iter_mut().enumerate() {
            if tmp.multi_index(idx).iter().any(|&k| k == 0 || k == nodes - 1) {
                *kind = NodeKind::Boundary;
            }
        }
        Self::new(shape, h, vec![lo; m], mask)
    }

    /// Closed ball of the given radius about the origin on a grid with `nodes`
    /// points per axis spanning `[-radius, radius]^m`. Nodes strictly inside
    /// the ball are interior, axis neighbours of interior nodes that are not
    /// are boundary, the rest is outside.
    pub fn ball(m: usize, nodes: usize, radius: f64) -> Result<Self> {
        if m == 0 || nodes < 3 || !(radius > 0.0) {
            return invalid("a ball grid needs m >= 1, at least 3 nodes per axis and radius > 0");
        }
        let shape = vec![nodes; m];
        let h = 2.0 * radius / (nodes - 1) as f64;
        let origin = vec![-radius; m];
        let count = nodes.pow(m as u32);
        let mut tmp = Self {
            shape: shape.clone(),
            h,
            origin: origin.clone(),
            mask: vec![NodeKind::Outside; count],
        };
        // Nodes with norm below radius(1 - 1e-12) count as inside, so that
        // nodes landing on the sphere up to rounding become boundary nodes.
        let inside_radius = radius * (1.0 - 1e-12);
        for idx in 0..count {
            let x = tmp.coord(idx);
            if norm(&x) < inside_radius {
                tmp.mask[idx] = NodeKind::Interior;
            }
        }
        let mut mask = tmp.mask.clone();
        for idx in 0..count {
            if tmp.mask[idx] != NodeKind::Interior {
                continue;
            }
            for axis in 0..m {
                for forward in [false, true] {
                    if let Some(nb) = tmp.neighbor(idx, axis, forward) {
                        if tmp.mask[nb] == NodeKind::Outside {
                            mask[nb] = NodeKind::Boundary;
                        }
                    }
                }
            }
        }
        tmp.mask = mask;
        Self::new(shape, h, origin, tmp.mask)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn mask(&self) -> &[NodeKind] {
        &self.mask
    }

    pub fn kind(&self, idx: usize) -> NodeKind {
        self.mask[idx]
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    /// `h^m`, the volume attached to one node.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            out[axis] = idx % self.shape[axis];
            idx /= self.shape[axis];
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> Option<usize> {
        let mut idx = 0;
        for (axis, &k) in multi.iter().enumerate() {
            if k >= self.shape[axis] {
                return None;
            }
            idx = idx * self.shape[axis] + k;
        }
        Some(idx)
    }

    pub fn coord(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .zip(&self.origin)
            .map(|(&k, &o)| o + k as f64 * self.h)
            .collect()
    }

    fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    pub fn neighbor(&self, idx: usize, axis: usize, forward: bool) -> Option<usize> {
        let k = (idx / self.stride(axis)) % self.shape[axis];
        if forward {
            (k + 1 < self.shape[axis]).then(|| idx + self.stride(axis))
        } else {
            (k > 0).then(|| idx - self.stride(axis))
        }
    }

    /// Axis-adjacent pairs `(a, b)` of active nodes with `b` the forward
    /// neighbour of `a`, ordered by `a` then axis.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            if !self.mask[a].is_active() {
                continue;
            }
            for axis in 0..self.dim() {
                if let Some(b) = self.neighbor(a, axis, true) {
                    if self.mask[b].is_active() {
                        out.push(Edge { a, b, axis });
                    }
                }
            }
        }
        out
    }

    pub fn active_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.mask[i].is_active())
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.mask[i] == NodeKind::Boundary)
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.mask[i] == NodeKind::Interior)
    }

    /// Node index nearest to `x` (grid rounding), if inside the grid box.
    pub fn nearest_index(&self, x: &[f64]) -> Option<usize> {
        let multi: Option<Vec<usize>> = x
            .iter()
            .zip(&self.origin)
            .zip(&self.shape)
            .map(|((&xi, &o), &s)| {
                let k = ((xi - o) / self.h).round();
                (k >= 0.0 && k < s as f64).then_some(k as usize)
            })
            .collect();
        self.flat_index(&multi?)
    }
}

/// An axis edge between two active nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub axis: usize,
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// A Q-valued map sampled at the active nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    q: usize,
    n: usize,
    values: Vec<Option<QTuple>>,
}

impl GridFunction {
    /// `values` holds one entry per grid node; active nodes need `Some`.
    pub fn new(grid: Grid, values: Vec<Option<QTuple>>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!("{} values for {} nodes", values.len(), grid.len()));
        }
        let mut shape: Option<(usize, usize)> = None;
        let mut cleaned = Vec::with_capacity(values.len());
        for (idx, v) in values.into_iter().enumerate() {
            let active = grid.kind(idx).is_active();
            match (active, v) {
                (true, None) => return invalid(format!("active node {idx} has no value")),
                (true, Some(v)) => {
                    let qn = (v.q(), v.dim());
                    if *shape.get_or_insert(qn) != qn {
                        return invalid(format!(
                            "node {idx} has Q={}, n={} but earlier nodes have Q={}, n={}",
                            qn.0,
                            qn.1,
                            shape.unwrap().0,
                            shape.unwrap().1
                        ));
                    }
                    cleaned.push(Some(v));
                }
                (false, _) => cleaned.push(None),
            }
        }
        let (q, n) = shape.ok_or_else(|| Error::InvalidInput("grid has no active nodes".into()))?;
        Ok(Self {
            grid,
            q,
            n,
            values: cleaned,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> QTuple) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| grid.kind(i).is_active().then(|| f(&grid.coord(i))))
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Value at an active node. Panics on outside nodes.
    pub fn value(&self, idx: usize) -> &QTuple {
        self.values[idx]
            .as_ref()
            .unwrap_or_else(|| panic!("node {idx} is outside the domain"))
    }

    pub fn get(&self, idx: usize) -> Option<&QTuple> {
        self.values[idx].as_ref()
    }

    pub fn values(&self) -> &[Option<QTuple>] {
        &self.values
    }

    /// Replaces the value at an active node.
    pub fn set(&mut self, idx: usize, v: QTuple) -> Result<()> {
        if !self.grid.kind(idx).is_active() {
            return invalid(format!("node {idx} is outside the domain"));
        }
        if v.q() != self.q || v.dim() != self.n {
            return invalid("value shape does not match the grid function");
        }
        self.values[idx] = Some(v);
        Ok(())
    }

    pub fn map_values(&self, f: impl Fn(&QTuple) -> Result<QTuple>) -> Result<GridFunction> {
        let values = self
            .values
            .iter()
            .map(|v| v.as_ref().map(&f).transpose())
            .collect::<Result<Vec<_>>>()?;
        GridFunction::new(self.grid.clone(), values)
    }

    pub fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("grids differ".into()));
        }
        if self.q != other.q || self.n != other.n {
            return Err(Error::GridMismatch(format!(
                "Q/n differ: ({}, {}) vs ({}, {})",
                self.q, self.n, other.q, other.n
            )));
        }
        Ok(())
    }
}

/// JSON layout: `{"m","n","Q","shape","h","origin"?,"mask","values"}` with
/// mask codes 0/1/2 and one value per active node in node order.
#[derive(Serialize, Deserialize)]
struct GridFunctionRepr {
    m: usize,
    n: usize,
    #[serde(rename = "Q")]
    q: usize,
    shape: Vec<usize>,
    h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<Vec<f64>>,
    mask: Vec<u8>,
    values: Vec<QTuple>,
}

impl Serialize for GridFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridFunctionRepr {
            m: self.grid.dim(),
            n: self.n,
            q: self.q,
            shape: self.grid.shape.clone(),
            h: self.grid.h,
            origin: Some(self.grid.origin.clone()),
            mask: self.grid.mask.iter().map(|k| k.code()).collect(),
            values: self.values.iter().flatten().cloned().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = GridFunctionRepr::deserialize(d)?;
        GridFunction::try_from(repr).map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl TryFrom<GridFunctionRepr> for GridFunction {
    type Error = Error;

    fn try_from(r: GridFunctionRepr) -> Result<Self> {
        if r.shape.len() != r.m {
            return invalid(format!("field 'shape' has {} axes but 'm' is {}", r.shape.len(), r.m));
        }
        let origin = r.origin.unwrap_or_else(|| Grid::centered_origin(&r.shape, r.h));
        let mask = r
            .mask
            .iter()
            .map(|&c| NodeKind::from_code(c))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::InvalidInput(format!("field 'mask': {e}")))?;
        let grid = Grid::new(r.shape, r.h, origin, mask)?;
        let active = grid.active_nodes().count();
        if r.values.len() != active {
            return invalid(format!(
                "field 'values' has {} entries but the mask has {active} active nodes",
                r.values.len()
            ));
        }
        let mut it = r.values.into_iter();
        let values: Vec<Option<QTuple>> = (0..grid.len())
            .map(|i| if grid.kind(i).is_active() { it.next() } else { None })
            .collect();
        for v in values.iter().flatten() {
            if v.q() != r.q || v.dim() != r.n {
                return invalid(format!(
                    "field 'values': a tuple has Q={}, n={} but the header says Q={}, n={}",
                    v.q(),
                    v.dim(),
                    r.q,
                    r.n
                ));
            }
        }
        GridFunction::new(grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_grid_layout() {
        let g = Grid::cube(2, 4, 0.0, 3.0).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.h(), 1.0);
        assert_eq!(g.interior_nodes().count(), 4);
        assert_eq!(g.boundary_nodes().count(), 12);
        assert_eq!(g.coord(6), vec![1.0, 2.0]);
        assert_eq!(g.edges().len(), 24);
        assert_eq!(g.nearest_index(&[2.2, 0.9]), Some(9));
    }

    #[test]
    fn ball_grid_is_enclosed() {
        let g = Grid::ball(2, 17, 1.0).unwrap();
        for i in g.interior_nodes() {
            assert!(norm(&g.coord(i)) < 1.0);
        }
        for i in g.boundary_nodes() {
            assert!(norm(&g.coord(i)) >= 1.0 - 1e-9);
        }
        assert!(g.boundary_nodes().count() > 0);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let g = Grid::cube(1, 3, 0.0, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| QTuple::scalars(&[x[0], -x[0]]).unwrap()).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        let back: GridFunction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);

        let bad = text.replace("\"mask\":[2,1,2]", "\"mask\":[2,7,2]");
        let err = serde_json::from_str::<GridFunction>(&bad).unwrap_err().to_string();
        assert!(err.contains("mask"), "{err}");
        let bad = text.replace("\"Q\":2", "\"Q\":3");
        let err = serde_json::from_str::<GridFunction>(&bad).unwrap_err().to_string();
        assert!(err.contains("values"), "{err}");
    }

    #[test]
    fn rejects_unenclosed_interior() {
        let mask = vec![NodeKind::Interior, NodeKind::Boundary];
        assert!(Grid::new(vec![2], 1.0, vec![0.0], mask).is_err());
    }
}
