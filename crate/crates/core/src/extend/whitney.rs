//! Extension from a finite set to a box through a dyadic cube decomposition
//! of the complement, in the max norm, for domains of dimension 1 or 2.
//!
//! Geometry is done in "fine units": the bounding cube is rescaled to
//! `[0, 2^depth]^m`, so every cell corner is an exact integer.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::cone::ConeTree;
use crate::error::{invalid, Error, Result};
use crate::qspace::QTuple;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return invalid("box corners must have the same positive dimension");
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(b > a) || !a.is_finite() || !b.is_finite())
        {
            return invalid("box needs lo < hi on every axis");
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub location: Vec<f64>,
    pub value: QTuple,
}

/// Largest supported depth per domain dimension.
pub fn depth_cap(m: usize) -> u32 {
    if m == 1 {
        30
    } else {
        16
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    lo: [i64; 2],
    size: i64,
}

#[derive(Debug, Clone)]
pub struct WhitneyExtension {
    m: usize,
    depth: u32,
    origin: Vec<f64>,
    /// Length of one fine unit in domain coordinates.
    unit: f64,
    data: Vec<DataPoint>,
    /// Data locations in fine units.
    fine_data: Vec<[f64; 2]>,
    /// Cells keyed by (level, index along each axis).
    cells: HashMap<(u32, [i64; 2]), Cell>,
    /// Sorted vertex positions on each grid line, keyed by (axis, other coordinate).
    lines: BTreeMap<(usize, i64), BTreeSet<i64>>,
    vertex_values: HashMap<[i64; 2], QTuple>,
    accepted: usize,
    residual: usize,
}

fn linf_dist_to_cell(p: &[f64; 2], lo: [i64; 2], size: i64, m: usize) -> f64 {
    (0..m)
        .map(|k| {
            let a = lo[k] as f64;
            let b = (lo[k] + size) as f64;
            (a - p[k]).max(p[k] - b).max(0.0)
        })
        .fold(0.0, f64::max)
}

impl WhitneyExtension {
    pub fn new(data: Vec<DataPoint>, domain: &DomainBox, depth: u32) -> Result<Self> {
        let m = domain.dim();
        if m > 2 {
            return Err(Error::Unsupported(format!(
                "dyadic extension supports m <= 2, got m = {m}"
            )));
        }
        let cap = depth_cap(m);
        if depth > cap {
            return Err(Error::DepthCap { depth, cap });
        }
        let first = data
            .first()
            .ok_or_else(|| Error::InvalidInput("extension needs at least one data point".into()))?;
        let (q, n) = (first.value.q(), first.value.dim());
        let side = domain.lo.iter().zip(&domain.hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        let fine = (1u64 << depth) as f64;
        let unit = side / fine;
        let mut fine_data = Vec::with_capacity(data.len());
        for (i, d) in data.iter().enumerate() {
            if d.location.len() != m {
                return invalid(format!("data point {i} is not in R^{m}"));
            }
            if d.value.q() != q || d.value.dim() != n {
                return invalid(format!("data point {i} has a value of a different Q or n"));
            }
            let mut u = [0.0; 2];
            for k in 0..m {
                let x = d.location[k];
                if x < domain.lo[k] || x > domain.hi[k] {
                    return invalid(format!("data point {i} lies outside the domain box"));
                }
                u[k] = (x - domain.lo[k]) / unit;
            }
            if fine_data.contains(&u) {
                return invalid(format!("data point {i} repeats an earlier location"));
            }
            fine_data.push(u);
        }
        let mut ext = Self {
            m,
            depth,
            origin: domain.lo.clone(),
            unit,
            data,
            fine_data,
            cells: HashMap::new(),
            lines: BTreeMap::new(),
            vertex_values: HashMap::new(),
            accepted: 0,
            residual: 0,
        };
        ext.decompose(0, [0, 0]);
        ext.assign_vertices();
        Ok(ext)
    }

    fn decompose(&mut self, level: u32, index: [i64; 2]) {
        let size = 1i64 << (self.depth - level);
        let lo = [index[0] * size, index[1] * size];
        let d = self
            .fine_data
            .iter()
            .map(|p| linf_dist_to_cell(p, lo, size, self.m))
            .fold(f64::INFINITY, f64::min);
        if (size as f64) <= d || level == self.depth {
            if (size as f64) <= d {
                self.accepted += 1;
            } else {
                self.residual += 1;
            }
            self.cells.insert((level, index), Cell { lo, size });
            return;
        }
        let children: &[[i64; 2]] = if self.m == 1 {
            &[[0, 0], [1, 0]]
        } else {
            &[[0, 0], [1, 0], [0, 1], [1, 1]]
        };
        for c in children {
            self.decompose(level + 1, [2 * index[0] + c[0], 2 * index[1] + c[1]]);
        }
    }

    fn corners(&self, cell: &Cell) -> Vec<[i64; 2]> {
        let (a, s) = (cell.lo, cell.size);
        if self.m == 1 {
            vec![[a[0], 0], [a[0] + s, 0]]
        } else {
            vec![[a[0], a[1]], [a[0] + s, a[1]], [a[0], a[1] + s], [a[0] + s, a[1] + s]]
        }
    }

    fn nearest_data(&self, u: [f64; 2]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, p) in self.fine_data.iter().enumerate() {
            let d = (0..self.m).map(|k| (p[k] - u[k]).abs()).fold(0.0, f64::max);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    fn assign_vertices(&mut self) {
        let mut vertices: BTreeSet<[i64; 2]> = BTreeSet::new();
        for cell in self.cells.values() {
            vertices.extend(self.corners(cell));
        }
        for v in vertices {
            for axis in 0..self.m {
                let other = if self.m == 1 { 0 } else { v[1 - axis] };
                self.lines.entry((axis, other)).or_default().insert(v[axis]);
            }
            let u = [v[0] as f64, v[1] as f64];
            let value = self.data[self.nearest_data(u)].value.clone();
            self.vertex_values.insert(v, value);
        }
    }

    /// Number of accepted cubes and of residual cubes kept at full depth.
    pub fn cell_counts(&self) -> (usize, usize) {
        (self.accepted, self.residual)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_values.len()
    }

    fn to_domain(&self, v: [i64; 2]) -> Vec<f64> {
        (0..self.m).map(|k| self.origin[k] + v[k] as f64 * self.unit).collect()
    }

    /// Cells as (lower corner, side length) in domain coordinates.
    pub fn cells(&self) -> Vec<(Vec<f64>, f64)> {
        let mut out: Vec<(Vec<f64>, f64)> = self
            .cells
            .values()
            .map(|c| (self.to_domain(c.lo), c.size as f64 * self.unit))
            .collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        out
    }

    /// Corner values of a cell's 0-skeleton, in domain coordinates.
    pub fn cell_corner_values(&self, lower: &[f64]) -> Option<Vec<(Vec<f64>, QTuple)>> {
        let mut key = [0i64; 2];
        for k in 0..self.m {
            key[k] = ((lower[k] - self.origin[k]) / self.unit).round() as i64;
        }
        let cell = self.cells.values().find(|c| c.lo == key)?;
        Some(
            self.corners(cell)
                .into_iter()
                .map(|v| (self.to_domain(v), self.vertex(v).clone()))
                .collect(),
        )
    }

    fn vertex(&self, v: [i64; 2]) -> &QTuple {
        &self.vertex_values[&v]
    }

    /// Value on the grid line `(axis, other)` at fine position `p`, by a cone
    /// between the two consecutive vertices around `p`.
    fn edge_value(&self, axis: usize, other: i64, p: f64) -> Result<QTuple> {
        let line = self
            .lines
            .get(&(axis, other))
            .ok_or_else(|| Error::Numeric("query does not lie on a cell edge".into()))?;
        let key = |pos: i64| {
            let mut v = [0, 0];
            v[axis] = pos;
            if self.m == 2 {
                v[1 - axis] = other;
            }
            v
        };
        let below = line.range(..=p.floor() as i64).next_back().copied();
        let above = line.range(p.ceil() as i64..).next().copied();
        let (a, b) = match (below, above) {
            (Some(a), _) if a as f64 == p => return Ok(self.vertex(key(a)).clone()),
            (_, Some(b)) if b as f64 == p => return Ok(self.vertex(key(b)).clone()),
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Numeric("edge query outside the vertex range".into())),
        };
        let (fa, fb) = (self.vertex(key(a)), self.vertex(key(b)));
        let center = 0.5 * (a + b) as f64;
        let radius = 0.5 * (b - a) as f64;
        let t = (p - center).abs() / radius;
        let boundary = if p < center { fa } else { fb };
        let tree = ConeTree::build(&[fa.clone(), fb.clone()])?;
        tree.evaluate(t, boundary)
    }

    /// Value at a fine-unit point on the boundary of a 2-D cell.
    fn cell_boundary_value(&self, cell: &Cell, u: [f64; 2]) -> Result<QTuple> {
        for k in 0..2 {
            for side in [cell.lo[k], cell.lo[k] + cell.size] {
                if u[k] == side as f64 {
                    return self.edge_value(1 - k, side, u[1 - k]);
                }
            }
        }
        Err(Error::Numeric("point is not on the cell boundary".into()))
    }

    /// Vertices on the boundary of a 2-D cell, counterclockwise from the
    /// lower-left corner, with the midpoint of every minimal edge in between.
    fn face_probes(&self, cell: &Cell) -> Result<Vec<QTuple>> {
        let [x0, y0] = cell.lo;
        let s = cell.size;
        let sides: [(usize, i64, i64, i64); 4] = [
            (0, y0, x0, x0 + s),
            (1, x0 + s, y0, y0 + s),
            (0, y0 + s, x0, x0 + s),
            (1, x0, y0, y0 + s),
        ];
        let mut probes = Vec::new();
        for (axis, other, a, b) in sides {
            let line = &self.lines[&(axis, other)];
            let stops: Vec<i64> = line.range(a..=b).copied().collect();
            for w in stops.windows(2) {
                probes.push(self.edge_value(axis, other, w[0] as f64)?);
                probes.push(self.edge_value(axis, other, 0.5 * (w[0] + w[1]) as f64)?);
            }
        }
        Ok(probes)
    }

    fn locate(&self, u: [f64; 2]) -> Option<&Cell> {
        let top = 1i64 << self.depth;
        for level in 0..=self.depth {
            let size = 1i64 << (self.depth - level);
            let mut idx = [0i64; 2];
            for k in 0..self.m {
                let c = (u[k].floor() as i64).clamp(0, top - 1);
                idx[k] = c / size;
            }
            if let Some(c) = self.cells.get(&(level, idx)) {
                return Some(c);
            }
        }
        None
    }

    pub fn evaluate(&self, query: &[f64]) -> Result<QTuple> {
        if query.len() != self.m {
            return invalid(format!(
                "query has {} coordinates, the domain is R^{}",
                query.len(),
                self.m
            ));
        }
        let top = (1u64 << self.depth) as f64;
        let mut u = [0.0; 2];
        for k in 0..self.m {
            u[k] = (query[k] - self.origin[k]) / self.unit;
            if !(0.0..=top).contains(&u[k]) {
                return invalid("query lies outside the domain cube");
            }
        }
        if let Some(i) = self.data.iter().position(|d| d.location == query) {
            return Ok(self.data[i].value.clone());
        }
        let cell = *self.locate(u).expect("the cells tile the cube");
        let value = if self.m == 1 {
            self.edge_value(0, 0, u[0])?
        } else {
            let on_boundary = (0..2).any(|k| u[k] == cell.lo[k] as f64 || u[k] == (cell.lo[k] + cell.size) as f64);
            if on_boundary {
                self.cell_boundary_value(&cell, u)?
            } else {
                let r = 0.5 * cell.size as f64;
                let c = [cell.lo[0] as f64 + r, cell.lo[1] as f64 + r];
                let d = [u[0] - c[0], u[1] - c[1]];
                let k = if d[0].abs() >= d[1].abs() { 0 } else { 1 };
                let norm = d[k].abs();
                let t = norm / r;
                let probes = self.face_probes(&cell)?;
                let tree = ConeTree::build(&probes)?;
                let boundary = if norm == 0.0 {
                    probes[0].clone()
                } else {
                    let mut b = [0.0; 2];
                    b[k] = if d[k] > 0.0 { c[k] + r } else { c[k] - r };
                    let j = 1 - k;
                    b[j] = (c[j] + r * d[j] / norm).clamp(cell.lo[j] as f64, (cell.lo[j] + cell.size) as f64);
                    self.cell_boundary_value(&cell, b)?
                };
                tree.evaluate(t, &boundary)?
            }
        };
        Ok(value.canonical())
    }
}

/// One-shot form of [`WhitneyExtension::evaluate`].
pub fn whitney_extend(data: &[DataPoint], domain: &DomainBox, depth: u32, query: &[f64]) -> Result<QTuple> {
    WhitneyExtension::new(data.to_vec(), domain, depth)?.evaluate(query)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(loc: &[f64], v: &[f64]) -> DataPoint {
        DataPoint {
            location: loc.to_vec(),
            value: QTuple::scalars(v).unwrap(),
        }
    }

    #[test]
    fn reproduces_data_and_interpolates_on_a_segment() {
        let data = vec![point(&[0.0], &[0.0]), point(&[1.0], &[1.0])];
        let dom = DomainBox::new(vec![0.0], vec![1.0]).unwrap();
        let ext = WhitneyExtension::new(data, &dom, 8).unwrap();
        assert_eq!(ext.evaluate(&[0.0]).unwrap(), QTuple::scalars(&[0.0]).unwrap());
        assert_eq!(ext.evaluate(&[1.0]).unwrap(), QTuple::scalars(&[1.0]).unwrap());

        // 0-skeleton: corner values within each cell.
        let mut skeleton: f64 = 0.0;
        for (lo, side) in ext.cells() {
            let corners = ext.cell_corner_values(&lo).unwrap();
            let d = (corners[0].1.coords()[0] - corners[1].1.coords()[0]).abs();
            skeleton = skeleton.max(d / side);
        }
        assert!(skeleton <= 7.0, "{skeleton}");

        // The edge cones at most double the skeleton slope.
        let steps = 1024;
        let mut prev = 0.0;
        let mut lip: f64 = 0.0;
        for i in 1..=steps {
            let x = i as f64 / steps as f64;
            let v = ext.evaluate(&[x]).unwrap().coords()[0];
            lip = lip.max((v - prev).abs() * steps as f64);
            prev = v;
        }
        assert!(lip <= 2.0 * skeleton + 1e-9, "{lip} vs {skeleton}");
    }

    #[test]
    fn single_sample_gives_constant_square() {
        let data = vec![point(&[0.3, -0.2], &[2.0, 5.0])];
        let dom = DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let ext = WhitneyExtension::new(data, &dom, 6).unwrap();
        for q in [[0.9, 0.9], [-1.0, 0.1], [0.31, -0.2], [0.0, 0.0]] {
            assert_eq!(ext.evaluate(&q).unwrap(), QTuple::scalars(&[2.0, 5.0]).unwrap());
        }
    }

    #[test]
    fn limits() {
        let data = vec![point(&[0.0, 0.0, 0.0], &[1.0])];
        let dom = DomainBox::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert!(matches!(
            WhitneyExtension::new(data, &dom, 3),
            Err(Error::Unsupported(_))
        ));
        let data = vec![point(&[0.0], &[1.0])];
        let dom = DomainBox::new(vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(
            WhitneyExtension::new(data, &dom, 99),
            Err(Error::DepthCap { .. })
        ));
    }
}
