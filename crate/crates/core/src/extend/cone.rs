//! Cone extension of Q-valued boundary data from the sphere of a ball to the
//! whole ball.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qspace::{dist, MetricKind, QTuple};

/// Norm used to measure radii of the ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallNorm {
    Euclidean,
    Max,
}

impl BallNorm {
    pub fn of(self, x: &[f64]) -> f64 {
        match self {
            BallNorm::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            BallNorm::Max => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

/// Decomposition of boundary data into independently extended groups.
#[derive(Debug, Clone)]
pub enum ConeTree {
    /// `x0` is the reference value (canonical order); each part lists the
    /// point indices of `x0` it owns.
    Split {
        x0: QTuple,
        parts: Vec<(Vec<usize>, ConeTree)>,
    },
    /// Radial interpolation toward a single anchor point.
    Radial { anchor: Vec<f64> },
}

fn oscillation(values: &[QTuple]) -> Result<f64> {
    let mut osc = 0.0;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            osc = f64::max(osc, dist(&values[i], &values[j], MetricKind::GInf)?.0);
        }
    }
    Ok(osc)
}

fn gap(v: &QTuple, a: usize, b: usize) -> f64 {
    crate::qspace::distance(v.point(a), v.point(b))
}

/// Grows `J` from `i1` by adding indices while all pairwise gaps inside stay
/// within `3 (card J - 1) osc`.
fn maximal_cluster(y: &QTuple, i1: usize, osc: f64) -> Vec<usize> {
    let mut cluster = vec![i1];
    loop {
        let bound = 3.0 * cluster.len() as f64 * osc;
        let next = (0..y.q())
            .filter(|j| !cluster.contains(j))
            .find(|&j| cluster.iter().all(|&i| gap(y, i, j) <= bound));
        match next {
            Some(j) => cluster.push(j),
            None => break,
        }
    }
    cluster.sort_unstable();
    cluster
}

/// Splits `v` into the groups matched to `parts` of the reference `x0`.
fn split_by(x0: &QTuple, v: &QTuple, parts: &[Vec<usize>]) -> Result<Vec<QTuple>> {
    let (_, m) = dist(x0, v, MetricKind::GInf)?;
    parts
        .iter()
        .map(|idx| {
            let sel: Vec<usize> = idx.iter().map(|&i| m.perm()[i]).collect();
            v.select(&sel)
        })
        .collect()
}

impl ConeTree {
    /// Builds the decomposition from boundary probe values; the first probe
    /// plays the role of the base point whenever no split is triggered.
    pub fn build(probes: &[QTuple]) -> Result<ConeTree> {
        let first = probes
            .first()
            .ok_or_else(|| Error::InvalidInput("cone extension needs at least one sample".into()))?;
        let q = first.q();
        let osc = oscillation(probes)?;
        if q >= 2 {
            let threshold = 3.0 * q as f64 * osc;
            let mut best: Option<(f64, usize, usize, usize)> = None;
            for (p, v) in probes.iter().enumerate() {
                let y = v.canonical();
                for a in 0..q {
                    for b in a + 1..q {
                        let g = gap(&y, a, b);
                        if best.is_none_or(|(bg, ..)| g > bg) {
                            best = Some((g, p, a, b));
                        }
                    }
                }
            }
            let (g, p, i1, _) = best.expect("q >= 2 has a pair");
            if g > threshold {
                let x0 = probes[p].canonical();
                let j1 = maximal_cluster(&x0, i1, osc);
                let j2: Vec<usize> = (0..q).filter(|i| !j1.contains(i)).collect();
                let groups = vec![j1, j2];
                let mut sub: Vec<Vec<QTuple>> = vec![Vec::new(), Vec::new()];
                for v in probes {
                    for (k, part) in split_by(&x0, v, &groups)?.into_iter().enumerate() {
                        sub[k].push(part);
                    }
                }
                let parts = groups
                    .into_iter()
                    .zip(sub)
                    .map(|(g, s)| Ok((g, ConeTree::build(&s)?)))
                    .collect::<Result<Vec<_>>>()?;
                return Ok(ConeTree::Split { x0, parts });
            }
        }
        Ok(ConeTree::Radial {
            anchor: first.canonical().point(0).to_vec(),
        })
    }

    /// Value at relative radius `t = ||x - c|| / R` given the boundary value
    /// `v` at the radial projection of the query.
    pub fn evaluate(&self, t: f64, v: &QTuple) -> Result<QTuple> {
        match self {
            ConeTree::Radial { anchor } => {
                let n = v.dim();
                let mut coords = Vec::with_capacity(v.coords().len());
                for p in v.points() {
                    for c in 0..n {
                        coords.push(t * p[c] + (1.0 - t) * anchor[c]);
                    }
                }
                QTuple::from_flat(n, coords)
            }
            ConeTree::Split { x0, parts } => {
                let idx: Vec<Vec<usize>> = parts.iter().map(|(g, _)| g.clone()).collect();
                let pieces = split_by(x0, v, &idx)?;
                let values = parts
                    .iter()
                    .zip(&pieces)
                    .map(|((_, tree), piece)| tree.evaluate(t, piece))
                    .collect::<Result<Vec<_>>>()?;
                crate::qspace::concatenate_all(&values)
            }
        }
    }

    /// Number of radial leaves, i.e. groups extended independently.
    pub fn leaves(&self) -> usize {
        match self {
            ConeTree::Radial { .. } => 1,
            ConeTree::Split { parts, .. } => parts.iter().map(|(_, t)| t.leaves()).sum(),
        }
    }
}

/// Q-valued samples on the sphere `||x|| = R` of R^m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub radius: f64,
    pub points: Vec<SamplePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub location: Vec<f64>,
    pub value: QTuple,
}

const SPHERE_TOL: f64 = 1e-9;

impl BoundarySample {
    pub fn new(radius: f64, points: Vec<SamplePoint>) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return invalid(format!("radius must be positive, got {radius}"));
        }
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidInput("boundary sample is empty".into()))?;
        let (m, q, n) = (first.location.len(), first.value.q(), first.value.dim());
        if m == 0 {
            return invalid("locations need at least one coordinate");
        }
        for (i, p) in points.iter().enumerate() {
            if p.location.len() != m {
                return invalid(format!(
                    "sample {i} has a location in R^{}, expected R^{m}",
                    p.location.len()
                ));
            }
            if p.value.q() != q || p.value.dim() != n {
                return invalid(format!("sample {i} has a value of a different Q or n"));
            }
            let r = BallNorm::Euclidean.of(&p.location);
            if (r - radius).abs() > SPHERE_TOL {
                return invalid(format!("sample {i} lies at distance {r} from the center, not {radius}"));
            }
        }
        Ok(Self { radius, points })
    }

    pub fn m(&self) -> usize {
        self.points[0].location.len()
    }

    pub fn q(&self) -> usize {
        self.points[0].value.q()
    }

    pub fn n(&self) -> usize {
        self.points[0].value.dim()
    }

    /// Index of the sample nearest to `x`; lowest index on ties.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, p) in self.points.iter().enumerate() {
            let d = crate::qspace::squared_distance(&p.location, x);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Every value multiplied by `t`.
    pub fn scaled(&self, t: f64) -> BoundarySample {
        BoundarySample {
            radius: self.radius,
            points: self
                .points
                .iter()
                .map(|p| SamplePoint {
                    location: p.location.clone(),
                    value: p.value.scaled(t),
                })
                .collect(),
        }
    }
}

/// Extension of sampled sphere data to the closed ball, built once and
/// evaluated at many queries.
#[derive(Debug, Clone)]
pub struct ConeExtension {
    samples: BoundarySample,
    tree: ConeTree,
}

impl ConeExtension {
    pub fn new(samples: BoundarySample) -> Result<Self> {
        let values: Vec<QTuple> = samples.points.iter().map(|p| p.value.clone()).collect();
        let tree = ConeTree::build(&values)?;
        Ok(Self { samples, tree })
    }

    pub fn samples(&self) -> &BoundarySample {
        &self.samples
    }

    pub fn tree(&self) -> &ConeTree {
        &self.tree
    }

    pub fn evaluate(&self, query: &[f64]) -> Result<QTuple> {
        let r = self.samples.radius;
        if query.len() != self.samples.m() {
            return invalid(format!(
                "query has {} coordinates, samples live in R^{}",
                query.len(),
                self.samples.m()
            ));
        }
        let norm = BallNorm::Euclidean.of(query);
        if norm > r * (1.0 + SPHERE_TOL) {
            return invalid(format!("query at distance {norm} lies outside the ball of radius {r}"));
        }
        let mut t = norm / r;
        if (t - 1.0).abs() <= SPHERE_TOL {
            t = 1.0;
        }
        let boundary_value = if norm == 0.0 {
            // Any boundary point works at the center: t = 0 discards it.
            &self.samples.points[0].value
        } else {
            let b: Vec<f64> = query.iter().map(|x| r * x / norm).collect();
            &self.samples.points[self.samples.nearest(&b)].value
        };
        if t == 1.0 {
            return Ok(boundary_value.canonical());
        }
        Ok(self.tree.evaluate(t, boundary_value)?.canonical())
    }
}

/// One-shot form of [`ConeExtension::evaluate`].
pub fn cone_extend(samples: &BoundarySample, query: &[f64]) -> Result<QTuple> {
    ConeExtension::new(samples.clone())?.evaluate(query)
}
