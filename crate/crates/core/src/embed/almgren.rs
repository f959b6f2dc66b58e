//! Sorted-projection embedding of Q-tuples into Euclidean space and an
//! approximate inverse on its image.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::frame::{check_orthonormal, DirectionFrame};
use crate::error::{invalid, Error, Result};
use crate::qspace::{split_distance, QTuple};

const UNIT_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Point order by projection on `e`, ties by the points themselves.
fn projection_order(v: &QTuple, e: &[f64]) -> Vec<usize> {
    let proj: Vec<f64> = v.points().map(|p| dot(p, e)).collect();
    let mut order: Vec<usize> = (0..v.q()).collect();
    order.sort_by(|&a, &b| {
        proj[a]
            .partial_cmp(&proj[b])
            .unwrap_or(Ordering::Equal)
            .then_with(|| crate::qspace::tuple::lex_cmp(v.point(a), v.point(b)))
    });
    order
}

fn sorted_projections(v: &QTuple, e: &[f64]) -> Vec<f64> {
    projection_order(v, e).into_iter().map(|i| dot(v.point(i), e)).collect()
}

/// The Q inner products `<y_i, e>` in increasing order.
pub fn pi_e(v: &QTuple, e: &[f64]) -> Result<Vec<f64>> {
    if e.len() != v.dim() {
        return invalid(format!(
            "direction has {} coordinates, points have {}",
            e.len(),
            v.dim()
        ));
    }
    let norm = dot(e, e).sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return invalid(format!("direction is not a unit vector (norm {norm})"));
    }
    Ok(sorted_projections(v, e))
}

/// Sorted projections on every vector of an orthonormal basis, concatenated.
pub fn xi0(v: &QTuple, basis: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_orthonormal(basis, v.dim())?;
    Ok(basis.iter().flat_map(|e| sorted_projections(v, e)).collect())
}

/// A point of R^N in the image space of a frame's embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddedVector(pub Vec<f64>);

impl EmbeddedVector {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn distance(&self, other: &EmbeddedVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

fn check_frame(v: &QTuple, frame: &DirectionFrame) -> Result<()> {
    if v.dim() != frame.n() {
        return invalid(format!("tuple lives in R^{} but the frame in R^{}", v.dim(), frame.n()));
    }
    if v.q() != frame.q() {
        return invalid(format!(
            "tuple has Q={} but the frame was built for Q={}",
            v.q(),
            frame.q()
        ));
    }
    Ok(())
}

/// `K^{-1/2} (xi_1(v), ..., xi_K(v))`.
pub fn xi(v: &QTuple, frame: &DirectionFrame) -> Result<EmbeddedVector> {
    check_frame(v, frame)?;
    Ok(xi_unchecked(v, frame))
}

fn xi_unchecked(v: &QTuple, frame: &DirectionFrame) -> EmbeddedVector {
    let scale = 1.0 / (frame.k() as f64).sqrt();
    let mut out = Vec::with_capacity(frame.embedding_dim());
    for e in frame.all_vectors() {
        out.extend(sorted_projections(v, e).into_iter().map(|x| scale * x));
    }
    EmbeddedVector(out)
}

/// Half the smallest splitting distance among the projections of `v` on the
/// K·n frame vectors; infinite when every projection is single-valued.
pub fn xi_isometry_radius(v: &QTuple, frame: &DirectionFrame) -> Result<f64> {
    check_frame(v, frame)?;
    let mut best = f64::INFINITY;
    for e in frame.all_vectors() {
        let proj = QTuple::scalars(&sorted_projections(v, e))?;
        best = best.min(split_distance(&proj));
    }
    Ok(best / 2.0)
}

/// Settings for [`decode`].
#[derive(Debug, Clone)]
pub struct DecodeOptions {
    /// Cap on refinement sweeps per start.
    pub max_iter: usize,
    /// Residual below which a start is accepted immediately.
    pub tol: f64,
    /// Largest number of coordinate pairings enumerated from the first basis.
    pub max_enumeration: usize,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol: 1e-13,
            max_enumeration: 20_000,
        }
    }
}

struct Decoder<'a> {
    frame: &'a DirectionFrame,
    z: &'a [f64],
    q: usize,
    n: usize,
}

impl Decoder<'_> {
    fn residual(&self, coords: &[f64]) -> f64 {
        let v = QTuple::from_flat(self.n, coords.to_vec()).expect("finite iterate");
        xi_unchecked(&v, self.frame)
            .0
            .iter()
            .zip(self.z)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Least-squares update with the current ranking frozen. Since each basis
    /// is orthonormal, the normal equations decouple per point:
    /// `x_i = K^{-1/2} sum_{k,j} z[k, j, rank_kj(i)] e_kj`.
    fn fixed_point_step(&self, coords: &[f64]) -> Vec<f64> {
        let v = QTuple::from_flat(self.n, coords.to_vec()).expect("finite iterate");
        let scale = 1.0 / (self.frame.k() as f64).sqrt();
        let mut next = vec![0.0; coords.len()];
        for (block, e) in self.frame.all_vectors().enumerate() {
            let order = projection_order(&v, e);
            for (rank, &i) in order.iter().enumerate() {
                let target = self.z[block * self.q + rank] * scale;
                for (c, ec) in e.iter().enumerate() {
                    next[i * self.n + c] += target * ec;
                }
            }
        }
        next
    }

    /// Fixed-point sweeps then a coordinate pattern search; returns the
    /// final iterate, its residual and whether the search was still making
    /// progress when the cap hit.
    fn refine(&self, start: Vec<f64>, opts: &DecodeOptions) -> (Vec<f64>, f64, bool) {
        let mut x = start;
        let mut r = self.residual(&x);
        for _ in 0..opts.max_iter {
            if r <= opts.tol {
                return (x, r, false);
            }
            let cand = self.fixed_point_step(&x);
            let rc = self.residual(&cand);
            if rc < r {
                x = cand;
                r = rc;
            } else {
                break;
            }
        }
        if r <= opts.tol {
            return (x, r, false);
        }
        let scale = x.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
        let mut step = 0.1 * scale;
        let min_step = 1e-15 * scale;
        let mut iters = 0;
        while step > min_step {
            if iters >= opts.max_iter {
                return (x, r, true);
            }
            iters += 1;
            let mut improved = false;
            for c in 0..x.len() {
                for sign in [1.0, -1.0] {
                    let old = x[c];
                    x[c] = old + sign * step;
                    let rc = self.residual(&x);
                    if rc < r {
                        r = rc;
                        improved = true;
                        break;
                    }
                    x[c] = old;
                }
            }
            if improved {
                // A successful sweep may have moved the ranking; try a fresh
                // least-squares step from there.
                let cand = self.fixed_point_step(&x);
                let rc = self.residual(&cand);
                if rc < r {
                    x = cand;
                    r = rc;
                }
            } else {
                step *= 0.5;
            }
            if r <= opts.tol {
                break;
            }
        }
        (x, r, false)
    }
}

/// Candidate tuple from one basis: point `i` takes the `i`-th smallest
/// coordinate along every basis vector.
fn basis_candidate(z: &[f64], frame: &DirectionFrame, k: usize) -> Vec<f64> {
    let (q, n) = (frame.q(), frame.n());
    let scale = (frame.k() as f64).sqrt();
    let basis = &frame.bases()[k];
    let mut coords = vec![0.0; q * n];
    for (j, e) in basis.iter().enumerate() {
        let block = (k * n + j) * q;
        for i in 0..q {
            for c in 0..n {
                coords[i * n + c] += scale * z[block + i] * e[c];
            }
        }
    }
    coords
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    let Some(k) = (0..n.saturating_sub(1)).rev().find(|&k| p[k] < p[k + 1]) else {
        return false;
    };
    let l = (k + 1..n).rev().find(|&l| p[k] < p[l]).unwrap();
    p.swap(k, l);
    p[k + 1..].reverse();
    true
}

/// Every way of pairing the sorted coordinate lists of the first basis into
/// points, scored by residual; the best few serve as starts.
fn enumerated_seeds(dec: &Decoder<'_>, opts: &DecodeOptions, keep: usize) -> Vec<Vec<f64>> {
    let (q, n) = (dec.q, dec.n);
    let fact: usize = (1..=q).product();
    let combos = fact.checked_pow((n - 1) as u32);
    if combos.is_none_or(|c| c > opts.max_enumeration) || n == 1 {
        return Vec::new();
    }
    let scale = (dec.frame.k() as f64).sqrt();
    let basis = &dec.frame.bases()[0];
    let lists: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..q).map(|i| scale * dec.z[j * q + i]).collect())
        .collect();
    let mut perms: Vec<Vec<usize>> = vec![(0..q).collect(); n - 1];
    let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
    loop {
        let mut coords = vec![0.0; q * n];
        for i in 0..q {
            for (j, e) in basis.iter().enumerate() {
                let value = if j == 0 { lists[0][i] } else { lists[j][perms[j - 1][i]] };
                for c in 0..n {
                    coords[i * n + c] += value * e[c];
                }
            }
        }
        let r = dec.residual(&coords);
        scored.push((r, coords));
        // Odometer over the n - 1 permutations.
        let mut axis = 0;
        loop {
            if axis == n - 1 {
                scored.sort_by(|a, b| a.0.total_cmp(&b.0));
                return scored.into_iter().take(keep).map(|(_, c)| c).collect();
            }
            if next_permutation(&mut perms[axis]) {
                break;
            }
            perms[axis] = (0..q).collect();
            axis += 1;
        }
    }
}

/// Approximate inverse of [`xi`]: a tuple whose embedding is locally closest
/// to `z`. On the image of the embedding it recovers the preimage.
pub fn decode(
    z: &EmbeddedVector,
    frame: &DirectionFrame,
    hint: Option<&QTuple>,
    opts: &DecodeOptions,
) -> Result<QTuple> {
    if z.len() != frame.embedding_dim() {
        return invalid(format!(
            "embedded vector has {} coordinates, the frame produces {}",
            z.len(),
            frame.embedding_dim()
        ));
    }
    if let Some(h) = hint {
        check_frame(h, frame)?;
    }
    if z.0.iter().any(|x| !x.is_finite()) {
        return invalid("embedded vector has non-finite coordinates");
    }
    let dec = Decoder {
        frame,
        z: &z.0,
        q: frame.q(),
        n: frame.n(),
    };
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(h) = hint {
        starts.push(h.coords().to_vec());
    }
    starts.extend(enumerated_seeds(&dec, opts, 3));
    let per_basis: Vec<Vec<f64>> = (0..frame.k()).map(|k| basis_candidate(&z.0, frame, k)).collect();
    let mut mean = vec![0.0; frame.q() * frame.n()];
    for c in &per_basis {
        mean.iter_mut().zip(c).for_each(|(m, x)| *m += x / frame.k() as f64);
    }
    starts.push(mean);
    starts.extend(per_basis);

    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for s in starts {
        let (x, r, stalled) = dec.refine(s, opts);
        if best.as_ref().is_none_or(|b| r < b.1) {
            best = Some((x, r, stalled));
        }
        if r <= opts.tol {
            break;
        }
    }
    let (x, r, stalled) = best.expect("at least one start");
    let v = QTuple::from_flat(frame.n(), x)?;
    if stalled {
        return Err(Error::DecodeFailure {
            best: v,
            residual: r,
            iterations: opts.max_iter,
        });
    }
    Ok(v.canonical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::frame::{build_frame, FrameOptions};

    fn t(points: &[&[f64]]) -> QTuple {
        QTuple::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn projections_sort() {
        let v = t(&[&[-1.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(pi_e(&v, &[1.0, 0.0]).unwrap(), vec![-1.0, 1.0]);
        assert_eq!(
            pi_e(&QTuple::scalars(&[5.0, 2.0, 2.0]).unwrap(), &[1.0]).unwrap(),
            vec![2.0, 2.0, 5.0]
        );
        assert!(pi_e(&v, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn single_basis_collides_on_the_classic_pair() {
        let std = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let v = t(&[&[-1.0, 1.0], &[1.0, 0.0]]);
        let w = t(&[&[-1.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(xi0(&v, &std).unwrap(), vec![-1.0, 1.0, 0.0, 1.0]);
        assert_eq!(xi0(&w, &std).unwrap(), vec![-1.0, 1.0, 0.0, 1.0]);
        assert_ne!(v, w);
    }

    #[test]
    fn norm_identity_and_radius() {
        let frame = build_frame(2, 1, &FrameOptions::default()).unwrap();
        let v = t(&[&[3.0, 4.0]]);
        assert!((xi(&v, &frame).unwrap().norm() - 5.0).abs() < 1e-12);
        let scalar = build_frame(1, 2, &FrameOptions::default()).unwrap();
        let r = xi_isometry_radius(&QTuple::scalars(&[0.0, 10.0]).unwrap(), &scalar).unwrap();
        assert_eq!(r, 5.0);
        assert_eq!(xi_isometry_radius(&QTuple::zero(2, 1), &scalar).unwrap(), f64::INFINITY);
    }

    #[test]
    fn decode_round_trips_and_zero() {
        let frame = build_frame(2, 3, &FrameOptions::default()).unwrap();
        let v = t(&[&[0.3, -0.2], &[0.9, 0.1], &[-0.5, 0.7]]);
        let z = xi(&v, &frame).unwrap();
        let back = decode(&z, &frame, None, &DecodeOptions::default()).unwrap();
        let (d, _) = crate::qspace::dist(&back, &v, crate::qspace::MetricKind::G2).unwrap();
        assert!(d <= 1e-6, "{d}");
        let zero = EmbeddedVector(vec![0.0; frame.embedding_dim()]);
        let back = decode(&zero, &frame, None, &DecodeOptions::default()).unwrap();
        assert_eq!(back, QTuple::zero(3, 2));
    }
}
