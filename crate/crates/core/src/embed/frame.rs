use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::random::{seeded, unit_vector, QvRng};

/// K orthonormal bases of R^n. The first row of each basis is its
/// distinguished direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionFrame {
    n: usize,
    #[serde(rename = "Q")]
    q: usize,
    #[serde(rename = "K")]
    k: usize,
    epsilon: f64,
    bases: Vec<Vec<Vec<f64>>>,
}

/// Knobs for [`build_frame`].
#[derive(Debug, Clone)]
pub struct FrameOptions {
    /// Fixed number of bases; `None` doubles K from 2n until validation passes.
    pub k: Option<usize>,
    pub seed: u64,
    /// Smallest empirical separation accepted in auto mode.
    pub min_epsilon: f64,
    pub max_k: usize,
    /// Random configurations used to measure separation.
    pub draws: usize,
    /// Random candidates per inserted direction in the greedy packing.
    pub candidates: usize,
}

impl Default for FrameOptions {
    fn default() -> Self {
        Self {
            k: None,
            seed: 0x5eed,
            min_epsilon: 0.05,
            max_k: 1024,
            draws: 500,
            candidates: 64,
        }
    }
}

const ORTHONORMAL_TOL: f64 = 1e-10;

pub(crate) fn check_orthonormal(basis: &[Vec<f64>], n: usize) -> Result<()> {
    if basis.len() != n || basis.iter().any(|r| r.len() != n) {
        return invalid(format!("a basis of R^{n} needs {n} rows of length {n}"));
    }
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot - want).abs() > ORTHONORMAL_TOL {
                return invalid(format!("basis is not orthonormal: <e{i}, e{j}> = {dot}"));
            }
        }
    }
    Ok(())
}

impl DirectionFrame {
    pub fn new(n: usize, q: usize, epsilon: f64, bases: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if n == 0 || q == 0 {
            return invalid("n and Q must be positive");
        }
        if bases.is_empty() {
            return invalid("a frame needs at least one basis");
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return invalid(format!("epsilon must lie in (0, 1], got {epsilon}"));
        }
        for b in &bases {
            check_orthonormal(b, n)?;
        }
        Ok(Self {
            n,
            q,
            k: bases.len(),
            epsilon,
            bases,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn bases(&self) -> &[Vec<Vec<f64>>] {
        &self.bases
    }

    /// Length of embedded vectors, Q·n·K.
    pub fn embedding_dim(&self) -> usize {
        self.q * self.n * self.k
    }

    /// Distinguished directions e_k.
    pub fn directions(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.bases.iter().map(|b| b[0].as_slice())
    }

    /// All K·n basis vectors, basis by basis.
    pub fn all_vectors(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.bases.iter().flat_map(|b| b.iter().map(Vec::as_slice))
    }
}

#[derive(Deserialize)]
struct FrameRepr {
    n: usize,
    #[serde(rename = "Q")]
    q: usize,
    #[serde(rename = "K")]
    k: usize,
    epsilon: f64,
    bases: Vec<Vec<Vec<f64>>>,
}

impl<'de> Deserialize<'de> for DirectionFrame {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = FrameRepr::deserialize(d)?;
        if r.k != r.bases.len() {
            return Err(D::Error::custom(format!(
                "field 'K' is {} but 'bases' holds {} bases",
                r.k,
                r.bases.len()
            )));
        }
        DirectionFrame::new(r.n, r.q, r.epsilon, r.bases).map_err(|e| D::Error::custom(format!("field 'bases': {e}")))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Greedy farthest-point insertion on the projective sphere: each new
/// direction maximizes its smallest angle to the chosen ones, with `e` and
/// `-e` identified.
fn pack_directions(rng: &mut QvRng, n: usize, k: usize, candidates: usize) -> Vec<Vec<f64>> {
    let mut chosen: Vec<Vec<f64>> = vec![unit_vector(rng, n)];
    while chosen.len() < k {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..candidates {
            let c = unit_vector(rng, n);
            let closeness = chosen.iter().map(|d| dot(&c, d).abs()).fold(0.0, f64::max);
            if best.as_ref().is_none_or(|(b, _)| closeness < *b) {
                best = Some((closeness, c));
            }
        }
        chosen.push(best.unwrap().1);
    }
    chosen
}

/// Orthonormal basis with `first` as its first row; the remaining rows come
/// from Gram-Schmidt on random vectors.
fn complete_basis(rng: &mut QvRng, first: &[f64]) -> Vec<Vec<f64>> {
    let n = first.len();
    let mut basis = vec![first.to_vec()];
    while basis.len() < n {
        let mut v = unit_vector(rng, n);
        // Two passes keep the result orthogonal to rounding level.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-3 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

/// min over draws of max_k min_l |<e_k, v_l>| with L = Q² unit vectors per draw.
pub fn empirical_epsilon(directions: &[Vec<f64>], n: usize, q: usize, draws: usize, rng: &mut QvRng) -> f64 {
    let l = q * q;
    let mut eps = f64::INFINITY;
    for _ in 0..draws {
        let vs: Vec<Vec<f64>> = (0..l).map(|_| unit_vector(rng, n)).collect();
        let best = directions
            .iter()
            .map(|e| vs.iter().map(|v| dot(e, v).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        eps = eps.min(best);
    }
    eps
}

fn frame_with_k(n: usize, q: usize, k: usize, opts: &FrameOptions) -> (f64, Vec<Vec<Vec<f64>>>) {
    let mut rng = seeded(opts.seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let dirs = pack_directions(&mut rng, n, k, opts.candidates);
    let mut check_rng = seeded(opts.seed.wrapping_add(1));
    let eps = empirical_epsilon(&dirs, n, q, opts.draws, &mut check_rng);
    let bases = dirs.iter().map(|d| complete_basis(&mut rng, d)).collect();
    (eps, bases)
}

/// Builds a direction frame for Q-tuples in R^n.
pub fn build_frame(n: usize, q: usize, opts: &FrameOptions) -> Result<DirectionFrame> {
    if n == 0 || q == 0 {
        return invalid("n and Q must be positive");
    }
    if n == 1 {
        return DirectionFrame::new(1, q, 1.0, vec![vec![vec![1.0]]]);
    }
    if let Some(k) = opts.k {
        if k == 0 {
            return invalid("K must be positive");
        }
        let (eps, bases) = frame_with_k(n, q, k, opts);
        if !(eps > 0.0) {
            return Err(Error::FrameConstruction(format!(
                "K = {k} directions show no separation over {} draws",
                opts.draws
            )));
        }
        return DirectionFrame::new(n, q, eps, bases);
    }
    let mut k = 2 * n;
    let mut last = 0.0;
    while k <= opts.max_k {
        let (eps, bases) = frame_with_k(n, q, k, opts);
        if eps >= opts.min_epsilon {
            return DirectionFrame::new(n, q, eps, bases);
        }
        last = eps;
        k *= 2;
    }
    Err(Error::FrameConstruction(format!(
        "separation {last:.3e} still below {} at the cap K = {}",
        opts.min_epsilon, opts.max_k
    )))
}

impl FrameOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_frame_is_trivial() {
        let f = build_frame(1, 3, &FrameOptions::default()).unwrap();
        assert_eq!(f.k(), 1);
        assert_eq!(f.epsilon(), 1.0);
        assert_eq!(f.bases(), &[vec![vec![1.0]]]);
    }

    #[test]
    fn auto_frame_is_orthonormal_and_separated() {
        let f = build_frame(3, 2, &FrameOptions::default()).unwrap();
        assert!(f.epsilon() >= 0.05);
        assert!(f.k() >= 6);
        for b in f.bases() {
            check_orthonormal(b, 3).unwrap();
        }
    }

    #[test]
    fn frame_json_round_trips_and_validates() {
        let f = build_frame(2, 2, &FrameOptions::default()).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains("\"K\""));
        let back: DirectionFrame = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        let bad = r#"{"n":2,"Q":1,"K":1,"epsilon":0.5,"bases":[[[1,0],[1,0]]]}"#;
        assert!(serde_json::from_str::<DirectionFrame>(bad).is_err());
    }

    #[test]
    fn same_seed_same_frame() {
        let a = build_frame(2, 3, &FrameOptions::with_seed(9)).unwrap();
        let b = build_frame(2, 3, &FrameOptions::with_seed(9)).unwrap();
        assert_eq!(a, b);
    }
}
