//! Seeded generators shared by frame construction, solvers and checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::qspace::QTuple;

pub type QvRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> QvRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform direction on the unit sphere of R^n.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Points uniform in `[-1, 1]^n`.
pub fn uniform_tuple<R: Rng + ?Sized>(rng: &mut R, q: usize, n: usize) -> QTuple {
    let coords = (0..q * n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    QTuple::from_flat(n, coords).expect("finite coordinates")
}

/// Points drawn around a few random centers, some of them repeated exactly,
/// so that small and infinite splitting distances both occur.
pub fn clustered_tuple<R: Rng + ?Sized>(rng: &mut R, q: usize, n: usize) -> QTuple {
    let clusters = rng.random_range(1..=q);
    let centers: Vec<Vec<f64>> = (0..clusters)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    let spread = 10f64.powf(rng.random_range(-6.0..-1.0));
    let mut coords = Vec::with_capacity(q * n);
    for _ in 0..q {
        let c = &centers[rng.random_range(0..clusters)];
        let exact = rng.random_bool(0.3);
        for &x in c {
            coords.push(if exact {
                x
            } else {
                x + spread * rng.random_range(-1.0..=1.0)
            });
        }
    }
    QTuple::from_flat(n, coords).expect("finite coordinates")
}

/// Mixes uniform and clustered draws half and half.
pub fn random_tuple<R: Rng + ?Sized>(rng: &mut R, q: usize, n: usize) -> QTuple {
    if rng.random_bool(0.5) {
        uniform_tuple(rng, q, n)
    } else {
        clustered_tuple(rng, q, n)
    }
}
