//! Coefficients of the polynomial whose roots are the points of a tuple.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qspace::QTuple;

/// Number of coefficients for Q-tuples in R^n: C(Q+n, n) - 1.
pub fn coefficient_count(n: usize, q: usize) -> usize {
    let mut c: u128 = 1;
    for i in 1..=n as u128 {
        c = c * (q as u128 + i) / i;
    }
    (c - 1) as usize
}

/// One coefficient, attached to the monomial `u^alpha x^(Q - |alpha|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitneyTerm {
    pub alpha: Vec<u32>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCoefficients {
    pub n: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    /// Ordered by total degree |alpha|, then lexicographically in alpha.
    pub terms: Vec<WhitneyTerm>,
}

impl WhitneyCoefficients {
    pub fn values(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.value).collect()
    }
}

/// Expands `prod_i (x - <u, x_i>)` and returns every coefficient except the
/// leading one of `x^Q`. Zero coefficients are kept, so there are always
/// `coefficient_count(n, Q)` of them.
pub fn whitney_eta(v: &QTuple) -> WhitneyCoefficients {
    let v = v.canonical();
    let n = v.dim();
    let mut poly: BTreeMap<Vec<u32>, f64> = BTreeMap::from([(vec![0; n], 1.0)]);
    for p in v.points() {
        let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (alpha, &c) in &poly {
            *next.entry(alpha.clone()).or_insert(0.0) += c;
            for (j, &xj) in p.iter().enumerate() {
                let mut beta = alpha.clone();
                beta[j] += 1;
                *next.entry(beta).or_insert(0.0) -= xj * c;
            }
        }
        poly = next;
    }
    let mut terms: Vec<WhitneyTerm> = poly
        .into_iter()
        .filter(|(alpha, _)| alpha.iter().any(|&a| a > 0))
        .map(|(alpha, value)| WhitneyTerm { alpha, value })
        .collect();
    terms.sort_by(|a, b| {
        let da: u32 = a.alpha.iter().sum();
        let db: u32 = b.alpha.iter().sum();
        da.cmp(&db).then_with(|| a.alpha.cmp(&b.alpha))
    });
    WhitneyCoefficients { n, q: v.q(), terms }
}

fn as_complex(v: &QTuple) -> Result<Vec<Complex64>> {
    if v.dim() != 2 {
        return invalid(format!(
            "complex points need n = 2 (real, imaginary), got n = {}",
            v.dim()
        ));
    }
    Ok(v.points().map(|p| Complex64::new(p[0], p[1])).collect())
}

/// Points of R^2 read as complex numbers z_i; returns c_1..c_Q with
/// `prod (x - z_i) = x^Q + c_1 x^(Q-1) + ... + c_Q`.
pub fn whitney_eta_complex(v: &QTuple) -> Result<Vec<Complex64>> {
    let roots = as_complex(&v.canonical())?;
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for z in roots {
        let mut next = coeffs.clone();
        next.push(Complex64::new(0.0, 0.0));
        for (k, &c) in coeffs.iter().enumerate() {
            next[k + 1] -= z * c;
        }
        coeffs = next;
    }
    Ok(coeffs[1..].to_vec())
}

fn horner(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn companion_eigenvalues(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let q = coeffs.len();
    if q == 0 {
        return Ok(Vec::new());
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut m = DMatrix::from_element(q, q, zero);
    for (k, &c) in coeffs.iter().enumerate() {
        m[(0, k)] = -c;
    }
    for i in 1..q {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for eps in [f64::EPSILON, 1e-14, 1e-12] {
        if let Some(schur) = nalgebra::Schur::try_new(m.clone(), eps, 10_000) {
            let (_, t) = schur.unpack();
            return Ok((0..q).map(|i| t[(i, i)]).collect());
        }
    }
    Err(Error::Numeric("companion eigenvalue iteration did not converge".into()))
}

/// Roots of the monic polynomial `x^Q + c_1 x^(Q-1) + ... + c_Q`, as points
/// of R^2, from the eigenvalues of its companion matrix followed by a few
/// Newton corrections.
pub fn whitney_eta_inverse_1d(coeffs: &[Complex64]) -> Result<QTuple> {
    let q = coeffs.len();
    if q == 0 {
        return invalid("need at least one coefficient");
    }
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return invalid("non-finite coefficient");
    }
    // Trailing zero coefficients are roots at the origin.
    let zero = Complex64::new(0.0, 0.0);
    let degree = coeffs.iter().rposition(|c| *c != zero).map_or(0, |k| k + 1);
    let mut roots = companion_eigenvalues(&coeffs[..degree])?;
    roots.resize(q, zero);
    for r in &mut roots {
        for _ in 0..8 {
            let (p, dp) = horner(coeffs, *r);
            if p.norm() == 0.0 || dp.norm() == 0.0 {
                break;
            }
            let cand = *r - p / dp;
            if horner(coeffs, cand).0.norm() < p.norm() {
                *r = cand;
            } else {
                break;
            }
        }
    }
    let coords = roots.iter().flat_map(|z| [z.re, z.im]).collect();
    Ok(QTuple::from_flat(2, coords)?.canonical())
}

/// Real-coefficient variant returning real roots (n = 1); fails when a root
/// has a non-negligible imaginary part.
pub fn whitney_eta_inverse_real(coeffs: &[f64]) -> Result<QTuple> {
    let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let roots = whitney_eta_inverse_1d(&c)?;
    let mut real = Vec::with_capacity(roots.q());
    for p in roots.points() {
        if p[1].abs() > 1e-8 * (1.0 + p[0].abs()) {
            return Err(Error::Numeric(format!("root {} + {}i is not real", p[0], p[1])));
        }
        real.push(p[0]);
    }
    QTuple::scalars(&real)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expands_quadratic() {
        let eta = whitney_eta(&QTuple::scalars(&[1.0, 2.0]).unwrap());
        assert_eq!(eta.values(), vec![-3.0, 2.0]);
        let back = whitney_eta_inverse_real(&eta.values()).unwrap();
        assert!((back.coords()[0] - 1.0).abs() < 1e-12 && (back.coords()[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn counts() {
        assert_eq!(coefficient_count(2, 2), 5);
        let v = QTuple::new(vec![vec![1.0, 2.0], vec![0.5, -1.0]]).unwrap();
        assert_eq!(whitney_eta(&v).terms.len(), 5);
        for n in 1..=3 {
            for q in 1..=4 {
                let v = QTuple::zero(q, n);
                let eta = whitney_eta(&v);
                assert_eq!(eta.terms.len(), coefficient_count(n, q));
                assert!(eta.values().iter().all(|&c| c == 0.0));
            }
        }
    }

    #[test]
    fn zero_coefficients_give_zero_roots() {
        let z = vec![Complex64::new(0.0, 0.0); 3];
        assert_eq!(whitney_eta_inverse_1d(&z).unwrap(), QTuple::zero(3, 2));
    }

    #[test]
    fn complex_round_trip() {
        let v = QTuple::new(vec![vec![1.0, 0.5], vec![-0.3, 0.2], vec![0.0, -1.0]]).unwrap();
        let c = whitney_eta_complex(&v).unwrap();
        let back = whitney_eta_inverse_1d(&c).unwrap();
        let (d, _) = crate::qspace::dist(&v, &back, crate::qspace::MetricKind::G2).unwrap();
        assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn repeated_and_clustered_roots() {
        for pts in [
            vec![1.0, 1.0, 1.0, 1.0],
            vec![0.5, 0.5, -0.5, -0.5],
            vec![1.0, 1.0001, 0.9999, 2.0],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        ] {
            let v = QTuple::new(pts.iter().map(|&x| vec![x, 0.0]).collect()).unwrap();
            let c = whitney_eta_complex(&v).unwrap();
            let back = whitney_eta_inverse_1d(&c).unwrap();
            let (d, _) = crate::qspace::dist(&v, &back, crate::qspace::MetricKind::G2).unwrap();
            assert!(d < 1e-3, "{pts:?}: {d}");
        }
    }
}
