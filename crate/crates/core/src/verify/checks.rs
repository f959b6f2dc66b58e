use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use super::{CheckConfig, CheckReport, Tally};
use crate::embed::{build_frame, xi, xi0, xi_isometry_radius, zeta_dual_gap, DirectionFrame, FrameOptions};
use crate::energy::{discrete_energy, Grid, GridFunction};
use crate::error::Result;
use crate::qspace::{dist, pairing_cost, split_distance, MetricKind, QTuple};
use crate::random::{random_tuple, seeded, unit_vector, QvRng};

fn pick(rng: &mut QvRng, range: [usize; 2]) -> usize {
    rng.random_range(range[0]..=range[1])
}

fn check_seed(cfg: &CheckConfig, salt: u64) -> QvRng {
    seeded(cfg.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn shuffled(rng: &mut QvRng, v: &QTuple) -> QTuple {
    let mut order: Vec<usize> = (0..v.q()).collect();
    order.shuffle(rng);
    v.permuted(&order)
}

fn metric_value(v: &QTuple, w: &QTuple, kind: MetricKind) -> f64 {
    dist(v, w, kind).map(|(d, _)| d).unwrap_or(f64::NAN)
}

/// `G_inf <= G2 <= G1 <= Q G_inf` and `G2 <= sqrt(Q) G_inf` on random pairs.
/// The worst ratio is the largest of the four left/right quotients.
pub fn check_metric_equivalence(cfg: &CheckConfig) -> CheckReport {
    check_metric_equivalence_with(cfg, &metric_value)
}

/// Same as [`check_metric_equivalence`] with the metric supplied by the caller.
pub fn check_metric_equivalence_with(
    cfg: &CheckConfig,
    metric: &(dyn Fn(&QTuple, &QTuple, MetricKind) -> f64 + Sync),
) -> CheckReport {
    let mut rng = check_seed(cfg, 1);
    let tol = cfg.tolerance("metric_equivalence");
    let mut tally = Tally::new("metric_equivalence", false);
    for _ in 0..cfg.trials {
        let (q, n) = (pick(&mut rng, cfg.q_range), pick(&mut rng, cfg.n_range));
        let v = random_tuple(&mut rng, q, n);
        let w = if rng.random_bool(0.1) {
            shuffled(&mut rng, &v)
        } else {
            random_tuple(&mut rng, q, n)
        };
        let g1 = metric(&v, &w, MetricKind::G1);
        let g2 = metric(&v, &w, MetricKind::G2);
        let gi = metric(&v, &w, MetricKind::GInf);
        let qf = q as f64;
        let slack = tol * (1.0 + g1.abs());
        let pairs = [(gi, g2), (g2, g1), (g1, qf * gi), (g2, qf.sqrt() * gi)];
        let ok = pairs.iter().all(|&(a, b)| a <= b + slack) && [g1, g2, gi].iter().all(|x| x.is_finite() && *x >= 0.0);
        let ratio = pairs
            .iter()
            .filter(|(_, b)| *b > 0.0)
            .map(|(a, b)| a / b)
            .fold(0.0, f64::max);
        tally.record(ratio, ok, || json!({"v": v, "w": w, "G1": g1, "G2": g2, "Ginf": gi}));
    }
    tally.finish()
}

/// Perturbations of `v` whose numbering moves every point by at most half the
/// splitting distance (per point, or in total for the G2 variant), including
/// the extreme case of exactly half. The numbering's cost must equal the
/// optimal cost for G1, G2 and G_inf. The worst ratio is the largest
/// relative difference.
pub fn check_splitting_lemma(cfg: &CheckConfig) -> CheckReport {
    let mut rng = check_seed(cfg, 2);
    let tol = cfg.tolerance("splitting_lemma");
    let mut tally = Tally::new("splitting_lemma", false);
    for trial in 0..cfg.trials {
        let (q, n) = (pick(&mut rng, cfg.q_range), pick(&mut rng, cfg.n_range));
        let v = random_tuple(&mut rng, q, n);
        let s = split_distance(&v);
        let half = if s.is_finite() { s / 2.0 } else { 1.0 };
        let boundary = rng.random_bool(0.25);
        let total_variant = trial % 2 == 1;
        let mut moves: Vec<Vec<f64>> = (0..q)
            .map(|_| {
                let len = if boundary && !total_variant {
                    1.0
                } else {
                    rng.random_range(0.0..=1.0)
                };
                unit_vector(&mut rng, n).into_iter().map(|c| c * len * half).collect()
            })
            .collect();
        if total_variant {
            let total: f64 = moves.iter().flatten().map(|c| c * c).sum::<f64>().sqrt();
            let target = if boundary {
                half
            } else {
                half * rng.random_range(0.0..=1.0)
            };
            if total > 0.0 {
                moves.iter_mut().flatten().for_each(|c| *c *= target / total);
            }
        }
        let points: Vec<Vec<f64>> = v
            .points()
            .zip(&moves)
            .map(|(y, d)| y.iter().zip(d).map(|(a, b)| a + b).collect())
            .collect();
        let mut order: Vec<usize> = (0..q).collect();
        order.shuffle(&mut rng);
        // w's point k is the moved point order[k]; the lemma pairs i with k
        // where order[k] = i.
        let w = QTuple::new(order.iter().map(|&i| points[i].clone()).collect()).expect("finite points");
        let mut numbering = vec![0; q];
        for (k, &i) in order.iter().enumerate() {
            numbering[i] = k;
        }
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for kind in [MetricKind::G1, MetricKind::G2, MetricKind::GInf] {
            let lemma = pairing_cost(&v, &w, &numbering, kind);
            let opt = metric_value(&v, &w, kind);
            let scale = lemma.max(opt);
            let gap = if scale > 0.0 { (lemma - opt).abs() / scale } else { 0.0 };
            worst = worst.max(gap);
            ok &= gap <= tol;
        }
        tally.record(
            worst,
            ok,
            || json!({"v": v, "w": w, "numbering": numbering, "boundary": boundary}),
        );
    }
    tally.finish()
}

fn frame_for(
    cache: &mut BTreeMap<(usize, usize), DirectionFrame>,
    seed: u64,
    n: usize,
    q: usize,
) -> Result<DirectionFrame> {
    if let Some(f) = cache.get(&(n, q)) {
        return Ok(f.clone());
    }
    let f = build_frame(n, q, &FrameOptions::with_seed(seed))?;
    cache.insert((n, q), f.clone());
    Ok(f)
}

/// The Almgren embedding is 1-Lipschitz for G2, isometric near each tuple
/// and preserves the distance to `Q[[0]]`. With `frame` given every trial
/// uses its n and Q; otherwise frames are built per random (n, Q). The worst
/// ratio is the largest `|xi(v) - xi(w)| / G2(v, w)`; `measured.alpha` is
/// the smallest.
pub fn check_xi(cfg: &CheckConfig, frame: Option<&DirectionFrame>) -> CheckReport {
    let mut rng = check_seed(cfg, 3);
    let (tol_up, tol_iso, tol_norm) = (
        cfg.tolerance("xi_upper"),
        cfg.tolerance("xi_isometry"),
        cfg.tolerance("xi_norm"),
    );
    let mut tally = Tally::new("xi", false);
    let mut cache = BTreeMap::new();
    let mut alpha = f64::INFINITY;
    let (mut iso_err, mut norm_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..cfg.trials {
        let fr = match frame {
            Some(f) => f.clone(),
            None => {
                let (q, n) = (pick(&mut rng, cfg.q_range), pick(&mut rng, cfg.n_range));
                match frame_for(&mut cache, cfg.seed, n, q) {
                    Ok(f) => f,
                    Err(e) => {
                        tally.record(f64::NAN, false, || json!({"n": n, "Q": q, "error": e.to_string()}));
                        continue;
                    }
                }
            }
        };
        let (q, n) = (fr.q(), fr.n());
        let v = random_tuple(&mut rng, q, n);
        let w = random_tuple(&mut rng, q, n);
        let (xv, xw) = (xi(&v, &fr).unwrap(), xi(&w, &fr).unwrap());
        let g2 = metric_value(&v, &w, MetricKind::G2);
        let gap = xv.distance(&xw);
        let upper_ok = gap <= g2 + tol_up * (1.0 + g2);
        let ratio = if g2 > 0.0 { gap / g2 } else { f64::NAN };
        if ratio.is_finite() {
            alpha = alpha.min(ratio);
        }

        let zero = QTuple::zero(q, n);
        let ne = (xv.norm() - metric_value(&v, &zero, MetricKind::G2)).abs();
        norm_err = norm_err.max(ne);
        let norm_ok = ne <= tol_norm * (1.0 + xv.norm());

        let radius = xi_isometry_radius(&v, &fr).unwrap().min(1.0);
        let near_points: Vec<Vec<f64>> = v
            .points()
            .map(|y| {
                let len = 0.99 * radius * rng.random_range(0.0..=1.0);
                let d = unit_vector(&mut rng, n);
                y.iter().zip(&d).map(|(a, b)| a + len * b).collect()
            })
            .collect();
        let near = shuffled(&mut rng, &QTuple::new(near_points).unwrap());
        let iso = (xv.distance(&xi(&near, &fr).unwrap()) - metric_value(&v, &near, MetricKind::G2)).abs();
        iso_err = iso_err.max(iso);
        let iso_ok = iso <= tol_iso;

        tally.record(
            ratio,
            upper_ok && norm_ok && iso_ok,
            || json!({"v": v, "w": w, "near": near, "G2": g2, "xi_gap": gap, "norm_error": ne, "isometry_error": iso}),
        );
    }
    // Two tuples with identical sorted coordinates in the standard basis.
    let a = QTuple::new(vec![vec![-1.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let b = QTuple::new(vec![vec![-1.0, 0.0], vec![1.0, 1.0]]).unwrap();
    let standard = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    if let (Ok(fr), Ok(sa), Ok(sb)) = (
        frame_for(&mut cache, cfg.seed, 2, 2),
        xi0(&a, &standard),
        xi0(&b, &standard),
    ) {
        let ratio = xi(&a, &fr).unwrap().distance(&xi(&b, &fr).unwrap()) / metric_value(&a, &b, MetricKind::G2);
        tally.measure("collision_pair_ratio", ratio);
        tally.record(
            f64::NAN,
            sa == sb && ratio > 0.0,
            || json!({"v": a, "w": b, "ratio": ratio}),
        );
    }
    tally.measure("alpha", if alpha.is_finite() { alpha } else { 1.0 });
    tally.measure("isometry_max_error", iso_err);
    tally.measure("norm_max_error", norm_err);
    tally.finish()
}

/// First-order quotients at a node: `norm` is `sqrt(sum_j |L_j|^2)` over the
/// branch differentials (operator norms), `lip` the operator norm of the
/// stacked map `u -> (L_1 u, ..., L_Q u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteDifferential {
    pub norm: f64,
    pub lip: f64,
}

fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Column `i` of branch `j` is the difference quotient along axis `i`,
/// following the optimal G2 matching to the forward neighbour (backward at
/// the far edge of the grid).
pub fn discrete_differential(f: &GridFunction, node: usize) -> Result<DiscreteDifferential> {
    let grid = f.grid();
    let (q, n, m) = (f.q(), f.n(), grid.dim());
    let v = f.value(node);
    let mut branches = vec![DMatrix::<f64>::zeros(n, m); q];
    for axis in 0..m {
        let step = [(true, 1.0), (false, -1.0)].into_iter().find_map(|(fwd, sign)| {
            grid.neighbor(node, axis, fwd)
                .filter(|&nb| grid.kind(nb).is_active())
                .map(|nb| (nb, sign))
        });
        let Some((nb, sign)) = step else { continue };
        let w = f.value(nb);
        let (_, matching) = dist(v, w, MetricKind::G2)?;
        for (j, &k) in matching.perm().iter().enumerate() {
            for c in 0..n {
                branches[j][(c, axis)] = sign * (w.point(k)[c] - v.point(j)[c]) / grid.h();
            }
        }
    }
    let norm = branches.iter().map(|b| operator_norm(b).powi(2)).sum::<f64>().sqrt();
    let mut stacked = DMatrix::<f64>::zeros(q * n, m);
    for (j, b) in branches.iter().enumerate() {
        stacked.view_mut((j * n, 0), (n, m)).copy_from(b);
    }
    Ok(DiscreteDifferential {
        norm,
        lip: operator_norm(&stacked),
    })
}

/// Grid function on a cube grid whose branches are smooth random maps, some
/// of them crossing each other.
pub fn random_grid_function(rng: &mut QvRng, m: usize, q: usize, n: usize) -> GridFunction {
    let nodes = match m {
        1 => 33,
        2 => 12,
        _ => 6,
    };
    let grid = Grid::cube(m, nodes, -1.0, 1.0).expect("valid cube");
    struct Branch {
        offset: Vec<f64>,
        linear: Vec<Vec<f64>>,
        wave: Vec<f64>,
        amplitude: f64,
        phase: f64,
    }
    let mut branches: Vec<Branch> = (0..q)
        .map(|_| Branch {
            offset: (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect(),
            linear: (0..n)
                .map(|_| (0..m).map(|_| rng.random_range(-2.0..=2.0)).collect())
                .collect(),
            wave: (0..m).map(|_| rng.random_range(-3.0..=3.0)).collect(),
            amplitude: rng.random_range(0.0..=0.5),
            phase: rng.random_range(0.0..=std::f64::consts::TAU),
        })
        .collect();
    // Mirror pairs of branches so that they cross.
    if q >= 2 && rng.random_bool(0.5) {
        for c in 0..n {
            branches[1].offset[c] = -branches[0].offset[c];
            branches[1].linear[c] = branches[0].linear[c].iter().map(|a| -a).collect();
        }
    }
    GridFunction::from_fn(grid, |x| {
        let pts = branches
            .iter()
            .map(|b| {
                let s = b.amplitude * (b.wave.iter().zip(x).map(|(k, t)| k * t).sum::<f64>() + b.phase).sin();
                (0..n)
                    .map(|c| b.offset[c] + b.linear[c].iter().zip(x).map(|(a, t)| a * t).sum::<f64>() + s)
                    .collect()
            })
            .collect();
        QTuple::new(pts).expect("finite points")
    })
    .expect("values on every node")
}

/// `lip <= |Df| <= sqrt(Q) lip` at every node of random grid functions.
/// The worst ratio is the largest `|Df| / (sqrt(Q) lip)`.
pub fn check_sqrt_q_bound(cfg: &CheckConfig) -> CheckReport {
    let mut rng = check_seed(cfg, 4);
    let tol = cfg.tolerance("sqrt_q_bound");
    let mut tally = Tally::new("sqrt_q_bound", false);
    for _ in 0..cfg.trials {
        let (q, n, m) = (
            pick(&mut rng, cfg.q_range),
            pick(&mut rng, cfg.n_range),
            pick(&mut rng, cfg.m_range),
        );
        let f = random_grid_function(&mut rng, m, q, n);
        let sq = (q as f64).sqrt();
        let mut worst: f64 = 0.0;
        let mut bad: Option<(usize, DiscreteDifferential)> = None;
        for node in f.grid().active_nodes() {
            let d = discrete_differential(&f, node).expect("compatible values");
            if d.lip > 0.0 {
                worst = worst.max(d.norm / (sq * d.lip));
            }
            if !(d.norm <= sq * d.lip + tol && d.lip <= d.norm + tol) && bad.is_none() {
                bad = Some((node, d));
            }
        }
        tally.record(worst, bad.is_none(), || {
            let (node, d) = bad.unwrap();
            json!({"m": m, "Q": q, "n": n, "node": node, "value": f.value(node), "norm": d.norm, "lip": d.lip})
        });
    }
    tally.finish()
}

fn sub_box(rng: &mut QvRng, grid: &Grid) -> (Vec<usize>, Vec<usize>) {
    let mut lo = Vec::new();
    let mut len = Vec::new();
    for &s in grid.shape() {
        let l = rng.random_range(2..=s);
        lo.push(rng.random_range(0..=s - l));
        len.push(l);
    }
    (lo, len)
}

/// On random sub-boxes V, `min over nodes y of sum_x G2(f(x), f(y))^p h^m`
/// against `diam(V)^p` times the discrete p-energy on V. Fails when the ratio
/// exceeds the `poincare_constant` tolerance; the worst ratio is the largest
/// one.
pub fn check_poincare(cfg: &CheckConfig) -> CheckReport {
    let mut rng = check_seed(cfg, 5);
    let cap = cfg.tolerance("poincare_constant");
    let mut tally = Tally::new("poincare", false);
    for _ in 0..cfg.trials {
        let (q, n, m) = (
            pick(&mut rng, cfg.q_range),
            pick(&mut rng, cfg.n_range),
            pick(&mut rng, cfg.m_range),
        );
        let p = [1.5, 2.0, 3.0][rng.random_range(0..3)];
        let f = random_grid_function(&mut rng, m, q, n);
        let grid = f.grid();
        let (lo, len) = sub_box(&mut rng, grid);
        let h = grid.h();
        let nodes: Vec<usize> = grid
            .active_nodes()
            .filter(|&i| {
                let mi = grid.multi_index(i);
                (0..m).all(|k| mi[k] >= lo[k] && mi[k] < lo[k] + len[k])
            })
            .collect();
        let vol = grid.cell_volume();
        let lhs = nodes
            .iter()
            .map(|&c| {
                nodes
                    .iter()
                    .map(|&x| metric_value(f.value(x), f.value(c), MetricKind::G2).powf(p) * vol)
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        let inside = |i: usize| nodes.binary_search(&i).is_ok();
        let energy: f64 = discrete_energy(&f, p)
            .expect("p > 1")
            .per_edge
            .iter()
            .filter(|e| inside(e.edge.a) && inside(e.edge.b))
            .map(|e| e.contribution)
            .sum();
        let diam = h * len.iter().map(|&l| ((l - 1) as f64).powi(2)).sum::<f64>().sqrt();
        let rhs = diam.powf(p) * energy;
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        tally.record(
            ratio,
            ratio <= cap,
            || json!({"m": m, "Q": q, "n": n, "p": p, "lo": lo, "len": len, "lhs": lhs, "rhs": rhs}),
        );
    }
    tally.finish()
}

/// The dictionary lower bound never exceeds G1, the upper bound is G1, and
/// for Q = 1 the two agree. The worst ratio is the smallest `lower / G1`;
/// `measured.min_ratio_Q<q>` records it per Q.
pub fn check_zeta_bounds(cfg: &CheckConfig) -> CheckReport {
    let mut rng = check_seed(cfg, 6);
    let tol = cfg.tolerance("zeta");
    let mut tally = Tally::new("zeta_bounds", true);
    let mut per_q: BTreeMap<usize, f64> = BTreeMap::new();
    for trial in 0..cfg.trials {
        let (q, n) = (pick(&mut rng, cfg.q_range), pick(&mut rng, cfg.n_range));
        let v = random_tuple(&mut rng, q, n);
        let w = if rng.random_bool(0.05) {
            shuffled(&mut rng, &v)
        } else {
            random_tuple(&mut rng, q, n)
        };
        let basepoint = vec![0.0; n];
        let gap =
            zeta_dual_gap(&v, &w, 32, &basepoint, cfg.seed.wrapping_add(trial as u64)).expect("compatible tuples");
        let g1 = metric_value(&v, &w, MetricKind::G1);
        let mut ok = gap.lower <= gap.upper + tol * (1.0 + gap.upper) && gap.upper == g1;
        if q == 1 {
            ok &= (gap.lower - gap.upper).abs() <= tol * (1.0 + gap.upper);
        }
        let ratio = if g1 > 0.0 { gap.lower / g1 } else { f64::NAN };
        if ratio.is_finite() {
            let e = per_q.entry(q).or_insert(f64::INFINITY);
            *e = e.min(ratio);
        }
        tally.record(
            ratio,
            ok,
            || json!({"v": v, "w": w, "lower": gap.lower, "upper": gap.upper, "G1": g1}),
        );
    }
    for (q, r) in per_q {
        tally.measure(&format!("min_ratio_Q{q}"), r);
    }
    tally.finish()
}

/// Every check with its own generator, in a fixed order.
pub fn run_all(cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    cfg.validate()?;
    let checks: Vec<fn(&CheckConfig) -> CheckReport> = vec![
        check_metric_equivalence,
        check_splitting_lemma,
        |c| check_xi(c, None),
        check_sqrt_q_bound,
        check_poincare,
        check_zeta_bounds,
    ];
    Ok(crate::par::map(&checks, |check| check(cfg)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CheckConfig {
        CheckConfig {
            trials: 40,
            ..CheckConfig::default()
        }
    }

    #[test]
    fn default_suite_passes_and_is_deterministic() {
        let a = run_all(&small()).unwrap();
        for r in &a {
            assert!(r.passed(), "{r:?}");
        }
        let b = run_all(&small()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn wrong_metric_is_caught() {
        let broken = |v: &QTuple, w: &QTuple, kind: MetricKind| {
            let d = metric_value(v, w, kind);
            if kind == MetricKind::G2 {
                d * d
            } else {
                d
            }
        };
        let r = check_metric_equivalence_with(&small(), &broken);
        assert!(r.failures > 0);
        assert!(!r.witnesses.is_empty() && r.witnesses.len() <= 5);
    }

    #[test]
    fn crossing_pair_differential() {
        let g = Grid::cube(1, 5, 0.5, 1.5).unwrap();
        let f = GridFunction::from_fn(g, |x| QTuple::scalars(&[x[0], -x[0]]).unwrap()).unwrap();
        let d = discrete_differential(&f, 2).unwrap();
        assert!((d.norm - 2f64.sqrt()).abs() < 1e-12);
        assert!((d.lip - 2f64.sqrt()).abs() < 1e-12);
    }
}
