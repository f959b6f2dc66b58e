use proptest::prelude::*;

use qv_core::energy::{discrete_energy, dp_distance, trace, Grid, GridFunction};
use qv_core::qspace::split_distance;
use qv_core::{dist, MetricKind, QTuple};

fn tuple(q: usize, n: usize) -> impl Strategy<Value = QTuple> {
    prop::collection::vec(-3.0..3.0f64, q * n).prop_map(move |c| QTuple::from_flat(n, c).unwrap())
}

fn pair() -> impl Strategy<Value = (QTuple, QTuple)> {
    (1..=5usize, 1..=3usize).prop_flat_map(|(q, n)| (tuple(q, n), tuple(q, n)))
}

fn triple() -> impl Strategy<Value = (QTuple, QTuple, QTuple)> {
    (1..=5usize, 1..=3usize).prop_flat_map(|(q, n)| (tuple(q, n), tuple(q, n), tuple(q, n)))
}

fn reorder(v: &QTuple, keys: &[u32]) -> QTuple {
    let mut order: Vec<usize> = (0..v.q()).collect();
    order.sort_by_key(|&i| keys[i % keys.len()].wrapping_mul(i as u32 + 7));
    v.permuted(&order)
}

const KINDS: [MetricKind; 3] = [MetricKind::G1, MetricKind::G2, MetricKind::GInf];

fn grid_function(values: Vec<f64>, q: usize) -> GridFunction {
    let grid = Grid::cube(2, 4, 0.0, 1.0).unwrap();
    let per_node = values.len() / grid.len();
    let nodes = values
        .chunks(per_node)
        .map(|c| Some(QTuple::from_flat(per_node / q, c.to_vec()).unwrap()))
        .collect();
    GridFunction::new(grid, nodes).unwrap()
}

fn grid_functions(count: usize) -> impl Strategy<Value = (Vec<GridFunction>, Vec<u32>)> {
    (1..=3usize, 1..=2usize).prop_flat_map(move |(q, n)| {
        (
            prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 16 * q * n), count)
                .prop_map(move |vs| vs.into_iter().map(|v| grid_function(v, q)).collect()),
            prop::collection::vec(any::<u32>(), 16),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metrics_are_symmetric_and_vanish_on_the_diagonal((v, w) in pair()) {
        for kind in KINDS {
            let (a, _) = dist(&v, &w, kind).unwrap();
            let (b, _) = dist(&w, &v, kind).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
            prop_assert_eq!(dist(&v, &v, kind).unwrap().0, 0.0);
        }
    }

    #[test]
    fn metrics_satisfy_the_triangle_inequality((u, v, w) in triple()) {
        for kind in KINDS {
            let uv = dist(&u, &v, kind).unwrap().0;
            let vw = dist(&v, &w, kind).unwrap().0;
            let uw = dist(&u, &w, kind).unwrap().0;
            prop_assert!(uw <= uv + vw + 1e-12 * (1.0 + uw));
        }
    }

    #[test]
    fn metrics_ignore_point_order((v, w) in pair(), keys in prop::collection::vec(any::<u32>(), 5)) {
        for kind in KINDS {
            let a = dist(&v, &w, kind).unwrap().0;
            let b = dist(&reorder(&v, &keys), &w, kind).unwrap().0;
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        }
    }

    #[test]
    fn metrics_are_ordered((v, w) in pair()) {
        let g1 = dist(&v, &w, MetricKind::G1).unwrap().0;
        let g2 = dist(&v, &w, MetricKind::G2).unwrap().0;
        let gi = dist(&v, &w, MetricKind::GInf).unwrap().0;
        let q = v.q() as f64;
        prop_assert!(gi <= g2 * (1.0 + 1e-12) + 1e-15);
        prop_assert!(g2 <= g1 * (1.0 + 1e-12) + 1e-15);
        prop_assert!(g1 <= q.sqrt() * g2 * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn matching_realizes_the_distance((v, w) in pair()) {
        let (d, m) = dist(&v, &w, MetricKind::G2).unwrap();
        let direct: f64 = m
            .perm()
            .iter()
            .enumerate()
            .map(|(i, &j)| v.point(i).iter().zip(w.point(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        prop_assert!((d - direct).abs() <= 1e-12 * (1.0 + d));
    }

    #[test]
    fn split_distance_is_order_invariant(v in (2..=5usize, 1..=3usize).prop_flat_map(|(q, n)| tuple(q, n)), keys in prop::collection::vec(any::<u32>(), 5)) {
        prop_assert_eq!(split_distance(&v), split_distance(&reorder(&v, &keys)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_ignores_per_node_relabelling((fs, keys) in grid_functions(1)) {
        let f = &fs[0];
        let g = f.map_values(|v| Ok(reorder(v, &keys))).unwrap();
        let a = discrete_energy(f, 2.0).unwrap().total;
        let b = discrete_energy(&g, 2.0).unwrap().total;
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn dp_distance_is_a_semimetric((fs, _) in grid_functions(3), p in 1.0..4.0f64) {
        let (f, g, h) = (&fs[0], &fs[1], &fs[2]);
        let fg = dp_distance(f, g, p).unwrap();
        let gh = dp_distance(g, h, p).unwrap();
        let fh = dp_distance(f, h, p).unwrap();
        prop_assert_eq!(dp_distance(f, f, p).unwrap(), 0.0);
        prop_assert!((fg - dp_distance(g, f, p).unwrap()).abs() <= 1e-12 * (1.0 + fg));
        prop_assert!(fh <= fg + gh + 1e-12 * (1.0 + fh));
    }

    #[test]
    fn trace_is_continuous((fs, _) in grid_functions(2)) {
        let (f, g) = (&fs[0], &fs[1]);
        let (tf, tg) = (trace(f).unwrap(), trace(g).unwrap());
        let mut worst: f64 = 0.0;
        for (a, b) in tf.values().zip(tg.values()) {
            worst = worst.max(dist(a, b, MetricKind::G2).unwrap().0);
        }
        let mut all: f64 = 0.0;
        for i in f.grid().active_nodes() {
            all = all.max(dist(f.value(i), g.value(i), MetricKind::G2).unwrap().0);
        }
        prop_assert!(worst <= all);
        prop_assert_eq!(tf.nodes, tg.nodes);
    }

    #[test]
    fn energy_scales_homogeneously((fs, _) in grid_functions(1), t in 0.1..3.0f64, p in 1.2..3.5f64) {
        let f = &fs[0];
        let g = f.map_values(|v| Ok(v.scaled(t))).unwrap();
        let a = discrete_energy(f, p).unwrap().total;
        let b = discrete_energy(&g, p).unwrap().total;
        prop_assert!((b - t.powf(p) * a).abs() <= 1e-10 * (1.0 + b));
    }
}
