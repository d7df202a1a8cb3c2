use crsf::graph::Graph;
use crsf::linalg::{pfaffian, rel_err};
use crsf::oracle::weighted_sum;
use crsf::sampler::Kernel;
use crsf::surface::product_formula_cylinder;
use crsf::{BundleLaplacian, CMatrix, LineConnection, Variant, C64};
use proptest::prelude::*;

/// Connected graph on `n` vertices: a random tree plus extra edges, no loops.
fn graph_strategy() -> impl Strategy<Value = (Graph, Vec<f64>)> {
    (3usize..=5).prop_flat_map(|n| {
        let parents = (1..n).map(|v| 0..v).collect::<Vec<_>>();
        let extra = prop::collection::vec((0..n, 0..n), 0..4);
        let c = prop::collection::vec(0.3f64..3.0, n - 1 + 4);
        let phases = prop::collection::vec(0.0f64..std::f64::consts::TAU, n - 1 + 4);
        (Just(n), parents, extra, c, phases).prop_map(|(n, parents, extra, c, phases)| {
            let mut g = Graph::new(n);
            for (v, &u) in parents.iter().enumerate() {
                g.add_edge(u, v + 1, c[v]).unwrap();
            }
            for (a, b) in extra {
                if a != b {
                    g.add_edge(a, b, c[g.m()]).unwrap();
                }
            }
            let phases = phases[..g.m()].to_vec();
            (g, phases)
        })
    })
}

fn unit(phases: &[f64]) -> LineConnection {
    LineConnection::new(phases.iter().map(|&t| C64::from_polar(1.0, t)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinant_is_the_crsf_sum((g, phases) in graph_strategy()) {
        let conn = unit(&phases);
        let det = BundleLaplacian::line(&g, &conn, Variant::Weighted).unwrap().det().unwrap();
        let sum = weighted_sum(&g, &conn, Variant::Weighted).unwrap();
        prop_assert!((det - sum).norm() <= 1e-9 * det.norm().max(1.0));
    }

    #[test]
    fn determinant_is_gauge_invariant(
        (g, phases) in graph_strategy(),
        psi in prop::collection::vec(0.0f64..std::f64::consts::TAU, 5),
    ) {
        let conn = unit(&phases);
        let psi: Vec<C64> = psi[..g.n()].iter().map(|&t| C64::from_polar(1.0, t)).collect();
        let moved = conn.gauge(&g, &psi).unwrap();
        let a = BundleLaplacian::line(&g, &conn, Variant::Weighted).unwrap().det().unwrap();
        let b = BundleLaplacian::line(&g, &moved, Variant::Weighted).unwrap().det().unwrap();
        prop_assert!(rel_err(a, b, 1e-12) < 1e-10);
    }

    #[test]
    fn marginals_sum_to_expected_size((g, phases) in graph_strategy()) {
        // the kernel is a projection of rank n, so a CRSF has n edges
        let conn = unit(&phases);
        let lap = BundleLaplacian::line(&g, &conn, Variant::Weighted).unwrap();
        prop_assume!(lap.det().unwrap().norm() > 1e-6);
        let k = Kernel::new(&lap).unwrap();
        let total: f64 = (0..g.m()).map(|e| k.marginal(e)).sum();
        prop_assert!((total - g.n() as f64).abs() < 1e-9);
    }

    #[test]
    fn pfaffian_squares_to_determinant(values in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 15)) {
        let mut a = CMatrix::zeros(6, 6);
        let mut it = values.into_iter();
        for i in 0..6 {
            for j in i + 1..6 {
                let (re, im) = it.next().unwrap();
                a[(i, j)] = C64::new(re, im);
                a[(j, i)] = -C64::new(re, im);
            }
        }
        let pf = pfaffian(&a).unwrap();
        prop_assert!(rel_err(pf * pf, a.det().unwrap(), 1e-12) < 1e-9);
    }

    #[test]
    fn cylinder_ratio_is_n_over_m(m in 2usize..6, n in 3usize..80) {
        let r = product_formula_cylinder(m, n).unwrap();
        prop_assert!((r.ratio_over_n - 1.0 / m as f64).abs() < 1e-9);
    }
}
