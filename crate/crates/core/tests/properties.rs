//! Randomised invariants over the public API.

use graphflow::flow::{read_checkpoint, write_checkpoint, BoundaryCondition, FlowState, Grid};
use graphflow::graphgeom::GraphPointGeometry;
use graphflow::manifold::ManifoldModel;
use graphflow::monitors::trace_bound;
use graphflow::oracles::{hs1_d, hs2_r, lambert_w, lambert_w_exp};
use graphflow::sampling::{random_chart_point, random_contraction_jet, random_jet};
use graphflow::ChartPoint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn models() -> Vec<ManifoldModel> {
    vec![
        ManifoldModel::euclidean(2),
        ManifoldModel::upper_half_plane(),
        ManifoldModel::poincare_disk(),
        ManifoldModel::product(vec![
            ManifoldModel::upper_half_plane(),
            ManifoldModel::poincare_disk(),
        ]),
    ]
}

fn model() -> impl Strategy<Value = ManifoldModel> {
    (0..4usize).prop_map(|k| models().swap_remove(k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_is_positive_with_exact_inverse(model in model(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_chart_point(&model, &mut rng);
        let md = model.metric_at(&ChartPoint::new(y)).unwrap();
        let n = md.dim();
        prop_assert!(md.g.clone().symmetric_eigenvalues().min() > 0.0);
        let prod = &md.g * &md.g_inv;
        for a in 0..n {
            for b in 0..n {
                let id = if a == b { 1.0 } else { 0.0 };
                prop_assert!((prod[(a, b)] - id).abs() <= 1e-12);
                for c in 0..n {
                    prop_assert_eq!(md.gamma(a, b, c), md.gamma(a, c, b));
                }
            }
        }
    }

    #[test]
    fn graph_invariants(model in model(), m in 1..=3usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jet = random_jet(&model, m, &mut rng);
        let geo = GraphPointGeometry::compute(&jet, &model).unwrap();
        prop_assert!(geo.lambda2.iter().all(|&l| l >= 0.0));
        prop_assert!(geo.s_eigs.iter().all(|&s| (-1.0 - 1e-12..=1.0 + 1e-12).contains(&s)));
        prop_assert!(geo.u > 0.0 && geo.u <= 1.0);
        let det = geo.g.determinant();
        let prod: f64 = geo.lambda2.iter().map(|l| 1.0 + l).product();
        prop_assert!((det - prod).abs() <= 1e-10 * prod);
        prop_assert!(geo.h_norm2.is_finite() && geo.h_norm2 >= 0.0);
    }

    #[test]
    fn contraction_jets_have_positive_s(model in model(), m in 1..=2usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jet = random_contraction_jet(&model, m, 0.9, &mut rng);
        let geo = GraphPointGeometry::compute(&jet, &model).unwrap();
        prop_assert!(geo.min_s_eig() > 0.0);
        prop_assert!(*geo.lambda2.last().unwrap() < 0.9 + 1e-12);
    }

    #[test]
    fn trace_bound_increases_towards_its_limit(
        m in 2..=6usize,
        frac in 0.0..1.0f64,
        sigma in 0.01..4.0f64,
        t1 in 0.0..20.0f64,
        dt in 1e-3..5.0f64,
    ) {
        let mm1 = m as f64 - 1.0;
        let a = -(m as f64) + frac * (2.0 * m as f64 - 1.0);
        prop_assume!(a < mm1);
        // beyond this the gap to m - 1 is below one ulp
        prop_assume!(sigma * (t1 + dt) / 2.0 < 25.0);
        let b1 = trace_bound(t1, m, a, sigma).unwrap();
        let b2 = trace_bound(t1 + dt, m, a, sigma).unwrap();
        prop_assert!(b2 > b1 && b2 < mm1);
        prop_assert!((trace_bound(0.0, m, a, sigma).unwrap() - a).abs() <= 1e-14 * a.abs().max(1.0));
    }

    #[test]
    fn lambert_w_inverts_w_exp_w(e in -6.0..6.0f64) {
        let x = 10f64.powf(e);
        let w = lambert_w(x);
        prop_assert!((w * w.exp() - x).abs() <= 1e-12 * x.max(1.0));
        prop_assert!((lambert_w_exp(x.ln()) - w).abs() <= 1e-12 * w.abs().max(1.0));
    }

    #[test]
    fn closed_forms_are_monotone(t in 0.0..10.0f64, dt in 1e-3..1.0f64, c1 in 2.5..6.0f64) {
        prop_assert!(hs1_d(t + dt, -0.5) > hs1_d(t, -0.5));
        prop_assert!(hs2_r(t + dt, c1) < hs2_r(t, c1));
        prop_assert!(hs2_r(t, c1) > 0.0);
    }

    #[test]
    fn checkpoint_round_trips_exactly(points in 8..40usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = ManifoldModel::poincare_disk();
        let grid = Grid::line(-1.0, 2.5, points, false).unwrap();
        let f: Vec<f64> = (0..points).flat_map(|_| random_chart_point(&model, &mut rng)).collect();
        let state = FlowState::new(grid, model, BoundaryCondition::LinearExtrapolation, 0.123456789, f).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&state, &mut buf).unwrap();
        let back = read_checkpoint(buf.as_slice()).unwrap();
        prop_assert_eq!(back.f, state.f);
        prop_assert_eq!(back.t, state.t);
        prop_assert_eq!(back.grid, state.grid);
        prop_assert_eq!(back.model, state.model);
    }
}
