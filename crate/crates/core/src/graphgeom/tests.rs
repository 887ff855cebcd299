use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::sampling::{random_contraction_jet, random_jet};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn metric(model: &ManifoldModel, y: &[f64]) -> MetricData {
    model.metric_at(&y.to_vec().into()).unwrap()
}

/// Jet of the shrinking-circle ansatz `(r sin x, r cos x)` at `x`.
fn circle_jet(r: f64, x: f64) -> MapJet {
    let (s, c) = x.sin_cos();
    MapJet::new(
        1,
        2,
        vec![r * s, r * c],
        vec![r * c, -r * s],
        vec![-r * s, -r * c],
    )
    .unwrap()
}

/// Jet of the half-plane ansatz `(x, d)` at `x`.
fn horizontal_line_jet(d: f64, x: f64) -> MapJet {
    MapJet::new(1, 2, vec![x, d], vec![1.0, 0.0], vec![0.0, 0.0]).unwrap()
}

fn all_models() -> Vec<ManifoldModel> {
    vec![
        ManifoldModel::euclidean(2),
        ManifoldModel::euclidean(3),
        ManifoldModel::upper_half_plane(),
        ManifoldModel::poincare_disk(),
        ManifoldModel::product(vec![
            ManifoldModel::euclidean(1),
            ManifoldModel::poincare_disk(),
        ]),
    ]
}

#[test]
fn induced_metric_examples() {
    let flat = ManifoldModel::euclidean(2);
    let (g, g_inv) = induced_metric(
        &MapJet::constant(2, vec![0.0, 0.0]),
        &metric(&flat, &[0.0, 0.0]),
    )
    .unwrap();
    assert_eq!(g, DMatrix::identity(2, 2));
    assert_eq!(g_inv, DMatrix::identity(2, 2));

    let uhp = ManifoldModel::upper_half_plane();
    let jet = horizontal_line_jet(1.0, 0.7);
    let (g, _) = induced_metric(&jet, &metric(&uhp, &jet.value)).unwrap();
    assert_eq!(g[(0, 0)], 2.0);

    let r: f64 = 0.3;
    let disk = ManifoldModel::poincare_disk();
    let jet = circle_jet(r, 0.0);
    let (g, _) = induced_metric(&jet, &metric(&disk, &jet.value)).unwrap();
    let expect = ((1.0 + r * r) / (1.0 - r * r)).powi(2);
    assert!(close(g[(0, 0)], expect, 1e-14));
    assert!(close(g[(0, 0)], 1.434730, 1e-6));
}

#[test]
fn s_tensor_examples() {
    let flat = ManifoldModel::euclidean(2);
    let s = s_tensor(
        &MapJet::constant(2, vec![0.0, 0.0]),
        &metric(&flat, &[0.0, 0.0]),
    )
    .unwrap();
    assert_eq!(s.trace(), 2.0);

    let r: f64 = 0.3;
    let disk = ManifoldModel::poincare_disk();
    let jet = circle_jet(r, 1.1);
    let md = metric(&disk, &jet.value);
    let s = s_tensor(&jet, &md).unwrap();
    let expect = 1.0 - 4.0 * r * r / (1.0 - r * r).powi(2);
    assert!(close(s[(0, 0)], expect, 1e-14));
    assert!(close(s[(0, 0)], 0.565270, 1e-6));
    // s(e, e) = (1-λ²)/(1+λ²) with e = ∂_x/|∂_x|_g
    let (g, _) = induced_metric(&jet, &md).unwrap();
    let l2 = singular_values(&jet, &md).unwrap();
    assert!(close(s[(0, 0)] / g[(0, 0)], s_eigenvalues(&l2)[0], 1e-14));
}

#[test]
fn singular_value_examples() {
    let flat = ManifoldModel::euclidean(3);
    let l2 = singular_values(
        &MapJet::constant(2, vec![1.0, 2.0, 3.0]),
        &metric(&flat, &[1.0, 2.0, 3.0]),
    )
    .unwrap();
    assert_eq!(l2, vec![0.0, 0.0]);
    // f^*g = diag(0.5, 0.2)
    let jet = MapJet::new(
        2,
        2,
        vec![0.0, 0.0],
        vec![0.5f64.sqrt(), 0.0, 0.0, 0.2f64.sqrt()],
        vec![0.0; 8],
    )
    .unwrap();
    let l2 = singular_values(&jet, &metric(&ManifoldModel::euclidean(2), &[0.0, 0.0])).unwrap();
    assert!(close(l2[0], 0.2, 1e-15) && close(l2[1], 0.5, 1e-15));
}

#[test]
fn singular_value_rank_matches_rank_revealing_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for model in all_models() {
        let n = model.dim();
        for _ in 0..200 {
            let m = rng.random_range(1..=3);
            let r = rng.random_range(0..=m.min(n));
            // d1 = U V with U: n×r, V: r×m
            let u = DMatrix::<f64>::from_fn(n, r, |_, _| rng.random_range(-1.0..1.0));
            let v = DMatrix::<f64>::from_fn(r, m, |_, _| rng.random_range(-1.0..1.0));
            let d = &u * &v;
            let mut jet = random_jet(&model, m, &mut rng);
            for a in 0..n {
                for i in 0..m {
                    jet.d1[a * m + i] = d[(a, i)];
                }
            }
            let l2 = singular_values(&jet, &metric(&model, &jet.value)).unwrap();
            let counted = l2.iter().filter(|&&x| x > RANK_THRESHOLD).count();
            assert_eq!(counted, d.rank(1e-9), "{model}: {l2:?}");
        }
    }
}

#[test]
fn s_eigenvalue_examples() {
    assert_eq!(s_eigenvalues(&[0.0]), vec![1.0]);
    assert_eq!(s_eigenvalues(&[1.0]), vec![0.0]);
    assert!(close(s_eigenvalues(&[1.0 / 3.0])[0], 0.5, 1e-15));
    assert_eq!(s_eigenvalues(&[0.0, 1.0, 3.0]), vec![1.0, 0.0, -0.5]);
}

#[test]
fn projection_jacobian_examples() {
    assert_eq!(projection_jacobian(&[0.0, 0.0, 0.0]), 1.0);
    assert_eq!(projection_jacobian(&[1.0, 1.0]), 0.5);
    assert!(close(
        projection_jacobian(&[1.0 / 3.0]),
        3f64.sqrt() / 2.0,
        1e-15
    ));
}

#[test]
fn second_fundamental_form_examples() {
    // affine map into flat space
    let jet = MapJet::new(
        2,
        2,
        vec![1.0, 2.0],
        vec![0.3, 0.1, -0.4, 0.2],
        vec![0.0; 8],
    )
    .unwrap();
    let a = second_fundamental_form(&jet, &ManifoldModel::euclidean(2)).unwrap();
    assert!(a.data.iter().all(|&v| v == 0.0));

    // horizontal line at height d in the half-plane: A = (1/d) ∂_{y²}
    let d = 1.7;
    let a = second_fundamental_form(
        &horizontal_line_jet(d, 0.3),
        &ManifoldModel::upper_half_plane(),
    )
    .unwrap();
    let v = a.vector(0, 0);
    assert!(close(v[0], 0.0, 1e-15) && close(v[1], 0.0, 1e-15) && close(v[2], 1.0 / d, 1e-15));

    // shrinking circle at x = 0: A_xx = -r(1+r²)/(1-r²) ∂_{y²}
    let r: f64 = 0.3;
    let a = second_fundamental_form(&circle_jet(r, 0.0), &ManifoldModel::poincare_disk()).unwrap();
    let v = a.vector(0, 0);
    let expect = -r * (1.0 + r * r) / (1.0 - r * r);
    assert!(close(v[0], 0.0, 1e-15) && close(v[1], 0.0, 1e-15) && close(v[2], expect, 1e-14));
    assert!(close(v[2], -0.359341, 1e-6));
}

#[test]
fn mean_curvature_examples() {
    let jet = MapJet::new(1, 1, vec![0.5], vec![0.7], vec![0.0]).unwrap();
    let (h, n2) = mean_curvature(&jet, &ManifoldModel::euclidean(1)).unwrap();
    assert!(h.iter().all(|&x| x == 0.0) && n2 == 0.0);

    let (h, n2) = mean_curvature(
        &horizontal_line_jet(1.0, 0.0),
        &ManifoldModel::upper_half_plane(),
    )
    .unwrap();
    assert!(close(h[2], 0.5, 1e-15) && close(h[0], 0.0, 1e-15) && close(h[1], 0.0, 1e-15));
    assert!(close(n2, 0.25, 1e-15));

    let r: f64 = 0.3;
    for x in [0.0, 0.4, 2.0] {
        let (_, n2) = mean_curvature(&circle_jet(r, x), &ManifoldModel::poincare_disk()).unwrap();
        assert!(close(n2, 4.0 * r * r / (1.0 + r * r).powi(2), 1e-14));
        assert!(close(n2, 0.303005, 1e-6));
    }
}

#[test]
fn velocity_examples() {
    let c: f64 = 0.5;
    let uhp = ManifoldModel::upper_half_plane();
    let disk = ManifoldModel::poincare_disk();
    for x in [-2.0, 0.0, 0.3, 3.0] {
        // (x0, e^{cx}) in the half-plane
        let e = (c * x).exp();
        let jet = MapJet::new(1, 2, vec![0.4, e], vec![0.0, c * e], vec![0.0, c * c * e]).unwrap();
        let v = mcf_velocity(&jet, &uhp).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-14), "{v:?}");
        // (tanh(cx/2), 0) in the disk
        let th = (0.5 * c * x).tanh();
        let sech2 = 1.0 - th * th;
        let jet = MapJet::new(
            1,
            2,
            vec![th, 0.0],
            vec![0.5 * c * sech2, 0.0],
            vec![-0.5 * c * c * th * sech2, 0.0],
        )
        .unwrap();
        let v = mcf_velocity(&jet, &disk).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-14), "{v:?}");
    }
    let v = mcf_velocity(&horizontal_line_jet(1.0, 2.0), &uhp).unwrap();
    assert!(close(v[0], 0.0, 1e-15) && close(v[1], 0.5, 1e-15));
}

#[test]
fn s_perp_theta_examples() {
    let flat2 = ManifoldModel::euclidean(2);
    assert_eq!(
        s_perp_theta_max(&MapJet::constant(1, vec![0.0, 0.0]), &flat2, 0.1).unwrap(),
        -1.0
    );

    let flat1 = ManifoldModel::euclidean(1);
    let jet = MapJet::new(1, 1, vec![0.0], vec![(1.0f64 / 3.0).sqrt()], vec![0.0]).unwrap();
    assert!(close(
        s_perp_theta_max(&jet, &flat1, 0.3).unwrap(),
        -0.5,
        1e-14
    ));
    assert!(s_perp_theta_max(&jet, &flat1, 0.0).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for model in all_models() {
        for _ in 0..50 {
            let jet = random_contraction_jet(&model, 2, 0.9, &mut rng);
            let mut prev = f64::NEG_INFINITY;
            for eps2 in [1e-4, 1e-3, 1e-2, 0.1, 1.0] {
                let v = s_perp_theta_max(&jet, &model, eps2).unwrap();
                assert!(v >= prev - 1e-14);
                prev = v;
            }
        }
    }
}

#[test]
fn pointwise_invariants_on_random_jets() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for model in all_models() {
        for _ in 0..300 {
            let m = rng.random_range(1..=3);
            let jet = random_jet(&model, m, &mut rng);
            let geo = GraphPointGeometry::compute(&jet, &model).unwrap();
            let eig = crate::linalg::symmetric_eigenvalues(&geo.g).unwrap();
            assert!(eig[0] > 0.0);
            assert!((&geo.s - geo.s.transpose()).amax() == 0.0);
            assert!(geo.lambda2.iter().all(|&l| l >= 0.0));
            assert!(geo.lambda2.windows(2).all(|w| w[0] <= w[1]));
            assert!(geo.s_eigs.iter().all(|&s| (-1.0..=1.0).contains(&s)));
            assert!(geo.u > 0.0 && geo.u <= 1.0);
            let det_expect: f64 = geo.lambda2.iter().map(|l| 1.0 + l).product();
            assert!((geo.g.determinant() - det_expect).abs() <= 1e-10 * det_expect);
            // tr(s) two ways
            let tr_eigs: f64 = geo.s_eigs.iter().sum();
            assert!((geo.trace_s() - tr_eigs).abs() < 1e-10 * (1.0 + tr_eigs.abs()));

            // A and H are normal
            let md = geo.metric();
            let scale = 1.0 + geo.h_norm2.sqrt();
            for k in 0..m {
                let t = jet.tangent(k);
                assert!(product_inner(md, m, &geo.h, &t).abs() <= 1e-10 * scale);
                for i in 0..m {
                    for j in 0..m {
                        let aij = geo.a.vector(i, j);
                        let sc = 1.0 + product_inner(md, m, &aij, &aij).sqrt();
                        assert!(product_inner(md, m, &aij, &t).abs() <= 1e-10 * sc);
                    }
                }
            }
        }
    }
}

#[test]
fn frames_reproduce_singular_value_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for model in all_models() {
        for _ in 0..300 {
            let m = rng.random_range(1..=3);
            let jet = random_jet(&model, m, &mut rng);
            let md = metric(&model, &jet.value);
            let fr = svd_frames(&jet, &md).unwrap();
            let n = model.dim();
            assert_eq!(fr.tangent.len(), m);
            assert_eq!(fr.normal.len(), n);
            let all: Vec<&Vec<f64>> = fr.tangent.iter().chain(&fr.normal).collect();
            for (p, u) in all.iter().enumerate() {
                for (q, v) in all.iter().enumerate() {
                    let want = if p == q { 1.0 } else { 0.0 };
                    assert!((product_inner(&md, m, u, v) - want).abs() < 1e-10);
                }
            }
            for (i, e) in fr.tangent.iter().enumerate() {
                let l2 = fr.lambda2[i];
                assert!((product_s(&md, m, e, e) - (1.0 - l2) / (1.0 + l2)).abs() < 1e-10);
            }
            let r = fr.pairs.len();
            for (k, xi) in fr.normal.iter().enumerate() {
                let v = product_s(&md, m, xi, xi);
                if k < n - r {
                    assert!((v + 1.0).abs() < 1e-10);
                }
            }
            for &(i, k) in &fr.pairs {
                let l2 = fr.lambda2[i];
                let xi = &fr.normal[k];
                assert!((product_s(&md, m, xi, xi) + (1.0 - l2) / (1.0 + l2)).abs() < 1e-10);
                let mixed = product_s(&md, m, &fr.tangent[i], xi);
                assert!((mixed + 2.0 * l2.sqrt() / (1.0 + l2)).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn contraction_predicates_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for k in 0..1000 {
        let model = &all_models()[k % 5];
        let m = rng.random_range(1..=3);
        let jet = random_contraction_jet(model, m, 1.5, &mut rng);
        let delta: f64 = rng.random_range(0.01..1.0);
        let l2 = singular_values(&jet, &metric(model, &jet.value)).unwrap();
        let by_lambda = *l2.last().unwrap() <= 1.0 - delta;
        let by_s = *s_eigenvalues(&l2).last().unwrap() >= delta / (2.0 - delta);
        assert_eq!(by_lambda, by_s);
    }
}

#[test]
fn positive_s_forces_negative_s_perp() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for model in all_models() {
        for _ in 0..200 {
            let m = rng.random_range(1..=3);
            let jet = random_contraction_jet(&model, m, 0.95, &mut rng);
            let geo = GraphPointGeometry::compute(&jet, &model).unwrap();
            let eps = geo.min_s_eig();
            assert!(eps > 0.0);
            let worst = geo
                .s_perp_diagonal()
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(worst <= -eps + 1e-10);
        }
    }
}

#[test]
fn graph_velocity_projects_to_mean_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for model in all_models() {
        let n = model.dim();
        for _ in 0..1000 {
            let m = rng.random_range(1..=2);
            let jet = random_contraction_jet(&model, m, 0.95, &mut rng);
            let md = metric(&model, &jet.value);
            let v = mcf_velocity(&jet, &model).unwrap();
            let mut lifted = vec![0.0; m + n];
            lifted[m..].copy_from_slice(&v);
            let proj = normal_projection(&jet, &md, &lifted).unwrap();
            let (h, n2) = mean_curvature(&jet, &model).unwrap();
            let scale = 1.0 + n2.sqrt();
            for (p, q) in proj.iter().zip(&h) {
                assert!((p - q).abs() <= 1e-9 * scale, "{model}: {proj:?} vs {h:?}");
            }
        }
    }
}

#[test]
fn kernel_matches_matrix_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for model in all_models() {
        let n = model.dim();
        for _ in 0..200 {
            let m = rng.random_range(1..=3);
            let jet = random_jet(&model, m, &mut rng);
            let v = mcf_velocity(&jet, &model).unwrap();
            let mut out = vec![0.0; n];
            let lam = velocity_kernel(&model, m, n, &jet.value, &jet.d1, &jet.d2, &mut out);
            for (a, b) in v.iter().zip(&out) {
                assert!((a - b).abs() <= 1e-11 * (1.0 + a.abs()));
            }
            let (g, _) = induced_metric(&jet, &metric(&model, &jet.value)).unwrap();
            let gmin = crate::linalg::symmetric_eigenvalues(&g).unwrap()[0];
            assert!((lam - 1.0 / gmin).abs() < 1e-12);
        }
    }
}

#[test]
fn jet_validation() {
    assert!(MapJet::new(2, 1, vec![0.0], vec![0.0, 0.0], vec![0.0, 1.0, 2.0, 0.0]).is_err());
    assert!(MapJet::new(2, 1, vec![0.0], vec![0.0], vec![0.0; 4]).is_err());
    let jet = MapJet::constant(1, vec![0.0, 0.0]);
    assert!(matches!(
        second_fundamental_form(&jet, &ManifoldModel::upper_half_plane()),
        Err(Error::ChartViolation { .. })
    ));
}
