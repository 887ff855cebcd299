use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::flow::{run, BoundaryCondition, Grid, StepControl};
use crate::manifold::ManifoldModel;
use crate::oracles::ExampleSpec;
use crate::scenarios;

#[test]
fn trace_bound_examples() {
    assert_eq!(trace_bound(0.0, 2, 0.5, 1.0).unwrap(), 0.5);
    let e = std::f64::consts::E;
    let expect = (3.0 * e - 2.0) / (3.0 * e - 1.0);
    assert!((trace_bound(2.0, 2, 0.5, 1.0).unwrap() - expect).abs() < 1e-15);
    assert!((expect - 0.86024).abs() < 1e-5);
    assert!((trace_bound(1e4, 3, -1.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
    assert!(trace_bound(1.0, 1, 0.0, 1.0).is_err());
    assert!(trace_bound(1.0, 2, 1.0, 1.0).is_err());
    assert!(trace_bound(1.0, 2, 0.5, 0.0).is_err());
}

#[test]
fn trace_bound_matches_the_raw_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let m = rng.random_range(2..=6usize);
        let a = rng.random_range(-(m as f64)..(m as f64 - 1.0));
        let sigma: f64 = rng.random_range(0.01..=4.0);
        let t: f64 = rng.random_range(0.0..5.0);
        let c1 = 1.0 + 1.0 / ((m as f64 - 1.0) - a);
        let e = (0.5 * sigma * t).exp();
        let raw = (c1 * (m as f64 - 1.0) * e - m as f64) / (c1 * e - 1.0);
        let v = trace_bound(t, m, a, sigma).unwrap();
        assert!((v - raw).abs() < 1e-12 * (1.0 + raw.abs()));
        assert!(v < m as f64 - 1.0);
    }
}

#[test]
fn eps2_defaults() {
    assert_eq!(default_eps2(0.5, 1), 0.25);
    assert_eq!(default_eps2(0.5, 2), 0.125);
    assert_eq!(default_eps2(3.0, 2), 3.0);
    assert_eq!(default_eps2(-0.1, 2), FALLBACK_EPS2);
}

#[test]
fn constant_map_record() {
    let grid = Grid::square(0.0, 1.0, 8, true).unwrap();
    let st = FlowState::from_fn(
        grid,
        ManifoldModel::poincare_disk(),
        BoundaryCondition::Periodic,
        0.0,
        |_| vec![0.1, 0.2],
    )
    .unwrap();
    let mon = Monitor::new(&st, None).unwrap();
    let r = mon.record(&st).unwrap();
    assert_eq!(r.min_s_eig, 1.0);
    assert_eq!(r.tr_s_min, 2.0);
    assert_eq!(r.h_norm2_max, 0.0);
    assert_eq!(r.u_min, 1.0);
    assert!((r.s_perp_theta_max + 1.0).abs() < 1e-15);
    assert_eq!(r.decay_k2, 0.0);
    assert_eq!(r.tr_s_bound, None);
    assert!((r.chart_clearance_min - (1.0 - 0.1f64.hypot(0.2))).abs() < 1e-15);
}

#[test]
fn circle_record() {
    let st = scenarios::hs2_periodic(0.3, 256).unwrap();
    let mon = Monitor::new(&st, None).unwrap();
    let r = mon.record(&st).unwrap();
    assert!((r.h_norm2_max - 0.303005).abs() < 1e-3);
    // tr(s) = g^{11} s₁₁ = 0.565270 / 1.434730 for a one-dimensional domain
    assert!((r.tr_s_min - 0.393989).abs() < 1e-3);
    assert!((mon.eps1 - r.min_s_eig).abs() < 1e-15);
    assert_eq!(mon.eps2, default_eps2(mon.eps1, 1));
    assert!(r.tr_s_bound.is_none());
    let flat = Monitor::new(&scenarios::hs2_periodic(0.3, 16).unwrap(), Some(0.01)).unwrap();
    assert_eq!(flat.eps2, 0.01);
    assert!(Monitor::new(&st, Some(-1.0)).is_err());
}

#[test]
fn record_matches_pointwise_recomputation() {
    let st = scenarios::disk_sine_2d(0.35, 16).unwrap();
    let mon = Monitor::new(&st, None).unwrap();
    let r = mon.record(&st).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let p = rng.random_range(0..st.len());
        let idx = st.grid.multi(p);
        let jet = crate::flow::spatial_jet(&st, &idx[..2]).unwrap();
        let geo = GraphPointGeometry::compute(&jet, &st.model).unwrap();
        assert!(geo.min_s_eig() >= r.min_s_eig);
        assert!(geo.trace_s() >= r.tr_s_min);
        assert!(geo.h_norm2 <= r.h_norm2_max);
        assert!(geo.u >= r.u_min);
        assert!(geo.s_perp_theta_max(mon.eps2).unwrap() <= r.s_perp_theta_max);
    }
    // the extremes are attained somewhere on the grid
    let all: Vec<f64> = (0..st.len())
        .map(|p| {
            let idx = st.grid.multi(p);
            let jet = crate::flow::spatial_jet(&st, &idx[..2]).unwrap();
            GraphPointGeometry::compute(&jet, &st.model)
                .unwrap()
                .trace_s()
        })
        .collect();
    assert_eq!(
        all.iter().cloned().fold(f64::INFINITY, f64::min),
        r.tr_s_min
    );
    assert!(mon.bound_applies());
    assert_eq!(r.tr_s_bound, Some(mon.inf_tr0));
}

#[test]
fn covariant_derivatives_vanish_on_affine_and_geodesic_maps() {
    let grid = Grid::square(-1.0, 1.0, 12, false).unwrap();
    let st = FlowState::from_fn(
        grid,
        ManifoldModel::euclidean(2),
        BoundaryCondition::LinearExtrapolation,
        0.0,
        |x| vec![0.3 * x[0] - 0.1 * x[1], 0.2 * x[1] + 1.0],
    )
    .unwrap();
    assert!(covariant_derivative_sup(&st, 2).unwrap() < 1e-20);
    assert!(covariant_derivative_sup(&st, 3).unwrap() < 1e-20);
    assert!(covariant_derivative_sup(&st, 4).is_err());

    for spec in [
        ExampleSpec::Hs3a { x0: 0.0, c: 0.5 },
        ExampleSpec::Hs3b { c: 0.5 },
    ] {
        let st = scenarios::hs3_dirichlet(spec, 256).unwrap();
        let h = st.grid.h_min();
        assert!(covariant_derivative_sup(&st, 2).unwrap() <= 10.0 * h * h);
        assert!(covariant_derivative_sup(&st, 3).unwrap() <= 10.0 * h * h);
    }
}

#[test]
fn hessian_norm_on_the_circle() {
    // g is constant along the circle, so Γ(g) = 0, A₁₁ = (0, ∇df) and
    // ‖∇df‖² = (g^{11})² |A₁₁|² = ‖H‖²
    let st = scenarios::hs2_periodic(0.3, 512).unwrap();
    let k2 = covariant_derivative_sup(&st, 2).unwrap();
    let expect = crate::oracles::hs2_h_norm2(0.3);
    assert!((k2 - expect).abs() < 1e-3 * expect, "{k2} vs {expect}");
    let k3 = covariant_derivative_sup(&st, 3).unwrap();
    let coarse = covariant_derivative_sup(&scenarios::hs2_periodic(0.3, 256).unwrap(), 3).unwrap();
    println!("k3 = {k3}, coarse = {coarse}");
    assert!((k3 - coarse).abs() < 1e-3 * k3);
}

fn stationary_records() -> (Vec<MonitorRecord>, Monitor, f64) {
    let st = scenarios::hs3_dirichlet(ExampleSpec::Hs3b { c: 0.5 }, 64).unwrap();
    let h = st.grid.h_min();
    let mon = Monitor::new(&st, None).unwrap();
    let out = run(st, &StepControl::new(1.5), 0.1, &mon).unwrap();
    (out.records, mon, h)
}

#[test]
fn monitored_inequality_checks() {
    let (records, mon, h) = stationary_records();
    let cfg = mon.check_config(10.0 * h * h + 1e-6);
    let report = check_theorem_a(&records, &cfg);
    assert!(report.passed(), "{report}");

    let mut bad = records.clone();
    bad[5].tr_s_min -= 1.0;
    let report = check_theorem_a(&bad, &cfg);
    assert!(!report.passed());
    let ii = report.item("ii").unwrap();
    assert!(!ii.passed());
    assert_eq!(ii.violations[0].t, bad[5].t);
    assert!(report.item("i").unwrap().passed());

    let mut bad = records.clone();
    bad[3].h_norm2_max = f64::NAN;
    assert!(!check_theorem_a(&bad, &cfg).item("iii").unwrap().passed());

    let mut bad = records.clone();
    for (k, r) in bad.iter_mut().enumerate() {
        r.decay_k2 = k as f64;
    }
    assert!(!check_theorem_a(&bad, &cfg).item("iv").unwrap().passed());

    let mut bad = records;
    bad[2].min_s_eig -= 0.5;
    assert!(!check_theorem_a(&bad, &cfg).item("i").unwrap().passed());
    assert!(!check_theorem_a(&[], &cfg).passed());
}

#[test]
fn csv_layout() {
    let (records, ..) = stationary_records();
    let mut buf = Vec::new();
    write_csv(&records[..2], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,min_s_eig,tr_s_min,tr_s_bound,H_norm2_max,u_min,decay_k2,decay_k3,s_perp_theta_max,chart_clearance_min"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 10);
    assert_eq!(row[0], "0");
    assert_eq!(row[3], "");
    assert_eq!(row[1].parse::<f64>().unwrap(), records[0].min_s_eig);
    assert_eq!(text.lines().count(), 3);
}
