//! Random in-chart points and jets for property checks.

use rand::Rng;

use crate::graphgeom::{singular_values, MapJet};
use crate::manifold::{ManifoldModel, ModelKind};

/// A random point well inside the chart of `model`.
pub fn random_chart_point<R: Rng>(model: &ManifoldModel, rng: &mut R) -> Vec<f64> {
    match &model.kind {
        ModelKind::Euclidean(n) => (0..*n).map(|_| rng.random_range(-3.0..3.0)).collect(),
        ModelKind::UpperHalfPlane => vec![rng.random_range(-3.0..3.0), rng.random_range(0.2..5.0)],
        ModelKind::PoincareDisk => {
            let r: f64 = rng.random_range(0.0..0.8);
            let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            vec![r * a.cos(), r * a.sin()]
        }
        ModelKind::Product(fs) => fs.iter().flat_map(|f| random_chart_point(f, rng)).collect(),
    }
}

/// A random jet with arbitrary (unnormalised) first derivatives.
pub fn random_jet<R: Rng>(model: &ManifoldModel, m: usize, rng: &mut R) -> MapJet {
    let n = model.dim();
    let value = random_chart_point(model, rng);
    let d1: Vec<f64> = (0..n * m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut d2 = vec![0.0; n * m * m];
    for a in 0..n {
        for i in 0..m {
            for j in i..m {
                let v = rng.random_range(-2.0..2.0);
                d2[(a * m + i) * m + j] = v;
                d2[(a * m + j) * m + i] = v;
            }
        }
    }
    MapJet {
        m,
        n,
        value,
        d1,
        d2,
    }
}

/// A random jet whose largest squared singular value is drawn uniformly from
/// `(0, max_lambda2)`, so the map is a strict contraction at the point.
pub fn random_contraction_jet<R: Rng>(
    model: &ManifoldModel,
    m: usize,
    max_lambda2: f64,
    rng: &mut R,
) -> MapJet {
    let mut jet = random_jet(model, m, rng);
    let metric = model
        .metric_at(&jet.point())
        .expect("sampled point is in chart");
    let l2 = singular_values(&jet, &metric).expect("finite jet");
    let top = *l2.last().unwrap();
    if top > 0.0 {
        let target = rng.random_range(0.0..max_lambda2);
        let scale = (target / top).sqrt();
        jet.d1.iter_mut().for_each(|v| *v *= scale);
    }
    jet
}
