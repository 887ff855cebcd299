//! Singular values of a random contraction jet into the product of the two
//! hyperbolic models, and the values of `s = g_ℝ^m - g_N` on the adapted
//! frames: `(1-λ²)/(1+λ²)` on tangents, `-(1-λ²)/(1+λ²)` on the paired
//! normals, `-2λ/(1+λ²)` across and `-1` on pure target normals.
//!
//! cargo run --release --example svd_frames [seed]

use graphflow::graphgeom::{product_s, svd_frames};
use graphflow::sampling::random_contraction_jet;
use graphflow::ManifoldModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> graphflow::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = ManifoldModel::product(vec![
        ManifoldModel::upper_half_plane(),
        ManifoldModel::poincare_disk(),
    ]);
    let m = 2;
    let jet = random_contraction_jet(&model, m, 0.8, &mut rng);
    let metric = model.metric_at(&jet.point())?;
    let frames = svd_frames(&jet, &metric)?;
    println!("point {:?}", jet.value);
    println!("λ² = {:?}", frames.lambda2);
    for (i, e) in frames.tangent.iter().enumerate() {
        let l2 = frames.lambda2[i];
        println!(
            "s(ẽ{i}, ẽ{i}) = {:+.12}   (1-λ²)/(1+λ²) = {:+.12}",
            product_s(&metric, m, e, e),
            (1.0 - l2) / (1.0 + l2)
        );
    }
    for (a, nu) in frames.normal.iter().enumerate() {
        println!("s(ν{a}, ν{a}) = {:+.12}", product_s(&metric, m, nu, nu));
    }
    for &(i, a) in &frames.pairs {
        let l = frames.lambda2[i].sqrt();
        println!(
            "s(ẽ{i}, ν{a}) = {:+.12}   -2λ/(1+λ²) = {:+.12}",
            product_s(&metric, m, &frames.tangent[i], &frames.normal[a]),
            -2.0 * l / (1.0 + l * l)
        );
    }
    Ok(())
}
