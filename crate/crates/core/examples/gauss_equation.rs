//! The Gauss equation for a surface graph in flat space: intrinsic curvature
//! from finite differences of the induced metric against the algebraic
//! expression in the second fundamental form.
//!
//! cargo run --release --example gauss_equation

use graphflow::graphgeom::{gauss_residual, JetStencil, MapJet};
use graphflow::ManifoldModel;

/// `f(x) = (x₁x₂ + x₁³/3, sin x₂)`.
fn jet(p: [f64; 2]) -> MapJet {
    let [x, y] = p;
    MapJet {
        m: 2,
        n: 2,
        value: vec![x * y + x * x * x / 3.0, y.sin()],
        d1: vec![y + x * x, x, 0.0, y.cos()],
        d2: vec![2.0 * x, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, -y.sin()],
    }
}

fn main() -> graphflow::Result<()> {
    let model = ManifoldModel::euclidean(2);
    let mut prev: Option<f64> = None;
    for k in 0..6 {
        let h = 0.1 / 2f64.powi(k);
        let r = gauss_residual(&JetStencil::from_fn([0.3, -0.7], h, jet), &model)?;
        match prev {
            Some(p) => println!(
                "h = {h:.5}  residual = {r:.3e}  order {:.2}",
                (p / r).log2()
            ),
            None => println!("h = {h:.5}  residual = {r:.3e}"),
        }
        prev = Some(r);
    }
    Ok(())
}
