//! Horizontal lines `x ↦ (x, d)` in the upper half-plane rise under the flow.
//! Integrates the reduced ODE for `d(t)` and compares it with the closed form
//! and with the mean-curvature identity `‖H‖² = 1/(1+d²)²`.
//!
//! cargo run --release --example hs1_ode

use graphflow::flow::{reduce_ode, OdeExample};
use graphflow::graphgeom::{mean_curvature, MapJet};
use graphflow::oracles::{hs1_d, hs1_h_norm2, hs1_t0_for};
use graphflow::ManifoldModel;

fn main() -> graphflow::Result<()> {
    let d0 = 1.0;
    let t0 = hs1_t0_for(d0);
    let traj = reduce_ode(OdeExample::Hs1, d0, 10.0, 1e-3)?;
    let model = ManifoldModel::upper_half_plane();

    println!(
        "{:>6} {:>14} {:>10} {:>12} {:>8}",
        "t", "d(t)", "|err|", "‖H‖²", "t‖H‖"
    );
    for k in (0..traj.t.len()).step_by(1000) {
        let (t, d) = (traj.t[k], traj.y[k]);
        let jet = MapJet::new(1, 2, vec![0.0, d], vec![1.0, 0.0], vec![0.0, 0.0])?;
        let (_, h2) = mean_curvature(&jet, &model)?;
        assert!((h2 - hs1_h_norm2(d)).abs() < 1e-12);
        println!(
            "{t:>6.1} {d:>14.10} {:>10.2e} {h2:>12.6e} {:>8.4}",
            (d - hs1_d(t, t0)).abs(),
            t * h2.sqrt()
        );
    }
    Ok(())
}
