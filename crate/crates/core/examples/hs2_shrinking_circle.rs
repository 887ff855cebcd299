//! A circle of Euclidean radius 0.3 in the Poincaré disk, parametrised over
//! the periodic interval, shrinks towards the centre. The full PDE is compared
//! with the closed-form radius on two grids to read off the spatial order.
//!
//! cargo run --release --example hs2_shrinking_circle

use graphflow::flow::{run, StepControl};
use graphflow::monitors::Monitor;
use graphflow::oracles::{hs2_c1_for, hs2_r};
use graphflow::scenarios::{hs2_periodic, hs2_radius_error};

fn main() -> graphflow::Result<()> {
    let r0 = 0.3;
    let c1 = hs2_c1_for(r0);
    let mut errors = Vec::new();
    for points in [64, 128, 256] {
        let state = hs2_periodic(r0, points)?;
        let monitor = Monitor::new(&state, None)?;
        let out = run(state, &StepControl::new(1.0), 0.25, &monitor).map_err(|f| f.error)?;
        let err = hs2_radius_error(&out.state, c1);
        println!(
            "{points:>4} points: {} steps, radius error at t = 1 {err:.3e}",
            out.state.stats.steps
        );
        if points == 256 {
            for r in &out.records {
                println!(
                    "    t = {:.2}  r = {:.6}  ‖H‖² max = {:.6}  tr(s) min = {:.6}",
                    r.t,
                    hs2_r(r.t, c1),
                    r.h_norm2_max,
                    r.tr_s_min
                );
            }
        }
        errors.push(err);
    }
    for w in errors.windows(2) {
        println!("observed order {:.3}", (w[0] / w[1]).log2());
    }
    Ok(())
}
