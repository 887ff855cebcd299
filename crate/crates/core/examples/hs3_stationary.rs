//! Totally geodesic graphs do not move. Runs both stationary examples with
//! exact boundary values and reports the drift against `h²`.
//!
//! cargo run --release --example hs3_stationary

use graphflow::flow::{run, StepControl};
use graphflow::monitors::Monitor;
use graphflow::oracles::ExampleSpec;
use graphflow::scenarios::{drift, hs3_dirichlet};

fn main() -> graphflow::Result<()> {
    for spec in [
        ExampleSpec::Hs3a { x0: 0.0, c: 0.5 },
        ExampleSpec::Hs3b { c: 0.5 },
    ] {
        for points in [64, 128, 256] {
            let state = hs3_dirichlet(spec, points)?;
            let h = state.grid.h_min();
            let monitor = Monitor::new(&state, None)?;
            let out =
                run(state.clone(), &StepControl::new(1.0), 0.5, &monitor).map_err(|f| f.error)?;
            let (coord, intrinsic) = drift(&state, &out.state);
            println!(
                "{} {points:>4} points: drift {coord:.2e} (coordinates), {intrinsic:.2e} (g_N), drift/h² = {:.3}",
                spec.id(),
                coord.max(intrinsic) / (h * h)
            );
        }
    }
    Ok(())
}
