//! Two-dimensional flow of `f = 0.35 (sin x₁, sin x₂)` from the torus into
//! the Poincaré disk, with every monitored quantity printed along the run and
//! the checks of the controlled inequalities at the end.
//!
//! cargo run --release --example flow_monitors [points]

use graphflow::flow::{run, StepControl};
use graphflow::monitors::{check_theorem_a, write_csv, Monitor};
use graphflow::scenarios::{disk_sine_2d, DISK_SINE_AMPLITUDE};

fn main() -> graphflow::Result<()> {
    let points = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(48);
    let state = disk_sine_2d(DISK_SINE_AMPLITUDE, points)?;
    let monitor = Monitor::new(&state, None)?;
    println!(
        "ε₁ = {:.4}, ε₂ = {:.4}, inf tr(s)₀ = {:.4}, σ = {}",
        monitor.eps1, monitor.eps2, monitor.inf_tr0, monitor.sigma
    );
    let h = state.grid.h_min();
    let out = run(state, &StepControl::new(2.0), 0.2, &monitor).map_err(|f| f.error)?;
    write_csv(&out.records, std::io::stdout())?;
    let report = check_theorem_a(&out.records, &monitor.check_config(10.0 * h * h + 1e-6));
    print!("{report}");
    Ok(())
}
