//! Stops a run halfway, writes a checkpoint, reads it back and continues.
//! The resumed run reproduces the uninterrupted one bit for bit.
//!
//! cargo run --release --example checkpoint_resume

use graphflow::flow::{
    read_checkpoint, run, write_checkpoint, BoundaryCondition, FlowState, StepControl,
};
use graphflow::monitors::Monitor;
use graphflow::scenarios::hs2_periodic;

fn main() -> graphflow::Result<()> {
    let start = hs2_periodic(0.3, 128)?;
    let monitor = Monitor::new(&start, None)?;
    let whole = run(start.clone(), &StepControl::new(1.0), 0.5, &monitor).map_err(|f| f.error)?;

    let half = run(start, &StepControl::new(0.5), 0.5, &monitor).map_err(|f| f.error)?;
    let mut bytes = Vec::new();
    write_checkpoint(&half.state, &mut bytes)?;
    println!(
        "{}",
        String::from_utf8_lossy(&bytes)
            .lines()
            .take(9)
            .collect::<Vec<_>>()
            .join("\n")
    );

    let ckpt = read_checkpoint(bytes.as_slice())?;
    let resumed = FlowState::new(
        ckpt.grid,
        ckpt.model,
        BoundaryCondition::Periodic,
        ckpt.t,
        ckpt.f,
    )?;
    let rest = run(resumed, &StepControl::new(1.0), 0.5, &monitor).map_err(|f| f.error)?;

    let identical = rest.state.f == whole.state.f;
    println!(
        "resumed at t = {}, finished at t = {}",
        ckpt.t, rest.state.t
    );
    println!("bitwise identical to the uninterrupted run: {identical}");
    assert!(identical);
    Ok(())
}
