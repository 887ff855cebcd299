//! Canonical initial states for the closed-form examples and the
//! two-dimensional disk run, shared by the verification suites, the CLI and
//! the examples.

use std::f64::consts::PI;

use crate::error::Result;
use crate::flow::{BoundaryCondition, FlowState, Grid};
use crate::manifold::ManifoldModel;
use crate::oracles::{hs2_r, ExampleSpec};

/// Amplitude of the two-dimensional disk run `f = a(sin x₁, sin x₂)`.
///
/// At `x = 0` both squared singular values are `4a² = 0.49`, so the initial
/// `inf tr(s)` is about `0.685 < m - 1` and the trace bound applies; the
/// largest squared singular value on the torus is `4a²/(1-a²)² ≈ 0.633`.
pub const DISK_SINE_AMPLITUDE: f64 = 0.35;

/// Shrinking circle `r0 (sin x, cos x)` on the periodic grid `[0, 2π)`.
pub fn hs2_periodic(r0: f64, points: usize) -> Result<FlowState> {
    let grid = Grid::line(0.0, 2.0 * PI, points, true)?;
    FlowState::from_fn(
        grid,
        ManifoldModel::poincare_disk(),
        BoundaryCondition::Periodic,
        0.0,
        |x| vec![r0 * x[0].sin(), r0 * x[0].cos()],
    )
}

/// A closed-form example sampled at time `t` on `[lo, hi)` with exact
/// boundary values.
pub fn oracle_dirichlet(
    spec: ExampleSpec,
    lo: f64,
    hi: f64,
    points: usize,
    t: f64,
) -> Result<FlowState> {
    let grid = Grid::line(lo, hi, points, false)?;
    FlowState::from_fn(
        grid,
        spec.model(),
        BoundaryCondition::DirichletOracle(spec),
        t,
        |x| spec.eval(x[0], t),
    )
}

/// Stationary example on `[-π, π)`, spacing `2π/points`.
pub fn hs3_dirichlet(spec: ExampleSpec, points: usize) -> Result<FlowState> {
    oracle_dirichlet(spec, -PI, PI, points, 0.0)
}

/// `f = a(sin x₁, sin x₂)` into the disk on the periodic square `[0, 2π)²`.
pub fn disk_sine_2d(a: f64, points: usize) -> Result<FlowState> {
    let grid = Grid::square(0.0, 2.0 * PI, points, true)?;
    FlowState::from_fn(
        grid,
        ManifoldModel::poincare_disk(),
        BoundaryCondition::Periodic,
        0.0,
        |x| vec![a * x[0].sin(), a * x[1].sin()],
    )
}

/// Largest deviation of the discrete radius `|f|` from the closed form.
pub fn hs2_radius_error(state: &FlowState, c1: f64) -> f64 {
    let r = hs2_r(state.t, c1);
    (0..state.len())
        .map(|p| (state.value(p)[0].hypot(state.value(p)[1]) - r).abs())
        .fold(0.0, f64::max)
}

/// Largest coordinate distance between the state and a closed-form example.
pub fn oracle_error(state: &FlowState, spec: &ExampleSpec) -> f64 {
    let mut err: f64 = 0.0;
    for p in 0..state.len() {
        let x = state.grid.coords(p)[0];
        let exact = spec.eval(x, state.t);
        let d = state
            .value(p)
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        err = err.max(d);
    }
    err
}

/// Largest distance between two states on the same grid, measured in the
/// coordinate norm and in `g_N` at the first state's points.
pub fn drift(a: &FlowState, b: &FlowState) -> (f64, f64) {
    let mut coord: f64 = 0.0;
    let mut intrinsic: f64 = 0.0;
    for p in 0..a.len() {
        let (u, v) = (a.value(p), b.value(p));
        let d: Vec<f64> = u.iter().zip(v).map(|(x, y)| y - x).collect();
        coord = coord.max(d.iter().map(|x| x * x).sum::<f64>().sqrt());
        intrinsic = intrinsic.max(a.model.inner(u, &d, &d).sqrt());
    }
    (coord, intrinsic)
}
