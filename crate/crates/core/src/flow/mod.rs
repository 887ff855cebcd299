//! Finite-difference discretisation of the nonparametric flow
//! `∂_t f^a = g̃^{ij}(∂²_{ij} f^a + Γ^a_{bc}(f) ∂_i f^b ∂_j f^c)`, with
//! `g̃ = δ + f^*g_N`, on uniform grids over boxes and tori.

mod checkpoint;
mod grid;
mod ode;
mod solver;
mod stencil;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_HEADER};
pub use grid::Grid;
pub use ode::{reduce_ode, OdeExample, Trajectory};
pub use solver::{cfl_dt, run, RunFailure, RunOutput, StepControl, StepStats, TimeScheme};
pub use stencil::spatial_jet;

use crate::error::{Error, Result};
use crate::manifold::ManifoldModel;
use crate::oracles::ExampleSpec;

/// How values outside the grid are supplied.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    /// Wrap around; all axes must be periodic.
    Periodic,
    /// Exact values from a closed-form solution at the current time (m = 1).
    DirichletOracle(ExampleSpec),
    /// Linear extrapolation of the two nearest interior values. This is a
    /// truncation of the whole-space problem and introduces boundary error.
    LinearExtrapolation,
}

/// The discrete solution at one time.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub grid: Grid,
    /// Target dimension.
    pub n: usize,
    /// Point-major samples: `f[p * n + a]`.
    pub f: Vec<f64>,
    pub t: f64,
    pub model: ManifoldModel,
    pub bc: BoundaryCondition,
    pub stats: StepStats,
}

impl FlowState {
    pub fn new(
        grid: Grid,
        model: ManifoldModel,
        bc: BoundaryCondition,
        t: f64,
        f: Vec<f64>,
    ) -> Result<Self> {
        let n = model.dim();
        if n > crate::manifold::MAX_TARGET_DIM {
            return Err(Error::Dimension(format!(
                "target dimension {n} exceeds {}",
                crate::manifold::MAX_TARGET_DIM
            )));
        }
        if f.len() != grid.len() * n {
            return Err(Error::Dimension(format!(
                "expected {} samples, got {}",
                grid.len() * n,
                f.len()
            )));
        }
        match &bc {
            BoundaryCondition::Periodic if !grid.periodic.iter().all(|&p| p) => {
                return Err(Error::Config(
                    "periodic boundary condition on a non-periodic axis".into(),
                ));
            }
            BoundaryCondition::DirichletOracle(spec) => {
                if grid.m != 1 {
                    return Err(Error::Config(
                        "oracle boundary values need a 1-d grid".into(),
                    ));
                }
                if spec.model().kind != model.kind {
                    return Err(Error::Config(format!(
                        "oracle {} lives in {}, not {}",
                        spec.id(),
                        spec.model(),
                        model
                    )));
                }
            }
            _ => {}
        }
        let state = Self {
            grid,
            n,
            f,
            t,
            model,
            bc,
            stats: StepStats::default(),
        };
        state.check(t)?;
        Ok(state)
    }

    /// Samples `init(x)` at every grid point.
    pub fn from_fn(
        grid: Grid,
        model: ManifoldModel,
        bc: BoundaryCondition,
        t: f64,
        mut init: impl FnMut(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let n = model.dim();
        let mut f = Vec::with_capacity(grid.len() * n);
        for p in 0..grid.len() {
            let x = grid.coords(p);
            let v = init(&x[..grid.m]);
            if v.len() != n {
                return Err(Error::Dimension(format!(
                    "initial data has {} components, model needs {n}",
                    v.len()
                )));
            }
            f.extend_from_slice(&v);
        }
        Self::new(grid, model, bc, t, f)
    }

    /// Value at grid point `p`.
    pub fn value(&self, p: usize) -> &[f64] {
        &self.f[p * self.n..(p + 1) * self.n]
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.len() == 0
    }

    /// Smallest chart clearance over the grid.
    pub fn clearance_min(&self) -> f64 {
        (0..self.len())
            .map(|p| self.model.clearance(self.value(p)))
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn check(&self, t: f64) -> Result<()> {
        check_field(&self.grid, &self.model, self.n, &self.f, t)
    }
}

/// Checks finiteness and the chart margin of a field; reports the worst point.
pub(crate) fn check_field(
    grid: &Grid,
    model: &ManifoldModel,
    n: usize,
    f: &[f64],
    t: f64,
) -> Result<()> {
    let len = grid.len();
    if let Some(p) = (0..len).find(|&p| f[p * n..(p + 1) * n].iter().any(|v| !v.is_finite())) {
        return Err(Error::NumericalBlowup { index: p, t });
    }
    let margin = model.chart_margin;
    let mut worst: Option<(usize, f64)> = None;
    for p in 0..len {
        let y = &f[p * n..(p + 1) * n];
        if !model.chart_contains(y, margin) {
            let c = model.clearance(y);
            if worst.is_none_or(|(_, w)| c < w) {
                worst = Some((p, c));
            }
        }
    }
    match worst {
        Some((index, _)) => Err(Error::ChartExit {
            index,
            t,
            coords: f[index * n..(index + 1) * n].to_vec(),
        }),
        None => Ok(()),
    }
}
