use rayon::prelude::*;

use super::stencil::Sampler;
use super::FlowState;
use crate::error::{Error, Result};
use crate::graphgeom::velocity_kernel;
use crate::manifold::MAX_TARGET_DIM;
use crate::monitors::{Monitor, MonitorRecord};

/// Grids with at least this many points evaluate velocities in parallel.
const PARALLEL_MIN_POINTS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScheme {
    #[default]
    ForwardEuler,
    /// Classical four-stage Runge–Kutta; jets and boundary values are
    /// re-evaluated at every stage.
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Fraction of the explicit stability limit, in `(0, 0.5]`.
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub scheme: TimeScheme,
}

impl StepControl {
    pub const DEFAULT_CFL: f64 = 0.2;

    pub fn new(t_end: f64) -> Self {
        Self {
            cfl: Self::DEFAULT_CFL,
            dt_max: f64::INFINITY,
            t_end,
            scheme: TimeScheme::ForwardEuler,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(Error::Config(format!(
                "cfl must lie in (0, 0.5], got {}",
                self.cfl
            )));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::Config(format!(
                "dt_max must be positive, got {}",
                self.dt_max
            )));
        }
        if !self.t_end.is_finite() {
            return Err(Error::Config("t_end must be finite".into()));
        }
        Ok(())
    }

    fn dt_for(&self, state: &FlowState, lam: f64) -> Result<f64> {
        if !(lam.is_finite() && lam > 0.0) {
            return Err(Error::NumericalBlowup {
                index: 0,
                t: state.t,
            });
        }
        let h = state.grid.h_min();
        Ok(self
            .dt_max
            .min(self.cfl * h * h / (2.0 * state.grid.m as f64 * lam)))
    }
}

/// Counters accumulated over the steps taken so far.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub steps: u64,
    pub last_dt: f64,
    /// Largest coordinate norm of the velocity seen in any step.
    pub max_velocity: f64,
}

/// Writes `V` at every grid point into `out`; returns `max Λ(g̃⁻¹)`.
fn velocity_field(s: &Sampler<'_>, out: &mut [f64]) -> Result<f64> {
    let (m, n) = (s.grid.m, s.n);
    let point = |p: usize, v: &mut [f64]| -> Result<f64> {
        let mut value = [0.0; MAX_TARGET_DIM];
        let mut d1 = [0.0; MAX_TARGET_DIM * 2];
        let mut d2 = [0.0; MAX_TARGET_DIM * 4];
        s.fill_jet(p, &mut value, &mut d1, &mut d2)?;
        Ok(velocity_kernel(
            s.model,
            m,
            n,
            &value[..n],
            &d1[..n * m],
            &d2[..n * m * m],
            v,
        ))
    };
    if s.grid.len() >= PARALLEL_MIN_POINTS {
        out.par_chunks_mut(n)
            .enumerate()
            .map(|(p, v)| point(p, v))
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    } else {
        let mut lam: f64 = 0.0;
        for (p, v) in out.chunks_mut(n).enumerate() {
            lam = lam.max(point(p, v)?);
        }
        Ok(lam)
    }
}

/// Largest stable time step for the current state.
pub fn cfl_dt(state: &FlowState, control: &StepControl) -> Result<f64> {
    let mut scratch = vec![0.0; state.f.len()];
    let lam = velocity_field(&Sampler::of(state), &mut scratch)?;
    control.dt_for(state, lam)
}

/// Reusable stage buffers for explicit time stepping.
pub(crate) struct Stepper {
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
}

impl Stepper {
    pub fn new(len: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; len]),
            stage: vec![0.0; len],
        }
    }

    /// Evaluates the velocity at the current state; returns `max Λ(g̃⁻¹)`.
    pub fn prepare(&mut self, state: &FlowState) -> Result<f64> {
        velocity_field(&Sampler::of(state), &mut self.k[0])
    }

    /// Completes a step of size `dt` after [`Stepper::prepare`]. The state is
    /// left untouched on error.
    pub fn finish(&mut self, state: &mut FlowState, dt: f64, scheme: TimeScheme) -> Result<()> {
        let t = state.t;
        let n = state.n;
        match scheme {
            TimeScheme::ForwardEuler => {
                axpy(&mut self.stage, &state.f, dt, &self.k[0]);
            }
            TimeScheme::Rk4 => {
                for (stage, (c, src)) in [(0.5, 0), (0.5, 1), (1.0, 2)].into_iter().enumerate() {
                    axpy(&mut self.stage, &state.f, c * dt, &self.k[src]);
                    let ts = t + c * dt;
                    super::check_field(&state.grid, &state.model, n, &self.stage, ts)?;
                    let s = Sampler {
                        f: &self.stage,
                        t: ts,
                        ..Sampler::of(state)
                    };
                    let (_, tail) = self.k.split_at_mut(stage + 1);
                    velocity_field(&s, &mut tail[0])?;
                }
                let [k1, k2, k3, k4] = &self.k;
                for (i, out) in self.stage.iter_mut().enumerate() {
                    *out = state.f[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        let t_new = t + dt;
        super::check_field(&state.grid, &state.model, n, &self.stage, t_new)?;
        let vmax = self.k[0]
            .chunks(n)
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        std::mem::swap(&mut state.f, &mut self.stage);
        state.t = t_new;
        state.stats.steps += 1;
        state.stats.last_dt = dt;
        state.stats.max_velocity = state.stats.max_velocity.max(vmax);
        Ok(())
    }
}

fn axpy(out: &mut [f64], x: &[f64], a: f64, y: &[f64]) {
    for ((o, x), y) in out.iter_mut().zip(x).zip(y) {
        *o = x + a * y;
    }
}

impl FlowState {
    /// Advances the state in place by `dt`; the state is unchanged on error.
    pub fn advance(&mut self, dt: f64, scheme: TimeScheme) -> Result<()> {
        let mut stepper = Stepper::new(self.f.len());
        stepper.prepare(self)?;
        stepper.finish(self, dt, scheme)
    }

    /// Integrates up to `target` with CFL-limited steps, landing on it exactly.
    pub fn advance_to(&mut self, target: f64, control: &StepControl) -> Result<()> {
        control.validate()?;
        let mut stepper = Stepper::new(self.f.len());
        advance_to(self, target, control, &mut stepper)
    }

    /// One explicit step of size `dt`.
    pub fn step(&self, dt: f64, scheme: TimeScheme) -> Result<FlowState> {
        let mut next = self.clone();
        next.advance(dt, scheme)?;
        Ok(next)
    }
}

/// Successful result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: FlowState,
    pub records: Vec<MonitorRecord>,
}

/// A run that stopped early: the last valid state and the records emitted
/// before the failure.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub state: FlowState,
    pub records: Vec<MonitorRecord>,
}

/// Integrates from `state.t` to `control.t_end` with CFL-limited steps,
/// recording monitors at `t0 + k·monitor_every`. Steps are shortened to land
/// exactly on recording times.
pub fn run(
    state: FlowState,
    control: &StepControl,
    monitor_every: f64,
    monitor: &Monitor,
) -> std::result::Result<RunOutput, Box<RunFailure>> {
    let mut state = state;
    let mut records = Vec::new();
    let fail = |error, state, records| {
        Box::new(RunFailure {
            error,
            state,
            records,
        })
    };
    if let Err(e) = control.validate() {
        return Err(fail(e, state, records));
    }
    if !(monitor_every > 0.0 && monitor_every.is_finite()) {
        return Err(fail(
            Error::Config("monitor_every must be positive".into()),
            state,
            records,
        ));
    }
    if control.t_end < state.t {
        return Err(fail(
            Error::Config(format!("t_end {} precedes t = {}", control.t_end, state.t)),
            state,
            records,
        ));
    }
    let t0 = state.t;
    let count = ((control.t_end - t0) / monitor_every + 1e-9).floor() as u64;
    let mut stepper = Stepper::new(state.f.len());

    match monitor.record(&state) {
        Ok(r) => records.push(r),
        Err(e) => return Err(fail(e, state, records)),
    }
    for k in 1..=count {
        let target = (t0 + k as f64 * monitor_every).min(control.t_end);
        if let Err(e) = advance_to(&mut state, target, control, &mut stepper) {
            return Err(fail(e, state, records));
        }
        match monitor.record(&state) {
            Ok(r) => records.push(r),
            Err(e) => return Err(fail(e, state, records)),
        }
    }
    if let Err(e) = advance_to(&mut state, control.t_end, control, &mut stepper) {
        return Err(fail(e, state, records));
    }
    Ok(RunOutput { state, records })
}

fn advance_to(
    state: &mut FlowState,
    target: f64,
    control: &StepControl,
    stepper: &mut Stepper,
) -> Result<()> {
    while state.t < target {
        let lam = stepper.prepare(state)?;
        let dt_cfl = control.dt_for(state, lam)?;
        let remaining = target - state.t;
        let (dt, lands) = if remaining <= dt_cfl * (1.0 + 1e-9) {
            (remaining, true)
        } else if remaining < 2.0 * dt_cfl {
            (0.5 * remaining, false)
        } else {
            (dt_cfl, false)
        };
        stepper.finish(state, dt, control.scheme)?;
        if lands {
            state.t = target;
        }
    }
    Ok(())
}
