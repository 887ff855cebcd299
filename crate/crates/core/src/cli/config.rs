//! TOML run configuration.
//!
//! ```toml
//! seed = 0
//!
//! [model]
//! spec = "poincare-disk"
//!
//! [grid]
//! lo = [0.0]
//! hi = [6.283185307179586]
//! points = [256]
//! periodic = [true]
//!
//! [init]
//! kind = "oracle"
//! id = "hs2"
//! params = { r0 = 0.3 }
//!
//! [boundary]
//! kind = "periodic"
//!
//! [stepping]
//! t_end = 1.0
//! monitor_every = 0.05
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{BoundaryCondition, FlowState, Grid, StepControl, TimeScheme};
use crate::manifold::ManifoldModel;
use crate::oracles::{ExampleId, ExampleSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads for grid sweeps; all cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Seed recorded with the run. The flow itself is deterministic.
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSection,
    pub grid: GridSection,
    pub init: InitSection,
    pub boundary: BoundarySection,
    pub stepping: SteppingSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// `euclidean:<n>`, `upper-half-plane`, `poincare-disk` or `product:<a>,<b>`.
    pub spec: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub points: Vec<usize>,
    pub periodic: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitSection {
    /// A closed-form example at time `t0`.
    Oracle {
        id: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        #[serde(default)]
        t0: f64,
    },
    /// `f^a(x) = offset_a + amplitude_a sin(x_{a mod m})`.
    Sine {
        amplitude: Vec<f64>,
        offset: Vec<f64>,
    },
    /// One row of target coordinates per grid point, in storage order.
    Table { values: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Periodic,
    /// Exact values of the `init` oracle.
    Oracle,
    Extrapolate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub kind: BoundaryKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    #[default]
    Euler,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteppingSection {
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    #[serde(default)]
    pub scheme: SchemeName,
    /// Monitor interval; defaults to a twentieth of the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitor_every: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps2: Option<f64>,
}

fn default_cfl() -> f64 {
    StepControl::DEFAULT_CFL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_monitors")]
    pub monitors: String,
    #[serde(default = "default_checkpoint")]
    pub checkpoint: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            monitors: default_monitors(),
            checkpoint: default_checkpoint(),
        }
    }
}

fn default_dir() -> String {
    "out".into()
}
fn default_monitors() -> String {
    "monitors.csv".into()
}
fn default_checkpoint() -> String {
    "final.ckpt".into()
}

/// File name of the resolved configuration written next to the outputs.
pub const RESOLVED_CONFIG: &str = "resolved.toml";

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)
            .map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    /// Checks everything that does not need the initial data.
    pub fn validate(&self) -> Result<()> {
        self.model()?;
        self.grid()?;
        self.control()?;
        if let Some(every) = self.stepping.monitor_every {
            if !(every > 0.0) {
                return Err(Error::Config(format!(
                    "stepping.monitor_every must be positive, got {every}"
                )));
            }
        }
        if let Some(e) = self.stepping.eps2 {
            if !(e > 0.0) {
                return Err(Error::Config(format!(
                    "stepping.eps2 must be positive, got {e}"
                )));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if let InitSection::Oracle { id, .. } = &self.init {
            id.parse::<ExampleId>()?;
        }
        if self.boundary.kind == BoundaryKind::Oracle
            && !matches!(self.init, InitSection::Oracle { .. })
        {
            return Err(Error::Config(
                "boundary.kind = \"oracle\" needs init.kind = \"oracle\"".into(),
            ));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<ManifoldModel> {
        let model: ManifoldModel = self.model.spec.parse()?;
        Ok(match self.model.chart_margin {
            Some(m) if !(m > 0.0) => {
                return Err(Error::Config(format!(
                    "model.chart_margin must be positive, got {m}"
                )))
            }
            Some(m) => model.with_margin(m),
            None => model,
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = &self.grid;
        Grid::new(
            g.lo.clone(),
            g.hi.clone(),
            g.points.clone(),
            g.periodic.clone(),
        )
    }

    pub fn control(&self) -> Result<StepControl> {
        let s = &self.stepping;
        if !(s.t_end > 0.0) {
            return Err(Error::Config(format!(
                "stepping.t_end must be positive, got {}",
                s.t_end
            )));
        }
        let control = StepControl {
            cfl: s.cfl,
            dt_max: s.dt_max.unwrap_or(f64::INFINITY),
            t_end: s.t_end,
            scheme: match s.scheme {
                SchemeName::Euler => TimeScheme::ForwardEuler,
                SchemeName::Rk4 => TimeScheme::Rk4,
            },
        };
        control.validate()?;
        Ok(control)
    }

    /// Interval between monitor records.
    pub fn monitor_every(&self) -> f64 {
        self.stepping
            .monitor_every
            .unwrap_or((self.stepping.t_end - self.t0()) / 20.0)
    }

    pub fn t0(&self) -> f64 {
        match self.init {
            InitSection::Oracle { t0, .. } => t0,
            _ => 0.0,
        }
    }

    fn oracle(&self) -> Result<Option<ExampleSpec>> {
        match &self.init {
            InitSection::Oracle { id, params, .. } => {
                Ok(Some(ExampleSpec::from_params(id.parse()?, params)?))
            }
            _ => Ok(None),
        }
    }

    /// Builds the initial state.
    pub fn initial_state(&self) -> Result<FlowState> {
        let model = self.model()?;
        let grid = self.grid()?;
        let n = model.dim();
        let oracle = self.oracle()?;
        let bc = match self.boundary.kind {
            BoundaryKind::Periodic => BoundaryCondition::Periodic,
            BoundaryKind::Extrapolate => BoundaryCondition::LinearExtrapolation,
            BoundaryKind::Oracle => {
                BoundaryCondition::DirichletOracle(oracle.expect("checked in validate"))
            }
        };
        let t0 = self.t0();
        if t0 >= self.stepping.t_end {
            return Err(Error::Config(format!(
                "init.t0 = {t0} is not before stepping.t_end"
            )));
        }
        match &self.init {
            InitSection::Oracle { .. } => {
                let spec = oracle.expect("oracle init");
                if grid.m != 1 {
                    return Err(Error::Config("oracle initial data needs a 1-d grid".into()));
                }
                if spec.model().kind != model.kind {
                    return Err(Error::Config(format!(
                        "oracle {} maps into {}, not {model}",
                        spec.id(),
                        spec.model()
                    )));
                }
                FlowState::from_fn(grid, model, bc, t0, |x| spec.eval(x[0], t0))
            }
            InitSection::Sine { amplitude, offset } => {
                if amplitude.len() != n || offset.len() != n {
                    return Err(Error::Config(format!(
                        "init.amplitude and init.offset need {n} entries"
                    )));
                }
                let m = grid.m;
                FlowState::from_fn(grid, model, bc, t0, |x| {
                    (0..n)
                        .map(|a| offset[a] + amplitude[a] * x[a % m].sin())
                        .collect()
                })
            }
            InitSection::Table { values } => {
                if values.len() != grid.len() {
                    return Err(Error::Config(format!(
                        "init.values has {} rows, the grid has {} points",
                        values.len(),
                        grid.len()
                    )));
                }
                if let Some(r) = values.iter().position(|r| r.len() != n) {
                    return Err(Error::Config(format!(
                        "init.values row {r} needs {n} entries"
                    )));
                }
                FlowState::new(grid, model, bc, t0, values.concat())
            }
        }
    }
}
