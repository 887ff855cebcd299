//! Graphical mean curvature flow of maps `f: ℝ^m → N` into model
//! negatively-curved targets.
//!
//! The crate is organised bottom-up:
//!
//! * [`manifold`]: target models (flat space, upper half-plane, Poincaré disk,
//!   products) with closed-form metric data.
//! * [`graphgeom`]: pointwise geometry of the graph from a 2-jet of `f`.
//! * [`oracles`]: closed-form solutions used as ground truth.
//! * [`flow`]: finite-difference discretisation and explicit time stepping.
//! * [`monitors`]: time series of the quantities controlled along the flow,
//!   and checks of the corresponding bounds.
//! * [`verify`]: the acceptance suites, shared by the test target and the
//!   `graphflow verify` command.
//! * [`cli`]: the `graphflow` command-line front end and its file formats.

pub mod cli;
pub mod error;
pub mod flow;
pub mod graphgeom;
pub mod linalg;
pub mod manifold;
pub mod monitors;
pub mod oracles;
pub mod sampling;
pub mod scenarios;
pub mod verify;

pub use error::{Error, Result};
pub use manifold::{ChartPoint, ManifoldModel, MetricData};
