//! Chart-based target manifolds.
//!
//! Every model is described in a single global chart: flat space, the upper
//! half-plane, the Poincaré disk, and Riemannian products of these. Metric,
//! inverse metric and Christoffel symbols are closed-form.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest supported chart dimension of a target manifold.
pub const MAX_TARGET_DIM: usize = 8;

/// Default clearance from the chart boundary below which points are rejected.
pub const DEFAULT_CHART_MARGIN: f64 = 1e-6;

/// Chart coordinates of a point in the target manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

impl From<Vec<f64>> for ChartPoint {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

/// Metric data at one chart point.
///
/// `christoffel` is stored flat with index `a * n * n + b * n + c` for
/// `Γ^a_{bc}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricData {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub christoffel: Vec<f64>,
    /// Upper bound on the sectional curvature (`-σ`).
    pub sec_upper_bound: f64,
}

impl MetricData {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    #[inline]
    pub fn gamma(&self, a: usize, b: usize, c: usize) -> f64 {
        let n = self.dim();
        self.christoffel[(a * n + b) * n + c]
    }

    /// Partial derivatives of the metric, `∂_c g_ab`, recovered from the
    /// Christoffel symbols via metric compatibility. Index `(c * n + a) * n + b`.
    pub fn metric_derivatives(&self) -> Vec<f64> {
        let n = self.dim();
        let mut dg = vec![0.0; n * n * n];
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let mut s = 0.0;
                    for d in 0..n {
                        s += self.g[(a, d)] * self.gamma(d, c, b)
                            + self.g[(b, d)] * self.gamma(d, c, a);
                    }
                    dg[(c * n + a) * n + b] = s;
                }
            }
        }
        dg
    }
}

/// The kind of model target manifold.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Euclidean(usize),
    UpperHalfPlane,
    PoincareDisk,
    Product(Vec<ManifoldModel>),
}

/// A target manifold together with its chart margin.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldModel {
    pub kind: ModelKind,
    pub chart_margin: f64,
}

impl ManifoldModel {
    pub fn euclidean(n: usize) -> Self {
        assert!(n >= 1, "euclidean target needs n >= 1");
        Self::from_kind(ModelKind::Euclidean(n))
    }

    pub fn upper_half_plane() -> Self {
        Self::from_kind(ModelKind::UpperHalfPlane)
    }

    pub fn poincare_disk() -> Self {
        Self::from_kind(ModelKind::PoincareDisk)
    }

    pub fn product(factors: Vec<ManifoldModel>) -> Self {
        assert!(!factors.is_empty(), "product of zero factors");
        Self::from_kind(ModelKind::Product(factors))
    }

    fn from_kind(kind: ModelKind) -> Self {
        Self {
            kind,
            chart_margin: DEFAULT_CHART_MARGIN,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.chart_margin = margin;
        self
    }

    /// Chart dimension `n`.
    pub fn dim(&self) -> usize {
        match &self.kind {
            ModelKind::Euclidean(n) => *n,
            ModelKind::UpperHalfPlane | ModelKind::PoincareDisk => 2,
            ModelKind::Product(fs) => fs.iter().map(|f| f.dim()).sum(),
        }
    }

    pub fn is_euclidean(&self) -> bool {
        match &self.kind {
            ModelKind::Euclidean(_) => true,
            ModelKind::Product(fs) => fs.iter().all(|f| f.is_euclidean()),
            _ => false,
        }
    }

    /// `σ` with `sec_N <= -σ`.
    pub fn sectional_bound(&self) -> f64 {
        match &self.kind {
            ModelKind::Euclidean(_) => 0.0,
            ModelKind::UpperHalfPlane | ModelKind::PoincareDisk => 1.0,
            ModelKind::Product(fs) => {
                // mixed planes are flat, so a product is never better than 0
                let min = fs
                    .iter()
                    .map(|f| f.sectional_bound())
                    .fold(f64::INFINITY, f64::min);
                if fs.len() > 1 {
                    min.min(0.0)
                } else {
                    min
                }
            }
        }
    }

    /// Distance-like clearance of `y` from the chart boundary; `+∞` for flat
    /// charts.
    pub fn clearance(&self, y: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::Euclidean(_) => f64::INFINITY,
            ModelKind::UpperHalfPlane => y[1],
            ModelKind::PoincareDisk => 1.0 - y[0].hypot(y[1]),
            ModelKind::Product(fs) => {
                let mut off = 0;
                let mut c = f64::INFINITY;
                for f in fs {
                    let d = f.dim();
                    c = c.min(f.clearance(&y[off..off + d]));
                    off += d;
                }
                c
            }
        }
    }

    /// True iff `y` lies in the chart with clearance at least `margin`. A zero
    /// margin still excludes the boundary itself.
    pub fn chart_contains(&self, y: &[f64], margin: f64) -> bool {
        if y.len() != self.dim() || y.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match &self.kind {
            ModelKind::Euclidean(_) => true,
            ModelKind::UpperHalfPlane => y[1] > 0.0 && y[1] >= margin,
            ModelKind::PoincareDisk => {
                let r = y[0].hypot(y[1]);
                r < 1.0 && r <= 1.0 - margin
            }
            ModelKind::Product(fs) => {
                let mut off = 0;
                fs.iter().all(|f| {
                    let d = f.dim();
                    let ok = f.chart_contains(&y[off..off + d], margin);
                    off += d;
                    ok
                })
            }
        }
    }

    fn check_chart(&self, y: &[f64]) -> Result<()> {
        if self.chart_contains(y, 0.0) {
            Ok(())
        } else {
            Err(Error::ChartViolation {
                model: self.to_string(),
                coords: y.to_vec(),
            })
        }
    }

    /// Conformal factor `φ` with `g = φ δ` for the 2-d hyperbolic models.
    fn conformal_factor(&self, y: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::UpperHalfPlane => 1.0 / (y[1] * y[1]),
            ModelKind::PoincareDisk => {
                let w = 1.0 - y[0] * y[0] - y[1] * y[1];
                4.0 / (w * w)
            }
            _ => 1.0,
        }
    }

    /// Exact metric data at `y`.
    pub fn metric_at(&self, y: &ChartPoint) -> Result<MetricData> {
        let y = &y.coords;
        if y.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "chart point of length {} for model {} of dimension {}",
                y.len(),
                self,
                self.dim()
            )));
        }
        self.check_chart(y)?;
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        let mut g_inv = DMatrix::zeros(n, n);
        let mut christoffel = vec![0.0; n * n * n];
        self.fill_metric(y, 0, n, &mut g, &mut g_inv, &mut christoffel);
        Ok(MetricData {
            g,
            g_inv,
            christoffel,
            sec_upper_bound: -self.sectional_bound(),
        })
    }

    fn fill_metric(
        &self,
        y: &[f64],
        off: usize,
        total: usize,
        g: &mut DMatrix<f64>,
        g_inv: &mut DMatrix<f64>,
        chr: &mut [f64],
    ) {
        let idx = |a: usize, b: usize, c: usize| ((off + a) * total + off + b) * total + off + c;
        match &self.kind {
            ModelKind::Euclidean(n) => {
                for i in 0..*n {
                    g[(off + i, off + i)] = 1.0;
                    g_inv[(off + i, off + i)] = 1.0;
                }
            }
            ModelKind::UpperHalfPlane => {
                let phi = self.conformal_factor(y);
                for i in 0..2 {
                    g[(off + i, off + i)] = phi;
                    g_inv[(off + i, off + i)] = y[1] * y[1];
                }
                let k = 1.0 / y[1];
                chr[idx(0, 0, 1)] = -k;
                chr[idx(0, 1, 0)] = -k;
                chr[idx(1, 0, 0)] = k;
                chr[idx(1, 1, 1)] = -k;
            }
            ModelKind::PoincareDisk => {
                let w = 1.0 - y[0] * y[0] - y[1] * y[1];
                let phi = 4.0 / (w * w);
                for i in 0..2 {
                    g[(off + i, off + i)] = phi;
                    g_inv[(off + i, off + i)] = w * w / 4.0;
                }
                let gx = 2.0 * y[0] / w;
                let gy = 2.0 * y[1] / w;
                chr[idx(0, 0, 0)] = gx;
                chr[idx(1, 0, 1)] = gx;
                chr[idx(1, 1, 0)] = gx;
                chr[idx(0, 1, 1)] = -gx;
                chr[idx(0, 0, 1)] = gy;
                chr[idx(0, 1, 0)] = gy;
                chr[idx(1, 0, 0)] = -gy;
                chr[idx(1, 1, 1)] = gy;
            }
            ModelKind::Product(fs) => {
                let mut o = off;
                for f in fs {
                    let d = f.dim();
                    f.fill_metric(&y[o - off..o - off + d], o, total, g, g_inv, chr);
                    o += d;
                }
            }
        }
    }

    /// `g_N(u, v)` at `y` without building the full metric.
    #[inline]
    pub fn inner(&self, y: &[f64], u: &[f64], v: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::Euclidean(_) => dot(u, v),
            ModelKind::UpperHalfPlane | ModelKind::PoincareDisk => {
                self.conformal_factor(y) * (u[0] * v[0] + u[1] * v[1])
            }
            ModelKind::Product(fs) => {
                let mut off = 0;
                let mut s = 0.0;
                for f in fs {
                    let d = f.dim();
                    s += f.inner(&y[off..off + d], &u[off..off + d], &v[off..off + d]);
                    off += d;
                }
                s
            }
        }
    }

    /// Writes `Γ^a_{bc} u^b v^c` into `out` without building the full metric.
    #[inline]
    pub fn christoffel_contract(&self, y: &[f64], u: &[f64], v: &[f64], out: &mut [f64]) {
        match &self.kind {
            ModelKind::Euclidean(n) => out[..*n].iter_mut().for_each(|o| *o = 0.0),
            ModelKind::UpperHalfPlane => {
                let k = 1.0 / y[1];
                out[0] = -k * (u[0] * v[1] + u[1] * v[0]);
                out[1] = k * (u[0] * v[0] - u[1] * v[1]);
            }
            ModelKind::PoincareDisk => {
                let k = 2.0 / (1.0 - y[0] * y[0] - y[1] * y[1]);
                let (x, z) = (y[0], y[1]);
                let cross = u[0] * v[1] + u[1] * v[0];
                out[0] = k * (x * u[0] * v[0] + z * cross - x * u[1] * v[1]);
                out[1] = k * (-z * u[0] * v[0] + x * cross + z * u[1] * v[1]);
            }
            ModelKind::Product(fs) => {
                let mut off = 0;
                for f in fs {
                    let d = f.dim();
                    f.christoffel_contract(
                        &y[off..off + d],
                        &u[off..off + d],
                        &v[off..off + d],
                        &mut out[off..off + d],
                    );
                    off += d;
                }
            }
        }
    }
}

#[inline]
pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Free-function form of [`ManifoldModel::metric_at`].
pub fn metric_at(model: &ManifoldModel, y: &ChartPoint) -> Result<MetricData> {
    model.metric_at(y)
}

/// Free-function form of [`ManifoldModel::sectional_bound`].
pub fn sectional_bound(model: &ManifoldModel) -> f64 {
    model.sectional_bound()
}

/// Free-function form of [`ManifoldModel::chart_contains`].
pub fn chart_contains(model: &ManifoldModel, y: &ChartPoint, margin: f64) -> bool {
    model.chart_contains(&y.coords, margin)
}

impl fmt::Display for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModelKind::Euclidean(n) => write!(f, "euclidean:{n}"),
            ModelKind::UpperHalfPlane => write!(f, "upper-half-plane"),
            ModelKind::PoincareDisk => write!(f, "poincare-disk"),
            ModelKind::Product(fs) => {
                write!(f, "product:")?;
                for (i, m) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{m}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for ManifoldModel {
    type Err = Error;

    /// Parses `euclidean:<n>`, `upper-half-plane`, `poincare-disk` or
    /// `product:<spec>,<spec>,...` (factors may not themselves be products).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("product:") {
            let factors = rest
                .split(',')
                .map(|part| {
                    let part = part.trim();
                    if part.starts_with("product") {
                        Err(Error::Config(
                            "nested product specs are not supported".into(),
                        ))
                    } else {
                        part.parse()
                    }
                })
                .collect::<Result<Vec<ManifoldModel>>>()?;
            if factors.is_empty() {
                return Err(Error::Config("empty product spec".into()));
            }
            let model = ManifoldModel::product(factors);
            if model.dim() > MAX_TARGET_DIM {
                return Err(Error::Config(format!(
                    "product dimension exceeds {MAX_TARGET_DIM}"
                )));
            }
            return Ok(model);
        }
        if let Some(n) = s.strip_prefix("euclidean:") {
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad euclidean dimension in `{s}`")))?;
            if n == 0 || n > MAX_TARGET_DIM {
                return Err(Error::Config(format!(
                    "euclidean dimension must be in 1..={MAX_TARGET_DIM}"
                )));
            }
            return Ok(ManifoldModel::euclidean(n));
        }
        match s {
            "upper-half-plane" => Ok(ManifoldModel::upper_half_plane()),
            "poincare-disk" => Ok(ManifoldModel::poincare_disk()),
            _ => Err(Error::Config(format!("unknown model spec `{s}`"))),
        }
    }
}
