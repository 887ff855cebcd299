//! Time series of the quantities controlled along the flow, and checks of the
//! corresponding bounds.
//!
//! Each [`MonitorRecord`] is a grid sweep of one state. Norms of `∇^k df` use
//! the induced metric `g` on domain indices and `g_N` on the target index.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::FlowState;
use crate::graphgeom::{induced_christoffel, induced_metric, GraphPointGeometry, MapJet};
use crate::manifold::MetricData;

/// Sweeps over grids with at least this many points run in parallel.
const PARALLEL_MIN_POINTS: usize = 2048;

/// `ε₂` used when the initial data is not a strict contraction.
pub const FALLBACK_EPS2: f64 = 1e-3;

pub const CSV_COLUMNS: [&str; 10] = [
    "t",
    "min_s_eig",
    "tr_s_min",
    "tr_s_bound",
    "H_norm2_max",
    "u_min",
    "decay_k2",
    "decay_k3",
    "s_perp_theta_max",
    "chart_clearance_min",
];

/// One sample of the monitored quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorRecord {
    pub t: f64,
    /// Grid minimum of the smallest eigenvalue of `s` relative to `g`.
    pub min_s_eig: f64,
    /// Grid minimum of `tr(s) = g^{ij} s_{ij}`.
    pub tr_s_min: f64,
    /// Lower bound for `tr_s_min` at this time, where it applies.
    pub tr_s_bound: Option<f64>,
    pub h_norm2_max: f64,
    pub u_min: f64,
    /// `τ · sup ‖∇df‖²`, `τ` the time since the run started.
    pub decay_k2: f64,
    /// `τ² · sup ‖∇²df‖²`.
    pub decay_k3: f64,
    pub s_perp_theta_max: f64,
    /// Smallest chart clearance; `f64::MAX` for unbounded charts.
    pub chart_clearance_min: f64,
}

/// Lower bound on the trace of `s` for `m > 1`:
/// `(C₁(m-1)e^{σt/2} - m)/(C₁e^{σt/2} - 1)`, `C₁ = 1 + 1/((m-1) - inf_tr0)`.
///
/// Evaluated as `(m-1) - δ/(δ(e^{σt/2} - 1) + e^{σt/2})` with
/// `δ = (m-1) - inf_tr0`, which is exact at `t = 0`.
pub fn trace_bound(t: f64, m: usize, inf_tr0: f64, sigma: f64) -> Result<f64> {
    let mm1 = m as f64 - 1.0;
    if m <= 1 || !(inf_tr0 < mm1) || !(sigma > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "trace bound needs m > 1, inf_tr0 < m - 1 and sigma > 0 (m = {m}, inf_tr0 = {inf_tr0}, sigma = {sigma})"
        )));
    }
    let delta = mm1 - inf_tr0;
    let x = 0.5 * sigma * t;
    Ok(mm1 - delta / (delta * x.exp_m1() + x.exp()))
}

/// `ε₂ = min(2ε₁/m, ε₁²/m)`, or [`FALLBACK_EPS2`] if `ε₁ <= 0`.
pub fn default_eps2(eps1: f64, m: usize) -> f64 {
    if eps1 > 0.0 {
        let m = m as f64;
        (2.0 * eps1 / m).min(eps1 * eps1 / m)
    } else {
        FALLBACK_EPS2
    }
}

/// Per-point data needed for the covariant derivatives of `df`.
struct PointHessian {
    jet: MapJet,
    metric: MetricData,
    g_inv: DMatrix<f64>,
    /// `Γ^k_{ij}(g)`, index `(k * m + i) * m + j`.
    gamma: Vec<f64>,
    /// `(∇df)^a_{ij}`, index `(a * m + i) * m + j`.
    t: Vec<f64>,
}

impl PointHessian {
    fn compute(state: &FlowState, p: usize) -> Result<Self> {
        let jet = jet_at(state, p)?;
        let metric = state.model.metric_at(&jet.point())?;
        let (_, g_inv) = induced_metric(&jet, &metric)?;
        let gamma = induced_christoffel(&jet, &metric, &g_inv);
        let (m, n) = (jet.m, jet.n);
        let mut t = vec![0.0; n * m * m];
        for a in 0..n {
            for i in 0..m {
                for j in 0..m {
                    let mut v = jet.ddf(a, i, j);
                    for b in 0..n {
                        for c in 0..n {
                            v += metric.gamma(a, b, c) * jet.df(b, i) * jet.df(c, j);
                        }
                    }
                    for l in 0..m {
                        v -= gamma[(l * m + i) * m + j] * jet.df(a, l);
                    }
                    t[(a * m + i) * m + j] = v;
                }
            }
        }
        Ok(Self {
            jet,
            metric,
            g_inv,
            gamma,
            t,
        })
    }

    /// `‖T‖²` for a tensor with `rank` domain indices and one target index,
    /// stored as `T[a][i₁]…[i_rank]`.
    fn norm2(&self, tensor: &[f64], rank: usize) -> f64 {
        let (m, n) = (self.jet.m, self.jet.n);
        let block = m.pow(rank as u32);
        // raise all domain indices: U = g^{..} T
        let mut raised = tensor.to_vec();
        for slot in 0..rank {
            let stride = m.pow((rank - 1 - slot) as u32);
            let mut next = vec![0.0; raised.len()];
            for a in 0..n {
                for idx in 0..block {
                    let i = (idx / stride) % m;
                    let base = idx - i * stride;
                    let mut s = 0.0;
                    for k in 0..m {
                        s += self.g_inv[(i, k)] * raised[a * block + base + k * stride];
                    }
                    next[a * block + idx] = s;
                }
            }
            raised = next;
        }
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                let gab = self.metric.g[(a, b)];
                if gab == 0.0 {
                    continue;
                }
                for idx in 0..block {
                    s += gab * tensor[a * block + idx] * raised[b * block + idx];
                }
            }
        }
        s
    }
}

fn jet_at(state: &FlowState, p: usize) -> Result<MapJet> {
    let idx = state.grid.multi(p);
    crate::flow::spatial_jet(state, &idx[..state.grid.m])
}

fn sweep<T: Send>(len: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    if len >= PARALLEL_MIN_POINTS {
        (0..len).into_par_iter().map(&f).collect()
    } else {
        (0..len).map(f).collect()
    }
}

fn hessian_field(state: &FlowState) -> Result<Vec<PointHessian>> {
    sweep(state.len(), |p| PointHessian::compute(state, p))
}

/// `sup ‖∇^{k-1} df‖²` over the grid for `k ∈ {2, 3}`.
///
/// `∇df` is evaluated pointwise from the finite-difference jet; the further
/// derivative for `k = 3` differences `∇df` between grid points (central, or
/// one-sided second order at non-periodic edges).
pub fn covariant_derivative_sup(state: &FlowState, k: usize) -> Result<f64> {
    let field = hessian_field(state)?;
    match k {
        2 => Ok(sup_k2(&field)),
        3 => sup_k3(state, &field),
        _ => Err(Error::Domain(format!(
            "covariant derivative order k = {k} not supported (2 or 3)"
        ))),
    }
}

fn sup_k2(field: &[PointHessian]) -> f64 {
    field.iter().map(|h| h.norm2(&h.t, 2)).fold(0.0, f64::max)
}

fn sup_k3(state: &FlowState, field: &[PointHessian]) -> Result<f64> {
    let grid = &state.grid;
    let (m, n) = (grid.m, state.n);
    let block = n * m * m;
    let vals = sweep(field.len(), |p| {
        let here = &field[p];
        let idx = grid.multi(p);
        // ∂_k T by differences along axis k
        let mut dt = vec![0.0; m * block];
        for k in 0..m {
            let h = grid.spacing(k);
            let nk = grid.points[k];
            let at = |i: usize| {
                let mut j = idx;
                j[k] = i;
                &field[grid.flat(j)].t
            };
            let i = idx[k];
            let (w, pts): ([f64; 3], [usize; 3]) = if grid.periodic[k] {
                ([-0.5, 0.0, 0.5], [(i + nk - 1) % nk, i, (i + 1) % nk])
            } else if i == 0 {
                ([-1.5, 2.0, -0.5], [0, 1, 2])
            } else if i == nk - 1 {
                ([0.5, -2.0, 1.5], [nk - 3, nk - 2, nk - 1])
            } else {
                ([-0.5, 0.0, 0.5], [i - 1, i, i + 1])
            };
            for (wq, q) in w.iter().zip(pts) {
                if *wq == 0.0 {
                    continue;
                }
                for (c, v) in at(q).iter().enumerate() {
                    dt[k * block + c] += wq * v / h;
                }
            }
        }
        // S^a_{kij} = ∂_k T^a_ij + Γ^a_bc ∂_k f^b T^c_ij - Γ^l_ki T^a_lj - Γ^l_kj T^a_il
        let jet = &here.jet;
        let t = &here.t;
        let gm = &here.gamma;
        let mut s = vec![0.0; n * m * m * m];
        for a in 0..n {
            for k in 0..m {
                for i in 0..m {
                    for j in 0..m {
                        let mut v = dt[k * block + (a * m + i) * m + j];
                        for b in 0..n {
                            for c in 0..n {
                                v += here.metric.gamma(a, b, c)
                                    * jet.df(b, k)
                                    * t[(c * m + i) * m + j];
                            }
                        }
                        for l in 0..m {
                            v -= gm[(l * m + k) * m + i] * t[(a * m + l) * m + j];
                            v -= gm[(l * m + k) * m + j] * t[(a * m + i) * m + l];
                        }
                        s[((a * m + k) * m + i) * m + j] = v;
                    }
                }
            }
        }
        Ok(here.norm2(&s, 3))
    })?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Records monitors along a run. Constants fixed by the initial state
/// (`ε₁`, `inf tr(s)`) are captured at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Monitor {
    pub t0: f64,
    pub m: usize,
    pub n: usize,
    /// Initial grid minimum of the smallest s-eigenvalue.
    pub eps1: f64,
    pub eps2: f64,
    pub inf_tr0: f64,
    pub sigma: f64,
}

struct PointSummary {
    min_s: f64,
    tr: f64,
    h_norm2: f64,
    u: f64,
    theta: f64,
    clearance: f64,
}

fn point_summaries(state: &FlowState, eps2: f64) -> Result<Vec<PointSummary>> {
    sweep(state.len(), |p| {
        let jet = jet_at(state, p)?;
        let geo = GraphPointGeometry::compute(&jet, &state.model)?;
        Ok(PointSummary {
            min_s: geo.min_s_eig(),
            tr: geo.trace_s(),
            h_norm2: geo.h_norm2,
            u: geo.u,
            theta: geo.s_perp_theta_max(eps2)?,
            clearance: state.model.clearance(&jet.value),
        })
    })
}

impl Monitor {
    /// Captures the initial constants; `eps2` defaults to [`default_eps2`].
    pub fn new(state: &FlowState, eps2: Option<f64>) -> Result<Self> {
        if let Some(e) = eps2 {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Config(format!("eps2 must be positive, got {e}")));
            }
        }
        let pts = point_summaries(state, eps2.unwrap_or(FALLBACK_EPS2))?;
        let eps1 = pts.iter().map(|p| p.min_s).fold(f64::INFINITY, f64::min);
        let inf_tr0 = pts.iter().map(|p| p.tr).fold(f64::INFINITY, f64::min);
        let m = state.grid.m;
        Ok(Self {
            t0: state.t,
            m,
            n: state.n,
            eps1,
            eps2: eps2.unwrap_or_else(|| default_eps2(eps1, m)),
            inf_tr0,
            sigma: state.model.sectional_bound(),
        })
    }

    /// True when the trace lower bound applies to this run.
    pub fn bound_applies(&self) -> bool {
        self.m > 1 && self.inf_tr0 < self.m as f64 - 1.0 && self.sigma > 0.0
    }

    pub fn trace_bound_at(&self, t: f64) -> Option<f64> {
        if self.bound_applies() {
            trace_bound(t - self.t0, self.m, self.inf_tr0, self.sigma).ok()
        } else {
            None
        }
    }

    /// Sweeps `state` and fills every field.
    pub fn record(&self, state: &FlowState) -> Result<MonitorRecord> {
        let pts = point_summaries(state, self.eps2)?;
        let field = hessian_field(state)?;
        let tau = state.t - self.t0;
        let fold_min =
            |f: fn(&PointSummary) -> f64| pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let fold_max =
            |f: fn(&PointSummary) -> f64| pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        Ok(MonitorRecord {
            t: state.t,
            min_s_eig: fold_min(|p| p.min_s),
            tr_s_min: fold_min(|p| p.tr),
            tr_s_bound: self.trace_bound_at(state.t),
            h_norm2_max: fold_max(|p| p.h_norm2),
            u_min: fold_min(|p| p.u),
            decay_k2: tau * sup_k2(&field),
            decay_k3: tau * tau * sup_k3(state, &field)?,
            s_perp_theta_max: fold_max(|p| p.theta),
            chart_clearance_min: fold_min(|p| p.clearance).min(f64::MAX),
        })
    }

    /// Check parameters for records produced by this monitor.
    pub fn check_config(&self, slack: f64) -> CheckConfig {
        CheckConfig {
            slack,
            eps2: self.eps2,
            n: self.n,
        }
    }
}

/// Tolerances for [`check_theorem_a`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub slack: f64,
    pub eps2: f64,
    /// Target dimension, for the `n/ε₂` cap on `‖H‖²`.
    pub n: usize,
}

/// A failed comparison at one record.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub t: f64,
    /// How far the value is on the wrong side of its bound.
    pub magnitude: f64,
    pub what: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemReport {
    pub item: &'static str,
    pub description: &'static str,
    pub violations: Vec<Violation>,
}

impl ItemReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Outcome of the four monitored claims along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremAReport {
    pub items: [ItemReport; 4],
}

impl TheoremAReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(ItemReport::passed)
    }

    pub fn item(&self, name: &str) -> Option<&ItemReport> {
        self.items.iter().find(|i| i.item == name)
    }
}

impl std::fmt::Display for TheoremAReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for it in &self.items {
            let status = if it.passed() { "pass" } else { "FAIL" };
            writeln!(f, "({}) {:<4} {}", it.item, status, it.description)?;
            for v in it.violations.iter().take(5) {
                writeln!(
                    f,
                    "       t = {:.6}: {} (by {:.3e})",
                    v.t, v.what, v.magnitude
                )?;
            }
            if it.violations.len() > 5 {
                writeln!(f, "       ... {} more", it.violations.len() - 5)?;
            }
        }
        Ok(())
    }
}

/// Fraction of increasing steps tolerated in the decay products after `τ = 1`.
pub const DECAY_INCREASE_FRACTION: f64 = 0.05;

/// Checks a record series against the monitored claims:
///
/// * (i) `min_s_eig` stays in `[first - slack, 1 + slack]`;
/// * (ii) `tr_s_min` is non-decreasing within `slack`, and above
///   `tr_s_bound - slack` where a bound is recorded;
/// * (iii) `H_norm2_max` is finite and at most `max(first, n/ε₂) + slack`;
/// * (iv) the decay products are finite, and after one time unit at most
///   5% of consecutive steps increase by more than `slack`.
pub fn check_theorem_a(records: &[MonitorRecord], cfg: &CheckConfig) -> TheoremAReport {
    let slack = cfg.slack;
    let mut items = [
        ItemReport {
            item: "i",
            description: "contraction is preserved",
            violations: vec![],
        },
        ItemReport {
            item: "ii",
            description: "tr(s) is non-decreasing and above its bound",
            violations: vec![],
        },
        ItemReport {
            item: "iii",
            description: "mean curvature stays bounded",
            violations: vec![],
        },
        ItemReport {
            item: "iv",
            description: "derivative decay products stay bounded",
            violations: vec![],
        },
    ];
    let Some(first) = records.first() else {
        for it in &mut items {
            it.violations.push(Violation {
                t: f64::NAN,
                magnitude: f64::NAN,
                what: "no records".into(),
            });
        }
        return TheoremAReport { items };
    };
    let push = |it: &mut ItemReport, t: f64, magnitude: f64, what: String| {
        it.violations.push(Violation { t, magnitude, what });
    };

    for r in records {
        let lo = first.min_s_eig - slack;
        if !(r.min_s_eig >= lo) {
            push(
                &mut items[0],
                r.t,
                lo - r.min_s_eig,
                format!("min_s_eig {} below {}", r.min_s_eig, lo),
            );
        }
        if !(r.min_s_eig <= 1.0 + slack) {
            push(
                &mut items[0],
                r.t,
                r.min_s_eig - 1.0,
                format!("min_s_eig {} above 1", r.min_s_eig),
            );
        }
        if let Some(b) = r.tr_s_bound {
            if !(r.tr_s_min >= b - slack) {
                push(
                    &mut items[1],
                    r.t,
                    b - r.tr_s_min,
                    format!("tr_s_min {} below bound {}", r.tr_s_min, b),
                );
            }
        }
        let cap = first.h_norm2_max.max(cfg.n as f64 / cfg.eps2) + slack;
        if !(r.h_norm2_max.is_finite() && r.h_norm2_max <= cap) {
            push(
                &mut items[2],
                r.t,
                r.h_norm2_max - cap,
                format!("H_norm2_max {} above {}", r.h_norm2_max, cap),
            );
        }
        for (name, v) in [("decay_k2", r.decay_k2), ("decay_k3", r.decay_k3)] {
            if !v.is_finite() {
                push(
                    &mut items[3],
                    r.t,
                    f64::INFINITY,
                    format!("{name} is not finite"),
                );
            }
        }
    }
    for w in records.windows(2) {
        if !(w[1].tr_s_min >= w[0].tr_s_min - slack) {
            push(
                &mut items[1],
                w[1].t,
                w[0].tr_s_min - w[1].tr_s_min,
                format!(
                    "tr_s_min decreased from {} to {}",
                    w[0].tr_s_min, w[1].tr_s_min
                ),
            );
        }
    }
    let late: Vec<&MonitorRecord> = records.iter().filter(|r| r.t - first.t >= 1.0).collect();
    if late.len() >= 2 {
        let steps = (late.len() - 1) as f64;
        for (name, get) in [
            (
                "decay_k2",
                (|r: &MonitorRecord| r.decay_k2) as fn(&MonitorRecord) -> f64,
            ),
            ("decay_k3", |r: &MonitorRecord| r.decay_k3),
        ] {
            let ups: Vec<(f64, f64)> = late
                .windows(2)
                .filter(|w| get(w[1]) > get(w[0]) + slack)
                .map(|w| (w[1].t, get(w[1]) - get(w[0])))
                .collect();
            let frac = ups.len() as f64 / steps;
            if frac > DECAY_INCREASE_FRACTION {
                let (t, mag) = ups[0];
                push(
                    &mut items[3],
                    t,
                    mag,
                    format!(
                        "{name} increased in {:.1}% of steps after the transient",
                        100.0 * frac
                    ),
                );
            }
        }
    }
    TheoremAReport { items }
}

fn fmt_f64(v: f64) -> String {
    v.to_string()
}

/// Writes records as CSV with a header row; a missing trace bound is an
/// empty field.
pub fn write_csv(records: &[MonitorRecord], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    out.write_record(CSV_COLUMNS).map_err(io)?;
    for r in records {
        out.write_record([
            fmt_f64(r.t),
            fmt_f64(r.min_s_eig),
            fmt_f64(r.tr_s_min),
            r.tr_s_bound.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.h_norm2_max),
            fmt_f64(r.u_min),
            fmt_f64(r.decay_k2),
            fmt_f64(r.decay_k3),
            fmt_f64(r.s_perp_theta_max),
            fmt_f64(r.chart_clearance_min),
        ])
        .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests;
