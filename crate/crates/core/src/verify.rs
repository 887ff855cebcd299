//! Acceptance suites. Each criterion runs at a pinned tolerance and returns a
//! one-line outcome; the `acceptance` test target and `graphflow verify`
//! both go through [`run_suite`].

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flow::{reduce_ode, run, spatial_jet, FlowState, OdeExample, StepControl};
use crate::graphgeom::{
    gauss_residual, mcf_velocity, mean_curvature, normal_projection, product_inner, JetStencil,
    MapJet,
};
use crate::manifold::ManifoldModel;
use crate::monitors::{check_theorem_a, trace_bound, Monitor, MonitorRecord, TheoremAReport};
use crate::oracles::{hs1_d, hs1_h_norm2, hs1_t0_for, hs2_c1_for, lambert_w, ExampleSpec};
use crate::sampling::random_contraction_jet;
use crate::scenarios::{self, DISK_SINE_AMPLITUDE};

/// Pinned thresholds.
pub mod thresholds {
    pub const HS1_ODE_DT: f64 = 1e-3;
    pub const HS1_ODE_T_END: f64 = 10.0;
    pub const HS1_ODE_MAX_ERR: f64 = 1e-8;
    pub const HS1_ODE_SECONDS: f64 = 1.0;
    pub const HS1_H_NORM2_TOL: f64 = 1e-10;
    pub const HS1_H_SAMPLES: usize = 100;

    pub const HS2_R0: f64 = 0.3;
    pub const HS2_POINTS: usize = 256;
    pub const HS2_T_END: f64 = 1.0;
    pub const HS2_MAX_ERR: f64 = 5e-4;
    pub const HS2_MIN_ORDER: f64 = 1.8;
    pub const HS2_SECONDS: f64 = 30.0;
    pub const HS2_MONITOR_EVERY: f64 = 0.05;

    pub const HS3_C: f64 = 0.5;
    pub const HS3_POINTS: usize = 256;
    pub const HS3_FACTOR: f64 = 20.0;

    pub const DISK_POINTS: usize = 64;
    pub const DISK_T_END: f64 = 2.0;
    pub const DISK_MONITOR_EVERY: f64 = 0.1;

    pub const TRACE_CASES: usize = 1000;
    pub const TRACE_T0_TOL: f64 = 1e-14;

    pub const JETS_PER_MODEL: usize = 1000;
    pub const PROJECTION_REL_TOL: f64 = 1e-9;
    pub const NORMALITY_TOL: f64 = 1e-10;

    pub const LAMBERT_POINTS: usize = 50;
    pub const LAMBERT_TOL: f64 = 1e-12;
    pub const LAMBERT_EXACT_TOL: f64 = 1e-14;

    pub const GAUSS_MAPS: usize = 20;
    pub const GAUSS_H: f64 = 1e-3;
    pub const GAUSS_MAX_RESIDUAL: f64 = 1e-5;
    pub const GAUSS_MIN_ORDER: f64 = 1.8;
}
use thresholds::*;

/// `10h² + 1e-6`, the slack for monitored inequalities on a grid of spacing `h`.
pub fn monitor_slack(h: f64) -> f64 {
    10.0 * h * h + 1e-6
}

/// Result of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Criteria checked against closed-form solutions.
    Examples,
    /// Property-based criteria.
    Invariants,
    All,
}

impl Suite {
    pub fn criteria(self) -> &'static [u32] {
        match self {
            Suite::Examples => &[1, 2, 3, 4, 9],
            Suite::Invariants => &[5, 6, 7, 8, 10],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "examples" => Ok(Suite::Examples),
            "invariants" => Ok(Suite::Invariants),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!(
                "unknown suite `{other}` (examples, invariants, all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    /// Seed for the randomised criteria.
    pub seed: u64,
    /// Perturbs the trace-bound check so that it must fail. Used to test the
    /// failure path of the runner.
    pub inject_fault: bool,
}

/// A flow run with its monitor records and check tolerance.
#[derive(Debug, Clone)]
pub struct MonitoredRun {
    pub label: &'static str,
    pub initial: FlowState,
    pub state: FlowState,
    pub records: Vec<MonitorRecord>,
    pub monitor: Monitor,
    pub slack: f64,
    pub seconds: f64,
}

impl MonitoredRun {
    fn execute(label: &'static str, initial: FlowState, t_end: f64, every: f64) -> Result<Self> {
        let start = Instant::now();
        let monitor = Monitor::new(&initial, None)?;
        let out =
            run(initial.clone(), &StepControl::new(t_end), every, &monitor).map_err(|f| f.error)?;
        let slack = monitor_slack(initial.grid.h_min());
        Ok(Self {
            label,
            initial,
            state: out.state,
            records: out.records,
            monitor,
            slack,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    pub fn report(&self) -> TheoremAReport {
        check_theorem_a(&self.records, &self.monitor.check_config(self.slack))
    }
}

/// Runs shared between criteria, computed on first use.
#[derive(Default)]
pub struct Context {
    hs2: OnceLock<Result<MonitoredRun>>,
    disk: OnceLock<Result<MonitoredRun>>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    /// The shrinking circle on 256 periodic points up to `t = 1`.
    pub fn hs2_run(&self) -> Result<&MonitoredRun> {
        self.hs2
            .get_or_init(|| {
                let st = scenarios::hs2_periodic(HS2_R0, HS2_POINTS)?;
                MonitoredRun::execute("hs2, 256 points", st, HS2_T_END, HS2_MONITOR_EVERY)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// The two-dimensional run into the disk.
    pub fn disk_run(&self) -> Result<&MonitoredRun> {
        self.disk
            .get_or_init(|| {
                let st = scenarios::disk_sine_2d(DISK_SINE_AMPLITUDE, DISK_POINTS)?;
                MonitoredRun::execute("disk sine, 64x64", st, DISK_T_END, DISK_MONITOR_EVERY)
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

const TITLES: [&str; 10] = [
    "HS1 ODE vs closed form",
    "HS1 mean-curvature identity",
    "HS2 full PDE",
    "HS3 stationarity",
    "Contraction and trace monotonicity",
    "Trace bound algebra",
    "Mean-curvature cross-check",
    "Normal-bundle inequalities",
    "Lambert W",
    "Gauss residual",
];

pub fn title(id: u32) -> &'static str {
    TITLES
        .get(id.wrapping_sub(1) as usize)
        .copied()
        .unwrap_or("unknown criterion")
}

/// Runs a single criterion.
pub fn run_criterion(id: u32, ctx: &Context, opts: &VerifyOptions) -> Outcome {
    let start = Instant::now();
    let result = match id {
        1 => hs1_ode(),
        2 => hs1_mean_curvature(),
        3 => hs2_pde(ctx),
        4 => hs3_stationary(),
        5 => monotonicity(ctx),
        6 => trace_algebra(opts),
        7 => mean_curvature_cross_check(opts),
        8 => normal_bundle(ctx),
        9 => lambert(),
        10 => gauss(opts),
        _ => Err(Error::Config(format!("no criterion {id}"))),
    };
    let (passed, detail) = match result {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome {
        id,
        title: title(id),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every criterion of a suite in order, printing nothing.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Vec<Outcome> {
    let ctx = Context::new();
    suite
        .criteria()
        .iter()
        .map(|&id| run_criterion(id, &ctx, opts))
        .collect()
}

type Check = Result<(bool, String)>;

fn hs1_ode() -> Check {
    let start = Instant::now();
    let tr = reduce_ode(OdeExample::Hs1, 1.0, HS1_ODE_T_END, HS1_ODE_DT)?;
    let secs = start.elapsed().as_secs_f64();
    let t0 = hs1_t0_for(1.0);
    let err =
        tr.t.iter()
            .zip(&tr.y)
            .map(|(&t, &d)| (d - hs1_d(t, t0)).abs())
            .fold(0.0, f64::max);
    Ok((
        err <= HS1_ODE_MAX_ERR && secs < HS1_ODE_SECONDS,
        format!("max |d - d_exact| = {err:.2e} (<= {HS1_ODE_MAX_ERR:.0e}), integration {secs:.3} s (< 1 s)"),
    ))
}

fn hs1_mean_curvature() -> Check {
    let tr = reduce_ode(OdeExample::Hs1, 1.0, HS1_ODE_T_END, HS1_ODE_DT)?;
    let stride = (tr.t.len() - 1) / HS1_H_SAMPLES;
    let model = ManifoldModel::upper_half_plane();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for k in 1..=HS1_H_SAMPLES {
        let d = tr.y[k * stride];
        let jet = MapJet::new(1, 2, vec![0.0, d], vec![1.0, 0.0], vec![0.0, 0.0])?;
        let (_, h2) = mean_curvature(&jet, &model)?;
        worst = worst.max((h2 - hs1_h_norm2(d)).abs());
        count += 1;
    }
    Ok((
        worst <= HS1_H_NORM2_TOL && count == HS1_H_SAMPLES,
        format!("{count} times, max |‖H‖² - 1/(1+d²)²| = {worst:.2e} (<= {HS1_H_NORM2_TOL:.0e})"),
    ))
}

fn hs2_pde(ctx: &Context) -> Check {
    let c1 = hs2_c1_for(HS2_R0);
    let coarse = ctx.hs2_run()?;
    let e256 = scenarios::hs2_radius_error(&coarse.state, c1);
    let start = Instant::now();
    let fine = scenarios::hs2_periodic(HS2_R0, 2 * HS2_POINTS)?;
    let mon = Monitor::new(&fine, None)?;
    let out = run(fine, &StepControl::new(HS2_T_END), HS2_T_END, &mon).map_err(|f| f.error)?;
    let e512 = scenarios::hs2_radius_error(&out.state, c1);
    let secs = coarse.seconds + start.elapsed().as_secs_f64();
    let order = (e256 / e512).log2();
    Ok((
        e256 <= HS2_MAX_ERR && order >= HS2_MIN_ORDER && secs < HS2_SECONDS,
        format!(
            "radius error at t = 1: {e256:.2e} (256 pts, <= {HS2_MAX_ERR:.0e}), {e512:.2e} (512 pts), order {order:.2} (>= {HS2_MIN_ORDER}), {secs:.1} s"
        ),
    ))
}

fn velocity_sup(state: &FlowState) -> Result<(f64, f64)> {
    let mut coord: f64 = 0.0;
    let mut intrinsic: f64 = 0.0;
    for p in 0..state.len() {
        let jet = spatial_jet(state, &[p])?;
        let v = mcf_velocity(&jet, &state.model)?;
        coord = coord.max(v.iter().map(|x| x * x).sum::<f64>().sqrt());
        intrinsic = intrinsic.max(state.model.inner(&jet.value, &v, &v).sqrt());
    }
    Ok((coord, intrinsic))
}

fn hs3_stationary() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, spec) in [
        ("hs3a", ExampleSpec::Hs3a { x0: 0.0, c: HS3_C }),
        ("hs3b", ExampleSpec::Hs3b { c: HS3_C }),
    ] {
        let st = scenarios::hs3_dirichlet(spec, HS3_POINTS)?;
        let h = st.grid.h_min();
        let cap = HS3_FACTOR * h * h;
        let (v_coord, v_int) = velocity_sup(&st)?;
        let mon = Monitor::new(&st, None)?;
        let out = run(st.clone(), &StepControl::new(1.0), 0.25, &mon).map_err(|f| f.error)?;
        let (d_coord, d_int) = scenarios::drift(&st, &out.state);
        let d = d_coord.max(d_int);
        let v = v_coord.max(v_int);
        ok &= v <= cap && d <= cap;
        parts.push(format!("{name}: sup|V| = {v:.2e}, drift = {d:.2e}"));
        if parts.len() == 2 {
            parts.push(format!("cap 20h² = {cap:.2e}"));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn describe_items(report: &TheoremAReport, items: &[&str]) -> String {
    items
        .iter()
        .map(|name| {
            let it = report.item(name).expect("known item");
            if it.passed() {
                format!("({name}) ok")
            } else {
                let v = &it.violations[0];
                format!(
                    "({name}) {} violations, first at t = {:.3}: {}",
                    it.violations.len(),
                    v.t,
                    v.what
                )
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn monotonicity(ctx: &Context) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for run in [ctx.hs2_run()?, ctx.disk_run()?] {
        let report = run.report();
        let items_ok = report.item("i").is_some_and(|i| i.passed())
            && report.item("ii").is_some_and(|i| i.passed());
        let bound_used = run.records.iter().any(|r| r.tr_s_bound.is_some());
        ok &= items_ok;
        if run.monitor.m > 1 {
            // the two-dimensional run must exercise the explicit bound
            ok &= bound_used;
        }
        parts.push(format!(
            "{}: inf tr(s)₀ = {:.4}, bound {}, {}",
            run.label,
            run.monitor.inf_tr0,
            if bound_used { "applied" } else { "n/a" },
            describe_items(&report, &["i", "ii"])
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn trace_algebra(opts: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7ace);
    let fault = if opts.inject_fault { 1e-6 } else { 0.0 };
    let mut worst_t0: f64 = 0.0;
    let mut monotone = true;
    let mut limit_err: f64 = 0.0;
    for _ in 0..TRACE_CASES {
        let m = rng.random_range(2..=6usize);
        let mm1 = m as f64 - 1.0;
        let a = rng.random_range(-(m as f64)..mm1);
        let sigma = 4.0 * (1.0 - rng.random::<f64>());
        worst_t0 = worst_t0.max((trace_bound(0.0, m, a, sigma)? + fault - a).abs());
        let mut prev = trace_bound(0.0, m, a, sigma)?;
        for k in 1..=40 {
            let t = 0.25 * k as f64;
            let v = trace_bound(t, m, a, sigma)?;
            monotone &= v > prev && v < mm1;
            prev = v;
        }
        limit_err = limit_err.max((trace_bound(1e4 / sigma, m, a, sigma)? - mm1).abs());
    }
    Ok((
        worst_t0 <= TRACE_T0_TOL && monotone && limit_err <= 1e-12,
        format!(
            "{TRACE_CASES} cases: max |b(0) - a| = {worst_t0:.1e} (<= {TRACE_T0_TOL:.0e}), strictly increasing below m-1: {monotone}, |b(∞) - (m-1)| = {limit_err:.1e}"
        ),
    ))
}

fn cross_check_models() -> Vec<ManifoldModel> {
    vec![
        ManifoldModel::euclidean(2),
        ManifoldModel::upper_half_plane(),
        ManifoldModel::poincare_disk(),
        ManifoldModel::product(vec![
            ManifoldModel::euclidean(1),
            ManifoldModel::poincare_disk(),
        ]),
    ]
}

fn mean_curvature_cross_check(opts: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x3c);
    let mut worst_rel: f64 = 0.0;
    let mut worst_normal: f64 = 0.0;
    let models = cross_check_models();
    for model in &models {
        for _ in 0..JETS_PER_MODEL {
            let m = rng.random_range(1..=2usize);
            let jet = random_contraction_jet(model, m, 0.95, &mut rng);
            let metric = model.metric_at(&jet.point())?;
            let (h, _) = mean_curvature(&jet, model)?;
            let v = mcf_velocity(&jet, model)?;
            let mut amb = vec![0.0; m];
            amb.extend_from_slice(&v);
            let proj = normal_projection(&jet, &metric, &amb)?;
            let diff: Vec<f64> = proj.iter().zip(&h).map(|(a, b)| a - b).collect();
            let h_norm = product_inner(&metric, m, &h, &h).sqrt();
            let d_norm = product_inner(&metric, m, &diff, &diff).sqrt();
            worst_rel = worst_rel.max(d_norm / h_norm.max(1e-300));
            for k in 0..m {
                let t = jet.tangent(k);
                let t_norm = product_inner(&metric, m, &t, &t).sqrt();
                let c = product_inner(&metric, m, &h, &t).abs() / (h_norm * t_norm).max(1e-300);
                worst_normal = worst_normal.max(c);
            }
        }
    }
    Ok((
        worst_rel <= PROJECTION_REL_TOL && worst_normal <= NORMALITY_TOL,
        format!(
            "{} jets: max rel |pr⊥(0,V) - H| = {worst_rel:.1e} (<= {PROJECTION_REL_TOL:.0e}), max |cos∠(H, TΓ)| = {worst_normal:.1e} (<= {NORMALITY_TOL:.0e})",
            JETS_PER_MODEL * models.len()
        ),
    ))
}

fn normal_bundle(ctx: &Context) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for run in [ctx.hs2_run()?, ctx.disk_run()?] {
        let theta = run
            .records
            .iter()
            .map(|r| r.s_perp_theta_max)
            .fold(f64::NEG_INFINITY, f64::max);
        let h_cap = run
            .records
            .iter()
            .map(|r| run.monitor.eps2 * r.h_norm2_max)
            .fold(0.0, f64::max);
        let n = run.monitor.n as f64;
        ok &= theta <= run.slack && h_cap <= n + run.slack;
        parts.push(format!(
            "{}: ε₂ = {:.4}, max s⊥+ε₂θ = {theta:.3e} (<= {:.2e}), max ε₂‖H‖² = {h_cap:.3e} (<= n)",
            run.label, run.monitor.eps2, run.slack
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn lambert() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..LAMBERT_POINTS {
        let x = 10f64.powf(-6.0 + 12.0 * k as f64 / (LAMBERT_POINTS - 1) as f64);
        let w = lambert_w(x);
        worst = worst.max((w * w.exp() - x).abs() / x.max(1.0));
    }
    let w0 = lambert_w(0.0).abs();
    let we = (lambert_w(std::f64::consts::E) - 1.0).abs();
    Ok((
        worst <= LAMBERT_TOL && w0 <= LAMBERT_EXACT_TOL && we <= LAMBERT_EXACT_TOL,
        format!(
            "max |we^w - x|/max(1,x) = {worst:.1e} (<= {LAMBERT_TOL:.0e}), |W(0)| = {w0:.0e}, |W(e) - 1| = {we:.0e}"
        ),
    ))
}

/// Jet of `f(x) = c + L x + ½ xᵀQx + κ (x₁³, x₂³)` for `ℝ² → ℝ²`.
fn polynomial_jet(coef: &[f64; 12], cubic: f64, p: [f64; 2]) -> MapJet {
    let mut value = vec![0.0; 2];
    let mut d1 = vec![0.0; 4];
    let mut d2 = vec![0.0; 8];
    for a in 0..2 {
        let c = &coef[a * 6..(a + 1) * 6];
        // c0 + c1 x + c2 y + c3 x² + c4 xy + c5 y²
        value[a] = c[0]
            + c[1] * p[0]
            + c[2] * p[1]
            + c[3] * p[0] * p[0]
            + c[4] * p[0] * p[1]
            + c[5] * p[1] * p[1]
            + cubic * p[a].powi(3);
        d1[a * 2] = c[1] + 2.0 * c[3] * p[0] + c[4] * p[1];
        d1[a * 2 + 1] = c[2] + c[4] * p[0] + 2.0 * c[5] * p[1];
        d2[a * 4] = 2.0 * c[3];
        d2[a * 4 + 1] = c[4];
        d2[a * 4 + 2] = c[4];
        d2[a * 4 + 3] = 2.0 * c[5];
        d1[a * 2 + a] += 3.0 * cubic * p[a] * p[a];
        d2[a * 4 + a * 3] += 6.0 * cubic * p[a];
    }
    MapJet {
        m: 2,
        n: 2,
        value,
        d1,
        d2,
    }
}

/// The induced metric of a quadratic map is itself quadratic, which the 3×3
/// stencil differentiates exactly; the residual is then pure round-off and
/// has no convergence order. The order is measured on the same maps with a
/// cubic term added, where truncation error dominates.
fn gauss(opts: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6a55);
    let model = ManifoldModel::euclidean(2);
    let mut worst: f64 = 0.0;
    let mut min_order = f64::INFINITY;
    for _ in 0..GAUSS_MAPS {
        let coef: [f64; 12] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let residual = |cubic: f64, h: f64| {
            let st = JetStencil::from_fn(p, h, |q| polynomial_jet(&coef, cubic, q));
            gauss_residual(&st, &model)
        };
        worst = worst.max(residual(0.0, GAUSS_H)?);
        let (coarse, fine) = (residual(0.5, 2.0 * GAUSS_H)?, residual(0.5, GAUSS_H)?);
        min_order = min_order.min((coarse / fine).log2());
    }
    Ok((
        worst <= GAUSS_MAX_RESIDUAL && min_order >= GAUSS_MIN_ORDER,
        format!(
            "{GAUSS_MAPS} maps: max residual at h = 1e-3 {worst:.1e} (<= {GAUSS_MAX_RESIDUAL:.0e}), min Richardson order (cubic-perturbed) {min_order:.2} (>= {GAUSS_MIN_ORDER})"
        ),
    ))
}
