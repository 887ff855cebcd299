//! Pointwise geometry of the graph `Γ(f) ⊂ ℝ^m × N`.
//!
//! Everything here is a function of a 2-jet of `f` at one domain point and
//! the target model. Ambient vectors on `ℝ^m × N` have `m + n` chart
//! components: the first `m` are the domain directions, the last `n` the
//! target chart directions.

mod frames;
mod gauss;

pub use frames::{svd_frames, SvdFrames};
pub use gauss::{gauss_residual, intrinsic_r1212, JetStencil};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, symmetric_eigen, symmetric_eigenvalues};
use crate::manifold::{ChartPoint, ManifoldModel, MetricData, MAX_TARGET_DIM};

/// Singular-value squares at or below this are treated as zero.
pub const RANK_THRESHOLD: f64 = 1e-12;

/// Largest domain dimension handled by the allocation-free velocity kernel.
pub const MAX_DOMAIN_DIM: usize = 3;

/// Value, first and second derivatives of `f` at one point.
///
/// `d1[a * m + i] = ∂_i f^a`, `d2[(a * m + i) * m + j] = ∂²_{ij} f^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapJet {
    pub m: usize,
    pub n: usize,
    pub value: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl MapJet {
    pub fn new(m: usize, n: usize, value: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Result<Self> {
        if value.len() != n || d1.len() != n * m || d2.len() != n * m * m {
            return Err(Error::Dimension(format!(
                "jet with m={m}, n={n} got value/d1/d2 lengths {}/{}/{}",
                value.len(),
                d1.len(),
                d2.len()
            )));
        }
        for a in 0..n {
            for i in 0..m {
                for j in 0..i {
                    if d2[(a * m + i) * m + j] != d2[(a * m + j) * m + i] {
                        return Err(Error::Domain("second derivatives are not symmetric".into()));
                    }
                }
            }
        }
        Ok(Self {
            m,
            n,
            value,
            d1,
            d2,
        })
    }

    /// Jet of the constant map with value `value`.
    pub fn constant(m: usize, value: Vec<f64>) -> Self {
        let n = value.len();
        Self {
            m,
            n,
            value,
            d1: vec![0.0; n * m],
            d2: vec![0.0; n * m * m],
        }
    }

    #[inline]
    pub fn df(&self, a: usize, i: usize) -> f64 {
        self.d1[a * self.m + i]
    }

    #[inline]
    pub fn ddf(&self, a: usize, i: usize, j: usize) -> f64 {
        self.d2[(a * self.m + i) * self.m + j]
    }

    /// `∂_i f` as a target vector.
    pub fn partial(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|a| self.df(a, i)).collect()
    }

    /// `∂_{ij} f` as a target vector.
    pub fn second_partial(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.n).map(|a| self.ddf(a, i, j)).collect()
    }

    /// `dF(∂_k) = (e_k, ∂_k f)` as an ambient vector.
    pub fn tangent(&self, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.m + self.n];
        v[k] = 1.0;
        for a in 0..self.n {
            v[self.m + a] = self.df(a, k);
        }
        v
    }

    pub fn point(&self) -> ChartPoint {
        ChartPoint::new(self.value.clone())
    }

    fn check_against(&self, metric: &MetricData) -> Result<()> {
        if metric.dim() != self.n {
            return Err(Error::Dimension(format!(
                "jet target dim {} vs metric dim {}",
                self.n,
                metric.dim()
            )));
        }
        Ok(())
    }
}

/// `g_{ℝ^m × N}(u, v)` for ambient vectors at the jet's base point.
pub fn product_inner(metric: &MetricData, m: usize, u: &[f64], v: &[f64]) -> f64 {
    let n = metric.dim();
    let mut s: f64 = (0..m).map(|i| u[i] * v[i]).sum();
    for a in 0..n {
        for b in 0..n {
            s += metric.g[(a, b)] * u[m + a] * v[m + b];
        }
    }
    s
}

/// `s_{ℝ^m × N}(u, v) = g_{ℝ^m}(u, v) - g_N(u, v)`.
pub fn product_s(metric: &MetricData, m: usize, u: &[f64], v: &[f64]) -> f64 {
    let n = metric.dim();
    let mut s: f64 = (0..m).map(|i| u[i] * v[i]).sum();
    for a in 0..n {
        for b in 0..n {
            s -= metric.g[(a, b)] * u[m + a] * v[m + b];
        }
    }
    s
}

/// Pullback `f^*g_N` as an `m × m` matrix.
pub fn pullback(jet: &MapJet, metric: &MetricData) -> DMatrix<f64> {
    let (m, n) = (jet.m, jet.n);
    let mut p = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += metric.g[(a, b)] * jet.df(a, i) * jet.df(b, j);
                }
            }
            p[(i, j)] = s;
            p[(j, i)] = s;
        }
    }
    p
}

/// Induced metric `g = δ + f^*g_N` and its inverse.
pub fn induced_metric(jet: &MapJet, metric: &MetricData) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    jet.check_against(metric)?;
    let g = DMatrix::identity(jet.m, jet.m) + pullback(jet, metric);
    let g_inv = spd_inverse(&g)?;
    Ok((g, g_inv))
}

/// `s = δ - f^*g_N`.
pub fn s_tensor(jet: &MapJet, metric: &MetricData) -> Result<DMatrix<f64>> {
    jet.check_against(metric)?;
    Ok(DMatrix::identity(jet.m, jet.m) - pullback(jet, metric))
}

/// Squared singular values of `df`, ascending.
pub fn singular_values(jet: &MapJet, metric: &MetricData) -> Result<Vec<f64>> {
    jet.check_against(metric)?;
    let vals = symmetric_eigenvalues(&pullback(jet, metric))?;
    // the pullback is positive semidefinite; clip round-off below zero
    Ok(vals.into_iter().map(|v| v.max(0.0)).collect())
}

/// Eigenvalues `(1 - λ²)/(1 + λ²)` of `s` relative to `g`, descending.
pub fn s_eigenvalues(lambda2: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = lambda2.iter().map(|&l| (1.0 - l) / (1.0 + l)).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Jacobian `⋆Ω = 1/sqrt(∏(1 + λ_i²))` of the projection of the graph onto
/// the domain.
pub fn projection_jacobian(lambda2: &[f64]) -> f64 {
    1.0 / lambda2.iter().map(|l| 1.0 + l).product::<f64>().sqrt()
}

/// Second fundamental form in ambient chart components,
/// `data[(c * m + i) * m + j] = A^c_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondFundamentalForm {
    pub m: usize,
    pub ambient_dim: usize,
    pub data: Vec<f64>,
}

impl SecondFundamentalForm {
    #[inline]
    pub fn get(&self, c: usize, i: usize, j: usize) -> f64 {
        self.data[(c * self.m + i) * self.m + j]
    }

    /// `A(∂_i, ∂_j)` as an ambient vector.
    pub fn vector(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.ambient_dim).map(|c| self.get(c, i, j)).collect()
    }
}

/// Ambient Hessian `∂²F + Γ^{ℝ^m×N}(∂F, ∂F)`; only the target block is
/// nonzero. Index `(c * m + i) * m + j` as for [`SecondFundamentalForm`].
fn ambient_hessian(jet: &MapJet, metric: &MetricData) -> Vec<f64> {
    let (m, n) = (jet.m, jet.n);
    let mut out = vec![0.0; (m + n) * m * m];
    for a in 0..n {
        for i in 0..m {
            for j in 0..m {
                let mut v = jet.ddf(a, i, j);
                for b in 0..n {
                    for c in 0..n {
                        v += metric.gamma(a, b, c) * jet.df(b, i) * jet.df(c, j);
                    }
                }
                out[((m + a) * m + i) * m + j] = v;
            }
        }
    }
    out
}

/// Christoffel symbols of the induced metric, `Γ^k_{ij}(g)`, computed from the
/// 2-jet alone (metric derivatives of `N` come from its Christoffel symbols).
/// Index `(k * m + i) * m + j`.
pub fn induced_christoffel(jet: &MapJet, metric: &MetricData, g_inv: &DMatrix<f64>) -> Vec<f64> {
    let (m, n) = (jet.m, jet.n);
    let dgn = metric.metric_derivatives();
    let gn = &metric.g;
    // ∂_i g_{jl}
    let dg = |i: usize, j: usize, l: usize| -> f64 {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut dgab = 0.0;
                for c in 0..n {
                    dgab += dgn[(c * n + a) * n + b] * jet.df(c, i);
                }
                s += dgab * jet.df(a, j) * jet.df(b, l)
                    + gn[(a, b)]
                        * (jet.ddf(a, i, j) * jet.df(b, l) + jet.df(a, j) * jet.ddf(b, i, l));
            }
        }
        s
    };
    let mut first_kind = vec![0.0; m * m * m];
    for l in 0..m {
        for i in 0..m {
            for j in 0..m {
                first_kind[(l * m + i) * m + j] = 0.5 * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
            }
        }
    }
    let mut out = vec![0.0; m * m * m];
    for k in 0..m {
        for i in 0..m {
            for j in 0..m {
                out[(k * m + i) * m + j] = (0..m)
                    .map(|l| g_inv[(k, l)] * first_kind[(l * m + i) * m + j])
                    .sum();
            }
        }
    }
    out
}

fn second_fundamental_form_with(
    jet: &MapJet,
    metric: &MetricData,
    g_inv: &DMatrix<f64>,
) -> SecondFundamentalForm {
    let (m, n) = (jet.m, jet.n);
    let mut data = ambient_hessian(jet, metric);
    let chr = induced_christoffel(jet, metric, g_inv);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let gk = chr[(k * m + i) * m + j];
                // dF(∂_k) = (e_k, ∂_k f)
                data[(k * m + i) * m + j] -= gk;
                for a in 0..n {
                    data[((m + a) * m + i) * m + j] -= gk * jet.df(a, k);
                }
            }
        }
    }
    SecondFundamentalForm {
        m,
        ambient_dim: m + n,
        data,
    }
}

/// Second fundamental form `A^c_{ij} = ∂²F^c + Γ^c(∂_iF, ∂_jF) - Γ^k_{ij}(g) ∂_kF^c`.
pub fn second_fundamental_form(
    jet: &MapJet,
    model: &ManifoldModel,
) -> Result<SecondFundamentalForm> {
    let metric = model.metric_at(&jet.point())?;
    let (_, g_inv) = induced_metric(jet, &metric)?;
    Ok(second_fundamental_form_with(jet, &metric, &g_inv))
}

fn trace_form(a: &SecondFundamentalForm, g_inv: &DMatrix<f64>) -> Vec<f64> {
    let m = a.m;
    (0..a.ambient_dim)
        .map(|c| {
            let mut s = 0.0;
            for i in 0..m {
                for j in 0..m {
                    s += g_inv[(i, j)] * a.get(c, i, j);
                }
            }
            s
        })
        .collect()
}

/// Mean curvature vector `H = g^{ij} A_{ij}` (ambient components) and its
/// squared norm in the product metric.
pub fn mean_curvature(jet: &MapJet, model: &ManifoldModel) -> Result<(Vec<f64>, f64)> {
    let metric = model.metric_at(&jet.point())?;
    let (_, g_inv) = induced_metric(jet, &metric)?;
    let a = second_fundamental_form_with(jet, &metric, &g_inv);
    let h = trace_form(&a, &g_inv);
    let norm2 = product_inner(&metric, jet.m, &h, &h);
    Ok((h, norm2))
}

/// Graphical flow velocity
/// `V^a = g̃^{ij} (∂²_{ij} f^a + Γ^a_{bc} ∂_i f^b ∂_j f^c)` with
/// `g̃ = δ + f^*g_N`.
pub fn mcf_velocity(jet: &MapJet, model: &ManifoldModel) -> Result<Vec<f64>> {
    let metric = model.metric_at(&jet.point())?;
    let (_, g_inv) = induced_metric(jet, &metric)?;
    let hess = ambient_hessian(jet, &metric);
    let (m, n) = (jet.m, jet.n);
    Ok((0..n)
        .map(|a| {
            let mut s = 0.0;
            for i in 0..m {
                for j in 0..m {
                    s += g_inv[(i, j)] * hess[((m + a) * m + i) * m + j];
                }
            }
            s
        })
        .collect())
}

/// Normal projection `pr^⊥(v) = v - g^{kl} ⟨v, dF_k⟩ dF_l` of an ambient
/// vector.
pub fn normal_projection(jet: &MapJet, metric: &MetricData, v: &[f64]) -> Result<Vec<f64>> {
    let (_, g_inv) = induced_metric(jet, metric)?;
    let m = jet.m;
    let tangents: Vec<Vec<f64>> = (0..m).map(|k| jet.tangent(k)).collect();
    let pair: Vec<f64> = tangents
        .iter()
        .map(|t| product_inner(metric, m, v, t))
        .collect();
    let mut out = v.to_vec();
    for l in 0..m {
        let coef: f64 = (0..m).map(|k| g_inv[(l, k)] * pair[k]).sum();
        for (o, t) in out.iter_mut().zip(&tangents[l]) {
            *o -= coef * t;
        }
    }
    Ok(out)
}

/// Largest eigenvalue of `s^⊥ + ε₂ θ` on the normal bundle, with
/// `θ(ξ, η) = H_ξ H_η`.
pub fn s_perp_theta_max(jet: &MapJet, model: &ManifoldModel, eps2: f64) -> Result<f64> {
    if !(eps2 > 0.0) {
        return Err(Error::Domain(format!("eps2 must be positive, got {eps2}")));
    }
    let metric = model.metric_at(&jet.point())?;
    let frames = svd_frames(jet, &metric)?;
    let (h, _) = mean_curvature(jet, model)?;
    s_perp_theta_from_frames(jet.m, &metric, &frames, &h, eps2)
}

fn s_perp_theta_from_frames(
    m: usize,
    metric: &MetricData,
    frames: &SvdFrames,
    h: &[f64],
    eps2: f64,
) -> Result<f64> {
    let nf = &frames.normal;
    let k = nf.len();
    if k == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let hxi: Vec<f64> = nf
        .iter()
        .map(|xi| product_inner(metric, m, h, xi))
        .collect();
    let mat = DMatrix::from_fn(k, k, |a, b| {
        product_s(metric, m, &nf[a], &nf[b]) + eps2 * hxi[a] * hxi[b]
    });
    let vals = symmetric_eigenvalues(&mat)?;
    Ok(*vals.last().unwrap())
}

/// All pointwise graph quantities at one point.
#[derive(Debug, Clone)]
pub struct GraphPointGeometry {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub s: DMatrix<f64>,
    /// Squared singular values, ascending.
    pub lambda2: Vec<f64>,
    /// Eigenvalues of `s` relative to `g`, descending.
    pub s_eigs: Vec<f64>,
    pub a: SecondFundamentalForm,
    pub h: Vec<f64>,
    pub h_norm2: f64,
    pub u: f64,
    pub frames: SvdFrames,
    metric: MetricData,
    m: usize,
}

impl GraphPointGeometry {
    pub fn compute(jet: &MapJet, model: &ManifoldModel) -> Result<Self> {
        let metric = model.metric_at(&jet.point())?;
        let (g, g_inv) = induced_metric(jet, &metric)?;
        let s = s_tensor(jet, &metric)?;
        let frames = svd_frames(jet, &metric)?;
        let lambda2 = frames.lambda2.clone();
        let s_eigs = s_eigenvalues(&lambda2);
        let a = second_fundamental_form_with(jet, &metric, &g_inv);
        let h = trace_form(&a, &g_inv);
        let h_norm2 = product_inner(&metric, jet.m, &h, &h);
        let u = projection_jacobian(&lambda2);
        Ok(Self {
            g,
            g_inv,
            s,
            lambda2,
            s_eigs,
            a,
            h,
            h_norm2,
            u,
            frames,
            metric,
            m: jet.m,
        })
    }

    /// `tr(s) = g^{ij} s_{ij}`.
    pub fn trace_s(&self) -> f64 {
        (&self.g_inv * &self.s).trace()
    }

    /// Smallest eigenvalue of `s` relative to `g`.
    pub fn min_s_eig(&self) -> f64 {
        *self.s_eigs.last().unwrap_or(&1.0)
    }

    pub fn normal_frame(&self) -> &[Vec<f64>] {
        &self.frames.normal
    }

    pub fn metric(&self) -> &MetricData {
        &self.metric
    }

    /// See [`s_perp_theta_max`].
    pub fn s_perp_theta_max(&self, eps2: f64) -> Result<f64> {
        s_perp_theta_from_frames(self.m, &self.metric, &self.frames, &self.h, eps2)
    }

    /// Values `s^⊥(ξ_k, ξ_k)` on the normal frame.
    pub fn s_perp_diagonal(&self) -> Vec<f64> {
        self.frames
            .normal
            .iter()
            .map(|xi| product_s(&self.metric, self.m, xi, xi))
            .collect()
    }
}

/// Allocation-free velocity evaluation used by the solver. Writes `V` into
/// `out[..n]` and returns the largest eigenvalue of `g̃⁻¹`.
pub(crate) fn velocity_kernel(
    model: &ManifoldModel,
    m: usize,
    n: usize,
    value: &[f64],
    d1: &[f64],
    d2: &[f64],
    out: &mut [f64],
) -> f64 {
    debug_assert!(m >= 1 && m <= MAX_DOMAIN_DIM && n <= MAX_TARGET_DIM);
    let mut cols = [[0.0f64; MAX_TARGET_DIM]; MAX_DOMAIN_DIM];
    for a in 0..n {
        for i in 0..m {
            cols[i][a] = d1[a * m + i];
        }
    }
    let mut gt = [[0.0f64; MAX_DOMAIN_DIM]; MAX_DOMAIN_DIM];
    for i in 0..m {
        for j in i..m {
            let v =
                model.inner(value, &cols[i][..n], &cols[j][..n]) + if i == j { 1.0 } else { 0.0 };
            gt[i][j] = v;
            gt[j][i] = v;
        }
    }
    let (gi, lam_max) = small_spd_inverse(m, &gt);
    let mut tmp = [0.0f64; MAX_TARGET_DIM];
    out[..n].iter_mut().for_each(|o| *o = 0.0);
    for i in 0..m {
        for j in i..m {
            let w = if i == j { gi[i][j] } else { 2.0 * gi[i][j] };
            model.christoffel_contract(value, &cols[i][..n], &cols[j][..n], &mut tmp[..n]);
            for a in 0..n {
                out[a] += w * (d2[(a * m + i) * m + j] + tmp[a]);
            }
        }
    }
    lam_max
}

/// Inverse of a symmetric positive definite matrix of size 1..=3 together
/// with the largest eigenvalue of the inverse.
fn small_spd_inverse(
    m: usize,
    a: &[[f64; MAX_DOMAIN_DIM]; MAX_DOMAIN_DIM],
) -> ([[f64; MAX_DOMAIN_DIM]; MAX_DOMAIN_DIM], f64) {
    let mut inv = [[0.0; MAX_DOMAIN_DIM]; MAX_DOMAIN_DIM];
    match m {
        1 => {
            inv[0][0] = 1.0 / a[0][0];
            (inv, inv[0][0])
        }
        2 => {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            inv[0][0] = a[1][1] / det;
            inv[1][1] = a[0][0] / det;
            inv[0][1] = -a[0][1] / det;
            inv[1][0] = -a[1][0] / det;
            let mean = 0.5 * (a[0][0] + a[1][1]);
            let rad = (0.5 * (a[0][0] - a[1][1])).hypot(a[0][1]);
            (inv, 1.0 / (mean - rad))
        }
        _ => {
            let mat = DMatrix::from_fn(3, 3, |i, j| a[i][j]);
            let inv_m = mat
                .clone()
                .try_inverse()
                .unwrap_or_else(|| DMatrix::from_element(3, 3, f64::NAN));
            for i in 0..3 {
                for j in 0..3 {
                    inv[i][j] = inv_m[(i, j)];
                }
            }
            let lam_min = symmetric_eigen(&mat).map(|(v, _)| v[0]).unwrap_or(f64::NAN);
            (inv, 1.0 / lam_min)
        }
    }
}

#[cfg(test)]
mod tests;
