//! Gauss-equation residual for two-dimensional graphs in a flat target.
//!
//! Curvature convention: `Rm(∂₁,∂₂,∂₁,∂₂) = K det g`, i.e. positive on round
//! spheres. With this sign the Gauss equation reads
//! `Rm(∂₁,∂₂,∂₁,∂₂) = ⟨A₁₁,A₂₂⟩ - ⟨A₁₂,A₁₂⟩` for a flat ambient space.

use nalgebra::DMatrix;

use super::{induced_metric, product_inner, second_fundamental_form_with, MapJet};
use crate::error::{Error, Result};
use crate::linalg::spd_inverse;
use crate::manifold::ManifoldModel;

/// Jets sampled on a 3×3 stencil around a point of a 2-d domain.
///
/// `jets[(di + 1) * 3 + (dj + 1)]` is the jet at `x + (di h₀, dj h₁)`.
#[derive(Debug, Clone)]
pub struct JetStencil {
    pub h: [f64; 2],
    pub jets: Vec<MapJet>,
}

impl JetStencil {
    pub fn from_fn(center: [f64; 2], h: f64, mut jet_at: impl FnMut([f64; 2]) -> MapJet) -> Self {
        let mut jets = Vec::with_capacity(9);
        for di in -1..=1 {
            for dj in -1..=1 {
                jets.push(jet_at([
                    center[0] + di as f64 * h,
                    center[1] + dj as f64 * h,
                ]));
            }
        }
        Self { h: [h, h], jets }
    }

    pub fn center(&self) -> &MapJet {
        &self.jets[4]
    }
}

/// `Rm(∂₁,∂₂,∂₁,∂₂)` of a 2-d metric from its values on a 3×3 stencil.
///
/// `metric_at(di, dj)` returns the 2×2 metric at the offset stencil point.
pub fn intrinsic_r1212(h: [f64; 2], metric_at: impl Fn(i32, i32) -> DMatrix<f64>) -> Result<f64> {
    let g0 = metric_at(0, 0);
    let g_inv = spd_inverse(&g0)?;
    let d1 = [
        (metric_at(1, 0) - metric_at(-1, 0)) / (2.0 * h[0]),
        (metric_at(0, 1) - metric_at(0, -1)) / (2.0 * h[1]),
    ];
    let d11 = (metric_at(1, 0) - &g0 * 2.0 + metric_at(-1, 0)) / (h[0] * h[0]);
    let d22 = (metric_at(0, 1) - &g0 * 2.0 + metric_at(0, -1)) / (h[1] * h[1]);
    let d12 = (metric_at(1, 1) - metric_at(1, -1) - metric_at(-1, 1) + metric_at(-1, -1))
        / (4.0 * h[0] * h[1]);

    // Γ_{k,ij} and Γ^p_{ij}
    let first =
        |k: usize, i: usize, j: usize| 0.5 * (d1[i][(j, k)] + d1[j][(i, k)] - d1[k][(i, j)]);
    let second =
        |p: usize, i: usize, j: usize| (0..2).map(|k| g_inv[(p, k)] * first(k, i, j)).sum::<f64>();

    let mut quad = 0.0;
    for p in 0..2 {
        for q in 0..2 {
            quad += g0[(p, q)]
                * (second(p, 0, 1) * second(q, 0, 1) - second(p, 0, 0) * second(q, 1, 1));
        }
    }
    Ok(0.5 * (2.0 * d12[(0, 1)] - d22[(0, 0)] - d11[(1, 1)]) + quad)
}

/// Absolute residual of the Gauss equation at the stencil centre: intrinsic
/// curvature by finite differences of the induced metric against the
/// second-fundamental-form expression.
pub fn gauss_residual(stencil: &JetStencil, model: &ManifoldModel) -> Result<f64> {
    let c = stencil.center();
    if c.m != 2 {
        return Err(Error::Domain(format!(
            "gauss_residual needs m = 2, got {}",
            c.m
        )));
    }
    if !model.is_euclidean() {
        return Err(Error::Domain("gauss_residual needs a flat target".into()));
    }
    let mut metrics = Vec::with_capacity(9);
    for jet in &stencil.jets {
        let md = model.metric_at(&jet.point())?;
        metrics.push(induced_metric(jet, &md)?.0);
    }
    let rm = intrinsic_r1212(stencil.h, |di, dj| {
        metrics[((di + 1) * 3 + (dj + 1)) as usize].clone()
    })?;

    let md = model.metric_at(&c.point())?;
    let (_, g_inv) = induced_metric(c, &md)?;
    let a = second_fundamental_form_with(c, &md, &g_inv);
    let (a11, a22, a12) = (a.vector(0, 0), a.vector(1, 1), a.vector(0, 1));
    let rhs = product_inner(&md, 2, &a11, &a22) - product_inner(&md, 2, &a12, &a12);
    Ok((rm - rhs).abs())
}
