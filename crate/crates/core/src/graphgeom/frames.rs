use super::{pullback, MapJet, RANK_THRESHOLD};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::manifold::MetricData;

/// Singular-value adapted frames of the graph at one point.
///
/// `tangent[i]` is `ẽ_i`, orthonormal for the product metric and ordered like
/// `lambda2` (ascending). `normal` lists first the `n - r` pure target
/// directions `0 ⊕ β`, then one normal per nonzero singular value. `pairs`
/// records `(tangent index, normal index)` for those rank directions.
#[derive(Debug, Clone)]
pub struct SvdFrames {
    pub lambda2: Vec<f64>,
    pub tangent: Vec<Vec<f64>>,
    pub normal: Vec<Vec<f64>>,
    pub pairs: Vec<(usize, usize)>,
}

/// Builds the adapted tangent and normal frames from the singular value
/// decomposition of `df`.
pub fn svd_frames(jet: &MapJet, metric: &MetricData) -> Result<SvdFrames> {
    let (m, n) = (jet.m, jet.n);
    if metric.dim() != n {
        return Err(Error::Dimension(format!(
            "jet target dim {n} vs metric dim {}",
            metric.dim()
        )));
    }
    let (vals, alphas) = symmetric_eigen(&pullback(jet, metric))?;
    let mut lambda2: Vec<f64> = vals.into_iter().map(|v| v.max(0.0)).collect();

    let gn = |u: &[f64], v: &[f64]| -> f64 {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += metric.g[(a, b)] * u[a] * v[b];
            }
        }
        s
    };

    let mut tangent = Vec::with_capacity(m);
    // (tangent index, β) for directions in the rank of df
    let mut rank_dirs: Vec<(usize, Vec<f64>)> = Vec::new();
    for i in 0..m {
        let alpha = alphas.column(i);
        let image: Vec<f64> = (0..n)
            .map(|a| (0..m).map(|k| jet.df(a, k) * alpha[k]).sum())
            .collect();
        if lambda2[i] > RANK_THRESHOLD {
            // |df α|² is relatively accurate even where the eigenvalue is not
            lambda2[i] = gn(&image, &image);
        }
        let l2 = lambda2[i];
        let scale = 1.0 / (1.0 + l2).sqrt();
        let mut e = vec![0.0; m + n];
        for k in 0..m {
            e[k] = alpha[k] * scale;
        }
        if l2 > RANK_THRESHOLD {
            for a in 0..n {
                e[m + a] = image[a] * scale;
            }
            let lam = l2.sqrt();
            rank_dirs.push((i, image.iter().map(|x| x / lam).collect()));
        }
        tangent.push(e);
    }

    // complete the β's of the rank directions to a g_N-orthonormal basis
    let mut basis: Vec<Vec<f64>> = rank_dirs.iter().map(|(_, b)| b.clone()).collect();
    let mut pure: Vec<Vec<f64>> = Vec::new();
    let mut candidates: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            let mut e = vec![0.0; n];
            e[a] = 1.0;
            e
        })
        .collect();
    while pure.len() + rank_dirs.len() < n {
        // choose the candidate with the largest residual for stability
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for (ci, c) in candidates.iter().enumerate() {
            let mut r = c.clone();
            for _ in 0..2 {
                for b in &basis {
                    let p = gn(&r, b);
                    r.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
                }
            }
            let nr = gn(&r, &r).sqrt();
            if best.as_ref().map_or(true, |(_, _, bn)| nr > *bn) {
                best = Some((ci, r, nr));
            }
        }
        let (ci, r, nr) = best.ok_or(Error::EigenFailure)?;
        if !(nr > 1e-10) {
            return Err(Error::EigenFailure);
        }
        let beta: Vec<f64> = r.iter().map(|x| x / nr).collect();
        candidates.remove(ci);
        basis.push(beta.clone());
        pure.push(beta);
    }

    let mut normal = Vec::with_capacity(n);
    for beta in &pure {
        let mut xi = vec![0.0; m + n];
        xi[m..].copy_from_slice(beta);
        normal.push(xi);
    }
    let mut pairs = Vec::with_capacity(rank_dirs.len());
    for (i, beta) in &rank_dirs {
        let l2 = lambda2[*i];
        let lam = l2.sqrt();
        let scale = 1.0 / (1.0 + l2).sqrt();
        let alpha = alphas.column(*i);
        let mut xi = vec![0.0; m + n];
        for k in 0..m {
            xi[k] = -lam * alpha[k] * scale;
        }
        for a in 0..n {
            xi[m + a] = beta[a] * scale;
        }
        pairs.push((*i, normal.len()));
        normal.push(xi);
    }
    Ok(SvdFrames {
        lambda2,
        tangent,
        normal,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphgeom::{product_inner, product_s};
    use crate::manifold::ManifoldModel;
    use nalgebra::DMatrix;

    fn gram(metric: &MetricData, m: usize, vs: &[Vec<f64>]) -> DMatrix<f64> {
        let k = vs.len();
        DMatrix::from_fn(k, k, |a, b| product_inner(metric, m, &vs[a], &vs[b]))
    }

    fn euclid_metric(n: usize) -> MetricData {
        ManifoldModel::euclidean(n)
            .metric_at(&vec![0.0; n].into())
            .unwrap()
    }

    #[test]
    fn zero_jet_frames_are_coordinate_axes() {
        let jet = MapJet::constant(1, vec![0.0, 0.0]);
        let md = euclid_metric(2);
        let fr = svd_frames(&jet, &md).unwrap();
        assert_eq!(fr.tangent, vec![vec![1.0, 0.0, 0.0]]);
        assert_eq!(fr.normal, vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let vals: Vec<f64> = fr.normal.iter().map(|x| product_s(&md, 1, x, x)).collect();
        assert_eq!(vals, vec![-1.0, -1.0]);
        assert!(fr.pairs.is_empty());
    }

    #[test]
    fn one_by_one_with_lambda2_one_third() {
        let l = (1.0f64 / 3.0).sqrt();
        let jet = MapJet::new(1, 1, vec![0.0], vec![l], vec![0.0]).unwrap();
        let md = euclid_metric(1);
        let fr = svd_frames(&jet, &md).unwrap();
        let xi = &fr.normal[0];
        assert!((product_s(&md, 1, xi, xi) + 0.5).abs() < 1e-15);
        let (ti, ni) = fr.pairs[0];
        let mixed = product_s(&md, 1, &fr.tangent[ti], &fr.normal[ni]);
        let l2: f64 = 1.0 / 3.0;
        assert!((mixed + 2.0 * l2.sqrt() / (1.0 + l2)).abs() < 1e-14);
    }

    #[test]
    fn isometric_direction_mixed_value_is_minus_one() {
        let jet = MapJet::new(1, 2, vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        let md = euclid_metric(2);
        let fr = svd_frames(&jet, &md).unwrap();
        let (ti, ni) = fr.pairs[0];
        assert!((product_s(&md, 1, &fr.tangent[ti], &fr.normal[ni]) + 1.0).abs() < 1e-15);
        let g = gram(&md, 1, &[fr.tangent.clone(), fr.normal.clone()].concat());
        assert!((g - DMatrix::identity(3, 3)).amax() < 1e-15);
        assert!(product_inner(&md, 1, &fr.tangent[0], &fr.normal[0]).abs() < 1e-15);
    }
}
