use super::{BoundaryCondition, FlowState, Grid};
use crate::error::{Error, Result};
use crate::graphgeom::MapJet;
use crate::manifold::{ManifoldModel, MAX_TARGET_DIM};

/// Read access to a field on the grid, with ghost values from the boundary
/// condition at time `t`.
#[derive(Clone, Copy)]
pub(crate) struct Sampler<'a> {
    pub grid: &'a Grid,
    pub model: &'a ManifoldModel,
    pub bc: &'a BoundaryCondition,
    pub n: usize,
    pub f: &'a [f64],
    pub t: f64,
}

impl<'a> Sampler<'a> {
    pub fn of(state: &'a FlowState) -> Self {
        Self {
            grid: &state.grid,
            model: &state.model,
            bc: &state.bc,
            n: state.n,
            f: &state.f,
            t: state.t,
        }
    }

    /// Value at a possibly out-of-range multi-index.
    pub fn value(&self, idx: [isize; 2], out: &mut [f64]) -> Result<()> {
        let grid = self.grid;
        let mut idx = idx;
        for k in 0..grid.m {
            let nk = grid.points[k] as isize;
            if (0..nk).contains(&idx[k]) {
                continue;
            }
            if grid.periodic[k] {
                idx[k] = idx[k].rem_euclid(nk);
                continue;
            }
            return match self.bc {
                BoundaryCondition::DirichletOracle(spec) => {
                    let v = spec.eval(grid.node(0, idx[0]), self.t);
                    self.ghost_in_chart(&v)?;
                    out[..self.n].copy_from_slice(&v);
                    Ok(())
                }
                BoundaryCondition::LinearExtrapolation | BoundaryCondition::Periodic => {
                    let (a, b, w) = if idx[k] < 0 {
                        (0, 1, -idx[k])
                    } else {
                        (nk - 1, nk - 2, idx[k] - nk + 1)
                    };
                    let (mut va, mut vb) = ([0.0; MAX_TARGET_DIM], [0.0; MAX_TARGET_DIM]);
                    let (mut ia, mut ib) = (idx, idx);
                    ia[k] = a;
                    ib[k] = b;
                    self.value(ia, &mut va)?;
                    self.value(ib, &mut vb)?;
                    let w = w as f64;
                    for c in 0..self.n {
                        out[c] = (1.0 + w) * va[c] - w * vb[c];
                    }
                    self.ghost_in_chart(&out[..self.n])
                }
            };
        }
        let p = grid.flat([idx[0] as usize, idx[1] as usize]);
        out[..self.n].copy_from_slice(&self.f[p * self.n..(p + 1) * self.n]);
        Ok(())
    }

    fn ghost_in_chart(&self, v: &[f64]) -> Result<()> {
        if self.model.chart_contains(v, 0.0) {
            Ok(())
        } else {
            Err(Error::ChartViolation {
                model: self.model.to_string(),
                coords: v.to_vec(),
            })
        }
    }

    /// Second-order central-difference 2-jet at grid point `p`.
    pub fn fill_jet(
        &self,
        p: usize,
        value: &mut [f64],
        d1: &mut [f64],
        d2: &mut [f64],
    ) -> Result<()> {
        let grid = self.grid;
        let (m, n) = (grid.m, self.n);
        let [i0, i1] = grid.multi(p).map(|v| v as isize);
        value[..n].copy_from_slice(&self.f[p * n..(p + 1) * n]);
        let mut fm = [0.0; MAX_TARGET_DIM];
        let mut fp = [0.0; MAX_TARGET_DIM];
        if m == 1 {
            let h = grid.spacing(0);
            self.value([i0 - 1, 0], &mut fm)?;
            self.value([i0 + 1, 0], &mut fp)?;
            for a in 0..n {
                d1[a] = (fp[a] - fm[a]) / (2.0 * h);
                d2[a] = (fp[a] - 2.0 * value[a] + fm[a]) / (h * h);
            }
            return Ok(());
        }
        let h = [grid.spacing(0), grid.spacing(1)];
        for k in 0..2 {
            let (mut im, mut ip) = ([i0, i1], [i0, i1]);
            im[k] -= 1;
            ip[k] += 1;
            self.value(im, &mut fm)?;
            self.value(ip, &mut fp)?;
            for a in 0..n {
                d1[a * 2 + k] = (fp[a] - fm[a]) / (2.0 * h[k]);
                d2[(a * 2 + k) * 2 + k] = (fp[a] - 2.0 * value[a] + fm[a]) / (h[k] * h[k]);
            }
        }
        let mut corner = [[0.0; MAX_TARGET_DIM]; 4];
        for (c, (s0, s1)) in [(1, 1), (1, -1), (-1, 1), (-1, -1)].into_iter().enumerate() {
            self.value([i0 + s0, i1 + s1], &mut corner[c])?;
        }
        for a in 0..n {
            let mixed =
                (corner[0][a] - corner[1][a] - corner[2][a] + corner[3][a]) / (4.0 * h[0] * h[1]);
            d2[(a * 2) * 2 + 1] = mixed;
            d2[(a * 2 + 1) * 2] = mixed;
        }
        Ok(())
    }
}

/// Finite-difference 2-jet of the state at a grid multi-index.
pub fn spatial_jet(state: &FlowState, index: &[usize]) -> Result<MapJet> {
    let grid = &state.grid;
    if index.len() != grid.m || index.iter().zip(&grid.points).any(|(i, n)| i >= n) {
        return Err(Error::Dimension(format!(
            "index {index:?} outside grid {:?}",
            grid.points
        )));
    }
    let mut idx = [0usize; 2];
    idx[..grid.m].copy_from_slice(index);
    let p = grid.flat(idx);
    let (m, n) = (grid.m, state.n);
    let mut value = vec![0.0; n];
    let mut d1 = vec![0.0; n * m];
    let mut d2 = vec![0.0; n * m * m];
    Sampler::of(state).fill_jet(p, &mut value, &mut d1, &mut d2)?;
    Ok(MapJet {
        m,
        n,
        value,
        d1,
        d2,
    })
}
