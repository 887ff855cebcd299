use crate::error::{Error, Result};

/// Uniform grid on a box in `ℝ^m`, `m ∈ {1, 2}`.
///
/// Axis `k` has nodes `lo[k] + i h_k` for `i = 0..points[k]` with
/// `h_k = (hi[k] - lo[k]) / points[k]`; the upper end is never a node. Points
/// are stored row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub m: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub points: Vec<usize>,
    pub periodic: Vec<bool>,
}

pub const MIN_POINTS: usize = 8;

impl Grid {
    pub fn new(
        lo: Vec<f64>,
        hi: Vec<f64>,
        points: Vec<usize>,
        periodic: Vec<bool>,
    ) -> Result<Self> {
        let m = lo.len();
        if !(1..=2).contains(&m) {
            return Err(Error::Config(format!(
                "grid dimension must be 1 or 2, got {m}"
            )));
        }
        if hi.len() != m || points.len() != m || periodic.len() != m {
            return Err(Error::Config(
                "grid extents, points and periodicity must have equal length".into(),
            ));
        }
        for k in 0..m {
            if !(lo[k].is_finite() && hi[k].is_finite() && hi[k] > lo[k]) {
                return Err(Error::Config(format!(
                    "axis {k}: need lo < hi, got [{}, {}]",
                    lo[k], hi[k]
                )));
            }
            if points[k] < MIN_POINTS {
                return Err(Error::Config(format!(
                    "axis {k}: need at least {MIN_POINTS} points, got {}",
                    points[k]
                )));
            }
        }
        Ok(Self {
            m,
            lo,
            hi,
            points,
            periodic,
        })
    }

    /// One-dimensional grid.
    pub fn line(lo: f64, hi: f64, points: usize, periodic: bool) -> Result<Self> {
        Self::new(vec![lo], vec![hi], vec![points], vec![periodic])
    }

    /// Square two-dimensional grid with equal axes.
    pub fn square(lo: f64, hi: f64, points: usize, periodic: bool) -> Result<Self> {
        Self::new(vec![lo; 2], vec![hi; 2], vec![points; 2], vec![periodic; 2])
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.points[axis] as f64
    }

    pub fn h_min(&self) -> f64 {
        (0..self.m)
            .map(|k| self.spacing(k))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of flat index `p` (unused axes are 0).
    pub fn multi(&self, p: usize) -> [usize; 2] {
        if self.m == 1 {
            [p, 0]
        } else {
            [p / self.points[1], p % self.points[1]]
        }
    }

    pub fn flat(&self, idx: [usize; 2]) -> usize {
        if self.m == 1 {
            idx[0]
        } else {
            idx[0] * self.points[1] + idx[1]
        }
    }

    /// Coordinate of a (possibly out-of-range) node along one axis.
    pub fn node(&self, axis: usize, i: isize) -> f64 {
        self.lo[axis] + i as f64 * self.spacing(axis)
    }

    /// Coordinates of grid point `p` (unused axes are 0).
    pub fn coords(&self, p: usize) -> [f64; 2] {
        let idx = self.multi(p);
        let mut x = [0.0; 2];
        for k in 0..self.m {
            x[k] = self.node(k, idx[k] as isize);
        }
        x
    }
}
