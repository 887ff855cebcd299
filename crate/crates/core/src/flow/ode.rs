use crate::error::{Error, Result};
use crate::oracles::{hs1_rhs, hs2_rhs};

/// Examples whose flow reduces to a scalar ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeExample {
    /// Height `d` of a horizontal line in the half-plane, `d > 0`.
    Hs1,
    /// Radius `r` of a centred circle in the disk, `0 < r < 1`.
    Hs2,
}

impl OdeExample {
    fn rhs(self, y: f64) -> f64 {
        match self {
            OdeExample::Hs1 => hs1_rhs(y),
            OdeExample::Hs2 => hs2_rhs(y),
        }
    }

    fn in_range(self, y: f64) -> bool {
        match self {
            OdeExample::Hs1 => y > 0.0 && y.is_finite(),
            OdeExample::Hs2 => y > 0.0 && y < 1.0,
        }
    }
}

/// Samples `(t_k, y_k)` of an integrated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
}

/// Integrates the reduced ODE with classical RK4 from `t = 0`. The step is
/// `t_end / ceil(t_end / dt)`, so the last sample lands on `t_end`.
pub fn reduce_ode(example: OdeExample, y0: f64, t_end: f64, dt: f64) -> Result<Trajectory> {
    if !example.in_range(y0) {
        return Err(Error::RangeViolation(format!(
            "initial value {y0} outside the valid range of {example:?}"
        )));
    }
    if !(dt > 0.0 && t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!(
            "need dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 {
        0.0
    } else {
        t_end / steps as f64
    };
    let mut t = Vec::with_capacity(steps + 1);
    let mut y = Vec::with_capacity(steps + 1);
    t.push(0.0);
    y.push(y0);
    let mut cur = y0;
    for k in 1..=steps {
        let k1 = example.rhs(cur);
        let k2 = example.rhs(cur + 0.5 * h * k1);
        let k3 = example.rhs(cur + 0.5 * h * k2);
        let k4 = example.rhs(cur + h * k3);
        cur += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let tk = k as f64 * h;
        if !example.in_range(cur) {
            return Err(Error::RangeViolation(format!(
                "{example:?} left its valid range at t = {tk}: {cur}"
            )));
        }
        t.push(tk);
        y.push(cur);
    }
    Ok(Trajectory { t, y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{hs1_d, hs1_t0_for, hs2_c1_for, hs2_r};

    #[test]
    fn initial_slopes() {
        assert_eq!(OdeExample::Hs1.rhs(1.0), 0.5);
        assert!((OdeExample::Hs2.rhs(0.3) + 0.3 * 0.91 / 1.09).abs() < 1e-15);
        assert!((OdeExample::Hs2.rhs(0.3) + 0.250459).abs() < 1e-6);
    }

    #[test]
    fn matches_closed_forms() {
        let tr = reduce_ode(OdeExample::Hs1, 1.0, 10.0, 1e-3).unwrap();
        assert_eq!(tr.t.len(), 10_001);
        assert_eq!(*tr.t.last().unwrap(), 10.0);
        let t0 = hs1_t0_for(1.0);
        let err =
            tr.t.iter()
                .zip(&tr.y)
                .map(|(&t, &y)| (y - hs1_d(t, t0)).abs())
                .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");

        let tr = reduce_ode(OdeExample::Hs2, 0.3, 10.0, 1e-3).unwrap();
        let c1 = hs2_c1_for(0.3);
        let err =
            tr.t.iter()
                .zip(&tr.y)
                .map(|(&t, &y)| (y - hs2_r(t, c1)).abs())
                .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!(tr.y.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn fourth_order() {
        let t0 = hs1_t0_for(1.0);
        let e = |dt: f64| {
            let tr = reduce_ode(OdeExample::Hs1, 1.0, 2.0, dt).unwrap();
            (tr.y.last().unwrap() - hs1_d(2.0, t0)).abs()
        };
        let order = (e(0.2) / e(0.1)).log2();
        assert!(order > 3.7, "{order}");
    }

    #[test]
    fn range_violations() {
        assert!(matches!(
            reduce_ode(OdeExample::Hs2, 1.2, 1.0, 1e-3),
            Err(Error::RangeViolation(_))
        ));
        assert!(matches!(
            reduce_ode(OdeExample::Hs1, -1.0, 1.0, 1e-3),
            Err(Error::RangeViolation(_))
        ));
        // a huge step overshoots r through zero
        assert!(matches!(
            reduce_ode(OdeExample::Hs2, 0.3, 20.0, 10.0),
            Err(Error::RangeViolation(_))
        ));
        let tr = reduce_ode(OdeExample::Hs2, 0.3, 0.0, 1e-3).unwrap();
        assert_eq!(tr.y, vec![0.3]);
    }
}
