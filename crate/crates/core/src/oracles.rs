//! Closed-form solutions of the flow for curves in the hyperbolic plane.
//!
//! * `hs1`: the horizontal line `(x, d(t))` in the upper half-plane drifting
//!   to infinity, `d(t) = sqrt(W(exp(2(t - t0))))`.
//! * `hs2`: the centred circle `r(t)(sin x, cos x)` in the Poincaré disk
//!   shrinking to the origin.
//! * `hs3a`, `hs3b`: constant-speed geodesics, stationary under the flow.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graphgeom::MapJet;
use crate::manifold::{ChartPoint, ManifoldModel};

/// Above this exponent `W(e^z)` is computed from `w + ln w = z` directly,
/// since `e^z` overflows shortly after.
pub const LAMBERT_EXP_SWITCH: f64 = 700.0;

/// Principal branch of the Lambert W function for `x >= 0`.
///
/// Halley iteration on `w e^w = x` from `ln(1 + x)`; for very large `x` the
/// equivalent `w + ln w = ln x` is solved instead to avoid overflow.
pub fn lambert_w(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    if x > 1e300 {
        return lambert_w_log(x.ln());
    }
    let mut w = x.ln_1p();
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    w
}

/// Solves `w + ln w = z` for `w > 0` (i.e. `w = W(e^z)`), intended for
/// large `z`.
fn lambert_w_log(z: f64) -> f64 {
    let mut w = if z > 1.0 { z - z.ln() } else { 1.0 };
    for _ in 0..64 {
        let step = (w + w.ln() - z) / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    w
}

/// `W(e^z)` for any real `z`.
pub fn lambert_w_exp(z: f64) -> f64 {
    if z > LAMBERT_EXP_SWITCH {
        lambert_w_log(z)
    } else {
        lambert_w(z.exp())
    }
}

/// Height of the drifting line: `d(t) = sqrt(W(exp(2(t - t0))))`.
pub fn hs1_d(t: f64, t0: f64) -> f64 {
    lambert_w_exp(2.0 * (t - t0)).sqrt()
}

/// `t0` such that `hs1_d(0, t0) = d0`, from `t - t0 = ½ ln(d² e^{d²})`.
pub fn hs1_t0_for(d0: f64) -> f64 {
    -(d0.ln() + 0.5 * d0 * d0)
}

/// `‖H‖² = 1/(1 + d²)²` along the drifting line.
pub fn hs1_h_norm2(d: f64) -> f64 {
    1.0 / (1.0 + d * d).powi(2)
}

/// Radius of the shrinking circle, in a cancellation-free form.
pub fn hs2_r(t: f64, c1: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        2.0 * e / (c1 + (c1 * c1 + 4.0 * e * e).sqrt())
    } else {
        let x = c1 * t.exp();
        2.0 / ((x * x + 4.0).sqrt() + x)
    }
}

/// `c1` such that `hs2_r(0, c1) = r0`.
pub fn hs2_c1_for(r0: f64) -> f64 {
    (1.0 - r0 * r0) / r0
}

/// `‖H‖² = 4r²/(1 + r²)²` along the shrinking circle.
pub fn hs2_h_norm2(r: f64) -> f64 {
    4.0 * r * r / (1.0 + r * r).powi(2)
}

/// Right-hand side of the reduced ODE `d' = d/(1 + d²)`.
pub fn hs1_rhs(d: f64) -> f64 {
    d / (1.0 + d * d)
}

/// Right-hand side of the reduced ODE `r' = -r(1 - r²)/(1 + r²)`.
pub fn hs2_rhs(r: f64) -> f64 {
    -r * (1.0 - r * r) / (1.0 + r * r)
}

/// Identifier of a closed-form example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleId {
    Hs1,
    Hs2,
    Hs3a,
    Hs3b,
}

impl ExampleId {
    pub const ALL: [ExampleId; 4] = [
        ExampleId::Hs1,
        ExampleId::Hs2,
        ExampleId::Hs3a,
        ExampleId::Hs3b,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExampleId::Hs1 => "hs1",
            ExampleId::Hs2 => "hs2",
            ExampleId::Hs3a => "hs3a",
            ExampleId::Hs3b => "hs3b",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hs1" => Ok(ExampleId::Hs1),
            "hs2" => Ok(ExampleId::Hs2),
            "hs3a" => Ok(ExampleId::Hs3a),
            "hs3b" => Ok(ExampleId::Hs3b),
            other => Err(Error::Config(format!("unknown oracle id `{other}`"))),
        }
    }
}

/// A closed-form example with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExampleSpec {
    Hs1 { t0: f64 },
    Hs2 { c1: f64 },
    Hs3a { x0: f64, c: f64 },
    Hs3b { c: f64 },
}

impl ExampleSpec {
    pub fn id(&self) -> ExampleId {
        match self {
            ExampleSpec::Hs1 { .. } => ExampleId::Hs1,
            ExampleSpec::Hs2 { .. } => ExampleId::Hs2,
            ExampleSpec::Hs3a { .. } => ExampleId::Hs3a,
            ExampleSpec::Hs3b { .. } => ExampleId::Hs3b,
        }
    }

    /// Builds a spec from named parameters, filling defaults.
    ///
    /// * `hs1`: `t0`, or `d0` (default 1) from which `t0` is derived.
    /// * `hs2`: `c1`, or `r0` (default 0.3) from which `c1` is derived.
    /// * `hs3a`: `x0` (default 0), `c` (default 0.5).
    /// * `hs3b`: `c` (default 0.5).
    pub fn from_params(id: ExampleId, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match id {
            ExampleId::Hs1 => &["t0", "d0"],
            ExampleId::Hs2 => &["c1", "r0"],
            ExampleId::Hs3a => &["x0", "c"],
            ExampleId::Hs3b => &["c"],
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "unknown parameter `{k}` for oracle {id}"
            )));
        }
        let get = |k: &str| params.get(k).copied();
        let spec = match id {
            ExampleId::Hs1 => ExampleSpec::Hs1 {
                t0: match (get("t0"), get("d0")) {
                    (Some(t0), None) => t0,
                    (None, d0) => {
                        let d0 = d0.unwrap_or(1.0);
                        if !(d0 > 0.0) {
                            return Err(Error::Config("hs1 needs d0 > 0".into()));
                        }
                        hs1_t0_for(d0)
                    }
                    _ => return Err(Error::Config("hs1 takes either t0 or d0, not both".into())),
                },
            },
            ExampleId::Hs2 => ExampleSpec::Hs2 {
                c1: match (get("c1"), get("r0")) {
                    (Some(c1), None) => c1,
                    (None, r0) => {
                        let r0 = r0.unwrap_or(0.3);
                        if !(r0 > 0.0 && r0 < 1.0) {
                            return Err(Error::Config("hs2 needs 0 < r0 < 1".into()));
                        }
                        hs2_c1_for(r0)
                    }
                    _ => return Err(Error::Config("hs2 takes either c1 or r0, not both".into())),
                },
            },
            ExampleId::Hs3a => ExampleSpec::Hs3a {
                x0: get("x0").unwrap_or(0.0),
                c: get("c").unwrap_or(0.5),
            },
            ExampleId::Hs3b => ExampleSpec::Hs3b {
                c: get("c").unwrap_or(0.5),
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ExampleSpec::Hs1 { t0 } if !t0.is_finite() => {
                Err(Error::Config("hs1 t0 must be finite".into()))
            }
            ExampleSpec::Hs2 { c1 } if !(c1 > 0.0 && c1.is_finite()) => {
                Err(Error::Config(format!("hs2 needs c1 > 0, got {c1}")))
            }
            ExampleSpec::Hs3a { c, .. } | ExampleSpec::Hs3b { c } if !(0.0..=1.0).contains(&c) => {
                Err(Error::Config(format!("hs3 needs 0 <= c <= 1, got {c}")))
            }
            _ => Ok(()),
        }
    }

    /// Named parameters, the inverse of [`ExampleSpec::from_params`].
    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut p = BTreeMap::new();
        match *self {
            ExampleSpec::Hs1 { t0 } => {
                p.insert("t0".into(), t0);
            }
            ExampleSpec::Hs2 { c1 } => {
                p.insert("c1".into(), c1);
            }
            ExampleSpec::Hs3a { x0, c } => {
                p.insert("x0".into(), x0);
                p.insert("c".into(), c);
            }
            ExampleSpec::Hs3b { c } => {
                p.insert("c".into(), c);
            }
        }
        p
    }

    /// Target model the example lives in.
    pub fn model(&self) -> ManifoldModel {
        match self {
            ExampleSpec::Hs1 { .. } | ExampleSpec::Hs3a { .. } => ManifoldModel::upper_half_plane(),
            ExampleSpec::Hs2 { .. } | ExampleSpec::Hs3b { .. } => ManifoldModel::poincare_disk(),
        }
    }

    /// The scalar parameter of the reduced ODE (`d` or `r`), if any.
    pub fn scalar(&self, t: f64) -> Option<f64> {
        match *self {
            ExampleSpec::Hs1 { t0 } => Some(hs1_d(t, t0)),
            ExampleSpec::Hs2 { c1 } => Some(hs2_r(t, c1)),
            _ => None,
        }
    }

    /// Closed-form `f(x, t)`.
    pub fn eval(&self, x: f64, t: f64) -> Vec<f64> {
        self.jet(x, t).value
    }

    /// Exact 2-jet of `f(·, t)` at `x`.
    pub fn jet(&self, x: f64, t: f64) -> MapJet {
        let (value, d1, d2) = match *self {
            ExampleSpec::Hs1 { t0 } => (vec![x, hs1_d(t, t0)], vec![1.0, 0.0], vec![0.0, 0.0]),
            ExampleSpec::Hs2 { c1 } => {
                let r = hs2_r(t, c1);
                let (s, c) = x.sin_cos();
                (
                    vec![r * s, r * c],
                    vec![r * c, -r * s],
                    vec![-r * s, -r * c],
                )
            }
            ExampleSpec::Hs3a { x0, c } => {
                let e = (c * x).exp();
                (vec![x0, e], vec![0.0, c * e], vec![0.0, c * c * e])
            }
            ExampleSpec::Hs3b { c } => {
                let th = (0.5 * c * x).tanh();
                let sech2 = 1.0 - th * th;
                (
                    vec![th, 0.0],
                    vec![0.5 * c * sech2, 0.0],
                    vec![-0.5 * c * c * th * sech2, 0.0],
                )
            }
        };
        MapJet {
            m: 1,
            n: 2,
            value,
            d1,
            d2,
        }
    }
}

/// Stationary geodesic maps `(x0, e^{cx})` and `(tanh(cx/2), 0)`.
pub fn hs3_map(spec: &ExampleSpec, x: f64) -> Result<ChartPoint> {
    match spec {
        ExampleSpec::Hs3a { .. } | ExampleSpec::Hs3b { .. } => {
            Ok(ChartPoint::new(spec.eval(x, 0.0)))
        }
        _ => Err(Error::Domain(format!(
            "{} is not a stationary example",
            spec.id()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphgeom::{mcf_velocity, pullback};

    fn bisect_w(x: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, x.max(1.0));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() > x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lambert_w_examples() {
        assert_eq!(lambert_w(0.0), 0.0);
        assert!((lambert_w(std::f64::consts::E) - 1.0).abs() < 1e-14);
        let w1 = lambert_w(1.0);
        assert!((w1 - bisect_w(1.0)).abs() < 1e-12);
        assert!((w1 - 0.567143290409784).abs() < 1e-12);
        assert!(lambert_w(-1.0).is_nan());
    }

    #[test]
    fn lambert_w_round_trip_on_log_grid() {
        for k in 0..=120 {
            let x = 10f64.powf(-6.0 + 12.0 * k as f64 / 120.0);
            let w = lambert_w(x);
            assert!((w * w.exp() - x).abs() <= 1e-12 * x.max(1.0), "x = {x}");
        }
    }

    #[test]
    fn lambert_w_exp_is_continuous_across_switch() {
        let below = lambert_w_exp(LAMBERT_EXP_SWITCH - 1e-9);
        let above = lambert_w_exp(LAMBERT_EXP_SWITCH + 1e-9);
        assert!((below - above).abs() < 1e-8);
        for z in [701.0, 1e3, 1e5] {
            let w = lambert_w_exp(z);
            assert!((w + w.ln() - z).abs() <= 1e-12 * z);
        }
    }

    #[test]
    fn hs1_implicit_relation_round_trip() {
        let t0 = 0.25;
        for d in [0.5f64, 1.0, 2.0] {
            let t = t0 + 0.5 * (d * d * (d * d).exp()).ln();
            assert!((hs1_d(t, t0) - d).abs() < 1e-11);
        }
        // t = t0 - 1/2: d² e^{d²} = e^{-1}
        let d = hs1_d(-0.5, 0.0);
        let target = (-1.0f64).exp();
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid * (mid * mid).exp() > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((d - lo).abs() < 1e-12);
        assert!((hs1_t0_for(1.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn hs1_is_monotone_and_unbounded() {
        let mut prev = 0.0;
        for k in 0..200 {
            let d = hs1_d(k as f64 * 0.5, 0.0);
            assert!(d > prev);
            prev = d;
        }
        assert!(hs1_d(1e4, 0.0) > 100.0);
    }

    #[test]
    fn closed_forms_satisfy_their_odes() {
        let h = 1e-5;
        let (t0, c1) = (-0.5, hs2_c1_for(0.3));
        for k in 0..=100 {
            let t = 0.1 * k as f64;
            let dd = (hs1_d(t + h, t0) - hs1_d(t - h, t0)) / (2.0 * h);
            assert!((dd - hs1_rhs(hs1_d(t, t0))).abs() < 1e-8);
            let dr = (hs2_r(t + h, c1) - hs2_r(t - h, c1)) / (2.0 * h);
            assert!((dr - hs2_rhs(hs2_r(t, c1))).abs() < 1e-8);
        }
    }

    #[test]
    fn hs1_norm_examples() {
        assert_eq!(hs1_h_norm2(1.0), 0.25);
        assert!(hs1_h_norm2(1e8) < 1e-30);
        // t‖H‖ → 1/2; over a long window it stays within [0.2, 0.6]
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for k in 0..=1000 {
            let t = 5.0 + k as f64;
            let v = t * hs1_h_norm2(hs1_d(t, -0.5)).sqrt();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        assert!(lo > 0.2 && hi < 0.6, "[{lo}, {hi}]");
    }

    #[test]
    fn hs2_examples() {
        for r0 in [0.05, 0.3, 0.41, 0.9] {
            assert!((hs2_r(0.0, hs2_c1_for(r0)) - r0).abs() < 1e-15);
        }
        let c1 = hs2_c1_for(0.3);
        assert!(hs2_r(800.0, c1) < 1e-300);
        for k in 0..=200 {
            let t = 0.05 * k as f64;
            let r = hs2_r(t, c1);
            assert!(r > 0.0 && r < 1.0);
            assert!(r <= 1.0 / (c1 * t.exp()));
            assert!(hs2_h_norm2(r) <= 4.0 * r * r);
        }
        assert_eq!(hs2_h_norm2(0.0), 0.0);
        assert!((hs2_h_norm2(0.3) - 0.303005).abs() < 1e-6);
        // the two closed forms agree where both are stable
        let direct = 0.5 * ((c1 * c1 * 2f64.exp() + 4.0).sqrt() - c1 * 1f64.exp());
        assert!((hs2_r(1.0, c1) - direct).abs() < 1e-15);
    }

    #[test]
    fn hs3_maps() {
        let a = ExampleSpec::Hs3a { x0: 0.7, c: 0.0 };
        assert_eq!(hs3_map(&a, 3.0).unwrap().coords, vec![0.7, 1.0]);
        let a = ExampleSpec::Hs3a { x0: 0.7, c: 0.5 };
        assert_eq!(hs3_map(&a, 0.0).unwrap().coords, vec![0.7, 1.0]);
        let b = ExampleSpec::Hs3b { c: 0.5 };
        for spec in [a, b] {
            let model = spec.model();
            for x in [-3.0, -0.5, 0.0, 1.0, 2.5] {
                let jet = spec.jet(x, 0.0);
                let md = model.metric_at(&jet.point()).unwrap();
                assert!((pullback(&jet, &md)[(0, 0)] - 0.25).abs() < 1e-14);
                let v = mcf_velocity(&jet, &model).unwrap();
                assert!(v.iter().all(|c| c.abs() < 1e-14));
            }
        }
        assert!(hs3_map(&ExampleSpec::Hs2 { c1: 1.0 }, 0.0).is_err());
    }

    #[test]
    fn params_round_trip_and_validation() {
        for id in ExampleId::ALL {
            let spec = ExampleSpec::from_params(id, &BTreeMap::new()).unwrap();
            assert_eq!(ExampleSpec::from_params(id, &spec.params()).unwrap(), spec);
            assert_eq!(id.as_str().parse::<ExampleId>().unwrap(), id);
        }
        let mut p = BTreeMap::new();
        p.insert("c".to_string(), 1.5);
        assert!(ExampleSpec::from_params(ExampleId::Hs3b, &p).is_err());
        p.clear();
        p.insert("bogus".to_string(), 1.0);
        assert!(ExampleSpec::from_params(ExampleId::Hs2, &p).is_err());
        assert!("hs9".parse::<ExampleId>().is_err());
    }
}
