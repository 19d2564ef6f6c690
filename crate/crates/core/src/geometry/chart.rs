//! Boundary-fitted coordinates `F(s, t) = b(s) - t n(s)` in a collar of one wall.

use std::sync::Arc;

use super::curve::BoundaryCurve;
use crate::error::{Error, Result};

/// A scalar field in chart coordinates: value, `d/ds`, `d/dt`.
pub type ChartField<'a> = &'a dyn Fn(f64, f64) -> [f64; 3];

/// Tubular chart of depth `delta` attached to one wall.
#[derive(Debug, Clone)]
pub struct CurvilinearChart {
    curve: Arc<BoundaryCurve>,
    delta: f64,
}

impl CurvilinearChart {
    pub fn new(curve: Arc<BoundaryCurve>, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Parameter(format!("chart depth must be positive, got {delta}")));
        }
        Ok(Self { curve, delta })
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn check_depth(&self, t: f64) -> Result<()> {
        if t < 0.0 || t >= self.delta {
            return Err(Error::ChartDomain(format!("depth {t} outside [0, {})", self.delta)));
        }
        Ok(())
    }

    /// Unit basis `(e_s, e_t)`: wall tangent and inward normal.
    pub fn frame(&self, s: f64) -> ([f64; 2], [f64; 2]) {
        let p = self.curve.eval(s);
        (p.tangent, [-p.normal[0], -p.normal[1]])
    }

    /// `F(s, t)`.
    pub fn forward(&self, s: f64, t: f64) -> Result<[f64; 2]> {
        self.check_depth(t)?;
        let p = self.curve.eval(s);
        Ok([p.point[0] - t * p.normal[0], p.point[1] - t * p.normal[1]])
    }

    /// Columns `dF/ds`, `dF/dt`.
    pub fn jacobian(&self, s: f64, t: f64) -> Result<[[f64; 2]; 2]> {
        self.check_depth(t)?;
        let p = self.curve.eval(s);
        let stretch = 1.0 - t * p.kappa;
        Ok([[p.tangent[0] * stretch, p.tangent[1] * stretch], [-p.normal[0], -p.normal[1]]])
    }

    /// Orientation-corrected Jacobian determinant `1 - t kappa(s)`.
    pub fn jacobian_det(&self, s: f64, t: f64) -> Result<f64> {
        let j = self.jacobian(s, t)?;
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        Ok(det * self.curve.side().orientation())
    }

    /// `gamma = 1 / (1 - t kappa)`.
    pub fn gamma(&self, s: f64, t: f64) -> f64 {
        1.0 / (1.0 - t * self.curve.eval(s).kappa)
    }

    /// Curvature of the parallel curve at depth `t`: `kappa / (1 - t kappa)`.
    pub fn offset_curvature(&self, s: f64, t: f64) -> f64 {
        let k = self.curve.eval(s).kappa;
        k / (1.0 - t * k)
    }

    /// Chart coordinates of `x`; fails outside the collar.
    pub fn inverse(&self, x: [f64; 2]) -> Result<(f64, f64)> {
        let c = &*self.curve;
        let accept = |s: f64, t: f64| -> Option<(f64, f64)> {
            if t >= -1e-12 && t < self.delta {
                Some((s, t.max(0.0)))
            } else {
                None
            }
        };
        for (s_end, sign) in [(c.s_flat_left(), -1.0), (c.s_flat_right(), 1.0)] {
            let p = c.eval(s_end);
            let d = [x[0] - p.point[0], x[1] - p.point[1]];
            let along = d[0] * p.tangent[0] + d[1] * p.tangent[1];
            if along * sign >= 0.0 {
                let t = -(d[0] * p.normal[0] + d[1] * p.normal[1]);
                if let Some(r) = accept(s_end + along, t) {
                    return Ok(r);
                }
            }
        }
        let mut best = (f64::INFINITY, 0.0);
        for p in c.samples() {
            if p.s < c.s_flat_left() - 0.05 || p.s > c.s_flat_right() + 0.05 {
                continue;
            }
            let d2 = (x[0] - p.point[0]).powi(2) + (x[1] - p.point[1]).powi(2);
            if d2 < best.0 {
                best = (d2, p.s);
            }
        }
        let mut s = best.1;
        for _ in 0..60 {
            let p = c.eval(s);
            let d = [x[0] - p.point[0], x[1] - p.point[1]];
            let f = d[0] * p.tangent[0] + d[1] * p.tangent[1];
            let t = -(d[0] * p.normal[0] + d[1] * p.normal[1]);
            let ds = f / (1.0 - t * p.kappa);
            s += ds.clamp(-0.1, 0.1);
            if ds.abs() <= 1e-13 {
                break;
            }
        }
        let p = c.eval(s);
        let d = [x[0] - p.point[0], x[1] - p.point[1]];
        let t = -(d[0] * p.normal[0] + d[1] * p.normal[1]);
        let resid = (d[0] * p.tangent[0] + d[1] * p.tangent[1]).abs();
        match accept(s, t) {
            Some(r) if resid <= 1e-10 => Ok(r),
            _ => Err(Error::ChartDomain(format!("point ({}, {}) is not in the collar of depth {}", x[0], x[1], self.delta))),
        }
    }

    /// Divergence of `w = w_s e_s + w_t e_t`: `gamma d_s w_s + d_t w_t - kappa_t w_t`.
    pub fn curvilinear_div(&self, ws: ChartField, wt: ChartField, s: f64, t: f64) -> f64 {
        let k = self.curve.eval(s).kappa;
        let g = 1.0 / (1.0 - t * k);
        let a = ws(s, t);
        let b = wt(s, t);
        g * a[1] + b[2] - g * k * b[0]
    }

    /// Vorticity `d2 w1 - d1 w2` of `w = w_s e_s + w_t e_t`: `d_t w_s - gamma d_s w_t - kappa_t w_s`,
    /// with the sign reversed on the upper wall, whose chart is left-handed.
    pub fn curvilinear_curl(&self, ws: ChartField, wt: ChartField, s: f64, t: f64) -> f64 {
        let k = self.curve.eval(s).kappa;
        let g = 1.0 / (1.0 - t * k);
        let a = ws(s, t);
        let b = wt(s, t);
        self.curve.side().orientation() * (a[2] - g * b[1] - g * k * a[0])
    }
}
