//! Divergence-free flux carrier: a field with flux `phi` that equals the Poiseuille profiles
//! far out in both ends, satisfies the slip condition and is concentrated in a thin layer
//! along the lower wall of the distorted part.

mod probe;
mod sigma;

pub use probe::{trilinear_smallness_probe, ProbeReport, StreamField, StreamFieldSample};
pub use sigma::{first_derivative_bound_holds, fitted_constant, Sigma, SigmaTable};

use crate::error::{Error, Result};
use crate::geometry::{CurvilinearChart, Mesh, StripGeometry, WallSide};
use crate::poiseuille::{Friction, PoiseuilleProfile};
use crate::quadrature::{integrate_piecewise, triangle_rule, GaussLegendre};

/// Number of uniform nodes in the stored `sigma` table.
pub const TABLE_NODES: usize = 4096;

/// Construction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierParams {
    pub phi: f64,
    pub eps: f64,
    /// Distance between the walls; `sigma` is tabulated on `[0, delta]`.
    pub delta: f64,
    /// Mollifier radius `eps exp(-1/eps) / 3`.
    pub epsilon_small: f64,
    /// Length `exp(2/eps)` of the blending zones.
    pub z: f64,
}

impl CarrierParams {
    pub fn new(phi: f64, eps: f64, delta: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::Parameter(format!("flux {phi} is not finite")));
        }
        if !(eps > 0.0 && 2.0 * eps < delta) {
            return Err(Error::Parameter(format!("eps = {eps} must satisfy 0 < 2 eps < delta = {delta}")));
        }
        let epsilon_small = eps * (-1.0 / eps).exp() / 3.0;
        let z = (2.0 / eps).exp();
        if !(epsilon_small > 0.0 && z.is_finite()) {
            return Err(Error::Parameter(format!("eps = {eps} is too small for double precision")));
        }
        Ok(Self { phi, eps, delta, epsilon_small, z })
    }

    /// Default `eps = min(depth / 2.2, 0.3)` for a chart of the given depth.
    pub fn default_eps(chart_depth: f64) -> f64 {
        (chart_depth / 2.2).min(0.3)
    }
}

/// Cut-off `eta`: 0 for `s <= 0`, 1 for `s >= z`, quintic smoothstep in between.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    pub z: f64,
}

impl Cutoff {
    /// `[eta, eta', eta'']`.
    pub fn eval(&self, s: f64) -> [f64; 3] {
        if s <= 0.0 {
            return [0.0; 3];
        }
        if s >= self.z {
            return [1.0, 0.0, 0.0];
        }
        let r = s / self.z;
        let r2 = r * r;
        let v = r2 * r * (10.0 - 15.0 * r + 6.0 * r2);
        let d = 30.0 * r2 * (1.0 - r) * (1.0 - r) / self.z;
        let dd = 60.0 * r * (1.0 - r) * (1.0 - 2.0 * r) / (self.z * self.z);
        [v, d, dd]
    }

    /// Upper bounds `max |eta'|`, `max |eta''|`.
    pub fn derivative_bounds(&self) -> (f64, f64) {
        (1.875 / self.z, 10.0 / 3.0f64.sqrt() / (self.z * self.z))
    }
}

/// Part of the strip containing a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Left,
    Collar,
    Right,
}

/// Carrier value with its gradient `grad[i][j] = d_j a_i` and divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierSample {
    pub value: [f64; 2],
    pub grad: [[f64; 2]; 2],
    pub div: f64,
}

impl CarrierSample {
    const ZERO: Self = Self { value: [0.0; 2], grad: [[0.0; 2]; 2], div: 0.0 };
}

/// The flux carrier on a strip.
#[derive(Debug, Clone)]
pub struct FluxCarrier {
    params: CarrierParams,
    sigma: Sigma,
    table: SigmaTable,
    chart: CurvilinearChart,
    geometry: StripGeometry,
    alpha: Friction<f64>,
    right: PoiseuilleProfile<f64>,
    left: PoiseuilleProfile<f64>,
    cutoff: Cutoff,
}

impl FluxCarrier {
    /// Builds the carrier; `eps` defaults to [`CarrierParams::default_eps`] of the lower chart.
    ///
    /// On strips with a distorted part `eps` must also stay below the lower chart depth.
    pub fn new(geometry: &StripGeometry, phi: f64, alpha: Friction<f64>, eps: Option<f64>) -> Result<Self> {
        let chart = geometry.chart(WallSide::Lower);
        let eps = eps.unwrap_or_else(|| CarrierParams::default_eps(chart.delta()));
        let params = CarrierParams::new(phi, eps, geometry.wall_separation())?;
        if geometry.x_left < 0.0 && eps >= chart.delta() {
            return Err(Error::Parameter(format!("eps = {eps} exceeds the chart depth {}", chart.delta())));
        }
        let sigma = Sigma::new(phi, eps)?;
        let table = sigma.table(params.delta, TABLE_NODES);
        if table.value.iter().chain(&table.d1).chain(&table.d2).any(|v| !v.is_finite()) {
            return Err(Error::Numerics("non-finite entry in the sigma table".into()));
        }
        Ok(Self {
            params,
            sigma,
            table,
            chart,
            geometry: geometry.clone(),
            right: PoiseuilleProfile::right(phi, alpha)?,
            left: PoiseuilleProfile::left(phi, alpha, geometry.c0)?,
            alpha,
            cutoff: Cutoff { z: params.z },
        })
    }

    pub fn params(&self) -> &CarrierParams {
        &self.params
    }

    pub fn sigma(&self) -> &Sigma {
        &self.sigma
    }

    pub fn table(&self) -> &SigmaTable {
        &self.table
    }

    pub fn chart(&self) -> &CurvilinearChart {
        &self.chart
    }

    pub fn geometry(&self) -> &StripGeometry {
        &self.geometry
    }

    pub fn alpha(&self) -> Friction<f64> {
        self.alpha
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn profile(&self, region: Region) -> Option<&PoiseuilleProfile<f64>> {
        match region {
            Region::Left => Some(&self.left),
            Region::Right => Some(&self.right),
            Region::Collar => None,
        }
    }

    pub fn region(&self, x1: f64) -> Region {
        if x1 >= 0.0 {
            Region::Right
        } else if x1 <= self.geometry.x_left {
            Region::Left
        } else {
            Region::Collar
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        Ok(self.sample(x)?.value)
    }

    /// Value, gradient and divergence at `x`.
    pub fn sample(&self, x: [f64; 2]) -> Result<CarrierSample> {
        if !self.geometry.contains(x, 1e-9) {
            return Err(Error::Domain(format!("point ({}, {}) is outside the strip", x[0], x[1])));
        }
        Ok(match self.region(x[0]) {
            Region::Right => self.sample_end(&self.right, x[0], x[1], 1.0),
            Region::Left => {
                let y1 = x[0] - self.geometry.x_left;
                let y2 = (x[1] - self.geometry.left_offset).max(0.0);
                self.sample_end(&self.left, -y1, y2, -1.0)
            }
            Region::Collar => self.sample_collar(x)?,
        })
    }

    /// End formula with `eta` evaluated at `r` (`x1` on the right, `-y1` on the left);
    /// `dir` is `dr/dx1`.
    fn sample_end(&self, profile: &PoiseuilleProfile<f64>, r: f64, y: f64, dir: f64) -> CarrierSample {
        let [eta, deta, ddeta] = self.cutoff.eval(r);
        let s1 = self.sigma.d1(y);
        let s2 = self.sigma.d2(y);
        let p = profile.value(y);
        let dp = profile.derivative(y);
        let gap = p - s1;
        // int_0^y (P - sigma') = Q(y) - (sigma(y) + phi)
        let integral = profile.primitive(y) - (self.sigma.value(y) + self.params.phi);
        let a1 = s1 * (1.0 - eta) + eta * p;
        let a2 = -dir * deta * integral;
        let d1a1 = dir * deta * gap;
        let d2a1 = s2 * (1.0 - eta) + eta * dp;
        let d1a2 = -ddeta * integral;
        let d2a2 = -dir * deta * gap;
        CarrierSample { value: [a1, a2], grad: [[d1a1, d2a1], [d1a2, d2a2]], div: d1a1 + d2a2 }
    }

    fn sample_collar(&self, x: [f64; 2]) -> Result<CarrierSample> {
        let eps = self.params.eps;
        if self.geometry.lower.distance_to(x) > eps + 1e-3 {
            return Ok(CarrierSample::ZERO);
        }
        let (s, t) = self.chart.inverse(x)?;
        if t >= eps {
            return Ok(CarrierSample::ZERO);
        }
        let s1 = self.sigma.d1(t);
        let s2 = self.sigma.d2(t);
        let (es, et) = self.chart.frame(s);
        let kappa = self.chart.curve().eval(s).kappa;
        let gamma = 1.0 / (1.0 - t * kappa);
        let mut grad = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                grad[i][j] = s2 * es[i] * et[j] + s1 * gamma * kappa * et[i] * es[j];
            }
        }
        // w_s = sigma'(t), w_t = 0
        let ws = |_: f64, tt: f64| [self.sigma.d1(tt), 0.0, self.sigma.d2(tt)];
        let wt = |_: f64, _: f64| [0.0; 3];
        let div = self.chart.curvilinear_div(&ws, &wt, s, t);
        Ok(CarrierSample { value: [s1 * es[0], s1 * es[1]], grad, div })
    }

    /// Flux `int a . e1 dx2` through the vertical section at `x1`.
    pub fn section_flux(&self, x1: f64) -> Result<f64> {
        let (lo, hi) = self.geometry.wall_heights(x1)?;
        let rule = GaussLegendre::<f64>::new(16);
        let breaks: Vec<f64> = match self.region(x1) {
            Region::Collar => {
                let mut b = vec![lo];
                for t in self.sigma.breakpoints(self.params.eps).into_iter().skip(1) {
                    b.push(self.height_at_depth(x1, lo, hi, t)?);
                }
                b.push(hi);
                b
            }
            _ => {
                let mut b: Vec<f64> = self.sigma.breakpoints(self.params.eps).into_iter().map(|t| lo + t).collect();
                b.push(hi);
                b
            }
        };
        let mut breaks = breaks;
        breaks.retain(|v| *v <= hi);
        breaks.dedup();
        let mut failure = None;
        let flux = integrate_piecewise(&rule, &breaks, |x2| match self.eval([x1, x2.clamp(lo, hi)]) {
            Ok(a) => a[0],
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(flux),
        }
    }

    /// Height on the vertical line through `x1` where the collar depth equals `t`.
    fn height_at_depth(&self, x1: f64, lo: f64, hi: f64, t: f64) -> Result<f64> {
        let depth = |x2: f64| self.chart.inverse([x1, x2]).map(|p| p.1).unwrap_or(f64::INFINITY);
        let (mut a, mut b) = (lo, hi);
        if depth(b) < t {
            return Err(Error::Numerics(format!("depth {t} not reached above x1 = {x1}")));
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if depth(m) < t {
                a = m;
            } else {
                b = m;
            }
            if b - a <= 1e-15 * (1.0 + b.abs()) {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Wall sample points `(x, unit tangent, outward normal)` covering the distorted part and
    /// both blending zones.
    pub fn wall_samples(&self) -> Vec<([f64; 2], [f64; 2], [f64; 2])> {
        let mut xs: Vec<f64> = Vec::new();
        let z = self.params.z;
        for k in 0..=400 {
            xs.push(4.0 * k as f64 / 400.0);
        }
        for k in 0..=200 {
            xs.push(4.0 * (2.0 * z / 4.0).powf(k as f64 / 200.0));
        }
        let mut out = Vec::new();
        for side in [WallSide::Lower, WallSide::Upper] {
            let curve = self.geometry.curve(side);
            for p in curve.samples() {
                if p.point[0] > self.geometry.x_left && p.point[0] < 0.0 {
                    let q = curve.eval(p.s);
                    out.push((q.point, q.tangent, q.normal));
                }
            }
            let (lo_r, hi_r) = (0.0, 1.0);
            let (lo_l, hi_l) = (self.geometry.left_offset, self.geometry.left_offset + self.geometry.c0);
            let sign = match side {
                WallSide::Lower => -1.0,
                WallSide::Upper => 1.0,
            };
            for &x in &xs {
                let (yr, yl) = match side {
                    WallSide::Lower => (lo_r, lo_l),
                    WallSide::Upper => (hi_r, hi_l),
                };
                out.push(([x, yr], [1.0, 0.0], [0.0, sign]));
                out.push(([self.geometry.x_left - x, yl], [1.0, 0.0], [0.0, sign]));
            }
        }
        out
    }
}

/// Largest `|div a|` over the seven-point quadrature nodes of every mesh triangle.
pub fn divergence_residual(carrier: &FluxCarrier, mesh: &Mesh) -> Result<f64> {
    let rule = triangle_rule();
    let mut worst = 0.0f64;
    for tri in &mesh.triangles {
        let v = tri.map(|i| mesh.vertices[i]);
        for (bary, _) in rule.iter() {
            let x = [
                bary[0] * v[0][0] + bary[1] * v[1][0] + bary[2] * v[2][0],
                bary[0] * v[0][1] + bary[1] * v[1][1] + bary[2] * v[2][1],
            ];
            worst = worst.max(carrier.sample(x)?.div.abs());
        }
    }
    Ok(worst)
}

/// Largest wall residuals of the carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlipResidual {
    /// `max |2 (S a n) . tau + alpha a . tau|`, or `max |a . tau|` without slip.
    pub tangential: f64,
    /// `max |a . n|`.
    pub normal: f64,
}

/// Slip-condition residuals of the carrier on dense wall samples.
pub fn slip_bc_residual(carrier: &FluxCarrier, alpha: Friction<f64>) -> Result<SlipResidual> {
    let mut res = SlipResidual { tangential: 0.0, normal: 0.0 };
    for (x, tau, n) in carrier.wall_samples() {
        let a = carrier.sample(x)?;
        let at = a.value[0] * tau[0] + a.value[1] * tau[1];
        let an = a.value[0] * n[0] + a.value[1] * n[1];
        let tangential = match alpha {
            Friction::Finite(al) => {
                let mut traction = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        traction += tau[i] * (a.grad[i][j] + a.grad[j][i]) * n[j];
                    }
                }
                traction + al * at
            }
            Friction::NoSlip => at,
        };
        res.tangential = res.tangential.max(tangential.abs());
        res.normal = res.normal.max(an.abs());
    }
    Ok(res)
}
