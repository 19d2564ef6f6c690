//! Measured size of `int v . grad a . v` relative to `|grad v|^2` for seeded test fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nalgebra::DMatrix;

use super::FluxCarrier;
use crate::error::{Error, Result};
use crate::linalg::generalized_symmetric_eigen;
use crate::poiseuille::Friction;
use crate::quadrature::GaussLegendre;

/// Polynomial with coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq)]
struct Poly(Vec<f64>);

impl Poly {
    fn mul(&self, o: &Poly) -> Poly {
        let mut c = vec![0.0; self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly(c)
    }

    fn pow(&self, k: usize) -> Poly {
        (0..k).fold(Poly(vec![1.0]), |acc, _| acc.mul(self))
    }

    fn deriv(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect())
    }

    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Velocity `v = (d2 psi, -d1 psi)` of a stream function
/// `psi = sum_k B_k((x1 - center) / scale) W_k(x2 / scale)` supported in
/// `[center - scale, center + scale] x [0, scale]` of the right straight section.
///
/// `B_k(z) = (1 - z^2)^4 p_k(z)` and `W_k(y) = y (1 - y)^4 q_k(y)` with quadratic `p_k`, `q_k`,
/// so `psi` vanishes on the lower wall and `v . n = 0` there. A single product term gives a
/// vanishing trilinear form against any carrier that depends on `x2` alone.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamField {
    pub center: f64,
    pub scale: f64,
    terms: Vec<([Poly; 3], [Poly; 3])>,
}

/// Velocity and gradient `grad[i][j] = d_j v_i` of a test field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamFieldSample {
    pub value: [f64; 2],
    pub grad: [[f64; 2]; 2],
}

impl StreamField {
    /// Field from the coefficient pairs `(p_k, q_k)`.
    pub fn new(center: f64, scale: f64, terms: &[([f64; 3], [f64; 3])]) -> Result<Self> {
        if !(scale > 0.0 && scale <= 1.0 && center >= scale) {
            return Err(Error::Parameter(format!("test field at {center} with scale {scale} leaves the right section")));
        }
        let terms = terms
            .iter()
            .map(|(p, q)| {
                let bump = Poly(vec![1.0, 0.0, -1.0]).pow(4).mul(&Poly(p.to_vec()));
                let wall = Poly(vec![0.0, 1.0]).mul(&Poly(vec![1.0, -1.0]).pow(4)).mul(&Poly(q.to_vec()));
                let b1 = bump.deriv();
                let w1 = wall.deriv();
                ([bump, b1.clone(), b1.deriv()], [wall, w1.clone(), w1.deriv()])
            })
            .collect();
        Ok(Self { center, scale, terms })
    }

    /// `n` two-term fields with random quadratic factors and scales `base * 2^(-k/2)`, `k = 0..n`.
    ///
    /// Taking `base` equal to the layer thickness `eps` keeps the family comparable across
    /// carriers; fields much wider than the layer only see an `eps^2` effect.
    pub fn seeded_family(seed: u64, n: usize, base: f64) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|k| {
                let scale = base.min(1.0) * 2f64.powf(-(k as f64) / 2.0);
                let mut coef = || -> [f64; 3] { [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)] };
                let terms = [(coef(), coef()), (coef(), coef())];
                let center = 1.0 + rng.random_range(0.0..1.0);
                Self::new(center, scale, &terms).expect("family stays in the right section")
            })
            .collect()
    }

    /// Support `([x1_lo, x1_hi], x2_hi)`.
    pub fn support(&self) -> ([f64; 2], f64) {
        ([self.center - self.scale, self.center + self.scale], self.scale)
    }

    pub fn sample(&self, x: [f64; 2]) -> StreamFieldSample {
        let l = self.scale;
        let z = (x[0] - self.center) / l;
        let y = x[1] / l;
        let mut out = StreamFieldSample { value: [0.0; 2], grad: [[0.0; 2]; 2] };
        if z.abs() >= 1.0 || !(0.0..1.0).contains(&y) {
            return out;
        }
        let l2 = l * l;
        for (bp, wp) in &self.terms {
            let b = bp.each_ref().map(|p| p.eval(z));
            let w = wp.each_ref().map(|p| p.eval(y));
            out.value[0] += b[0] * w[1] / l;
            out.value[1] -= b[1] * w[0] / l;
            out.grad[0][0] += b[1] * w[1] / l2;
            out.grad[0][1] += b[0] * w[2] / l2;
            out.grad[1][0] -= b[2] * w[0] / l2;
            out.grad[1][1] -= b[1] * w[1] / l2;
        }
        out
    }
}

/// Outcome of the trilinear probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    /// `|int v . grad a . v| / |grad v|^2` per field.
    pub ratios: Vec<f64>,
    /// Largest per-field ratio.
    pub max_ratio: f64,
    /// Supremum of the ratio over the linear span of the fields (Rayleigh-Ritz).
    pub span_ratio: f64,
    /// `phi (eps + alpha / (1 + alpha))`.
    pub bound_scale: f64,
    /// `span_ratio / bound_scale`.
    pub fitted_constant: f64,
    /// Largest gap between the direct and the integrated-by-parts form, relative to the
    /// largest entry.
    pub route_gap: f64,
}

/// Evaluates the symmetric form `(v, w) -> int (v . grad a . w + w . grad a . v) / 2` on the
/// fields directly and as `-int a . (v . grad w + w . grad v) / 2`, together with the
/// gradient Gram matrix.
pub fn trilinear_smallness_probe(carrier: &FluxCarrier, fields: &[StreamField]) -> Result<ProbeReport> {
    let n = fields.len();
    let phi = carrier.params().phi;
    let eps = carrier.params().eps;
    let slip = match carrier.alpha() {
        Friction::Finite(a) => a / (1.0 + a),
        Friction::NoSlip => 1.0,
    };
    let bound_scale = phi.abs() * (eps + slip);
    if n == 0 {
        return Ok(ProbeReport { ratios: vec![], max_ratio: 0.0, span_ratio: 0.0, bound_scale, fitted_constant: 0.0, route_gap: 0.0 });
    }
    let mut xb: Vec<f64> = fields.iter().flat_map(|f| [f.center - f.scale, f.center, f.center + f.scale]).collect();
    xb.sort_by(f64::total_cmp);
    xb.dedup();
    let top = fields.iter().map(|f| f.scale).fold(0.0, f64::max);
    let mut yb = carrier.sigma().breakpoints(eps.min(top));
    yb.extend(fields.iter().map(|f| f.scale));
    yb.retain(|v| *v <= top);
    yb.sort_by(f64::total_cmp);
    yb.dedup();

    let gx = GaussLegendre::<f64>::new(24);
    let gy = GaussLegendre::<f64>::new(16);
    let mut direct = DMatrix::<f64>::zeros(n, n);
    let mut parts = DMatrix::<f64>::zeros(n, n);
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut samples = vec![StreamFieldSample { value: [0.0; 2], grad: [[0.0; 2]; 2] }; n];
    for wx in xb.windows(2) {
        for (cx, ux) in gx.mapped(wx[0], wx[1]) {
            for wy in yb.windows(2) {
                for (cy, uy) in gy.mapped(wy[0], wy[1]) {
                    let x = [cx, cy];
                    let mut active = Vec::new();
                    for (k, f) in fields.iter().enumerate() {
                        samples[k] = f.sample(x);
                        if samples[k].grad.iter().flatten().any(|g| *g != 0.0) {
                            active.push(k);
                        }
                    }
                    if active.is_empty() {
                        continue;
                    }
                    let a = carrier.sample(x)?;
                    let w = ux * uy;
                    for &k in &active {
                        for &l in &active {
                            let (v, u) = (&samples[k], &samples[l]);
                            let (mut d, mut p, mut g) = (0.0, 0.0, 0.0);
                            for i in 0..2 {
                                for j in 0..2 {
                                    d += v.value[i] * a.grad[i][j] * u.value[j];
                                    p -= a.value[i] * v.value[j] * u.grad[i][j];
                                    g += v.grad[i][j] * u.grad[i][j];
                                }
                            }
                            direct[(k, l)] += w * d;
                            parts[(k, l)] += w * p;
                            gram[(k, l)] += w * g;
                        }
                    }
                }
            }
        }
    }
    let direct = (&direct + direct.transpose()) * 0.5;
    let parts = (&parts + parts.transpose()) * 0.5;
    let scale = direct.amax().max(1e-300);
    let route_gap = (&direct - &parts).amax() / scale;
    let ratios: Vec<f64> = (0..n).map(|k| if gram[(k, k)] > 0.0 { direct[(k, k)].abs() / gram[(k, k)] } else { 0.0 }).collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let live: Vec<usize> = (0..n).filter(|&k| gram[(k, k)] > 0.0).collect();
    let span_ratio = if live.is_empty() {
        0.0
    } else {
        let sub = |m: &DMatrix<f64>| DMatrix::from_fn(live.len(), live.len(), |i, j| m[(live[i], live[j])]);
        let eig = generalized_symmetric_eigen(&sub(&direct), &sub(&gram))?;
        eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    };
    let fitted_constant = if bound_scale > 0.0 { span_ratio / bound_scale } else { 0.0 };
    Ok(ProbeReport { ratios, max_ratio, span_ratio, bound_scale, fitted_constant, route_gap })
}
