//! The mollified boundary-layer profile `sigma` and its derivatives.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Standard bump `exp(-1 / (1 - x^2))` on (-1, 1) and its first two derivatives.
fn bump(x: f64) -> [f64; 3] {
    let q = 1.0 - x * x;
    if q <= 0.0 {
        return [0.0; 3];
    }
    let p = (-1.0 / q).exp();
    let q2 = q * q;
    let d = -2.0 * x * p / q2;
    let dd = -2.0 * p / q2 + 4.0 * x * x * p / (q2 * q2) - 8.0 * x * x * p / (q2 * q);
    [p, d, dd]
}

/// `d^k/dx^k (eps / x)`.
fn tau_derivative(eps: f64, x: f64, k: usize) -> f64 {
    match k {
        0 => eps / x,
        1 => -eps / (x * x),
        _ => 2.0 * eps / (x * x * x),
    }
}

/// Mass of the standard bump.
fn bump_mass() -> f64 {
    let g = GaussLegendre::<f64>::new(64);
    g.integrate(-1.0, 0.0, |x| bump(x)[0]) * 2.0
}

/// Dense samples of `sigma`, `sigma'`, `sigma''` on uniform nodes over `[0, delta]`.
#[derive(Debug, Clone)]
pub struct SigmaTable {
    pub t: Vec<f64>,
    pub value: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl SigmaTable {
    /// Cubic Hermite interpolation of `sigma` from the stored values and slopes.
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.t.len() - 1;
        let h = self.t[1] - self.t[0];
        let x = ((t - self.t[0]) / h).clamp(0.0, n as f64);
        let i = (x.floor() as usize).min(n - 1);
        let r = x - i as f64;
        let (p0, p1) = (self.value[i], self.value[i + 1]);
        let (m0, m1) = (self.d1[i] * h, self.d1[i + 1] * h);
        let r2 = r * r;
        let r3 = r2 * r;
        (2.0 * r3 - 3.0 * r2 + 1.0) * p0 + (r3 - 2.0 * r2 + r) * m0 + (-2.0 * r3 + 3.0 * r2) * p1 + (r3 - r2) * m1
    }
}

/// `sigma(t) = -phi + C phi int_0^t (bump * tau)`, where `tau = eps / t` on
/// `(3 e, eps - e)` and zero elsewhere, `e = eps exp(-1/eps) / 3` is the mollifier radius
/// and `C` normalizes the total increase to `phi`.
///
/// The upper cut of `tau` sits one mollifier radius below `eps`, so `sigma` is exactly `-phi`
/// for `t <= 2e` and exactly 0 for `t >= eps`.
#[derive(Debug, Clone)]
pub struct Sigma {
    phi: f64,
    eps: f64,
    radius: f64,
    lo: f64,
    hi: f64,
    c_tilde: f64,
    norm: f64,
    rule: GaussLegendre<f64>,
}

impl Sigma {
    pub fn new(phi: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Parameter(format!("eps = {eps} must lie in (0, 1)")));
        }
        let radius = eps * (-1.0 / eps).exp() / 3.0;
        if !(radius > 0.0) {
            return Err(Error::Numerics(format!("mollifier radius underflows for eps = {eps}")));
        }
        let lo = 3.0 * radius;
        let hi = eps - radius;
        // eps * ln(hi / lo) written to avoid forming exp(1/eps)
        let log_ratio = (hi / eps).ln() + 1.0 / eps;
        let c_tilde = 1.0 / (eps * log_ratio);
        Ok(Self { phi, eps, radius, lo, hi, c_tilde, norm: 1.0 / bump_mass(), rule: GaussLegendre::new(64) })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Mollifier radius `eps exp(-1/eps) / 3`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Normalization constant `C`.
    pub fn c_tilde(&self) -> f64 {
        self.c_tilde
    }

    /// Left end of the support of `sigma'`.
    pub fn support_start(&self) -> f64 {
        self.lo - self.radius
    }

    /// `int bump(r) tau^(k)(t - r) dr` over the part of the window where `tau` is smooth.
    fn convolve(&self, t: f64, k: usize) -> f64 {
        let e = self.radius;
        let a = (-e).max(t - self.hi);
        let b = e.min(t - self.lo);
        if a >= b {
            return 0.0;
        }
        let eps = self.eps;
        let w = self.norm / e;
        self.window(a, b, |r| w * bump(r / e)[0] * tau_derivative(eps, t - r, k))
    }

    /// Integral over `[a, b]` inside the mollifier window, split at the window center.
    fn window<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        if a < 0.0 && b > 0.0 {
            self.rule.integrate(a, 0.0, &mut f) + self.rule.integrate(0.0, b, &mut f)
        } else {
            self.rule.integrate(a, b, f)
        }
    }

    /// Normalized mollifier `bump(x / e) / (mass e)` and its first derivative.
    fn mollifier(&self, x: f64) -> [f64; 2] {
        let e = self.radius;
        let b = bump(x / e);
        [self.norm / e * b[0], self.norm / (e * e) * b[1]]
    }

    /// `sigma(t)`.
    pub fn value(&self, t: f64) -> f64 {
        let e = self.radius;
        if t <= self.lo - e {
            return -self.phi;
        }
        if t >= self.hi + e {
            return 0.0;
        }
        // int bump(r) T(t - r) dr with T the antiderivative of tau; near the upper plateau
        // the integral is taken against T - T(hi) so the small result carries no cancellation
        let eps = self.eps;
        let top = eps * ((self.hi / eps).ln() + 1.0 / eps);
        let shift = if t > 0.5 * (self.lo + self.hi) { top } else { 0.0 };
        let cut_hi = (t - self.hi).clamp(-e, e);
        let cut_lo = (t - self.lo).clamp(-e, e);
        let w = |r: f64| self.mollifier(r)[0];
        let mut acc = 0.0;
        if cut_hi > -e {
            acc += (top - shift) * self.window(-e, cut_hi, w);
        }
        if cut_lo > cut_hi {
            acc += self.window(cut_hi, cut_lo, |r| w(r) * (eps * (((t - r) / eps).ln() - (self.lo / eps).ln()) - shift));
        }
        if cut_lo < e {
            acc -= shift * self.window(cut_lo, e, w);
        }
        if shift == 0.0 {
            -self.phi + self.c_tilde * self.phi * acc
        } else {
            self.c_tilde * self.phi * acc
        }
    }

    /// `sigma^(k)(t)` for `k = 1, 2, 3`.
    ///
    /// Derivatives of the convolution fall on `tau`; its jumps at the ends of the support
    /// contribute point terms, which avoids differentiating the mollifier.
    pub fn derivative(&self, t: f64, k: usize) -> f64 {
        assert!((1..=3).contains(&k), "derivative order {k} not available");
        let eps = self.eps;
        let (lo, hi) = (self.lo, self.hi);
        let mut acc = self.convolve(t, k - 1);
        let m_lo = self.mollifier(t - lo);
        let m_hi = self.mollifier(t - hi);
        if k == 2 {
            acc += tau_derivative(eps, lo, 0) * m_lo[0] - tau_derivative(eps, hi, 0) * m_hi[0];
        }
        if k == 3 {
            acc += tau_derivative(eps, lo, 1) * m_lo[0] - tau_derivative(eps, hi, 1) * m_hi[0];
            acc += tau_derivative(eps, lo, 0) * m_lo[1] - tau_derivative(eps, hi, 0) * m_hi[1];
        }
        self.c_tilde * self.phi * acc
    }

    pub fn d1(&self, t: f64) -> f64 {
        self.derivative(t, 1)
    }

    pub fn d2(&self, t: f64) -> f64 {
        self.derivative(t, 2)
    }

    /// Breakpoints in `t` that resolve the mollified corners and the `eps / t` decay.
    pub fn breakpoints(&self, top: f64) -> Vec<f64> {
        let e = self.radius;
        let mut b = vec![0.0];
        for k in 0..=8 {
            b.push(self.lo - e + 0.25 * e * k as f64);
        }
        let mut x = self.lo + e;
        while x * 1.25 < self.hi - e {
            x *= 1.25;
            b.push(x);
        }
        for k in 0..=8 {
            b.push(self.hi - e + 0.25 * e * k as f64);
        }
        b.push(top);
        b.retain(|v| *v <= top);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Table on `n` uniform nodes over `[0, delta]`.
    pub fn table(&self, delta: f64, n: usize) -> SigmaTable {
        let t: Vec<f64> = (0..n).map(|i| delta * i as f64 / (n - 1) as f64).collect();
        SigmaTable {
            value: t.iter().map(|&x| self.value(x)).collect(),
            d1: t.iter().map(|&x| self.d1(x)).collect(),
            d2: t.iter().map(|&x| self.d2(x)).collect(),
            t,
        }
    }
}

/// Log-space bound check of `0 <= sigma' <= min(phi e^{1/eps}, 2 phi eps / t)` with relative slack.
pub fn first_derivative_bound_holds(phi: f64, eps: f64, t: f64, d1: f64, slack: f64) -> bool {
    if d1 < 0.0 {
        return false;
    }
    if d1 == 0.0 {
        return true;
    }
    let log_d = d1.ln();
    let cap = (phi.ln() + 1.0 / eps).min((2.0 * phi * eps / t).ln());
    log_d <= cap + slack.ln_1p()
}

/// `|sigma^(k)| / (phi e^{1/eps} (e^{1/eps} / eps)^{k-1})`, evaluated in log space.
pub fn fitted_constant(phi: f64, eps: f64, k: usize, value: f64) -> f64 {
    if value == 0.0 {
        return 0.0;
    }
    let log_scale = phi.ln() + 1.0 / eps + (k as f64 - 1.0) * (1.0 / eps - eps.ln());
    (value.abs().ln() - log_scale).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_derivatives() {
        for i in 1..40 {
            let x = -0.975 + 0.05 * i as f64;
            let h = 1e-6;
            let fd = (bump(x + h)[0] - bump(x - h)[0]) / (2.0 * h);
            let fdd = (bump(x + h)[1] - bump(x - h)[1]) / (2.0 * h);
            assert!((bump(x)[1] - fd).abs() < 1e-7);
            assert!((bump(x)[2] - fdd).abs() < 1e-6);
        }
        assert!((bump_mass() - 0.443_993_816_168_079_4).abs() < 1e-12);
    }

    #[test]
    fn plateaus_are_exact() {
        let s = Sigma::new(1.5, 0.3).unwrap();
        assert_eq!(s.value(0.0), -1.5);
        assert_eq!(s.value(s.radius()), -1.5);
        assert_eq!(s.value(0.3), 0.0);
        assert_eq!(s.value(0.7), 0.0);
        assert_eq!(s.d1(0.5), 0.0);
        assert!(s.c_tilde() > 1.0 && s.c_tilde() < 1.2);
    }

    #[test]
    fn value_is_antiderivative_of_slope() {
        let s = Sigma::new(1.0, 0.3).unwrap();
        let g = GaussLegendre::<f64>::new(16);
        let b = s.breakpoints(0.3);
        let mut acc = -1.0;
        for w in b.windows(2) {
            acc += g.integrate(w[0], w[1], |t| s.d1(t));
            assert!((acc - s.value(w[1])).abs() < 1e-12, "t = {}", w[1]);
        }
        assert!(acc.abs() < 1e-12);
    }

    #[test]
    fn normalization_by_quadrature() {
        // C int (bump * tau) = 1, computed independently from the closed-form constant
        for eps in [0.3, 0.2, 0.12] {
            let s = Sigma::new(1.0, eps).unwrap();
            let g = GaussLegendre::<f64>::new(16);
            let total = crate::quadrature::integrate_piecewise(&g, &s.breakpoints(eps), |t| s.d1(t) / s.c_tilde());
            assert!((s.c_tilde() * total - 1.0).abs() < 1e-12, "eps {eps}");
        }
    }

    #[test]
    fn hermite_table_interpolation() {
        let s = Sigma::new(1.0, 0.3).unwrap();
        let tab = s.table(1.0, 4096);
        assert!((tab.interpolate(0.15) - s.value(0.15)).abs() < 1e-8);
        assert_eq!(tab.interpolate(0.9), 0.0);
    }
}
