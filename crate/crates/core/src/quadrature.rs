//! Gauss-Legendre rules, adaptive interval quadrature and the triangle rule.

use crate::error::{Error, Result};
use crate::scalar::{lit, real, Real};

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Rule with `n` points, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let one = T::one();
        let two: T = lit(2);
        let nf = T::from_usize(n).unwrap();
        let pi: T = real(std::f64::consts::PI);
        let m = n.div_ceil(2);
        for i in 0..m {
            let quarter: T = real(0.25);
            let half: T = real(0.5);
            let mut x = (pi * (T::from_usize(i).unwrap() + one - quarter) / (nf + half)).cos();
            let mut dp = one;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() * lit(4) {
                    dp = legendre(n, x).1;
                    break;
                }
            }
            let w = two / ((one - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let two: T = lit(2);
        let c = (a + b) / two;
        let r = (b - a) / two;
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + *w * f(c + r * *x);
        }
        acc * r
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let two: T = lit(2);
        let c = (a + b) / two;
        let r = (b - a) / two;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + r * *x, *w * r))
    }
}

fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize(k).unwrap();
        let p2 = ((lit::<T>(2) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_usize(n).unwrap();
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Globally adaptive quadrature: 10-point Gauss against its two halves.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let rule = GaussLegendre::<f64>::new(10);
    let mut stack = vec![(a, b, rule.integrate(a, b, &mut f), 0usize)];
    let mut total = 0.0;
    let mut evaluations = 0usize;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f);
        let right = rule.integrate(mid, hi, &mut f);
        evaluations += 20;
        let err = (left + right - whole).abs();
        let local_tol = tol * (hi - lo) / (b - a).abs().max(f64::MIN_POSITIVE);
        if err <= local_tol.max(1e-15 * (left + right).abs()) || depth >= 60 {
            if depth >= 60 && err > local_tol {
                return Err(Error::Numerics(format!(
                    "adaptive quadrature did not resolve [{lo}, {hi}]"
                )));
            }
            total += left + right;
        } else {
            if evaluations > 2_000_000 {
                return Err(Error::Numerics("adaptive quadrature budget exhausted".into()));
            }
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(total)
}

/// Integrates over consecutive pieces of `breaks` with a fixed Gauss rule per piece.
pub fn integrate_piecewise<F: FnMut(f64) -> f64>(rule: &GaussLegendre<f64>, breaks: &[f64], mut f: F) -> f64 {
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .sum()
}

/// Degree-5 seven-point rule on triangles: barycentric points and weights summing to 1.
pub fn triangle_rule() -> [([f64; 3], f64); 7] {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let b1 = (9.0 + 2.0 * s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let a2 = (6.0 + s15) / 21.0;
    let b2 = (9.0 - 2.0 * s15) / 21.0;
    let w2 = (155.0 + s15) / 1200.0;
    let t = 1.0 / 3.0;
    [
        ([t, t, t], 9.0 / 40.0),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
}

/// Three-point Gauss rule on [0, 1]: (position, weight).
pub fn edge_rule() -> [(f64, f64); 3] {
    let d = 0.5 * (0.6f64).sqrt();
    [(0.5 - d, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + d, 5.0 / 18.0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_exact_for_monomials() {
        for n in [1usize, 2, 5, 16, 64] {
            let g = GaussLegendre::<f64>::new(n);
            for k in 0..(2 * n).min(40) {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let v = g.integrate(-1.0, 1.0, |x| x.powi(k as i32));
                assert!((v - exact).abs() < 1e-13, "n={n} k={k} got {v}");
            }
        }
    }

    #[test]
    fn gauss_in_single_precision() {
        let g = GaussLegendre::<f32>::new(8);
        let v = g.integrate(0.0, 1.0, |x| x * x * x);
        assert!((v - 0.25).abs() < 1e-6);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let v = integrate_adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn triangle_rule_degree_five() {
        // reference triangle (0,0),(1,0),(0,1): integral of x^a y^b = a! b! / (a+b+2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let v: f64 = triangle_rule()
                    .iter()
                    .map(|(l, w)| 0.5 * w * l[1].powi(a as i32) * l[2].powi(b as i32))
                    .sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((v - exact).abs() < 1e-15, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn edge_rule_degree_five() {
        for k in 0..=5 {
            let v: f64 = edge_rule().iter().map(|(x, w)| w * x.powi(k)).sum();
            assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }
}
