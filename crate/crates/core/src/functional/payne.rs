//! Pointwise check of the Payne-type identity
//! `sum_ij [d_i(h_i x_j h_j) - d_i h_i x_j h_j - delta_ij h_i h_j - h_i x_j d_i h_j] = 0`.

use crate::scalar::{lit, Field};

/// A planar vector field with its Jacobian (`[i][k] = d_k h_i`).
pub trait VectorField2<T> {
    fn value(&self, x: &[T; 2]) -> [T; 2];
    fn jacobian(&self, x: &[T; 2]) -> [[T; 2]; 2];
}

/// The four terms of the identity at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PayneTerms<T> {
    /// `div (h (x . h))`.
    pub flux_divergence: T,
    /// `div h (x . h)`.
    pub divergence: T,
    /// `|h|^2`.
    pub mass: T,
    /// `h_i x_j d_i h_j`.
    pub transport: T,
}

impl<T: Field> PayneTerms<T> {
    pub fn residual(&self) -> T {
        self.flux_divergence.clone() - self.divergence.clone() - self.mass.clone() - self.transport.clone()
    }
}

/// Terms of the identity at `x`, with the flux divergence expanded by the product rule
/// `d_i (h_i x_j h_j) = d_i h_i x_j h_j + h_i (h_i + x_j d_i h_j)`.
pub fn payne_terms<T: Field, F: VectorField2<T>>(field: &F, x: &[T; 2]) -> PayneTerms<T> {
    let h = field.value(x);
    let j = field.jacobian(x);
    let xh = x[0].clone() * h[0].clone() + x[1].clone() * h[1].clone();
    let div = j[0][0].clone() + j[1][1].clone();
    let mut grad_xh = [T::zero(), T::zero()];
    for (i, g) in grad_xh.iter_mut().enumerate() {
        *g = h[i].clone() + x[0].clone() * j[0][i].clone() + x[1].clone() * j[1][i].clone();
    }
    let flux_divergence = div.clone() * xh.clone() + h[0].clone() * grad_xh[0].clone() + h[1].clone() * grad_xh[1].clone();
    let mass = h[0].clone() * h[0].clone() + h[1].clone() * h[1].clone();
    let mut transport = T::zero();
    for i in 0..2 {
        for jj in 0..2 {
            transport = transport + h[i].clone() * x[jj].clone() * j[jj][i].clone();
        }
    }
    PayneTerms { flux_divergence, divergence: div * xh, mass, transport }
}

/// Largest absolute residual of the identity over `points`.
pub fn payne_identity_residual<T: Field, F: VectorField2<T>>(field: &F, points: &[[T; 2]]) -> T {
    let mut worst = T::zero();
    for x in points {
        let r = payne_terms(field, x).residual();
        let a = if r < T::zero() { -r } else { r };
        if a > worst {
            worst = a;
        }
    }
    worst
}

/// Polynomial vector field `h_i = sum c_i[a][b] x1^a x2^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialField<T> {
    pub coeffs: [Vec<Vec<T>>; 2],
}

fn eval_poly<T: Field>(c: &[Vec<T>], x: &[T; 2], dx: usize, dy: usize) -> T {
    let mut total = T::zero();
    for (a, row) in c.iter().enumerate() {
        if a < dx {
            continue;
        }
        for (b, v) in row.iter().enumerate() {
            if b < dy {
                continue;
            }
            let mut term = v.clone();
            for k in 0..dx {
                term = term * lit::<T>((a - k) as i64);
            }
            for k in 0..dy {
                term = term * lit::<T>((b - k) as i64);
            }
            for _ in 0..(a - dx) {
                term = term * x[0].clone();
            }
            for _ in 0..(b - dy) {
                term = term * x[1].clone();
            }
            total = total + term;
        }
    }
    total
}

impl<T: Field> VectorField2<T> for PolynomialField<T> {
    fn value(&self, x: &[T; 2]) -> [T; 2] {
        [eval_poly(&self.coeffs[0], x, 0, 0), eval_poly(&self.coeffs[1], x, 0, 0)]
    }

    fn jacobian(&self, x: &[T; 2]) -> [[T; 2]; 2] {
        let d = |i: usize, k: usize| eval_poly(&self.coeffs[i], x, usize::from(k == 0), usize::from(k == 1));
        [[d(0, 0), d(0, 1)], [d(1, 0), d(1, 1)]]
    }
}
