//! Lowest eigenpair of a constrained symmetric-definite pencil by block inverse iteration.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, generalized_symmetric_eigen};

/// Relative tolerance on the Rayleigh quotient.
pub const EIGEN_TOL: f64 = 1e-8;
/// Iteration cap.
pub const EIGEN_MAX_ITER: usize = 500;

/// Lowest eigenvalue and eigenvector with the Rayleigh-quotient history.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// Lowest `lambda` of `A x = lambda N x` on a constrained subspace.
///
/// `solve(r)` must return `A^{-1} r` restricted to the subspace (the constrained solve), and
/// `apply_n` multiplies by `N`. A block of `block` vectors is iterated with a Rayleigh-Ritz
/// step each sweep, so the quotient converges like `(lambda_1 / lambda_{block+1})^{2k}`.
pub fn lowest_eigenpair<S, M>(dim: usize, block: usize, solve: S, apply_n: M, seed: u64) -> Result<EigenPair>
where
    S: Fn(&[f64]) -> Result<Vec<f64>>,
    M: Fn(&[f64]) -> Vec<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec<f64>> = (0..block).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut history = Vec::new();
    let mut previous = f64::INFINITY;
    for it in 1..=EIGEN_MAX_ITER {
        let z: Vec<Vec<f64>> = x.iter().map(|v| apply_n(v)).collect();
        let mut y = z.iter().map(|r| solve(r)).collect::<Result<Vec<_>>>()?;
        let mut ny: Vec<Vec<f64>> = y.iter().map(|v| apply_n(v)).collect();
        // A y_k = z_k on the subspace; rescale so that y_k^T N y_k = 1
        let mut s = vec![0.0; block];
        for k in 0..block {
            s[k] = dot(&y[k], &ny[k]).sqrt();
            if !(s[k] > 0.0) {
                return Err(Error::Numerics("inverse iteration produced a null vector".into()));
            }
            y[k].iter_mut().for_each(|v| *v /= s[k]);
            ny[k].iter_mut().for_each(|v| *v /= s[k]);
        }
        let a_small = DMatrix::from_fn(block, block, |i, j| 0.5 * (dot(&y[i], &z[j]) / s[j] + dot(&y[j], &z[i]) / s[i]));
        let n_small = DMatrix::from_fn(block, block, |i, j| 0.5 * (dot(&y[i], &ny[j]) + dot(&y[j], &ny[i])));
        let eig = generalized_symmetric_eigen(&a_small, &n_small)?;
        let value = eig.values[0];
        history.push(value);
        x = (0..block)
            .map(|k| {
                let mut v = vec![0.0; dim];
                for (j, yj) in y.iter().enumerate() {
                    let c = eig.vectors[(j, k)];
                    v.iter_mut().zip(yj).for_each(|(a, b)| *a += c * b);
                }
                v
            })
            .collect();
        if !value.is_finite() {
            return Err(Error::Numerics("Rayleigh quotient is not finite".into()));
        }
        if it > 2 && (value - previous).abs() <= EIGEN_TOL * value.abs() {
            return Ok(EigenPair { value, vector: x.swap_remove(0), iterations: it, history });
        }
        previous = value;
    }
    Err(Error::Numerics(format!(
        "inverse iteration stagnated after {EIGEN_MAX_ITER} sweeps (last quotients {:?})",
        &history[history.len().saturating_sub(3)..]
    )))
}
