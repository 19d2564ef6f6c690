use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Eigenpairs of a small symmetric-definite pencil, ascending.
#[derive(Debug, Clone)]
pub struct DenseEigen {
    pub values: Vec<f64>,
    /// Columns are `B`-orthonormal eigenvectors.
    pub vectors: DMatrix<f64>,
}

/// Solves `A z = theta B z` for symmetric `A` and symmetric positive definite `B`.
pub fn generalized_symmetric_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DenseEigen> {
    let bs = (b + b.transpose()) * 0.5;
    let chol = bs
        .cholesky()
        .ok_or_else(|| Error::Numerics("Ritz mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerics("singular Cholesky factor".into()))?;
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let back = linv.transpose() * &eig.eigenvectors;
    let vectors = DMatrix::from_fn(back.nrows(), order.len(), |r, k| back[(r, order[k])]);
    Ok(DenseEigen { values, vectors })
}
