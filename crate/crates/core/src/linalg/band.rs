use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting of a banded matrix.
///
/// Row `i` is stored densely over columns `i - kl ..= i + kl + ku`, which holds the fill
/// created by row interchanges. Multipliers are kept per elimination step, so the solve
/// applies interchanges and eliminations in factorization order.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    rows: Vec<f64>,
    reach: Vec<usize>,
    piv: Vec<usize>,
    mult: Vec<f64>,
}

impl BandLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::LinearSolve {
                message: format!("matrix is {}x{}, not square", a.nrows, a.ncols),
                trace: vec![],
            });
        }
        let n = a.nrows;
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut rows = vec![0.0; n * width];
        let mut reach = vec![0usize; n];
        let mut scale = 0.0f64;
        for i in 0..n {
            reach[i] = i;
            for (j, v) in a.row(i) {
                rows[i * width + j + kl - i] = v;
                reach[i] = reach[i].max(j);
                scale = scale.max(v.abs());
            }
        }
        let mut piv = vec![0usize; n];
        let mut mult = vec![0.0; n * kl.max(1)];
        let tiny = scale * f64::EPSILON * 1e-3;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = rows[k * width + kl].abs();
            for r in (k + 1)..=last {
                let v = rows[r * width + k + kl - r].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= tiny {
                return Err(Error::LinearSolve {
                    message: format!("matrix is singular to working precision at pivot {k} of {n}"),
                    trace: vec![best],
                });
            }
            piv[k] = p;
            if p != k {
                let hi = reach[k].max(reach[p]);
                for c in k..=hi {
                    rows.swap(k * width + c + kl - k, p * width + c + kl - p);
                }
                reach.swap(k, p);
            }
            let (head, tail) = rows.split_at_mut((k + 1) * width);
            let pivot_row = &head[k * width..];
            let d = pivot_row[kl];
            let hi = reach[k];
            for r in (k + 1)..=last {
                let row = &mut tail[(r - k - 1) * width..(r - k) * width];
                let lead = row[k + kl - r];
                if lead == 0.0 {
                    continue;
                }
                let m = lead / d;
                mult[k * kl + (r - k - 1)] = m;
                row[k + kl - r] = 0.0;
                let dst = &mut row[(k + 1 + kl - r)..=(hi + kl - r)];
                let src = &pivot_row[(kl + 1)..=(hi + kl - k)];
                for (x, y) in dst.iter_mut().zip(src) {
                    *x -= m * y;
                }
                if reach[r] < hi {
                    reach[r] = hi;
                }
            }
        }
        Ok(Self { n, kl, width, rows, reach, piv, mult })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, w) = (self.n, self.kl, self.width);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                let last = (k + kl).min(n - 1);
                for r in (k + 1)..=last {
                    b[r] -= self.mult[k * kl + (r - k - 1)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let row = &self.rows[k * w..(k + 1) * w];
            let mut s = b[k];
            for c in (k + 1)..=self.reach[k] {
                s -= row[c + kl - k] * b[c];
            }
            b[k] = s / row[kl];
        }
    }
}

/// Banded LU with iterative refinement against the original matrix.
#[derive(Debug, Clone)]
pub struct DirectSolver {
    matrix: CsrMatrix,
    lu: BandLu,
}

impl DirectSolver {
    pub fn new(matrix: CsrMatrix) -> Result<Self> {
        let lu = BandLu::factor(&matrix)?;
        Ok(Self { matrix, lu })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Solves `A x = b` until the relative residual is below `tol` (at most three refinements).
    pub fn solve(&self, b: &[f64], tol: f64) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.lu.solve_in_place(&mut x);
        let bn = super::norm2(b).max(f64::MIN_POSITIVE);
        let mut trace = Vec::new();
        for _ in 0..3 {
            let ax = self.matrix.mul_vec(&x);
            let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let rel = super::norm2(&r) / bn;
            trace.push(rel);
            if rel <= tol * 1e-2 {
                return Ok(x);
            }
            self.lu.solve_in_place(&mut r);
            super::axpy(1.0, &r, &mut x);
        }
        let ax = self.matrix.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let rel = super::norm2(&r) / bn;
        trace.push(rel);
        if rel <= tol || b.iter().all(|v| *v == 0.0) {
            Ok(x)
        } else {
            Err(Error::LinearSolve {
                message: format!("relative residual {rel:.3e} above tolerance {tol:.1e}"),
                trace,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Triplets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64, zero_diag: bool) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                if zero_diag && i == j {
                    continue;
                }
                if rng.random_bool(0.6) || i.abs_diff(j) <= 1 {
                    t.push(i, j, rng.random_range(-1.0..1.0));
                }
            }
        }
        t.to_csr()
    }

    fn dense_solve(a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
        let n = a.nrows;
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a.get(i, j));
        let v = nalgebra::DVector::from_column_slice(b);
        m.lu().solve(&v).unwrap().as_slice().to_vec()
    }

    #[test]
    fn matches_dense_lu_with_pivoting() {
        for (seed, (n, kl, ku)) in [(60, 3, 5), (80, 7, 2), (50, 0, 4), (40, 9, 9)].into_iter().enumerate() {
            let a = random_band(n, kl, ku, seed as u64, kl > 0 && seed % 2 == 0);
            let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let lu = BandLu::factor(&a).unwrap();
            let mut x = b.clone();
            lu.solve_in_place(&mut x);
            let y = dense_solve(&a, &b);
            let err = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            assert!(err < 1e-9 * scale, "seed {seed}: err {err}");
        }
    }

    #[test]
    fn saddle_point_with_zero_block() {
        // [[2, 1], [1, 0]] needs a row interchange.
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 2.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        let s = DirectSolver::new(t.to_csr()).unwrap();
        let x = s.solve(&[3.0, 1.0], 1e-14).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(1, 0, 1.0);
        assert!(matches!(BandLu::factor(&t.to_csr()), Err(Error::LinearSolve { .. })));
    }
}
