//! Constrained systems `[A C^T; C 0]` with eliminated fixed unknowns (`A` need not be symmetric).
//!
//! Unknowns are the free primal coefficients and one multiplier per constraint row. They are
//! ordered by a geometric key (position along the strip) so that the assembled matrix is banded.

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DirectSolver, Triplets};

/// One linear constraint `sum c_j u_j = g` on the primal unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow {
    pub entries: Vec<(usize, f64)>,
    /// Position used for ordering the multiplier.
    pub key: [f64; 2],
}

impl ConstraintRow {
    /// Rows of a sparse matrix, keyed by `keys[row]`, skipping `skip`.
    pub fn from_matrix(m: &CsrMatrix, keys: &[[f64; 2]], skip: Option<usize>) -> Vec<ConstraintRow> {
        (0..m.nrows)
            .filter(|&i| Some(i) != skip)
            .map(|i| ConstraintRow { entries: m.row(i).collect(), key: keys[i] })
            .collect()
    }
}

/// Factored constrained system.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    n: usize,
    fixed: Vec<Option<f64>>,
    /// Slot of each free primal coefficient in the combined vector.
    slot: Vec<Option<usize>>,
    /// Slot of each constraint multiplier.
    row_slot: Vec<usize>,
    rows: Vec<ConstraintRow>,
    /// Columns of `A` on fixed coefficients, for lifting.
    coupling: CsrMatrix,
    solver: DirectSolver,
    tol: f64,
}

/// Primal solution and multipliers.
#[derive(Debug, Clone)]
pub struct SaddleSolution {
    pub primal: Vec<f64>,
    pub multipliers: Vec<f64>,
}

impl SaddleSystem {
    /// Builds and factors the system for `a` (full primal size) under `fixed` values and `rows`.
    pub fn new(a: &CsrMatrix, keys: &[[f64; 2]], fixed: &[Option<f64>], rows: Vec<ConstraintRow>) -> Result<Self> {
        let n = a.nrows;
        if a.ncols != n || keys.len() != n || fixed.len() != n {
            return Err(Error::Assembly(format!(
                "system sizes disagree: matrix {}x{}, {} keys, {} fixed flags",
                a.nrows,
                a.ncols,
                keys.len(),
                fixed.len()
            )));
        }
        let mut order: Vec<(usize, [f64; 2])> = (0..n).filter(|&i| fixed[i].is_none()).map(|i| (i, keys[i])).collect();
        let nfree = order.len();
        order.extend(rows.iter().enumerate().map(|(r, row)| (n + r, row.key)));
        order.sort_by(|x, y| x.1[0].total_cmp(&y.1[0]).then(x.1[1].total_cmp(&y.1[1])).then(x.0.cmp(&y.0)));
        let mut slot = vec![None; n];
        let mut row_slot = vec![0; rows.len()];
        for (pos, (id, _)) in order.iter().enumerate() {
            if *id < n {
                slot[*id] = Some(pos);
            } else {
                row_slot[*id - n] = pos;
            }
        }
        let dim = nfree + rows.len();
        let mut t = Triplets::new(dim, dim);
        let mut c = Triplets::new(n, n);
        for i in 0..n {
            let Some(si) = slot[i] else { continue };
            for (j, v) in a.row(i) {
                match slot[j] {
                    Some(sj) => t.push(si, sj, v),
                    None => c.push(i, j, v),
                }
            }
        }
        for (r, row) in rows.iter().enumerate() {
            let sr = row_slot[r];
            for &(j, v) in &row.entries {
                if let Some(sj) = slot[j] {
                    t.push(sr, sj, v);
                    t.push(sj, sr, v);
                }
            }
        }
        let solver = DirectSolver::new(t.to_csr())?;
        Ok(Self { n, fixed: fixed.to_vec(), slot, row_slot, rows, coupling: c.to_csr(), solver, tol: 1e-11 })
    }

    /// Relative residual accepted from the direct solve (default `1e-11`).
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Number of free primal coefficients plus constraints.
    pub fn dim(&self) -> usize {
        self.solver.matrix().nrows
    }

    pub fn fixed(&self) -> &[Option<f64>] {
        &self.fixed
    }

    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    /// Solves `A u + C^T l = f`, `C u = g` with the fixed values imposed.
    pub fn solve(&self, f: &[f64], g: &[f64]) -> Result<SaddleSolution> {
        self.solve_with(f, g, true)
    }

    /// As [`solve`](Self::solve) with the fixed values replaced by zero.
    pub fn solve_homogeneous(&self, f: &[f64], g: &[f64]) -> Result<SaddleSolution> {
        self.solve_with(f, g, false)
    }

    fn solve_with(&self, f: &[f64], g: &[f64], lift: bool) -> Result<SaddleSolution> {
        assert_eq!(f.len(), self.n);
        assert_eq!(g.len(), self.rows.len());
        let fixed_vals: Vec<f64> = self.fixed.iter().map(|v| if lift { v.unwrap_or(0.0) } else { 0.0 }).collect();
        let mut rhs = vec![0.0; self.dim()];
        let lifted = if lift { self.coupling.mul_vec(&fixed_vals) } else { vec![0.0; self.n] };
        for i in 0..self.n {
            if let Some(s) = self.slot[i] {
                rhs[s] = f[i] - lifted[i];
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            let known: f64 = row.entries.iter().filter(|(j, _)| self.slot[*j].is_none()).map(|(j, v)| v * fixed_vals[*j]).sum();
            rhs[self.row_slot[r]] = g[r] - known;
        }
        let x = self.solver.solve(&rhs, self.tol)?;
        let primal = (0..self.n).map(|i| match self.slot[i] {
            Some(s) => x[s],
            None => fixed_vals[i],
        });
        Ok(SaddleSolution { primal: primal.collect(), multipliers: self.row_slot.iter().map(|&s| x[s]).collect() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_constrained_quadratic() {
        // minimize x^2 + y^2 + z^2 with x + y + z = 3, z fixed to 0 -> x = y = 1.5
        let mut t = Triplets::new(3, 3);
        for i in 0..3 {
            t.push(i, i, 2.0);
        }
        let a = t.to_csr();
        let keys = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let row = ConstraintRow { entries: vec![(0, 1.0), (1, 1.0), (2, 1.0)], key: [1.0, 1.0] };
        let s = SaddleSystem::new(&a, &keys, &[None, None, Some(0.0)], vec![row]).unwrap();
        let sol = s.solve(&[0.0; 3], &[3.0]).unwrap();
        assert!((sol.primal[0] - 1.5).abs() < 1e-14 && (sol.primal[1] - 1.5).abs() < 1e-14);
        assert_eq!(sol.primal[2], 0.0);
        assert!((sol.multipliers[0] + 3.0).abs() < 1e-14);
        let s = SaddleSystem::new(&a, &keys, &[None, None, Some(1.0)], vec![ConstraintRow {
            entries: vec![(0, 1.0), (1, 1.0), (2, 1.0)],
            key: [1.0, 1.0],
        }])
        .unwrap();
        let sol = s.solve(&[0.0; 3], &[3.0]).unwrap();
        assert!((sol.primal[0] - 1.0).abs() < 1e-14 && sol.primal[2] == 1.0);
    }
}
