//! Rayleigh-quotient estimates of the Poincare, Korn and inf-sup constants.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::dofs::DofMap;
use super::eigen::{lowest_eigenpair, EigenPair};
use super::forms::{assemble_forms_on, assemble_scalar_forms, FormAssembly};
use super::system::{ConstraintRow, SaddleSystem};
use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::linalg::{dot, CsrMatrix};
use crate::poiseuille::Friction;

const BLOCK: usize = 16;
const SEED: u64 = 0xC0FFEE;

/// Constrained space of a Poincare estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoincareConstraint {
    /// Scalar fields with zero mean on every cross-section.
    ScalarSectionMean,
    /// Vector fields with `u1` of zero mean on every cross-section and `u . n = 0` on the walls.
    ZeroMeanU1AndWallNormal,
}

/// A constant estimated from the lowest eigenpair of a constrained pencil.
#[derive(Debug, Clone)]
pub struct ConstantEstimate {
    pub constant: f64,
    /// Lowest eigenvalue of the pencil the constant is derived from.
    pub eigenvalue: f64,
    pub dofs: Arc<DofMap>,
    /// Extremal field: node values (scalar) or frame coefficients (vector).
    pub field: Vec<f64>,
    pub iterations: usize,
}

/// Smallest `C` with `||g|| <= C ||grad g||` on the constrained space of `mesh`.
///
/// Cross-section means are imposed weakly against the piecewise linear hats of the mesh columns
/// (`int g psi_j(x1) dx = 0` for every column `j`).
pub fn estimate_poincare_constant(mesh: &Mesh, constraint: PoincareConstraint) -> Result<ConstantEstimate> {
    let dofs = Arc::new(DofMap::new(Arc::new(mesh.clone()))?);
    let scalar = assemble_scalar_forms(&dofs)?;
    let columns = column_hat_rows(&dofs, &scalar.mixed_mass);
    let (a, n, fixed, keys, rows) = match constraint {
        PoincareConstraint::ScalarSectionMean => {
            let rows = columns.into_iter().map(|(key, entries)| ConstraintRow { entries: entries.into_iter().collect(), key }).collect();
            (scalar.stiffness, scalar.mass, vec![None; dofs.n_nodes()], dofs.nodes.clone(), rows)
        }
        PoincareConstraint::ZeroMeanU1AndWallNormal => {
            let forms = assemble_forms_on(dofs.clone(), Friction::Finite(0.0))?;
            let rows = columns
                .into_iter()
                .map(|(key, entries)| {
                    let mut e = Vec::with_capacity(2 * entries.len());
                    for (node, w) in entries {
                        for k in 0..2 {
                            e.push((2 * node + k, w * dofs.frames[node][k][0]));
                        }
                    }
                    ConstraintRow { entries: e, key }
                })
                .collect();
            (forms.stiffness, forms.mass, dofs.wall_fixed(Friction::Finite(0.0)), dofs.velocity_keys(), rows)
        }
    };
    let pair = constrained_lowest(&a, &n, &keys, &fixed, rows)?;
    Ok(ConstantEstimate { constant: 1.0 / pair.value.sqrt(), eigenvalue: pair.value, dofs, field: pair.vector, iterations: pair.iterations })
}

/// Korn estimate with the smallest strain eigenvalue on the constrained space.
#[derive(Debug, Clone)]
pub struct KornEstimate {
    /// Smallest `C` with `||g||_{H1}^2 <= C ||S g||^2`.
    pub constant: f64,
    /// `min ||S g||^2 / ||g||_{H1}^2`.
    pub strain_eigenvalue: f64,
    /// Whether the zero-flux functional was appended (it is not when it is numerically
    /// implied by the other constraints).
    pub flux_row: bool,
    pub dofs: Arc<DofMap>,
    pub field: Vec<f64>,
    pub iterations: usize,
}

/// Smallest `C` with `||g||_{H1}^2 <= C ||S g||^2` over discretely divergence-free fields with
/// `g . n = 0` on the walls, zero flux through the section at the start of the right straight
/// part, and vanishing end faces.
pub fn estimate_korn_constant(mesh: &Mesh) -> Result<KornEstimate> {
    let dofs = Arc::new(DofMap::new(Arc::new(mesh.clone()))?);
    let forms = assemble_forms_on(dofs.clone(), Friction::Finite(0.0))?;
    let mut fixed = dofs.wall_fixed(Friction::Finite(0.0));
    dofs.fix_ends(&mut fixed, |_, _| [0.0, 0.0]);
    let keys = dofs.velocity_keys();
    let pin = dofs.pressure_pin();
    let mut rows = ConstraintRow::from_matrix(&forms.divergence, &dofs.mesh.vertices, Some(pin));
    let h1 = forms.h1();
    let flux = section_flux_row(&dofs, mesh.right_start)?;
    rows.push(flux);
    let (pair, flux_row) = match constrained_lowest(&forms.strain, &h1, &keys, &fixed, rows.clone()) {
        Ok(p) => (p, true),
        Err(Error::LinearSolve { .. }) => {
            rows.pop();
            (constrained_lowest(&forms.strain, &h1, &keys, &fixed, rows)?, false)
        }
        Err(e) => return Err(e),
    };
    let strain_eigenvalue = 0.5 * pair.value;
    if !(strain_eigenvalue > 0.0) {
        return Err(Error::Numerics(format!("strain form is not positive on the Korn space ({strain_eigenvalue:e})")));
    }
    Ok(KornEstimate {
        constant: 1.0 / strain_eigenvalue,
        strain_eigenvalue,
        flux_row,
        dofs,
        field: pair.vector,
        iterations: pair.iterations,
    })
}

/// Discrete inf-sup constant of the velocity-pressure pair.
#[derive(Debug, Clone)]
pub struct InfSupWitness {
    /// `min_q max_v (q, div v) / (|q|_{L2} |v|_{H1})` over zero-mean pressures.
    pub beta: f64,
    pub iterations: usize,
}

/// Smallest singular value of the divergence matrix between the `H1` velocity norm (walls
/// impermeable, end faces clamped) and the `L2` norm of zero-mean pressures.
pub fn inf_sup_witness(mesh: &Mesh) -> Result<InfSupWitness> {
    let dofs = Arc::new(DofMap::new(Arc::new(mesh.clone()))?);
    let forms = assemble_forms_on(dofs.clone(), Friction::Finite(0.0))?;
    inf_sup_from_forms(&forms)
}

fn inf_sup_from_forms(forms: &FormAssembly) -> Result<InfSupWitness> {
    let dofs = &forms.dofs;
    let mut fixed = dofs.wall_fixed(Friction::Finite(0.0));
    dofs.fix_ends(&mut fixed, |_, _| [0.0, 0.0]);
    let pin = dofs.pressure_pin();
    let rows = ConstraintRow::from_matrix(&forms.divergence, &dofs.mesh.vertices, Some(pin));
    let kept: Vec<usize> = (0..dofs.n_pressure()).filter(|&k| k != pin).collect();
    let system = SaddleSystem::new(&forms.h1(), &dofs.velocity_keys(), &fixed, rows)?;
    let mp = &forms.pressure_mass;
    let ones = vec![1.0; dofs.n_pressure()];
    let m1 = mp.mul_vec(&ones);
    let total = dot(&ones, &m1);
    let apply_n = |p: &[f64]| {
        let mp_p = mp.mul_vec(p);
        let c = dot(&m1, p) / total;
        let mut out: Vec<f64> = mp_p.iter().zip(&m1).map(|(a, b)| a - c * b).collect();
        out[pin] = 0.0;
        out
    };
    let zero = vec![0.0; dofs.n_velocity()];
    let solve = |z: &[f64]| {
        let g: Vec<f64> = kept.iter().map(|&k| z[k]).collect();
        let sol = system.solve_homogeneous(&zero, &g)?;
        let mut p = vec![0.0; dofs.n_pressure()];
        for (r, &k) in kept.iter().enumerate() {
            p[k] = -sol.multipliers[r];
        }
        Ok(p)
    };
    let pair = lowest_eigenpair(dofs.n_pressure(), BLOCK, solve, apply_n, SEED)?;
    Ok(InfSupWitness { beta: pair.value.max(0.0).sqrt(), iterations: pair.iterations })
}

/// Lowest eigenpair of `A x = lambda N x` on `{x : fixed entries 0, rows x = 0}`.
fn constrained_lowest(a: &CsrMatrix, n: &CsrMatrix, keys: &[[f64; 2]], fixed: &[Option<f64>], rows: Vec<ConstraintRow>) -> Result<EigenPair> {
    let nrows = rows.len();
    let system = SaddleSystem::new(a, keys, fixed, rows)?;
    let g = vec![0.0; nrows];
    let zero_fixed: Vec<bool> = fixed.iter().map(Option::is_some).collect();
    let apply_n = |x: &[f64]| {
        let mut y = n.mul_vec(x);
        for (v, z) in y.iter_mut().zip(&zero_fixed) {
            if *z {
                *v = 0.0;
            }
        }
        y
    };
    let solve = |r: &[f64]| Ok(system.solve_homogeneous(r, &g)?.primal);
    lowest_eigenpair(a.nrows, BLOCK, solve, apply_n, SEED)
}

/// Column hat functionals `int phi_i psi_j(x1)` keyed by column position.
fn column_hat_rows(dofs: &DofMap, mixed: &CsrMatrix) -> Vec<([f64; 2], BTreeMap<usize, f64>)> {
    let cols = &dofs.mesh.columns;
    let mid = dofs.nodes.iter().map(|x| x[1]).sum::<f64>() / dofs.n_nodes() as f64;
    (0..cols.len())
        .map(|j| {
            let mut acc = BTreeMap::new();
            for v in dofs.column_vertices(j) {
                for (i, w) in mixed.row(v) {
                    *acc.entry(i).or_insert(0.0) += w;
                }
            }
            ([cols[j], mid], acc)
        })
        .collect()
}

/// Simpson quadrature of `u1` along the mesh column nearest to `x1`.
fn section_flux_row(dofs: &DofMap, x1: f64) -> Result<ConstraintRow> {
    let cols = &dofs.mesh.columns;
    let j = (0..cols.len())
        .min_by(|&a, &b| (cols[a] - x1).abs().total_cmp(&(cols[b] - x1).abs()))
        .ok_or_else(|| Error::Assembly("mesh has no columns".into()))?;
    let mut verts = dofs.column_vertices(j);
    verts.sort_by(|&a, &b| dofs.nodes[a][1].total_cmp(&dofs.nodes[b][1]));
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for w in verts.windows(2) {
        let m = dofs
            .edge_midpoint(w[0], w[1])
            .ok_or_else(|| Error::Assembly(format!("column {j} vertices {} and {} are not joined by an edge", w[0], w[1])))?;
        let len = dofs.nodes[w[1]][1] - dofs.nodes[w[0]][1];
        for (node, weight) in [(w[0], len / 6.0), (m, 4.0 * len / 6.0), (w[1], len / 6.0)] {
            for k in 0..2 {
                *acc.entry(2 * node + k).or_insert(0.0) += weight * dofs.frames[node][k][0];
            }
        }
    }
    let mid = 0.5 * (dofs.nodes[verts[0]][1] + dofs.nodes[*verts.last().unwrap()][1]);
    Ok(ConstraintRow { entries: acc.into_iter().collect(), key: [cols[j], mid] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_row_integrates_linear_profiles() {
        let mesh = Mesh::rectangle(-1.0, 1.0, 0.0, 1.0, 8, 4).unwrap();
        let dofs = DofMap::new(Arc::new(mesh)).unwrap();
        let row = section_flux_row(&dofs, 0.0).unwrap();
        let u = dofs.interpolate(|x| [x[1] * x[1] + 1.0, 3.0]);
        let v: f64 = row.entries.iter().map(|(j, w)| w * u[*j]).sum();
        assert!((v - 4.0 / 3.0).abs() < 1e-14);
    }
}
