//! Bilinear and trilinear forms of the weak formulation on the Taylor-Hood pair.
//!
//! All velocity matrices act on frame coefficients (see [`DofMap`]); pressure matrices use the
//! vertex hat functions. Element integrals use the degree-5 seven-point rule, which is exact for
//! every form assembled here.

use std::sync::Arc;

use super::dofs::DofMap;
use super::element::{p2_values, Element, EDGE_MASS};
use crate::error::Result;
use crate::geometry::Mesh;
use crate::linalg::{CsrMatrix, Triplets};
use crate::poiseuille::Friction;
use crate::quadrature::triangle_rule;

/// Assembled matrices of the discrete weak formulation.
#[derive(Debug, Clone)]
pub struct FormAssembly {
    pub dofs: Arc<DofMap>,
    pub alpha: Friction<f64>,
    pub elements: Vec<Element>,
    /// `2 int S u : S v`.
    pub strain: CsrMatrix,
    /// `alpha int_walls u_tan v_tan dS` on the tangent coefficients (zero for no-slip, where
    /// the walls are clamped).
    pub friction: CsrMatrix,
    /// `-int q div v`, pressure rows by velocity columns.
    pub divergence: CsrMatrix,
    /// `int u . v`.
    pub mass: CsrMatrix,
    /// `int grad u : grad v`.
    pub stiffness: CsrMatrix,
    /// `int p q` on the pressure space.
    pub pressure_mass: CsrMatrix,
}

/// Scalar quadratic-basis matrices used by the scalar Poincare estimate.
#[derive(Debug, Clone)]
pub struct ScalarForms {
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    /// `int psi_k phi_i`: vertex hats by quadratic basis functions.
    pub mixed_mass: CsrMatrix,
}

/// Assembles every form of the weak formulation on `mesh`.
pub fn assemble_forms(mesh: &Mesh, alpha: Friction<f64>) -> Result<FormAssembly> {
    let dofs = Arc::new(DofMap::new(Arc::new(mesh.clone()))?);
    assemble_forms_on(dofs, alpha)
}

/// As [`assemble_forms`] on an existing layout.
pub fn assemble_forms_on(dofs: Arc<DofMap>, alpha: Friction<f64>) -> Result<FormAssembly> {
    let mesh = &dofs.mesh;
    let elements = mesh
        .triangles
        .iter()
        .map(|t| Element::new(t.map(|v| mesh.vertices[v])))
        .collect::<Result<Vec<_>>>()?;
    let nv = dofs.n_velocity();
    let np = dofs.n_pressure();
    let mut strain = Triplets::new(nv, nv);
    let mut mass = Triplets::new(nv, nv);
    let mut stiffness = Triplets::new(nv, nv);
    let mut divergence = Triplets::new(np, nv);
    let mut pressure_mass = Triplets::new(np, np);
    let rule = triangle_rule();
    for (el, nodes) in elements.iter().zip(&dofs.elements) {
        let mut ks = [[0.0; 12]; 12];
        let mut km = [[0.0; 12]; 12];
        let mut kg = [[0.0; 12]; 12];
        let mut kd = [[0.0; 12]; 3];
        let mut kp = [[0.0; 3]; 3];
        for (l, w) in &rule {
            let wa = w * el.area;
            let phi = p2_values(*l);
            let g = el.gradients(*l);
            for a in 0..6 {
                for b in 0..6 {
                    let gg = g[a][0] * g[b][0] + g[a][1] * g[b][1];
                    let mm = phi[a] * phi[b];
                    for c in 0..2 {
                        km[2 * a + c][2 * b + c] += wa * mm;
                        kg[2 * a + c][2 * b + c] += wa * gg;
                        for d in 0..2 {
                            let delta = if c == d { gg } else { 0.0 };
                            ks[2 * a + c][2 * b + d] += wa * (delta + g[a][d] * g[b][c]);
                        }
                    }
                }
            }
            for k in 0..3 {
                for b in 0..6 {
                    for d in 0..2 {
                        kd[k][2 * b + d] -= wa * l[k] * g[b][d];
                    }
                }
                for j in 0..3 {
                    kp[k][j] += wa * l[k] * l[j];
                }
            }
        }
        push_vv(&mut strain, &dofs, nodes, nodes, &ks);
        push_vv(&mut mass, &dofs, nodes, nodes, &km);
        push_vv(&mut stiffness, &dofs, nodes, nodes, &kg);
        push_pv(&mut divergence, &dofs, nodes, &kd);
        for k in 0..3 {
            for j in 0..3 {
                pressure_mass.push(nodes[k], nodes[j], kp[k][j]);
            }
        }
    }
    let mut friction = Triplets::new(nv, nv);
    if let Friction::Finite(a) = alpha {
        // u_tan = (u . t) t with only the tangent coefficient carried: u . t = c_t (tau . t)
        for e in &dofs.wall_edges {
            let local = [e.a, e.mid, e.b];
            let proj = local.map(|i| {
                let tau = dofs.frames[i][1];
                tau[0] * e.tangent[0] + tau[1] * e.tangent[1]
            });
            for p in 0..3 {
                for q in 0..3 {
                    let m = a * e.length * EDGE_MASS[p][q] * proj[p] * proj[q];
                    friction.push(2 * local[p] + 1, 2 * local[q] + 1, m);
                }
            }
        }
    }
    Ok(FormAssembly {
        dofs,
        alpha,
        elements,
        strain: strain.to_csr(),
        friction: friction.to_csr(),
        divergence: divergence.to_csr(),
        mass: mass.to_csr(),
        stiffness: stiffness.to_csr(),
        pressure_mass: pressure_mass.to_csr(),
    })
}

/// Scalar mass, stiffness and hat-by-quadratic mass matrices.
pub fn assemble_scalar_forms(dofs: &DofMap) -> Result<ScalarForms> {
    let n = dofs.n_nodes();
    let np = dofs.n_pressure();
    let mut mass = Triplets::new(n, n);
    let mut stiffness = Triplets::new(n, n);
    let mut mixed = Triplets::new(np, n);
    let rule = triangle_rule();
    for (tri, nodes) in dofs.mesh.triangles.iter().zip(&dofs.elements) {
        let el = Element::new(tri.map(|v| dofs.mesh.vertices[v]))?;
        let mut km = [[0.0; 6]; 6];
        let mut kg = [[0.0; 6]; 6];
        let mut kx = [[0.0; 6]; 3];
        for (l, w) in &rule {
            let wa = w * el.area;
            let phi = p2_values(*l);
            let g = el.gradients(*l);
            for a in 0..6 {
                for b in 0..6 {
                    km[a][b] += wa * phi[a] * phi[b];
                    kg[a][b] += wa * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
            for k in 0..3 {
                for b in 0..6 {
                    kx[k][b] += wa * l[k] * phi[b];
                }
            }
        }
        for a in 0..6 {
            for b in 0..6 {
                mass.push(nodes[a], nodes[b], km[a][b]);
                stiffness.push(nodes[a], nodes[b], kg[a][b]);
            }
        }
        for k in 0..3 {
            for b in 0..6 {
                mixed.push(nodes[k], nodes[b], kx[k][b]);
            }
        }
    }
    Ok(ScalarForms { mass: mass.to_csr(), stiffness: stiffness.to_csr(), mixed_mass: mixed.to_csr() })
}

impl FormAssembly {
    /// Strain plus friction: the symmetric part of the linearized operator.
    pub fn viscous(&self) -> CsrMatrix {
        CsrMatrix::linear_combination(1.0, &self.strain, 1.0, &self.friction)
    }

    /// `int u . v + int grad u : grad v`.
    pub fn h1(&self) -> CsrMatrix {
        CsrMatrix::linear_combination(1.0, &self.mass, 1.0, &self.stiffness)
    }

    /// Handle on the convection term.
    pub fn convection(&self) -> Convection<'_> {
        Convection { forms: self }
    }
}

/// Convection `int (w . grad u) . v` and its linearizations.
#[derive(Debug, Clone, Copy)]
pub struct Convection<'a> {
    forms: &'a FormAssembly,
}

impl Convection<'_> {
    fn local_cartesian(&self, coeffs: &[f64], nodes: &[usize; 6]) -> [[f64; 2]; 6] {
        nodes.map(|i| self.forms.dofs.cartesian(coeffs, i))
    }

    /// Jacobian of `u -> int (u . grad u) . v` at `w` when `newton`, else the Picard matrix
    /// `u -> int (w . grad u) . v`.
    pub fn matrix(&self, w: &[f64], newton: bool) -> CsrMatrix {
        let dofs = &self.forms.dofs;
        let nv = dofs.n_velocity();
        let mut t = Triplets::new(nv, nv);
        let rule = triangle_rule();
        for (el, nodes) in self.forms.elements.iter().zip(&dofs.elements) {
            let wl = self.local_cartesian(w, nodes);
            let mut k = [[0.0; 12]; 12];
            for (l, q) in &rule {
                let wa = q * el.area;
                let phi = p2_values(*l);
                let g = el.gradients(*l);
                let (wq, gw) = value_and_gradient(&wl, &phi, &g);
                for a in 0..6 {
                    for b in 0..6 {
                        let adv = wq[0] * g[b][0] + wq[1] * g[b][1];
                        for c in 0..2 {
                            k[2 * a + c][2 * b + c] += wa * adv * phi[a];
                            if newton {
                                for d in 0..2 {
                                    k[2 * a + c][2 * b + d] += wa * phi[b] * gw[c][d] * phi[a];
                                }
                            }
                        }
                    }
                }
            }
            push_vv(&mut t, dofs, nodes, nodes, &k);
        }
        t.to_csr()
    }

    /// The vector `int (w . grad w) . phi_i`.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        let dofs = &self.forms.dofs;
        let mut out = vec![0.0; dofs.n_velocity()];
        let rule = triangle_rule();
        for (el, nodes) in self.forms.elements.iter().zip(&dofs.elements) {
            let wl = self.local_cartesian(w, nodes);
            let mut r = [[0.0; 2]; 6];
            for (l, q) in &rule {
                let wa = q * el.area;
                let phi = p2_values(*l);
                let g = el.gradients(*l);
                let (wq, gw) = value_and_gradient(&wl, &phi, &g);
                let conv = [wq[0] * gw[0][0] + wq[1] * gw[0][1], wq[0] * gw[1][0] + wq[1] * gw[1][1]];
                for a in 0..6 {
                    r[a][0] += wa * conv[0] * phi[a];
                    r[a][1] += wa * conv[1] * phi[a];
                }
            }
            for a in 0..6 {
                let c = dofs.to_frame(nodes[a], r[a]);
                out[2 * nodes[a]] += c[0];
                out[2 * nodes[a] + 1] += c[1];
            }
        }
        out
    }

    /// `int (u . grad v) . z`.
    pub fn trilinear(&self, u: &[f64], v: &[f64], z: &[f64]) -> f64 {
        let dofs = &self.forms.dofs;
        let rule = triangle_rule();
        let mut total = 0.0;
        for (el, nodes) in self.forms.elements.iter().zip(&dofs.elements) {
            let (ul, vl, zl) = (self.local_cartesian(u, nodes), self.local_cartesian(v, nodes), self.local_cartesian(z, nodes));
            for (l, q) in &rule {
                let phi = p2_values(*l);
                let g = el.gradients(*l);
                let (uq, _) = value_and_gradient(&ul, &phi, &g);
                let (_, gv) = value_and_gradient(&vl, &phi, &g);
                let (zq, _) = value_and_gradient(&zl, &phi, &g);
                let c0 = uq[0] * gv[0][0] + uq[1] * gv[0][1];
                let c1 = uq[0] * gv[1][0] + uq[1] * gv[1][1];
                total += q * el.area * (c0 * zq[0] + c1 * zq[1]);
            }
        }
        total
    }
}

/// Value and Jacobian (`[i][j] = d_j u_i`) of a local quadratic field.
pub(crate) fn value_and_gradient(nodal: &[[f64; 2]; 6], phi: &[f64; 6], g: &[[f64; 2]; 6]) -> ([f64; 2], [[f64; 2]; 2]) {
    let mut v = [0.0; 2];
    let mut j = [[0.0; 2]; 2];
    for a in 0..6 {
        for c in 0..2 {
            v[c] += nodal[a][c] * phi[a];
            for d in 0..2 {
                j[c][d] += nodal[a][c] * g[a][d];
            }
        }
    }
    (v, j)
}

/// Pushes a Cartesian local velocity-velocity matrix after rotating into node frames.
fn push_vv<const R: usize, const C: usize>(t: &mut Triplets, dofs: &DofMap, rows: &[usize], cols: &[usize], k: &[[f64; C]; R]) {
    for (a, &na) in rows.iter().enumerate() {
        let fa = &dofs.frames[na];
        for (b, &nb) in cols.iter().enumerate() {
            let fb = &dofs.frames[nb];
            for p in 0..2 {
                for q in 0..2 {
                    let mut s = 0.0;
                    for c in 0..2 {
                        for d in 0..2 {
                            s += fa[p][c] * k[2 * a + c][2 * b + d] * fb[q][d];
                        }
                    }
                    t.push(2 * na + p, 2 * nb + q, s);
                }
            }
        }
    }
}

/// Pushes a pressure-velocity local matrix with rotated velocity columns.
fn push_pv(t: &mut Triplets, dofs: &DofMap, nodes: &[usize; 6], k: &[[f64; 12]; 3]) {
    for (r, row) in k.iter().enumerate() {
        for (b, &nb) in nodes.iter().enumerate() {
            let fb = &dofs.frames[nb];
            for q in 0..2 {
                let s = row[2 * b] * fb[q][0] + row[2 * b + 1] * fb[q][1];
                t.push(nodes[r], 2 * nb + q, s);
            }
        }
    }
}
