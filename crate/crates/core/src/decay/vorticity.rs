use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::solver::Solution;
use crate::Friction;

/// Wall residual of `omega = (-2 kappa + alpha) u_tan`.
#[derive(Debug, Clone, PartialEq)]
pub struct VorticityResidual {
    pub max: f64,
    /// Discrete `L^2(wall)` norm, weighted by half the adjacent wall edge lengths.
    pub l2: f64,
    /// Largest `|(-2 kappa + alpha) u_tan|` over the same nodes.
    pub scale: f64,
    pub samples: Vec<WallVorticity>,
}

/// Recovered vorticity at one wall vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallVorticity {
    pub node: usize,
    pub x: [f64; 2],
    pub omega: f64,
    pub predicted: f64,
}

/// Velocity gradient at vertex `v` from a least-squares quadratic fit over the nodes of the
/// triangles around `v`.
pub fn recovered_gradient(solution: &Solution, patch: &[usize], v: usize) -> Result<[[f64; 2]; 2]> {
    let dofs = solution.system.dofs();
    let h = dofs.mesh.h;
    let x0 = dofs.nodes[v];
    if patch.len() < 6 {
        return Err(Error::Analysis(format!("patch of node {v} has {} nodes", patch.len())));
    }
    let mut a = DMatrix::zeros(patch.len(), 6);
    let mut b = DMatrix::zeros(patch.len(), 2);
    for (r, &i) in patch.iter().enumerate() {
        let x = (dofs.nodes[i][0] - x0[0]) / h;
        let y = (dofs.nodes[i][1] - x0[1]) / h;
        for (c, m) in [1.0, x, y, x * x, x * y, y * y].into_iter().enumerate() {
            a[(r, c)] = m;
        }
        let u = solution.field.node_velocity(i);
        b[(r, 0)] = u[0];
        b[(r, 1)] = u[1];
    }
    let svd = a.svd(true, true);
    let coef = svd.solve(&b, 1e-12).map_err(|e| Error::Analysis(format!("patch fit at node {v}: {e}")))?;
    Ok([[coef[(1, 0)] / h, coef[(2, 0)] / h], [coef[(1, 1)] / h, coef[(2, 1)] / h]])
}

/// Compares the recovered wall vorticity `d2 u1 - d1 u2` with `(-2 kappa + alpha) u_tan` at
/// every wall vertex away from the end faces. `u_tan` uses the counter-clockwise tangent.
pub fn boundary_vorticity_residual(solution: &Solution) -> Result<VorticityResidual> {
    let sys = &solution.system;
    let alpha = match sys.alpha() {
        Friction::Finite(a) => a,
        Friction::NoSlip => {
            return Err(Error::Analysis("the vorticity relation needs a finite friction coefficient".into()));
        }
    };
    let dofs = sys.dofs();
    let mesh = &dofs.mesh;
    let nv = dofs.n_vertices();
    let mut patches: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for el in &dofs.elements {
        for &v in &el[..3] {
            if dofs.wall[v].is_some() {
                patches[v].extend_from_slice(el);
            }
        }
    }
    let mut weight = vec![0.0; nv];
    for e in &dofs.wall_edges {
        weight[e.a] += 0.5 * e.length;
        weight[e.b] += 0.5 * e.length;
    }
    let mut samples = Vec::new();
    let (mut max, mut l2, mut scale) = (0.0f64, 0.0, 0.0f64);
    for v in 0..nv {
        let Some(side) = dofs.wall[v] else { continue };
        if dofs.end[v].is_some() {
            continue;
        }
        let patch = &mut patches[v];
        patch.sort_unstable();
        patch.dedup();
        let g = recovered_gradient(solution, patch, v)?;
        let omega = g[0][1] - g[1][0];
        let s = mesh.wall_s[v].ok_or_else(|| Error::Analysis(format!("wall vertex {v} has no arc length")))?;
        let kappa = sys.geometry.curve(side).eval(s).kappa;
        let u = solution.field.node_velocity(v);
        let tau = dofs.frames[v][1];
        let predicted = (-2.0 * kappa + alpha) * (u[0] * tau[0] + u[1] * tau[1]);
        let r = (omega - predicted).abs();
        max = max.max(r);
        l2 += weight[v] * r * r;
        scale = scale.max(predicted.abs());
        samples.push(WallVorticity { node: v, x: dofs.nodes[v], omega, predicted });
    }
    Ok(VorticityResidual { max, l2: l2.sqrt(), scale, samples })
}
