use crate::error::{Error, Result};
use crate::functional::Element;
use crate::quadrature::triangle_rule;
use crate::solver::Solution;
use crate::Side;

/// Tail region of one straight part, snapped to mesh columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRegion {
    /// Requested distance from the distorted part.
    pub station: f64,
    /// `x1` range of the integrated cells.
    pub x_range: [f64; 2],
}

/// Width kept free of the truncation face.
pub const FACE_BUFFER: f64 = 1.0;

/// Resolves the tail beyond `station` (distance from the distorted part) on `side`.
pub fn tail_region(solution: &Solution, station: f64, side: Side) -> Result<TailRegion> {
    let mesh = &solution.system.dofs().mesh;
    let (zeta, h) = (mesh.zeta, mesh.h);
    if !(station >= 0.0) {
        return Err(Error::Analysis(format!("station {station} lies in the distorted part")));
    }
    if station > zeta - FACE_BUFFER - 2.0 * h {
        return Err(Error::Analysis(format!(
            "station {station} is within {} of the end face at distance {zeta}",
            FACE_BUFFER + 2.0 * h
        )));
    }
    let snap = |x: f64| -> f64 {
        *mesh.columns.iter().min_by(|a, b| (*a - x).abs().total_cmp(&(*b - x).abs())).expect("mesh has columns")
    };
    let x_range = match side {
        Side::Right => [snap(mesh.right_start + station), snap(mesh.right_start + zeta - FACE_BUFFER)],
        Side::Left => [snap(mesh.left_end - zeta + FACE_BUFFER), snap(mesh.left_end - station)],
    };
    if x_range[0] >= x_range[1] {
        return Err(Error::Analysis(format!("tail beyond station {station} contains no cells")));
    }
    Ok(TailRegion { station, x_range })
}

/// `||u - P||^2_{H^1}` over the tail beyond `station` on `side`, with `P` the end profile of
/// that side.
pub fn tail_energy(solution: &Solution, station: f64, side: Side) -> Result<f64> {
    let region = tail_region(solution, station, side)?;
    let sys = &solution.system;
    let dofs = sys.dofs();
    let mesh = &dofs.mesh;
    let (profile, offset) = match side {
        Side::Left => (&sys.left, sys.geometry.left_offset),
        Side::Right => (&sys.right, 0.0),
    };
    let rule = triangle_rule();
    let tol = 1e-9 * mesh.h;
    let mut total = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let pts = tri.map(|v| mesh.vertices[v]);
        let cx = (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0;
        if cx < region.x_range[0] - tol || cx > region.x_range[1] + tol {
            continue;
        }
        let el = Element::new(pts)?;
        let nodal = dofs.elements[t].map(|i| solution.field.node_velocity(i));
        for (l, w) in &rule {
            let phi = crate::functional::p2_values(*l);
            let g = el.gradients(*l);
            let mut val = [0.0; 2];
            let mut grad = [[0.0; 2]; 2];
            for a in 0..6 {
                for c in 0..2 {
                    val[c] += nodal[a][c] * phi[a];
                    for d in 0..2 {
                        grad[c][d] += nodal[a][c] * g[a][d];
                    }
                }
            }
            let y = el.point(*l)[1] - offset;
            val[0] -= profile.value(y);
            grad[0][1] -= profile.derivative(y);
            let s: f64 = val.iter().chain(grad.iter().flatten()).map(|v| v * v).sum();
            total += w * el.area * s;
        }
    }
    Ok(total)
}
