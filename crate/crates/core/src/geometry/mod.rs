//! Distorted strips, boundary-fitted charts and meshes.

mod chart;
mod curve;
mod mesh;
mod strip;

pub use chart::{ChartField, CurvilinearChart};
pub use curve::{arclength_reparametrize, smooth_step, BoundaryCurve, CurvePoint, CurveSample, ParametricFn, SplineEnds, WallGraph, WallSide};
pub use mesh::{build_mesh, BoundaryEdge, BoundaryTag, Mesh};
pub use strip::{ConstrictionParams, GeometryKind, SBendParams, StripGeometry};

/// Reads wall samples: one `x y` pair per line, `#` starts a comment.
pub fn parse_wall_samples(text: &str) -> crate::Result<Vec<[f64; 2]>> {
    let mut pts = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| crate::Error::Geometry(format!("line {}: {e}", n + 1)))?;
        if vals.len() != 2 {
            return Err(crate::Error::Geometry(format!("line {}: expected two numbers", n + 1)));
        }
        pts.push([vals[0], vals[1]]);
    }
    Ok(pts)
}
