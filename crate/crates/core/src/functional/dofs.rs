//! Quadratic velocity / linear pressure degree-of-freedom layout.
//!
//! Velocity nodes are the mesh vertices followed by the edge midpoints. Each node carries two
//! coefficients in a local orthonormal frame: the Cartesian frame in the interior and
//! `(normal, tangent)` on walls. Wall normals are the consistent ones: the edge normal at a
//! midpoint and the length-weighted mean of the adjacent edge normals at a vertex, which makes
//! `int q u.n dS = 0` on the walls for every continuous piecewise linear `q` once the normal
//! coefficients vanish.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryTag, Mesh, WallSide};
use crate::poiseuille::{Friction, Side};

/// A wall edge with its midpoint node.
#[derive(Debug, Clone, Copy)]
pub struct WallEdge {
    pub a: usize,
    pub mid: usize,
    pub b: usize,
    pub side: WallSide,
    pub length: f64,
    pub tangent: [f64; 2],
    /// Outward unit normal.
    pub normal: [f64; 2],
}

/// An end-face edge with its midpoint node.
#[derive(Debug, Clone, Copy)]
pub struct EndEdge {
    pub a: usize,
    pub mid: usize,
    pub b: usize,
    pub side: Side,
}

/// Node and element numbering of the Taylor-Hood pair on a mesh.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub mesh: Arc<Mesh>,
    /// Vertices first (same indices as the mesh), then edge midpoints.
    pub nodes: Vec<[f64; 2]>,
    /// Per triangle: three vertices, then midpoints of edges 01, 12, 20.
    pub elements: Vec<[usize; 6]>,
    pub wall: Vec<Option<WallSide>>,
    pub end: Vec<Option<Side>>,
    /// Columns are the frame vectors: `u = c0 frames[i][0] + c1 frames[i][1]`.
    pub frames: Vec<[[f64; 2]; 2]>,
    pub wall_edges: Vec<WallEdge>,
    pub end_edges: Vec<EndEdge>,
    /// Triangles whose centroid lies between consecutive mesh columns.
    column_triangles: Vec<Vec<usize>>,
    midpoint: HashMap<(usize, usize), usize>,
}

impl DofMap {
    pub fn new(mesh: Arc<Mesh>) -> Result<Self> {
        let nv = mesh.vertices.len();
        let mut nodes = mesh.vertices.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut elements = Vec::with_capacity(mesh.triangles.len());
        for tri in &mesh.triangles {
            let mut el = [tri[0], tri[1], tri[2], 0, 0, 0];
            for (k, (p, q)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                let key = (tri[p].min(tri[q]), tri[p].max(tri[q]));
                el[3 + k] = *midpoint.entry(key).or_insert_with(|| {
                    let (x, y) = (mesh.vertices[key.0], mesh.vertices[key.1]);
                    nodes.push([0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])]);
                    nodes.len() - 1
                });
            }
            elements.push(el);
        }
        let n = nodes.len();
        let mut wall = vec![None; n];
        let mut end = vec![None; n];
        let mut wall_edges = Vec::new();
        let mut end_edges = Vec::new();
        let mut vertex_normal = vec![[0.0f64; 2]; nv];
        for e in &mesh.boundary_edges {
            let mid = *midpoint
                .get(&(e.a.min(e.b), e.a.max(e.b)))
                .ok_or_else(|| Error::Assembly(format!("boundary edge ({}, {}) is not a triangle edge", e.a, e.b)))?;
            let (pa, pb) = (mesh.vertices[e.a], mesh.vertices[e.b]);
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            let length = d[0].hypot(d[1]);
            if !(length > 0.0) {
                return Err(Error::Assembly(format!("boundary edge ({}, {}) has zero length", e.a, e.b)));
            }
            let tangent = [d[0] / length, d[1] / length];
            let normal = [tangent[1], -tangent[0]];
            match e.tag {
                BoundaryTag::WallLower | BoundaryTag::WallUpper => {
                    let side = e.tag.wall_side().unwrap();
                    for v in [e.a, mid, e.b] {
                        wall[v] = Some(side);
                    }
                    for v in [e.a, e.b] {
                        vertex_normal[v][0] += length * normal[0];
                        vertex_normal[v][1] += length * normal[1];
                    }
                    wall_edges.push(WallEdge { a: e.a, mid, b: e.b, side, length, tangent, normal });
                }
                BoundaryTag::EndLeft | BoundaryTag::EndRight => {
                    let side = if e.tag == BoundaryTag::EndLeft { Side::Left } else { Side::Right };
                    for v in [e.a, mid, e.b] {
                        end[v] = Some(side);
                    }
                    end_edges.push(EndEdge { a: e.a, mid, b: e.b, side });
                }
            }
        }
        let mut frames = vec![[[1.0, 0.0], [0.0, 1.0]]; n];
        for (v, nrm) in vertex_normal.iter().enumerate() {
            if wall[v].is_some() {
                let len = nrm[0].hypot(nrm[1]);
                frames[v] = normal_frame([nrm[0] / len, nrm[1] / len]);
            }
        }
        for e in &wall_edges {
            frames[e.mid] = normal_frame(e.normal);
        }
        let cols = &mesh.columns;
        let mut column_triangles = vec![Vec::new(); cols.len().saturating_sub(1).max(1)];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let cx = tri.iter().map(|&v| mesh.vertices[v][0]).sum::<f64>() / 3.0;
            let k = cols.partition_point(|&c| c <= cx).saturating_sub(1).min(column_triangles.len() - 1);
            column_triangles[k].push(t);
        }
        Ok(Self { mesh, nodes, elements, wall, end, frames, wall_edges, end_edges, column_triangles, midpoint })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.mesh.vertices.len()
    }

    /// Number of velocity coefficients (two per node).
    pub fn n_velocity(&self) -> usize {
        2 * self.nodes.len()
    }

    pub fn n_pressure(&self) -> usize {
        self.mesh.vertices.len()
    }

    /// Cartesian velocity at a node from frame coefficients.
    pub fn cartesian(&self, coeffs: &[f64], node: usize) -> [f64; 2] {
        let f = &self.frames[node];
        let (c0, c1) = (coeffs[2 * node], coeffs[2 * node + 1]);
        [c0 * f[0][0] + c1 * f[1][0], c0 * f[0][1] + c1 * f[1][1]]
    }

    /// Frame coefficients of a Cartesian vector at a node.
    pub fn to_frame(&self, node: usize, u: [f64; 2]) -> [f64; 2] {
        let f = &self.frames[node];
        [u[0] * f[0][0] + u[1] * f[0][1], u[0] * f[1][0] + u[1] * f[1][1]]
    }

    /// Frame coefficients interpolating a Cartesian vector field at the nodes.
    pub fn interpolate<F: Fn([f64; 2]) -> [f64; 2]>(&self, f: F) -> Vec<f64> {
        let mut c = vec![0.0; self.n_velocity()];
        for (i, x) in self.nodes.iter().enumerate() {
            let v = self.to_frame(i, f(*x));
            c[2 * i] = v[0];
            c[2 * i + 1] = v[1];
        }
        c
    }

    /// Cartesian node values of frame coefficients.
    pub fn to_cartesian(&self, coeffs: &[f64]) -> Vec<[f64; 2]> {
        (0..self.n_nodes()).map(|i| self.cartesian(coeffs, i)).collect()
    }

    /// Coefficients fixed to zero by the wall condition: the normal one, or both for no-slip.
    pub fn wall_fixed(&self, alpha: Friction<f64>) -> Vec<Option<f64>> {
        let mut fixed = vec![None; self.n_velocity()];
        for (i, w) in self.wall.iter().enumerate() {
            if w.is_some() {
                fixed[2 * i] = Some(0.0);
                if alpha.is_no_slip() {
                    fixed[2 * i + 1] = Some(0.0);
                }
            }
        }
        fixed
    }

    /// Marks both coefficients of every end-face node as fixed with the given Cartesian values.
    pub fn fix_ends<F: Fn(Side, [f64; 2]) -> [f64; 2]>(&self, fixed: &mut [Option<f64>], value: F) {
        for (i, e) in self.end.iter().enumerate() {
            if let Some(side) = e {
                let c = self.to_frame(i, value(*side, self.nodes[i]));
                fixed[2 * i] = Some(c[0]);
                fixed[2 * i + 1] = Some(c[1]);
            }
        }
    }

    /// Sort key of a velocity coefficient for banded ordering.
    pub fn velocity_keys(&self) -> Vec<[f64; 2]> {
        self.nodes.iter().flat_map(|x| [*x, *x]).collect()
    }

    /// Triangle containing `x` and its barycentric coordinates.
    pub fn locate(&self, x: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let cols = &self.mesh.columns;
        let k = cols.partition_point(|&c| c <= x[0]).saturating_sub(1);
        let tol = 1e-10;
        for kk in [k, k.wrapping_sub(1), k + 1] {
            let Some(list) = self.column_triangles.get(kk) else { continue };
            for &t in list {
                let l = barycentric(&self.mesh, t, x);
                if l.iter().all(|&v| v >= -tol) {
                    return Some((t, l));
                }
            }
        }
        None
    }

    /// Midpoint node of the edge `(a, b)`, if it is a mesh edge.
    pub fn edge_midpoint(&self, a: usize, b: usize) -> Option<usize> {
        self.midpoint.get(&(a.min(b), a.max(b))).copied()
    }

    /// Interior vertex closest to the mesh centroid, used to pin the pressure.
    pub fn pressure_pin(&self) -> usize {
        let n = self.n_vertices() as f64;
        let c = self.mesh.vertices.iter().fold([0.0, 0.0], |s, v| [s[0] + v[0] / n, s[1] + v[1] / n]);
        (0..self.n_vertices())
            .filter(|&v| self.wall[v].is_none() && self.end[v].is_none())
            .min_by(|&a, &b| {
                let d = |v: usize| (self.nodes[v][0] - c[0]).powi(2) + (self.nodes[v][1] - c[1]).powi(2);
                d(a).total_cmp(&d(b)).then(a.cmp(&b))
            })
            .unwrap_or(0)
    }

    /// Vertices lying on the mesh column `x1 = columns[j]`.
    pub fn column_vertices(&self, j: usize) -> Vec<usize> {
        let c = self.mesh.columns[j];
        let tol = 1e-12 * (1.0 + c.abs());
        (0..self.n_vertices()).filter(|&v| (self.mesh.vertices[v][0] - c).abs() <= tol).collect()
    }
}

fn normal_frame(n: [f64; 2]) -> [[f64; 2]; 2] {
    [n, [-n[1], n[0]]]
}

fn barycentric(mesh: &Mesh, t: usize, x: [f64; 2]) -> [f64; 3] {
    let [a, b, c] = mesh.triangles[t].map(|i| mesh.vertices[i]);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (x[1] - a[1]) * (c[0] - a[0])) / det;
    let l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0])) / det;
    [1.0 - l1 - l2, l1, l2]
}
