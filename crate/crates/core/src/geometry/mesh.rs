//! Structured boundary-fitted triangulations of truncated strips.

use std::collections::HashMap;

use super::curve::WallSide;
use super::strip::StripGeometry;
use crate::error::{Error, Result};

/// Boundary edge classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    WallLower,
    WallUpper,
    EndLeft,
    EndRight,
}

impl BoundaryTag {
    pub fn is_wall(self) -> bool {
        matches!(self, BoundaryTag::WallLower | BoundaryTag::WallUpper)
    }

    pub fn wall_side(self) -> Option<WallSide> {
        match self {
            BoundaryTag::WallLower => Some(WallSide::Lower),
            BoundaryTag::WallUpper => Some(WallSide::Upper),
            _ => None,
        }
    }
}

/// Boundary edge traversed with the domain on its left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

/// Triangulation with tagged boundary.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub h: f64,
    pub zeta: f64,
    /// Arc length of wall vertices on their curve.
    pub wall_s: Vec<Option<f64>>,
    /// `x1` of the vertical vertex lines.
    pub columns: Vec<f64>,
    /// `x1` where the right straight section starts.
    pub right_start: f64,
    /// `x1` where the left straight section ends.
    pub left_end: f64,
}

impl Mesh {
    /// Structured mesh of `[x0, x1] x [y0, y1]`; bottom/top are walls, left/right are ends.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || x1 <= x0 || y1 <= y0 {
            return Err(Error::Mesh("degenerate rectangle".into()));
        }
        let columns: Vec<f64> = (0..=nx).map(|i| x0 + (x1 - x0) * i as f64 / nx as f64).collect();
        let walls: Vec<(f64, f64, Option<f64>, Option<f64>)> = columns.iter().map(|&x| (y0, y1, Some(x), Some(x))).collect();
        let h = ((x1 - x0) / nx as f64).max((y1 - y0) / ny as f64);
        Ok(structured(&columns, &walls, ny, h, 0.5 * (x1 - x0), x0.max(0.0).min(x1), x0))
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Vertices of the chain carrying `tag`, in traversal order.
    pub fn boundary_chain(&self, tag: BoundaryTag) -> Result<Vec<usize>> {
        let edges: Vec<&BoundaryEdge> = self.boundary_edges.iter().filter(|e| e.tag == tag).collect();
        if edges.is_empty() {
            return Ok(Vec::new());
        }
        let next: HashMap<usize, usize> = edges.iter().map(|e| (e.a, e.b)).collect();
        let heads: std::collections::HashSet<usize> = edges.iter().map(|e| e.b).collect();
        let starts: Vec<usize> = edges.iter().map(|e| e.a).filter(|a| !heads.contains(a)).collect();
        if starts.len() != 1 {
            return Err(Error::Mesh(format!("{tag:?} edges do not form one open chain")));
        }
        let mut chain = vec![starts[0]];
        while let Some(&n) = next.get(chain.last().unwrap()) {
            chain.push(n);
            if chain.len() > edges.len() + 1 {
                return Err(Error::Mesh(format!("{tag:?} chain is cyclic")));
            }
        }
        if chain.len() != edges.len() + 1 {
            return Err(Error::Mesh(format!("{tag:?} edges are disconnected")));
        }
        Ok(chain)
    }

    /// Checks orientation, chain structure and that the boundary closes into one loop.
    pub fn check_invariants(&self) -> Result<()> {
        for t in 0..self.triangles.len() {
            if self.triangle_area(t) <= 0.0 {
                return Err(Error::Mesh(format!("triangle {t} has non-positive area")));
            }
        }
        let tags = [BoundaryTag::WallLower, BoundaryTag::EndRight, BoundaryTag::WallUpper, BoundaryTag::EndLeft];
        let chains: Vec<Vec<usize>> = tags.iter().map(|&t| self.boundary_chain(t)).collect::<Result<_>>()?;
        for k in 0..4 {
            let (a, b) = (&chains[k], &chains[(k + 1) % 4]);
            if a.last() != b.first() {
                return Err(Error::Mesh(format!("boundary chains {:?} and {:?} do not connect", tags[k], tags[(k + 1) % 4])));
            }
        }
        Ok(())
    }

    /// Copy shifted by `d`.
    pub fn translated(&self, d: [f64; 2]) -> Mesh {
        let mut m = self.clone();
        for v in &mut m.vertices {
            v[0] += d[0];
            v[1] += d[1];
        }
        for c in &mut m.columns {
            *c += d[0];
        }
        m.right_start += d[0];
        m.left_end += d[0];
        m
    }

    /// Index of the vertex at `x` (within `tol`), if any.
    pub fn find_vertex(&self, x: [f64; 2], tol: f64) -> Option<usize> {
        self.vertices.iter().position(|v| (v[0] - x[0]).abs() <= tol && (v[1] - x[1]).abs() <= tol)
    }
}

#[allow(clippy::too_many_arguments)]
fn structured(
    columns: &[f64],
    walls: &[(f64, f64, Option<f64>, Option<f64>)],
    ny: usize,
    h: f64,
    zeta: f64,
    right_start: f64,
    left_end: f64,
) -> Mesh {
    let nx = columns.len() - 1;
    let idx = |i: usize, j: usize| i * (ny + 1) + j;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    let mut wall_s = Vec::with_capacity(vertices.capacity());
    for (i, &x) in columns.iter().enumerate() {
        let (lo, hi, s_lo, s_hi) = walls[i];
        for j in 0..=ny {
            let y = if j == ny { hi } else { lo + (hi - lo) * j as f64 / ny as f64 };
            vertices.push([x, y]);
            wall_s.push(if j == 0 { s_lo } else if j == ny { s_hi } else { None });
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            // mirrored in the right half so that no corner triangle has all vertices on the boundary
            if (2 * j < ny) == (2 * i < nx) {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    let mut boundary_edges = Vec::new();
    for i in 0..nx {
        boundary_edges.push(BoundaryEdge { a: idx(i, 0), b: idx(i + 1, 0), tag: BoundaryTag::WallLower });
    }
    for j in 0..ny {
        boundary_edges.push(BoundaryEdge { a: idx(nx, j), b: idx(nx, j + 1), tag: BoundaryTag::EndRight });
    }
    for i in (0..nx).rev() {
        boundary_edges.push(BoundaryEdge { a: idx(i + 1, ny), b: idx(i, ny), tag: BoundaryTag::WallUpper });
    }
    for j in (0..ny).rev() {
        boundary_edges.push(BoundaryEdge { a: idx(0, j + 1), b: idx(0, j), tag: BoundaryTag::EndLeft });
    }
    Mesh { vertices, triangles, boundary_edges, h, zeta, wall_s, columns: columns.to_vec(), right_start, left_end }
}

/// Largest vertical deviation of a wall from its chord over `[a, b]`.
fn chord_error(geom: &StripGeometry, a: f64, b: f64) -> Result<f64> {
    let (la, ua) = geom.wall_heights(a)?;
    let (lb, ub) = geom.wall_heights(b)?;
    let mut err: f64 = 0.0;
    for k in 1..8 {
        let r = k as f64 / 8.0;
        let (l, u) = geom.wall_heights(a + r * (b - a))?;
        err = err.max((l - (la + r * (lb - la))).abs()).max((u - (ua + r * (ub - ua))).abs());
    }
    Ok(err)
}

/// Mesh of the truncated strip `x_left - zeta <= x1 <= zeta`.
///
/// Straight sections use uniform columns of spacing at most `h`; in the distorted part
/// columns are bisected until both walls deviate from their chords by at most `1e-3 h`.
/// Every column carries `ny` cells (`ny` even, spacing at most `h` on the wider end), and
/// the diagonals flip at mid-height and mid-length so the mesh is symmetric under
/// `x2 -> 1 - x2` whenever the walls are.
pub fn build_mesh(geom: &StripGeometry, zeta: f64, h: f64) -> Result<Mesh> {
    let width_min = geom.c0.min(1.0);
    if !(h > 0.0 && h <= width_min / 4.0) {
        return Err(Error::Mesh(format!("mesh size h = {h} must lie in (0, {}]", width_min / 4.0)));
    }
    if !(zeta > 1.0) {
        return Err(Error::Mesh(format!("truncation zeta = {zeta} must exceed 1")));
    }
    let x_left = geom.x_left;
    let nr = (zeta / h).ceil() as usize;
    let mut columns: Vec<f64> = (0..=nr).map(|i| x_left - zeta + zeta * i as f64 / nr as f64).collect();
    if x_left < 0.0 {
        let nd = ((-x_left) / h).ceil() as usize;
        let mut stack: Vec<(f64, f64, usize)> =
            (0..nd).rev().map(|i| (x_left * (1.0 - i as f64 / nd as f64), x_left * (1.0 - (i + 1) as f64 / nd as f64), 0)).collect();
        while let Some((a, b, depth)) = stack.pop() {
            if chord_error(geom, a, b)? <= 1e-3 * h {
                columns.push(b);
                continue;
            }
            if depth >= 24 {
                return Err(Error::Mesh(format!("wall not resolvable near x1 = {a} at h = {h}")));
            }
            let m = 0.5 * (a + b);
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
        *columns.last_mut().unwrap() = 0.0;
    }
    columns.extend((1..=nr).map(|i| zeta * i as f64 / nr as f64));
    let mut ny = (geom.c0.max(1.0) / h).ceil() as usize;
    if ny % 2 == 1 {
        ny += 1;
    }
    let walls = columns
        .iter()
        .map(|&x| {
            let sl = geom.lower.s_at_x1(x)?;
            let su = geom.upper.s_at_x1(x)?;
            let yl = geom.lower.eval(sl).point[1];
            let yu = geom.upper.eval(su).point[1];
            if yu <= yl {
                return Err(Error::Mesh(format!("walls cross at x1 = {x}")));
            }
            Ok((yl, yu, Some(sl), Some(su)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mesh = structured(&columns, &walls, ny, h, zeta, 0.0, x_left);
    mesh.check_invariants()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SBendParams;

    #[test]
    fn straight_strip_counts() {
        let g = StripGeometry::straight();
        let m = build_mesh(&g, 4.0, 0.25).unwrap();
        m.check_invariants().unwrap();
        let expected = 2.0 * (8.0 / 0.25) * (1.0 / 0.25);
        let n = m.triangles.len() as f64;
        assert!(n >= expected / 2.0 && n <= expected * 2.0);
        assert!((m.area() - 8.0).abs() < 1e-12);
        let fine = build_mesh(&g, 4.0, 0.125).unwrap();
        for tag in [BoundaryTag::WallLower, BoundaryTag::WallUpper, BoundaryTag::EndLeft, BoundaryTag::EndRight] {
            let a = m.boundary_chain(tag).unwrap().len() as i64;
            let b = fine.boundary_chain(tag).unwrap().len() as i64;
            assert!((b - 2 * a).abs() <= 2, "{tag:?}: {a} -> {b}");
        }
    }

    #[test]
    fn s_bend_wall_vertices_on_curve() {
        let g = StripGeometry::s_bend(SBendParams::default()).unwrap();
        let h = 0.1;
        let m = build_mesh(&g, 3.0, h).unwrap();
        for (v, s) in m.vertices.iter().zip(&m.wall_s) {
            if s.is_some() {
                let d = g.lower.distance_to(*v).min(g.upper.distance_to(*v));
                assert!(d <= 1e-3 * h, "{v:?} off wall by {d}");
            }
        }
        // exact position relative to the arc-length evaluation
        for e in m.boundary_edges.iter().filter(|e| e.tag.is_wall()) {
            let side = e.tag.wall_side().unwrap();
            let s = m.wall_s[e.a].unwrap();
            let p = g.curve(side).eval(s).point;
            let v = m.vertices[e.a];
            assert!((p[0] - v[0]).abs() + (p[1] - v[1]).abs() <= 1e-10 * h);
        }
        // chord sagitta resolved against a dense wall sampling
        for e in m.boundary_edges.iter().filter(|e| e.tag == BoundaryTag::WallLower) {
            let (a, b) = (m.vertices[e.a], m.vertices[e.b]);
            for k in 1..10 {
                let x = a[0] + (b[0] - a[0]) * k as f64 / 10.0;
                let y = g.wall_heights(x).unwrap().0;
                let chord = a[1] + (b[1] - a[1]) * k as f64 / 10.0;
                assert!((y - chord).abs() <= 1.01e-3 * h);
            }
        }
    }

    #[test]
    fn rejects_coarse_h() {
        assert!(build_mesh(&StripGeometry::straight(), 4.0, 0.3).is_err());
        assert!(build_mesh(&StripGeometry::straight(), 0.5, 0.1).is_err());
    }
}
