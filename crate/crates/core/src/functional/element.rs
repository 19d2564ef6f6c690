//! Quadratic Lagrange basis on straight triangles.

use crate::error::{Error, Result};

/// Affine triangle data.
#[derive(Debug, Clone, Copy)]
pub struct Element {
    pub vertices: [[f64; 2]; 3],
    pub area: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_lambda: [[f64; 2]; 3],
}

impl Element {
    pub fn new(vertices: [[f64; 2]; 3]) -> Result<Self> {
        let [a, b, c] = vertices;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        let scale = [(a, b), (b, c), (c, a)]
            .iter()
            .map(|(p, q)| (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2))
            .fold(0.0, f64::max);
        if !(det > 1e-12 * scale) {
            return Err(Error::Assembly(format!("degenerate triangle {vertices:?}")));
        }
        let grad_lambda = [
            [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
            [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
            [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
        ];
        Ok(Self { vertices, area: 0.5 * det, grad_lambda })
    }

    pub fn point(&self, l: [f64; 3]) -> [f64; 2] {
        let v = &self.vertices;
        [
            l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
            l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
        ]
    }

    /// Gradients of the six quadratic basis functions at `l`.
    pub fn gradients(&self, l: [f64; 3]) -> [[f64; 2]; 6] {
        let g = &self.grad_lambda;
        let mut out = [[0.0; 2]; 6];
        for k in 0..3 {
            let s = 4.0 * l[k] - 1.0;
            out[k] = [s * g[k][0], s * g[k][1]];
        }
        for (k, (p, q)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
            out[3 + k] = [
                4.0 * (l[p] * g[q][0] + l[q] * g[p][0]),
                4.0 * (l[p] * g[q][1] + l[q] * g[p][1]),
            ];
        }
        out
    }
}

/// Values of the six quadratic basis functions (vertices, then midpoints of 01, 12, 20).
pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Exact mass matrix of the quadratic basis on a segment of unit length, in the order
/// (start, midpoint, end).
pub const EDGE_MASS: [[f64; 3]; 3] = [
    [4.0 / 30.0, 2.0 / 30.0, -1.0 / 30.0],
    [2.0 / 30.0, 16.0 / 30.0, 2.0 / 30.0],
    [-1.0 / 30.0, 2.0 / 30.0, 4.0 / 30.0],
];
