//! Discrete velocity-pressure fields.

use std::sync::Arc;

use super::dofs::DofMap;
use super::element::{p2_values, Element};
use super::forms::value_and_gradient;
use crate::error::{Error, Result};
use crate::poiseuille::Friction;

/// Velocity frame coefficients (two per node) and vertex pressures.
#[derive(Debug, Clone)]
pub struct FieldVector {
    pub dofs: Arc<DofMap>,
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
}

/// Point evaluation of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub velocity: [f64; 2],
    /// `[i][j] = d_j u_i`.
    pub gradient: [[f64; 2]; 2],
    pub pressure: f64,
}

impl FieldVector {
    pub fn zeros(dofs: Arc<DofMap>) -> Self {
        let (nv, np) = (dofs.n_velocity(), dofs.n_pressure());
        Self { dofs, velocity: vec![0.0; nv], pressure: vec![0.0; np] }
    }

    pub fn new(dofs: Arc<DofMap>, velocity: Vec<f64>, pressure: Vec<f64>) -> Result<Self> {
        if velocity.len() != dofs.n_velocity() || pressure.len() != dofs.n_pressure() {
            return Err(Error::Assembly(format!(
                "field has {} velocity and {} pressure coefficients, layout needs {} and {}",
                velocity.len(),
                pressure.len(),
                dofs.n_velocity(),
                dofs.n_pressure()
            )));
        }
        Ok(Self { dofs, velocity, pressure })
    }

    /// Nodal interpolation of Cartesian velocity and pressure functions.
    pub fn interpolate<U, P>(dofs: Arc<DofMap>, u: U, p: P) -> Self
    where
        U: Fn([f64; 2]) -> [f64; 2],
        P: Fn([f64; 2]) -> f64,
    {
        let velocity = dofs.interpolate(u);
        let pressure = dofs.mesh.vertices.iter().map(|x| p(*x)).collect();
        Self { dofs, velocity, pressure }
    }

    /// Cartesian velocity at node `i`.
    pub fn node_velocity(&self, i: usize) -> [f64; 2] {
        self.dofs.cartesian(&self.velocity, i)
    }

    /// Zeroes the wall normal coefficients (and tangential ones for no-slip).
    pub fn apply_wall_constraint(&mut self, alpha: Friction<f64>) {
        for (k, f) in self.dofs.wall_fixed(alpha).iter().enumerate() {
            if let Some(v) = f {
                self.velocity[k] = *v;
            }
        }
    }

    /// Largest `|u . nu|` over wall nodes, with `nu` the node's consistent normal.
    pub fn max_wall_normal(&self) -> f64 {
        (0..self.dofs.n_nodes())
            .filter(|&i| self.dofs.wall[i].is_some())
            .map(|i| {
                let u = self.node_velocity(i);
                let n = self.dofs.frames[i][0];
                (u[0] * n[0] + u[1] * n[1]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Velocity, gradient and pressure at `x`; `None` outside the mesh.
    pub fn eval(&self, x: [f64; 2]) -> Option<PointValue> {
        let (t, l) = self.dofs.locate(x)?;
        let mesh = &self.dofs.mesh;
        let el = Element::new(mesh.triangles[t].map(|v| mesh.vertices[v])).ok()?;
        let nodes = &self.dofs.elements[t];
        let nodal = nodes.map(|i| self.node_velocity(i));
        let (velocity, gradient) = value_and_gradient(&nodal, &p2_values(l), &el.gradients(l));
        let pressure = (0..3).map(|k| l[k] * self.pressure[nodes[k]]).sum();
        Some(PointValue { velocity, gradient, pressure })
    }

    /// `a self + b other` on the same layout.
    pub fn combine(&self, a: f64, other: &FieldVector, b: f64) -> FieldVector {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        FieldVector { dofs: self.dofs.clone(), velocity: mix(&self.velocity, &other.velocity), pressure: mix(&self.pressure, &other.pressure) }
    }
}
