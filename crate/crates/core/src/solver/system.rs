use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functional::{ConstraintRow, DofMap, FieldVector, FormAssembly, SaddleSystem};
use crate::geometry::StripGeometry;
use crate::linalg::{dot, norm2, CsrMatrix};
use crate::poiseuille::{Friction, Side};
use crate::Profile;

/// Discrete stationary problem at one flux level: forms, end data and constraints.
#[derive(Debug, Clone)]
pub struct NavierStokesSystem {
    pub forms: Arc<FormAssembly>,
    pub geometry: StripGeometry,
    pub left: Profile,
    pub right: Profile,
    viscous: CsrMatrix,
    divergence_t: CsrMatrix,
    fixed: Vec<Option<f64>>,
    keys: Vec<[f64; 2]>,
    pin: usize,
    /// `M_p 1` for the zero-mean pressure gauge.
    pressure_weights: Vec<f64>,
    linear_tol: f64,
}

/// Fixed velocity coefficients: wall constraints plus the end profiles on the end faces.
pub fn apply_end_data(forms: &FormAssembly, geometry: &StripGeometry, left: &Profile, right: &Profile) -> Result<Vec<Option<f64>>> {
    if left.phi() != right.phi() {
        return Err(Error::Config(format!("end profiles carry different fluxes {} and {}", left.phi(), right.phi())));
    }
    if left.alpha() != &forms.alpha || right.alpha() != &forms.alpha {
        return Err(Error::Config(format!(
            "end profiles use friction {} / {}, forms use {}",
            left.alpha(),
            right.alpha(),
            forms.alpha
        )));
    }
    if left.side() != Side::Left || right.side() != Side::Right {
        return Err(Error::Config("end profiles are attached to the wrong sides".into()));
    }
    let tol = 1e-12;
    if (left.width() - geometry.c0).abs() > tol || (right.width() - 1.0).abs() > tol {
        return Err(Error::Config(format!(
            "end profile widths {} / {} do not match the sections {} / 1",
            left.width(),
            right.width(),
            geometry.c0
        )));
    }
    let dofs = &forms.dofs;
    let mut fixed = dofs.wall_fixed(forms.alpha);
    let offset = geometry.left_offset;
    dofs.fix_ends(&mut fixed, |side, x| match side {
        Side::Left => [left.value(x[1] - offset), 0.0],
        Side::Right => [right.value(x[1]), 0.0],
    });
    Ok(fixed)
}

impl NavierStokesSystem {
    pub fn new(forms: Arc<FormAssembly>, geometry: &StripGeometry, phi: f64, linear_tol: f64) -> Result<Self> {
        let left = Profile::left(phi, forms.alpha, geometry.c0)?;
        let right = Profile::right(phi, forms.alpha)?;
        let fixed = apply_end_data(&forms, geometry, &left, &right)?;
        let dofs = forms.dofs.clone();
        let ones = vec![1.0; dofs.n_pressure()];
        Ok(Self {
            viscous: forms.viscous(),
            divergence_t: forms.divergence.transpose(),
            keys: dofs.velocity_keys(),
            pin: dofs.pressure_pin(),
            pressure_weights: forms.pressure_mass.mul_vec(&ones),
            forms,
            geometry: geometry.clone(),
            left,
            right,
            fixed,
            linear_tol,
        })
    }

    /// The same problem with flux `phi`.
    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::new(self.forms.clone(), &self.geometry, phi, self.linear_tol)
    }

    pub fn phi(&self) -> f64 {
        *self.right.phi()
    }

    pub fn alpha(&self) -> Friction<f64> {
        self.forms.alpha
    }

    pub fn dofs(&self) -> &Arc<DofMap> {
        &self.forms.dofs
    }

    /// Fixed velocity coefficients (walls and end faces).
    pub fn fixed(&self) -> &[Option<f64>] {
        &self.fixed
    }

    /// Overwrites the fixed coefficients of `velocity` with their prescribed values.
    pub fn constrain(&self, velocity: &mut [f64]) {
        for (v, f) in velocity.iter_mut().zip(&self.fixed) {
            if let Some(x) = f {
                *v = *x;
            }
        }
    }

    /// Field with the prescribed boundary values and zero elsewhere.
    pub fn boundary_lift(&self) -> FieldVector {
        let mut f = FieldVector::zeros(self.dofs().clone());
        self.constrain(&mut f.velocity);
        f
    }

    /// Poiseuille profile of the local wall separation at every `x1`, constrained.
    pub fn poiseuille_guess(&self) -> Result<FieldVector> {
        let dofs = self.dofs().clone();
        let mut velocity = vec![0.0; dofs.n_velocity()];
        let mut cache: Vec<(f64, f64, f64)> = Vec::new();
        for (i, x) in dofs.nodes.iter().enumerate() {
            let (lo, hi) = match cache.iter().find(|c| c.0 == x[0]) {
                Some(c) => (c.1, c.2),
                None => {
                    let (lo, hi) = self.geometry.wall_heights(x[0])?;
                    cache.push((x[0], lo, hi));
                    (lo, hi)
                }
            };
            let p = Profile::new(self.phi(), self.alpha(), hi - lo, Side::Right)?;
            let c = dofs.to_frame(i, [p.value((x[1] - lo).clamp(0.0, hi - lo)), 0.0]);
            velocity[2 * i] = c[0];
            velocity[2 * i + 1] = c[1];
        }
        self.constrain(&mut velocity);
        FieldVector::new(dofs.clone(), velocity, vec![0.0; dofs.n_pressure()])
    }

    /// Solves `(viscous + conv) u + B^T p = f`, `B u = 0` with the end data imposed.
    fn solve_linear(&self, conv: Option<&CsrMatrix>, f: &[f64]) -> Result<FieldVector> {
        let dofs = self.dofs();
        let a = match conv {
            Some(c) => CsrMatrix::linear_combination(1.0, &self.viscous, 1.0, c),
            None => self.viscous.clone(),
        };
        let rows = ConstraintRow::from_matrix(&self.forms.divergence, &dofs.mesh.vertices, Some(self.pin));
        let g = vec![0.0; rows.len()];
        let system = SaddleSystem::new(&a, &self.keys, &self.fixed, rows)?.with_tolerance(self.linear_tol);
        let sol = system.solve(f, &g)?;
        let mut pressure = vec![0.0; dofs.n_pressure()];
        let mut r = 0;
        for (k, p) in pressure.iter_mut().enumerate() {
            if k != self.pin {
                *p = sol.multipliers[r];
                r += 1;
            }
        }
        self.zero_mean(&mut pressure);
        FieldVector::new(dofs.clone(), sol.primal, pressure)
    }

    /// Shifts `pressure` to zero mean over the domain.
    pub fn zero_mean(&self, pressure: &mut [f64]) {
        let mean = dot(&self.pressure_weights, pressure) / self.pressure_weights.iter().sum::<f64>();
        for p in pressure.iter_mut() {
            *p -= mean;
        }
    }

    /// Mean of a pressure vector over the domain.
    pub fn pressure_mean(&self, pressure: &[f64]) -> f64 {
        dot(&self.pressure_weights, pressure) / self.pressure_weights.iter().sum::<f64>()
    }

    /// Stokes solution (convection dropped).
    pub fn stokes(&self) -> Result<FieldVector> {
        self.solve_linear(None, &vec![0.0; self.dofs().n_velocity()])
    }

    /// One Picard step: convection with the advecting velocity frozen at `current`.
    pub fn picard_step(&self, current: &FieldVector) -> Result<FieldVector> {
        let conv = self.forms.convection().matrix(&current.velocity, false);
        self.solve_linear(Some(&conv), &vec![0.0; self.dofs().n_velocity()])
    }

    /// One Newton step from `current`.
    pub fn newton_step(&self, current: &FieldVector) -> Result<FieldVector> {
        let c = self.forms.convection();
        let jac = c.matrix(&current.velocity, true);
        // J(w) w - N(w) w = N(w) w since the convection is quadratic
        self.solve_linear(Some(&jac), &c.apply(&current.velocity))
    }

    /// Momentum residual `A u + N(u) + B^T p` on every velocity coefficient.
    pub fn momentum_residual(&self, field: &FieldVector) -> Vec<f64> {
        let mut r = self.viscous.mul_vec(&field.velocity);
        let n = self.forms.convection().apply(&field.velocity);
        let bp = self.divergence_t.mul_vec(&field.pressure);
        for ((ri, ni), bi) in r.iter_mut().zip(&n).zip(&bp) {
            *ri += ni + bi;
        }
        r
    }

    /// Discrete divergence `B u` (one entry per pressure vertex).
    pub fn divergence_residual(&self, field: &FieldVector) -> Vec<f64> {
        self.forms.divergence.mul_vec(&field.velocity)
    }

    /// Euclidean norm of the momentum residual on free coefficients, the divergence residual and
    /// the violation of the prescribed values.
    pub fn residual_norm(&self, field: &FieldVector) -> f64 {
        let r = self.momentum_residual(field);
        let free: f64 = r.iter().zip(&self.fixed).filter(|(_, f)| f.is_none()).map(|(v, _)| v * v).sum();
        let bc: f64 = field.velocity.iter().zip(&self.fixed).map(|(v, f)| f.map_or(0.0, |x| (v - x).powi(2))).sum();
        let d = norm2(&self.divergence_residual(field));
        (free + bc + d * d).sqrt()
    }
}
