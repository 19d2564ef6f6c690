//! Stationary Navier-Stokes solves on truncated strips with Poiseuille data on the end faces.
//!
//! Each flux level starts from a Stokes solve (or a supplied guess), takes a few Picard steps
//! and finishes with Newton. If Newton stalls, the flux is ramped up from `phi / 2^k`.

mod config;
mod diagnostics;
mod system;

use std::sync::Arc;

pub use config::SolverConfig;
pub use diagnostics::{
    disturbance_energy, disturbance_growth, energy_identity, h1_distance, mirror_defect, recover_pressure, section_fluxes,
    uniqueness_probe, weak_section_flux, EnergyBalance, MirrorDefect, PressureRecovery, SectionFlux, UniquenessReport,
};
pub use system::{apply_end_data, NavierStokesSystem};

use crate::error::{Error, Result};
use crate::functional::{assemble_forms, FieldVector};
use crate::geometry::{build_mesh, StripGeometry};

/// Kind of a solver step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Residual of the supplied initial guess.
    Initial,
    Stokes,
    Picard,
    Newton,
}

/// One entry of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub phi: f64,
    pub step: StepKind,
    pub residual: f64,
}

/// Converged discrete solution.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Velocity frame coefficients and zero-mean vertex pressures.
    pub field: FieldVector,
    pub residual_norm: f64,
    pub iteration_log: Vec<IterationRecord>,
    /// Picard plus Newton steps over all flux levels.
    pub nonlinear_iterations: usize,
    /// Whether the flux had to be ramped up.
    pub continuation_used: bool,
    pub smallness_warning: bool,
    pub system: Arc<NavierStokesSystem>,
    pub config: SolverConfig,
}

impl Solution {
    pub fn velocity(&self) -> &[f64] {
        &self.field.velocity
    }

    pub fn pressure(&self) -> &[f64] {
        &self.field.pressure
    }
}

/// Builds the mesh and forms for `config` on `geometry`.
pub fn build_system(config: &SolverConfig, geometry: &StripGeometry) -> Result<NavierStokesSystem> {
    config.validate()?;
    let mesh = build_mesh(geometry, config.zeta, config.h)?;
    let forms = Arc::new(assemble_forms(&mesh, config.alpha)?);
    NavierStokesSystem::new(forms, geometry, config.phi, config.linear_tol)
}

/// Solves the stationary problem described by `config` on `geometry`.
pub fn solve_stationary(config: &SolverConfig, geometry: &StripGeometry) -> Result<Solution> {
    let system = Arc::new(build_system(config, geometry)?);
    solve_from(system, config, None)
}

/// Solves on an assembled system, from `initial` or from the Stokes solution.
pub fn solve_from(system: Arc<NavierStokesSystem>, config: &SolverConfig, initial: Option<&FieldVector>) -> Result<Solution> {
    config.validate()?;
    let mut log = Vec::new();
    let direct = run_level(&system, config, initial.cloned(), &mut log)?;
    let (field, continuation_used) = match direct {
        Some(f) => (f, false),
        None => (continuation(&system, config, &mut log)?, true),
    };
    let residual_norm = system.residual_norm(&field);
    let nonlinear_iterations = log.iter().filter(|r| matches!(r.step, StepKind::Picard | StepKind::Newton)).count();
    Ok(Solution {
        field,
        residual_norm,
        iteration_log: log,
        nonlinear_iterations,
        continuation_used,
        smallness_warning: config.smallness_warning(),
        system,
        config: config.clone(),
    })
}

/// Flux ramps `phi / 2^k, ..., phi` for `k = 1..=continuation_steps`.
fn continuation(system: &Arc<NavierStokesSystem>, config: &SolverConfig, log: &mut Vec<IterationRecord>) -> Result<FieldVector> {
    let phi = system.phi();
    for k in 1..=config.continuation_steps {
        let mut guess: Option<FieldVector> = None;
        let mut ok = true;
        for level in (0..=k).rev() {
            let factor = 0.5f64.powi(level as i32);
            let sys = if level == 0 { (**system).clone() } else { system.with_phi(phi * factor)? };
            let start = guess.take().map(|mut g| {
                for v in g.velocity.iter_mut() {
                    *v *= 2.0;
                }
                sys.constrain(&mut g.velocity);
                g
            });
            match run_level(&sys, config, start, log)? {
                Some(f) => guess = Some(f),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            if let Some(f) = guess {
                return Ok(f);
            }
        }
    }
    Err(Error::Convergence {
        message: format!(
            "no convergence to {:e} at phi = {phi} after {} continuation ramps",
            config.newton_tol, config.continuation_steps
        ),
        residuals: log.iter().map(|r| r.residual).collect(),
    })
}

/// Picard then Newton at one flux level; `None` when Newton stalls.
fn run_level(
    system: &NavierStokesSystem,
    config: &SolverConfig,
    initial: Option<FieldVector>,
    log: &mut Vec<IterationRecord>,
) -> Result<Option<FieldVector>> {
    let phi = system.phi();
    let tol = config.newton_tol;
    let mut record = |step, residual| log.push(IterationRecord { phi, step, residual });
    let mut field = match initial {
        Some(mut f) => {
            system.constrain(&mut f.velocity);
            system.zero_mean(&mut f.pressure);
            let r = system.residual_norm(&f);
            record(StepKind::Initial, r);
            if r <= tol {
                return Ok(Some(f));
            }
            f
        }
        None => {
            let f = system.stokes()?;
            let r = system.residual_norm(&f);
            record(StepKind::Stokes, r);
            if r <= tol {
                return Ok(Some(f));
            }
            f
        }
    };
    for _ in 0..config.picard_iters {
        field = system.picard_step(&field)?;
        let r = system.residual_norm(&field);
        record(StepKind::Picard, r);
        if r <= tol {
            return Ok(Some(field));
        }
    }
    let mut best = f64::INFINITY;
    let mut worse = 0;
    for _ in 0..config.newton_max_iters {
        field = system.newton_step(&field)?;
        let r = system.residual_norm(&field);
        record(StepKind::Newton, r);
        if r <= tol {
            return Ok(Some(field));
        }
        if !r.is_finite() {
            return Ok(None);
        }
        if r < 0.5 * best {
            best = r;
            worse = 0;
        } else {
            worse += 1;
            if worse >= 3 {
                return Ok(None);
            }
        }
    }
    Ok(None)
}
