//! Post-processing of converged solutions: exponential approach to the end profiles, the wall
//! vorticity relation and the far-field pressure gradients.

mod fit;
mod tail;
mod vorticity;

pub use fit::{fit_decay_rate, fit_decay_rate_above, DecayFit, DECAY_FLOOR};
pub use tail::{tail_energy, tail_region, TailRegion, FACE_BUFFER};
pub use vorticity::{boundary_vorticity_residual, recovered_gradient, VorticityResidual, WallVorticity};

use crate::error::{Error, Result};
use crate::solver::{recover_pressure, Solution};
use crate::Side;

/// Required fit quality for a decay rate to count.
pub const MIN_R_SQUARED: f64 = 0.98;

/// Fitted far-field pressure gradient against `-C` of the end profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureDrift {
    pub side: Side,
    pub fitted: f64,
    pub expected: f64,
    /// `|fitted - expected| / |expected|`, or the absolute gap when `expected = 0`.
    pub deviation: f64,
}

/// Fitted pressure gradients in both straight parts.
pub fn pressure_drift_check(solution: &Solution) -> Result<[PressureDrift; 2]> {
    let rec = recover_pressure(solution)?;
    let sys = &solution.system;
    let make = |side, fitted: f64, c: f64| {
        let expected = -c;
        let gap = (fitted - expected).abs();
        PressureDrift { side, fitted, expected, deviation: if expected != 0.0 { gap / expected.abs() } else { gap } }
    };
    Ok([
        make(Side::Left, rec.left_gradient, sys.left.pressure_constant()),
        make(Side::Right, rec.right_gradient, sys.right.pressure_constant()),
    ])
}

/// Result of fitting one side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayOutcome {
    Fitted(DecayFit),
    /// Too few stations above [`DECAY_FLOOR`]: the tail already equals the end profile.
    AlreadyConverged,
}

impl DecayOutcome {
    pub fn fit(&self) -> Option<&DecayFit> {
        match self {
            DecayOutcome::Fitted(f) => Some(f),
            DecayOutcome::AlreadyConverged => None,
        }
    }
}

/// Tail energies and fitted decay rate on one side.
#[derive(Debug, Clone, PartialEq)]
pub struct SideDecay {
    pub side: Side,
    pub tail_energy: Vec<f64>,
    pub outcome: DecayOutcome,
    pub monotone: bool,
}

impl SideDecay {
    /// A fitted rate passes when it is positive with `r^2 >= 0.98`; a converged tail passes.
    pub fn passes(&self) -> bool {
        self.monotone
            && match self.outcome {
                DecayOutcome::Fitted(f) => f.r_squared >= MIN_R_SQUARED && f.sigma > 0.0,
                DecayOutcome::AlreadyConverged => true,
            }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    /// Distances from the distorted part.
    pub stations: Vec<f64>,
    pub left: SideDecay,
    pub right: SideDecay,
    /// `None` for no-slip walls.
    pub vorticity: Option<VorticityResidual>,
    pub pressure: [PressureDrift; 2],
}

impl DecayReport {
    pub fn passes(&self) -> bool {
        self.left.passes() && self.right.passes()
    }
}

/// Spacing of [`default_stations`].
pub const STATION_SPACING: f64 = 0.5;

/// Stations `1, 1.5, 2, ...` up to `zeta - 2`.
pub fn default_stations(zeta: f64) -> Result<Vec<f64>> {
    let n = ((zeta - 3.0) / STATION_SPACING + 1e-9).floor();
    if !(n >= 3.0) {
        return Err(Error::Analysis(format!("truncation {zeta} leaves fewer than four decay stations")));
    }
    Ok((0..=n as usize).map(|k| 1.0 + STATION_SPACING * k as f64).collect())
}

/// Energies sampled at `stations` on one side, with the decay fit.
pub fn side_decay(solution: &Solution, stations: &[f64], side: Side, floor: f64) -> Result<SideDecay> {
    let tail_energy = stations.iter().map(|&s| tail_energy(solution, s, side)).collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..stations.len()).collect();
    order.sort_by(|&a, &b| stations[a].total_cmp(&stations[b]));
    // nested regions: energies may only tie up to roundoff
    let monotone = order.windows(2).all(|w| tail_energy[w[1]] <= tail_energy[w[0]] * (1.0 + 1e-12) + 1e-300);
    let outcome = match fit_decay_rate_above(stations, &tail_energy, floor) {
        Ok(f) => DecayOutcome::Fitted(f),
        Err(Error::DegenerateFit(_)) => DecayOutcome::AlreadyConverged,
        Err(e) => return Err(e),
    };
    Ok(SideDecay { side, tail_energy, outcome, monotone })
}

/// Full decay report at `stations`, or at [`default_stations`] when `None`.
pub fn decay_report(solution: &Solution, stations: Option<&[f64]>) -> Result<DecayReport> {
    decay_report_with_floor(solution, stations, DECAY_FLOOR)
}

/// [`decay_report`] with a custom decay floor.
pub fn decay_report_with_floor(solution: &Solution, stations: Option<&[f64]>, floor: f64) -> Result<DecayReport> {
    let stations = match stations {
        Some(s) => s.to_vec(),
        None => default_stations(solution.system.dofs().mesh.zeta)?,
    };
    let left = side_decay(solution, &stations, Side::Left, floor)?;
    let right = side_decay(solution, &stations, Side::Right, floor)?;
    let vorticity = match solution.system.alpha() {
        crate::Friction::NoSlip => None,
        crate::Friction::Finite(_) => Some(boundary_vorticity_residual(solution)?),
    };
    let pressure = pressure_drift_check(solution)?;
    Ok(DecayReport { stations, left, right, vorticity, pressure })
}
