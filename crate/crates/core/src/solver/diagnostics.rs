//! Post-solve checks: section fluxes, energy balance, mirror symmetry, pressure slopes and
//! the uniqueness probe.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_system, solve_from, solve_stationary, NavierStokesSystem, Solution, SolverConfig};
use crate::error::{Error, Result};
use crate::functional::{p2_values, Element, FieldVector, FormAssembly};
use crate::geometry::StripGeometry;
use crate::linalg::dot;
use crate::quadrature::triangle_rule;

/// Flux through the cell column `[x_left, x_right]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionFlux {
    pub x_left: f64,
    pub x_right: f64,
    pub flux: f64,
}

/// Weak fluxes `int u . grad q_j` of every cell column, with `q_j` the ramp from 0 on the left
/// column line to 1 on the right one. For a discretely divergence-free field with impermeable
/// walls each equals the flux through the right end face.
fn all_column_fluxes(field: &FieldVector) -> Result<Vec<SectionFlux>> {
    let dofs = &field.dofs;
    let mesh = &dofs.mesh;
    let cols = &mesh.columns;
    if cols.len() < 2 {
        return Err(Error::Analysis("mesh has fewer than two columns".into()));
    }
    let mut acc = vec![0.0; cols.len() - 1];
    let rule = triangle_rule();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let pts = tri.map(|v| mesh.vertices[v]);
        let cx = (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0;
        let k = cols.partition_point(|&c| c <= cx).saturating_sub(1).min(acc.len() - 1);
        let el = Element::new(pts)?;
        let u1 = dofs.elements[t].map(|i| field.node_velocity(i)[0]);
        for (l, w) in &rule {
            let phi = p2_values(*l);
            acc[k] += w * el.area * (0..6).map(|a| phi[a] * u1[a]).sum::<f64>();
        }
    }
    Ok(acc
        .iter()
        .enumerate()
        .map(|(k, a)| SectionFlux { x_left: cols[k], x_right: cols[k + 1], flux: a / (cols[k + 1] - cols[k]) })
        .collect())
}

/// Weak flux through cell column `j` (between mesh columns `j` and `j + 1`).
pub fn weak_section_flux(field: &FieldVector, j: usize) -> Result<SectionFlux> {
    all_column_fluxes(field)?
        .get(j)
        .copied()
        .ok_or_else(|| Error::Analysis(format!("cell column {j} out of range")))
}

/// Weak fluxes at `n` cell columns spread evenly along the strip.
pub fn section_fluxes(field: &FieldVector, n: usize) -> Result<Vec<SectionFlux>> {
    let all = all_column_fluxes(field)?;
    if n == 0 || n > all.len() {
        return Err(Error::Analysis(format!("{n} stations requested, mesh has {} cell columns", all.len())));
    }
    if n == 1 {
        return Ok(vec![all[all.len() / 2]]);
    }
    Ok((0..n).map(|i| all[i * (all.len() - 1) / (n - 1)]).collect())
}

/// Terms of the discrete energy balance obtained by testing with the solution itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance {
    /// `2 ||S u||^2 + alpha ||u_tan||^2_walls`.
    pub dissipation: f64,
    /// Work of the end-face reactions on the prescribed end velocities.
    pub boundary_work: f64,
    /// `int (u . grad u) . u`, the kinetic energy carried through the end faces.
    pub convective_flux: f64,
    /// `|dissipation + convective_flux - boundary_work| / max(dissipation, |boundary_work|)`.
    pub relative_defect: f64,
}

/// Energy balance of a solution; the end reactions are the momentum residuals on the
/// end-face coefficients.
pub fn energy_identity(solution: &Solution) -> EnergyBalance {
    let sys = &solution.system;
    let forms = &sys.forms;
    let u = &solution.field.velocity;
    let dissipation = forms.strain.bilinear(u, u) + forms.friction.bilinear(u, u);
    let r = sys.momentum_residual(&solution.field);
    let boundary_work: f64 = sys.fixed().iter().enumerate().filter(|(_, f)| f.is_some()).map(|(i, _)| u[i] * r[i]).sum();
    let convective_flux = dot(&forms.convection().apply(u), u);
    let scale = dissipation.max(boundary_work.abs()).max(f64::MIN_POSITIVE);
    EnergyBalance { dissipation, boundary_work, convective_flux, relative_defect: (dissipation + convective_flux - boundary_work).abs() / scale }
}

/// Deviation from the reflection `x2 -> 2 m - x2` about the common mid-line `m` of the end sections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorDefect {
    /// `max |u1(x) - u1(x')| + |u2(x) + u2(x')|` relative to `max |u|`.
    pub velocity: f64,
    /// `max |p(x) - p(x')|` relative to `max |p|` (absolute if the pressure vanishes).
    pub pressure: f64,
}

/// Mirror defect of a solution on a geometry symmetric under `x2 -> 2 m - x2`.
pub fn mirror_defect(solution: &Solution) -> Result<MirrorDefect> {
    let sys = &solution.system;
    let g = &sys.geometry;
    let m = 0.5;
    if (g.left_offset + 0.5 * g.c0 - m).abs() > 1e-12 {
        return Err(Error::Geometry("end sections do not share a mid-line".into()));
    }
    let dofs = sys.dofs();
    let mut columns: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, x) in dofs.nodes.iter().enumerate() {
        columns.entry(x[0].to_bits()).or_default().push(i);
    }
    let scale_u = (0..dofs.n_nodes()).map(|i| solution.field.node_velocity(i)).fold(0.0f64, |s, v| s.max(v[0].abs()).max(v[1].abs()));
    let scale_p = solution.field.pressure.iter().fold(0.0f64, |s, p| s.max(p.abs()));
    let nv = dofs.n_vertices();
    let (mut dv, mut dp) = (0.0f64, 0.0f64);
    for nodes in columns.values_mut() {
        nodes.sort_by(|&a, &b| dofs.nodes[a][1].total_cmp(&dofs.nodes[b][1]));
        let n = nodes.len();
        for k in 0..n {
            let (i, j) = (nodes[k], nodes[n - 1 - k]);
            if (dofs.nodes[i][1] + dofs.nodes[j][1] - 2.0 * m).abs() > 1e-8 {
                return Err(Error::Geometry(format!("node at {:?} has no mirror image", dofs.nodes[i])));
            }
            let (a, b) = (solution.field.node_velocity(i), solution.field.node_velocity(j));
            dv = dv.max((a[0] - b[0]).abs() + (a[1] + b[1]).abs());
            if i < nv {
                if j >= nv {
                    return Err(Error::Geometry(format!("vertex {i} mirrors onto an edge midpoint")));
                }
                dp = dp.max((solution.field.pressure[i] - solution.field.pressure[j]).abs());
            }
        }
    }
    Ok(MirrorDefect { velocity: dv / scale_u.max(f64::MIN_POSITIVE), pressure: if scale_p > 0.0 { dp / scale_p } else { dp } })
}

/// Zero-mean pressure with the fitted axial gradients of the section-averaged pressure in both
/// straight parts.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureRecovery {
    pub pressure: Vec<f64>,
    /// `d p / d x1` fitted on the left straight part.
    pub left_gradient: f64,
    pub right_gradient: f64,
    /// Fit windows `[a, b]` in `x1`.
    pub left_window: [f64; 2],
    pub right_window: [f64; 2],
}

/// Section-averaged pressure on every mesh column.
fn section_pressures(field: &FieldVector) -> Vec<(f64, f64)> {
    let dofs = &field.dofs;
    (0..dofs.mesh.columns.len())
        .map(|j| {
            let mut v = dofs.column_vertices(j);
            v.sort_by(|&a, &b| dofs.nodes[a][1].total_cmp(&dofs.nodes[b][1]));
            let (lo, hi) = (dofs.nodes[v[0]][1], dofs.nodes[*v.last().unwrap()][1]);
            let int: f64 = v.windows(2).map(|w| 0.5 * (field.pressure[w[0]] + field.pressure[w[1]]) * (dofs.nodes[w[1]][1] - dofs.nodes[w[0]][1])).sum();
            (dofs.mesh.columns[j], int / (hi - lo))
        })
        .collect()
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Fits the far-field pressure gradients. Each window keeps a distance of 1 from the end face and
/// from the distorted part when that leaves at least three columns, and is the whole straight
/// part otherwise.
pub fn recover_pressure(solution: &Solution) -> Result<PressureRecovery> {
    let sys = &solution.system;
    let mut pressure = solution.field.pressure.clone();
    sys.zero_mean(&mut pressure);
    let field = FieldVector { pressure: pressure.clone(), ..solution.field.clone() };
    let sections = section_pressures(&field);
    let mesh = &sys.dofs().mesh;
    let (l0, l1) = (mesh.left_end - mesh.zeta, mesh.left_end);
    let (r0, r1) = (mesh.right_start, mesh.right_start + mesh.zeta);
    let fit = |a: f64, b: f64| -> Result<(f64, [f64; 2])> {
        let tol = 1e-9;
        for (lo, hi) in [(a + 1.0, b - 1.0), (a, b)] {
            let pts: Vec<(f64, f64)> = sections.iter().copied().filter(|p| p.0 >= lo - tol && p.0 <= hi + tol).collect();
            if pts.len() >= 3 {
                if let Some(s) = fit_slope(&pts) {
                    return Ok((s, [lo, hi]));
                }
            }
        }
        Err(Error::Analysis(format!("straight part [{a}, {b}] has too few columns for a pressure fit")))
    };
    let (left_gradient, left_window) = fit(l0, l1)?;
    let (right_gradient, right_window) = fit(r0, r1)?;
    Ok(PressureRecovery { pressure, left_gradient, right_gradient, left_window, right_window })
}

/// `sqrt((a - b)^T (M + K) (a - b))` on the velocity coefficients.
pub fn h1_distance(forms: &FormAssembly, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    (forms.mass.bilinear(&d, &d) + forms.stiffness.bilinear(&d, &d)).max(0.0).sqrt()
}

/// `int |grad (u - P)|^2` over the truncated strip, with `P` the end profile in each straight
/// part and zero over the distorted part.
pub fn disturbance_energy(solution: &Solution) -> Result<f64> {
    let sys = &solution.system;
    let dofs = sys.dofs();
    let mesh = &dofs.mesh;
    let rule = triangle_rule();
    let offset = sys.geometry.left_offset;
    let mut total = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let pts = tri.map(|v| mesh.vertices[v]);
        let cx = (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0;
        let el = Element::new(pts)?;
        let nodal = dofs.elements[t].map(|i| solution.field.node_velocity(i));
        for (l, w) in &rule {
            let g = el.gradients(*l);
            let mut grad = [[0.0; 2]; 2];
            for a in 0..6 {
                for c in 0..2 {
                    for d in 0..2 {
                        grad[c][d] += nodal[a][c] * g[a][d];
                    }
                }
            }
            let y = el.point(*l)[1];
            if cx <= mesh.left_end {
                grad[0][1] -= sys.left.derivative(y - offset);
            } else if cx >= mesh.right_start {
                grad[0][1] -= sys.right.derivative(y);
            }
            let s: f64 = grad.iter().flatten().map(|v| v * v).sum();
            total += w * el.area * s;
        }
    }
    Ok(total)
}

/// Disturbance energy of the solutions for each truncation in `zetas`.
pub fn disturbance_growth(config: &SolverConfig, geometry: &StripGeometry, zetas: &[f64]) -> Result<Vec<(f64, f64)>> {
    zetas
        .iter()
        .map(|&zeta| {
            let c = SolverConfig { zeta, ..config.clone() };
            let s = solve_stationary(&c, geometry)?;
            Ok((zeta, disturbance_energy(&s)?))
        })
        .collect()
}

/// Outcome of solving from several initial guesses.
#[derive(Debug, Clone)]
pub struct UniquenessReport {
    /// Largest `H1` distance between converged solutions.
    pub max_distance: f64,
    pub converged: Vec<bool>,
    pub iterations: Vec<usize>,
    /// Some start failed to converge.
    pub partial: bool,
}

/// Solves from `n_starts` initial guesses: the boundary lift (zero inside), the Stokes solution,
/// and seeded smooth perturbations of the local Poiseuille profile.
pub fn uniqueness_probe(config: &SolverConfig, geometry: &StripGeometry, n_starts: usize, seed: u64) -> Result<UniquenessReport> {
    if n_starts == 0 {
        return Err(Error::Parameter("uniqueness probe needs at least one start".into()));
    }
    let system = Arc::new(build_system(config, geometry)?);
    let mut solutions: Vec<Option<Solution>> = Vec::with_capacity(n_starts);
    for k in 0..n_starts {
        let start = match k {
            0 => Some(system.boundary_lift()),
            1 => None,
            _ => Some(perturbed_poiseuille(&system, seed.wrapping_add(k as u64))?),
        };
        solutions.push(match solve_from(system.clone(), config, start.as_ref()) {
            Ok(s) => Some(s),
            Err(Error::Convergence { .. }) => None,
            Err(e) => return Err(e),
        });
    }
    let mut max_distance: f64 = 0.0;
    for (i, a) in solutions.iter().enumerate() {
        for b in &solutions[i + 1..] {
            if let (Some(a), Some(b)) = (a, b) {
                max_distance = max_distance.max(h1_distance(&system.forms, a.velocity(), b.velocity()));
            }
        }
    }
    let converged: Vec<bool> = solutions.iter().map(Option::is_some).collect();
    Ok(UniquenessReport {
        max_distance,
        partial: converged.iter().any(|c| !c),
        iterations: solutions.iter().map(|s| s.as_ref().map_or(0, |s| s.nonlinear_iterations)).collect(),
        converged,
    })
}

fn perturbed_poiseuille(system: &NavierStokesSystem, seed: u64) -> Result<FieldVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = system.phi() * rng.random_range(0.25..0.5);
    let omega = rng.random_range(0.5..2.0);
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let mut f = system.poiseuille_guess()?;
    let dofs = f.dofs.clone();
    let mut cache: Vec<(f64, f64, f64)> = Vec::new();
    for (i, x) in dofs.nodes.iter().enumerate() {
        let (lo, hi) = match cache.iter().find(|c| c.0 == x[0]) {
            Some(c) => (c.1, c.2),
            None => {
                let (lo, hi) = system.geometry.wall_heights(x[0])?;
                cache.push((x[0], lo, hi));
                (lo, hi)
            }
        };
        let bump = amp * (std::f64::consts::PI * ((x[1] - lo) / (hi - lo)).clamp(0.0, 1.0)).sin();
        let arg = omega * x[0] + theta;
        let c = dofs.to_frame(i, [bump * arg.cos(), bump * arg.sin()]);
        f.velocity[2 * i] += c[0];
        f.velocity[2 * i + 1] += c[1];
    }
    system.constrain(&mut f.velocity);
    Ok(f)
}
