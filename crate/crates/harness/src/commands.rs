//! Subcommand bodies. Each returns an [`Outcome`]; errors abort the command.

use std::path::{Path, PathBuf};

use leray_strip::carrier::{divergence_residual, first_derivative_bound_holds, fitted_constant, slip_bc_residual, trilinear_smallness_probe, FluxCarrier, StreamField};
use leray_strip::decay::{decay_report_with_floor, pressure_drift_check, DecayOutcome, DecayReport, PressureDrift};
use leray_strip::functional::{estimate_korn_constant, estimate_poincare_constant, korn3d_counterexample_ratio, PoincareConstraint};
use leray_strip::geometry::build_mesh;
use leray_strip::solver::{energy_identity, section_fluxes, solve_stationary, Solution, StepKind};
use leray_strip::{Friction, Profile, Side};
use log::info;
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::error::{HarnessError, HarnessResult};
use crate::output::{num, svg_plot, summary_text, vtk_solution, vtk_vertex_field, atomic_write, VERSION, CsvTable, Metadata, Series};

/// Tolerance of the section-flux check.
pub const FLUX_TOL: f64 = 1e-8;
/// Tolerance of the relative energy-identity defect.
pub const ENERGY_TOL: f64 = 1e-6;
/// Allowed spread `max / min` of Korn constants over truncations.
pub const KORN_SPREAD: f64 = 1.5;
/// Allowed spread of Poincare constants over truncations.
pub const POINCARE_SPREAD: f64 = 1.25;

/// Result of a subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    /// Text printed on standard output.
    pub report: String,
    pub artifacts: Vec<PathBuf>,
}

/// Writes the artifacts of one command into one directory, honouring the configured formats.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub meta: Metadata,
    pub formats: Vec<Format>,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path, meta: Metadata, formats: &[Format]) -> Self {
        Self { dir: dir.to_path_buf(), meta, formats: formats.to_vec(), written: Vec::new() }
    }

    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn csv(&mut self, name: &str, table: &CsvTable) -> HarnessResult<()> {
        if self.wants(Format::Csv) {
            let p = self.dir.join(name);
            table.write(&p, &self.meta)?;
            self.written.push(p);
        }
        Ok(())
    }

    fn text(&mut self, format: Format, name: &str, text: &str) -> HarnessResult<()> {
        if self.wants(format) {
            let p = self.dir.join(name);
            atomic_write(&p, text.as_bytes())?;
            self.written.push(p);
        }
        Ok(())
    }

    pub fn vtk(&mut self, name: &str, text: &str) -> HarnessResult<()> {
        self.text(Format::Vtk, name, text)
    }

    pub fn svg(&mut self, name: &str, text: &str) -> HarnessResult<()> {
        self.text(Format::Svg, name, text)
    }

    pub fn summary(&mut self, name: &str, value: &serde_json::Value) -> HarnessResult<()> {
        self.text(Format::Summary, name, &summary_text(value))
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Checks on a converged solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveChecks {
    pub max_flux_defect: f64,
    pub energy_defect: f64,
    pub pressure: [PressureDrift; 2],
    pub pass: bool,
}

pub fn solve_checks(solution: &Solution) -> HarnessResult<SolveChecks> {
    let phi = solution.config.phi;
    let fluxes = section_fluxes(&solution.field, 10)?;
    let max_flux_defect = fluxes.iter().map(|f| (f.flux - phi).abs()).fold(0.0, f64::max);
    // plug flow (alpha = 0) dissipates nothing, so the defect is scaled by phi^2 at least
    let e = energy_identity(solution);
    let energy_defect = (e.dissipation + e.convective_flux - e.boundary_work).abs() / e.dissipation.max(e.boundary_work.abs()).max(phi * phi).max(f64::MIN_POSITIVE);
    let pressure = pressure_drift_check(solution)?;
    let converged = solution.residual_norm <= solution.config.newton_tol;
    let pass = converged && max_flux_defect <= FLUX_TOL && energy_defect <= ENERGY_TOL;
    Ok(SolveChecks { max_flux_defect, energy_defect, pressure, pass })
}

fn solution_summary(solution: &Solution, checks: &SolveChecks) -> serde_json::Value {
    let c = &solution.config;
    json!({
        "phi": c.phi,
        "alpha": c.alpha.to_string(),
        "zeta": c.zeta,
        "h": c.h,
        "residual_norm": solution.residual_norm,
        "nonlinear_iterations": solution.nonlinear_iterations,
        "continuation_used": solution.continuation_used,
        "smallness": c.smallness(),
        "smallness_warning": solution.smallness_warning,
        "max_flux_defect": checks.max_flux_defect,
        "energy_relative_defect": checks.energy_defect,
        "pressure_gradient": checks.pressure.iter().map(|d| json!({
            "side": format!("{:?}", d.side).to_lowercase(),
            "fitted": d.fitted,
            "expected": d.expected,
            "deviation": d.deviation,
        })).collect::<Vec<_>>(),
        "pass": checks.pass,
    })
}

/// Solves `config`, writes its artifacts to `art` and returns the solution with its checks.
pub fn solve_into(config: &RunConfig, art: &mut Artifacts) -> HarnessResult<(Solution, SolveChecks)> {
    let geometry = config.geometry()?;
    let sc = config.solver_config();
    info!("solving phi = {} alpha = {} zeta = {} h = {}", sc.phi, sc.alpha, sc.zeta, sc.h);
    let solution = solve_stationary(&sc, &geometry)?;
    info!("converged in {} nonlinear iterations, residual {:e}", solution.nonlinear_iterations, solution.residual_norm);
    let checks = solve_checks(&solution)?;
    let mut sections = CsvTable::new(&["x_left", "x_right", "flux"]);
    for f in section_fluxes(&solution.field, 10)? {
        sections.push([num(f.x_left), num(f.x_right), num(f.flux)]);
    }
    art.csv("sections.csv", &sections)?;
    let mut log = CsvTable::new(&["step", "phi", "kind", "residual"]);
    for (k, r) in solution.iteration_log.iter().enumerate() {
        let kind = match r.step {
            StepKind::Initial => "initial",
            StepKind::Stokes => "stokes",
            StepKind::Picard => "picard",
            StepKind::Newton => "newton",
        };
        log.push([k.to_string(), num(r.phi), kind.to_string(), num(r.residual)]);
    }
    art.csv("iterations.csv", &log)?;
    if art.wants(Format::Vtk) {
        art.vtk("solution.vtk", &vtk_solution(&solution))?;
    }
    let residuals: Vec<(f64, f64)> = solution.iteration_log.iter().enumerate().map(|(k, r)| (k as f64, r.residual)).collect();
    art.svg("residuals.svg", &svg_plot("Nonlinear residual", "step", "residual", &[Series { label: "residual".into(), points: residuals }], true))?;
    art.summary("summary.json", &solution_summary(&solution, &checks))?;
    Ok((solution, checks))
}

pub fn solve(config: &RunConfig, art: &mut Artifacts) -> HarnessResult<Outcome> {
    let (solution, checks) = solve_into(config, art)?;
    let mut report = String::new();
    report.push_str(&format!("residual      {:e} after {} nonlinear iterations\n", solution.residual_norm, solution.nonlinear_iterations));
    report.push_str(&format!("flux defect   {:e}\n", checks.max_flux_defect));
    report.push_str(&format!("energy defect {:e}\n", checks.energy_defect));
    for d in &checks.pressure {
        report.push_str(&format!("dp/dx1 {:<5}  {} (expected {})\n", format!("{:?}", d.side).to_lowercase(), d.fitted, d.expected));
    }
    report.push_str(&format!("{}\n", verdict(checks.pass)));
    Ok(Outcome { pass: checks.pass, report, artifacts: art.written.clone() })
}

fn decay_summary(report: &DecayReport) -> serde_json::Value {
    let side = |d: &leray_strip::decay::SideDecay| match d.outcome {
        DecayOutcome::Fitted(f) => json!({
            "sigma": f.sigma, "r_squared": f.r_squared, "points": f.points, "monotone": d.monotone, "pass": d.passes()
        }),
        DecayOutcome::AlreadyConverged => json!({ "already_converged": true, "monotone": d.monotone, "pass": d.passes() }),
    };
    json!({
        "stations": report.stations,
        "left": side(&report.left),
        "right": side(&report.right),
        "vorticity_residual": report.vorticity.as_ref().map(|v| json!({ "max": v.max, "l2": v.l2, "scale": v.scale })),
        "pressure_gradient": report.pressure.iter().map(|d| json!({
            "side": format!("{:?}", d.side).to_lowercase(), "fitted": d.fitted, "expected": d.expected, "deviation": d.deviation
        })).collect::<Vec<_>>(),
        "pass": report.passes(),
    })
}

pub fn decay(config: &RunConfig, art: &mut Artifacts) -> HarnessResult<Outcome> {
    let geometry = config.geometry()?;
    let solution = solve_stationary(&config.solver_config(), &geometry)?;
    let report = decay_report_with_floor(&solution, config.analysis.stations.as_deref(), config.analysis.decay_floor)?;
    let mut table = CsvTable::new(&["side", "station", "tail_energy"]);
    let mut series = Vec::new();
    for d in [&report.left, &report.right] {
        let name = format!("{:?}", d.side).to_lowercase();
        for (s, e) in report.stations.iter().zip(&d.tail_energy) {
            table.push([name.clone(), num(*s), num(*e)]);
        }
        series.push(Series { label: name, points: report.stations.iter().copied().zip(d.tail_energy.iter().copied()).collect() });
    }
    art.csv("decay.csv", &table)?;
    art.svg("decay.svg", &svg_plot("Tail energy", "distance from the distorted part", "E", &series, true))?;
    art.summary("summary.json", &decay_summary(&report))?;
    let mut text = table.render();
    for d in [&report.left, &report.right] {
        match d.outcome {
            DecayOutcome::Fitted(f) => text.push_str(&format!("{:?}: sigma {} r^2 {}\n", d.side, f.sigma, f.r_squared)),
            DecayOutcome::AlreadyConverged => text.push_str(&format!("{:?}: already converged\n", d.side)),
        }
    }
    if let Some(v) = &report.vorticity {
        text.push_str(&format!("wall vorticity residual max {:e} l2 {:e}\n", v.max, v.l2));
    }
    text.push_str(&format!("{}\n", verdict(report.passes())));
    Ok(Outcome { pass: report.passes(), report: text, artifacts: art.written.clone() })
}

/// Largest fitted derivative constant allowed at table nodes.
pub const SIGMA_CONSTANT_CAP: f64 = 10.0;

pub fn carrier_check(config: &RunConfig, seed: u64, art: &mut Artifacts) -> HarnessResult<Outcome> {
    let g = config.geometry()?;
    let alpha = config.friction();
    let phi = config.flow.phi;
    let carrier = FluxCarrier::new(&g, phi, alpha, config.flow.carrier_eps)?;
    let eps = carrier.params().eps;
    let mesh = build_mesh(&g, config.mesh.zeta, config.mesh.h)?;
    let div = divergence_residual(&carrier, &mesh)?;
    let slip = slip_bc_residual(&carrier, alpha)?;
    let length = -g.x_left;
    let z = carrier.params().z;
    let stations = [g.x_left - 1.0, g.x_left + length / 3.0, g.x_left + 2.0 * length / 3.0, 1.0, 0.5 * z];
    let mut flux_defect = 0.0f64;
    let mut fluxes = CsvTable::new(&["x1", "flux"]);
    for x in stations {
        let f = carrier.section_flux(x)?;
        flux_defect = flux_defect.max((f - phi).abs());
        fluxes.push([num(x), num(f)]);
    }
    let right = Profile::right(phi, alpha)?;
    let left = Profile::left(phi, alpha, g.c0)?;
    let mut far_defect = 0.0f64;
    for k in 0..=20 {
        let y = k as f64 / 20.0;
        for x1 in [z, 2.0 * z] {
            let a = carrier.eval([x1, y])?;
            far_defect = far_defect.max((a[0] - right.value(y)).abs()).max(a[1].abs());
            let a = carrier.eval([g.x_left - x1, g.left_offset + y * g.c0])?;
            far_defect = far_defect.max((a[0] - left.value(y * g.c0)).abs()).max(a[1].abs());
        }
    }
    let sigma = carrier.sigma();
    let table = carrier.table();
    let mut bounds_ok = true;
    let mut c2 = 0.0f64;
    let mut c3 = 0.0f64;
    let mut sig = CsvTable::new(&["t", "sigma", "d1", "d2"]);
    for i in 0..table.t.len() {
        let t = table.t[i];
        if t > 0.0 && t <= eps {
            bounds_ok &= first_derivative_bound_holds(phi.max(f64::MIN_POSITIVE), eps, t, table.d1[i], 1e-8);
            if phi > 0.0 {
                c2 = c2.max(fitted_constant(phi, eps, 2, table.d2[i]));
                c3 = c3.max(fitted_constant(phi, eps, 3, sigma.derivative(t, 3)));
            }
        }
        sig.push([num(t), num(table.value[i]), num(table.d1[i]), num(table.d2[i])]);
    }
    art.csv("sigma_table.csv", &sig)?;
    art.csv("carrier_flux.csv", &fluxes)?;
    let fields = StreamField::seeded_family(seed, 10, 0.5);
    let probe = trilinear_smallness_probe(&carrier, &fields)?;
    let checks = [
        ("divergence", div, 1e-8),
        ("wall slip", slip.tangential, 1e-9),
        ("wall normal", slip.normal, 1e-12),
        ("section flux", flux_defect, 1e-8),
        ("far field", far_defect, 1e-14),
        ("sigma'' constant", c2, SIGMA_CONSTANT_CAP),
        ("sigma''' constant", c3, SIGMA_CONSTANT_CAP),
    ];
    let pass = bounds_ok && checks.iter().all(|c| c.1 <= c.2);
    let mut props = CsvTable::new(&["property", "value", "bound", "pass"]);
    for (name, v, tol) in checks {
        props.push([name.to_string(), num(v), num(tol), verdict(v <= tol).to_string()]);
    }
    props.push(["sigma' bound".to_string(), String::new(), String::new(), verdict(bounds_ok).to_string()]);
    art.csv("carrier.csv", &props)?;
    if art.wants(Format::Vtk) {
        let a = mesh.vertices.iter().map(|x| carrier.eval(*x)).collect::<Result<Vec<_>, _>>()?;
        art.vtk("carrier.vtk", &vtk_vertex_field(&format!("leray-strip {VERSION} carrier phi={phi}"), &mesh, "carrier", &a))?;
    }
    let mut report = format!("eps {eps}  e^(2/eps) {z}\n");
    for (name, v, tol) in checks {
        report.push_str(&format!("{name:<18} {v:e} (<= {tol:e}) {}\n", verdict(v <= tol)));
    }
    report.push_str(&format!("sigma' bound at table nodes {}\n", verdict(bounds_ok)));
    report.push_str(&format!("trilinear ratio {:e} (fitted constant {:e}, route gap {:e})\n", probe.span_ratio, probe.fitted_constant, probe.route_gap));
    report.push_str(&format!("{}\n", verdict(pass)));
    art.summary(
        "summary.json",
        &json!({
            "eps": eps, "z": z, "divergence": div, "slip_tangential": slip.tangential, "slip_normal": slip.normal,
            "flux_defect": flux_defect, "far_field_defect": far_defect, "sigma_bound_ok": bounds_ok,
            "sigma_c2": c2, "sigma_c3": c3, "trilinear_span_ratio": probe.span_ratio,
            "trilinear_max_ratio": probe.max_ratio, "trilinear_fitted_constant": probe.fitted_constant, "seed": seed, "pass": pass,
        }),
    )?;
    Ok(Outcome { pass, report, artifacts: art.written.clone() })
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    hi / lo
}

pub fn korn(config: &RunConfig, zetas: &[f64], art: &mut Artifacts) -> HarnessResult<Outcome> {
    let g = config.geometry()?;
    let mut table = CsvTable::new(&["zeta", "constant", "strain_eigenvalue", "iterations", "flux_row"]);
    let mut values = Vec::new();
    for &z in zetas {
        let est = estimate_korn_constant(&build_mesh(&g, z, config.mesh.h)?)?;
        info!("korn zeta = {z}: {}", est.constant);
        values.push(est.constant);
        table.push([num(z), num(est.constant), num(est.strain_eigenvalue), est.iterations.to_string(), est.flux_row.to_string()]);
    }
    art.csv("korn.csv", &table)?;
    let s = spread(&values);
    let pass = s <= KORN_SPREAD;
    let report = format!("{}spread {s} (<= {KORN_SPREAD}) {}\n", table.render(), verdict(pass));
    Ok(Outcome { pass, report, artifacts: art.written.clone() })
}

pub fn poincare(config: &RunConfig, zetas: &[f64], constraint: PoincareConstraint, art: &mut Artifacts) -> HarnessResult<Outcome> {
    let g = config.geometry()?;
    let mut table = CsvTable::new(&["zeta", "constant", "eigenvalue", "iterations"]);
    let mut values = Vec::new();
    for &z in zetas {
        let est = estimate_poincare_constant(&build_mesh(&g, z, config.mesh.h)?, constraint)?;
        values.push(est.constant);
        table.push([num(z), num(est.constant), num(est.eigenvalue), est.iterations.to_string()]);
    }
    art.csv("poincare.csv", &table)?;
    let s = spread(&values);
    let pass = s <= POINCARE_SPREAD;
    let report = format!("{}spread {s} (<= {POINCARE_SPREAD}) {}\n", table.render(), verdict(pass));
    Ok(Outcome { pass, report, artifacts: art.written.clone() })
}

/// Relative tolerance of the linear-growth check of the 3D Korn ratio.
pub const KORN3D_GROWTH_TOL: f64 = 0.1;

pub fn korn3d(radii: &[f64], art: &mut Artifacts) -> HarnessResult<Outcome> {
    let mut table = CsvTable::new(&["R", "numerator", "denominator", "ratio"]);
    let mut reports = Vec::new();
    for &r in radii {
        let rep = korn3d_counterexample_ratio(r)?;
        table.push([num(r), num(rep.numerator), num(rep.denominator), num(rep.ratio)]);
        reports.push((r, rep));
    }
    art.csv("korn3d.csv", &table)?;
    let mut pass = reports.iter().all(|(r, rep)| rep.numerator >= 2.0 * std::f64::consts::PI * r);
    for w in reports.windows(2) {
        let growth = w[1].1.ratio / w[0].1.ratio;
        let expect = w[1].0 / w[0].0;
        pass &= (growth - expect).abs() <= KORN3D_GROWTH_TOL * expect;
    }
    let report = format!("{}{}\n", table.render(), verdict(pass));
    Ok(Outcome { pass, report, artifacts: art.written.clone() })
}

pub fn poiseuille(phi: f64, alpha: Friction<f64>, width: f64, points: usize, art: &mut Artifacts) -> HarnessResult<Outcome> {
    let p = Profile::new(phi, alpha, width, Side::Right)?;
    let mut table = CsvTable::new(&["x2", "velocity", "derivative"]);
    for k in 0..=points {
        let y = width * k as f64 / points as f64;
        table.push([num(y), num(p.value(y)), num(p.derivative(y))]);
    }
    art.csv("poiseuille.csv", &table)?;
    let flux_defect = (p.flux_quadrature() - phi).abs();
    let (r0, r1) = p.wall_residuals();
    let pass = flux_defect <= 1e-12 && r0.abs().max(r1.abs()) <= 1e-10;
    let report = format!(
        "{}C_R = {}\nflux defect {flux_defect:e}\nwall residuals {r0:e} {r1:e}\n{}\n",
        table.render(),
        p.pressure_constant(),
        verdict(pass)
    );
    Ok(Outcome { pass, report, artifacts: art.written.clone() })
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>, HarnessError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| HarnessError::Usage(format!("`{s}` in `{text}` is not a number"))))
        .collect()
}
