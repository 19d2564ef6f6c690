use std::sync::Arc;

use leray_strip::functional::FieldVector;
use leray_strip::geometry::{ConstrictionParams, SBendParams, StripGeometry};
use leray_strip::solver::*;
use leray_strip::{Error, Friction, Profile};
use proptest::prelude::*;

/// Closed-form Poiseuille velocity on the unit section, written out independently.
fn poiseuille_oracle(phi: f64, alpha: Friction<f64>, y: f64) -> f64 {
    match alpha {
        Friction::Finite(a) => 6.0 * phi / (6.0 + a) * (a * (y - y * y) + 1.0),
        Friction::NoSlip => 6.0 * phi * y * (1.0 - y),
    }
}

fn pressure_gradient_oracle(phi: f64, alpha: Friction<f64>) -> f64 {
    match alpha {
        Friction::Finite(a) => -12.0 * a * phi / (6.0 + a),
        Friction::NoSlip => -12.0 * phi,
    }
}

fn s_bend() -> StripGeometry {
    StripGeometry::s_bend(SBendParams::default()).unwrap()
}

fn acceptance_config() -> SolverConfig {
    SolverConfig { phi: 0.1, alpha: Friction::Finite(1.0), zeta: 6.0, h: 0.1, ..Default::default() }
}

fn check_solution_invariants(s: &Solution) {
    let sys = &s.system;
    assert!(s.residual_norm <= s.config.newton_tol);
    let div = sys.divergence_residual(&s.field).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(div <= 1e-10, "divergence residual {div:e}");
    assert!(s.field.max_wall_normal() <= 1e-12);
    assert!(sys.pressure_mean(s.pressure()).abs() <= 1e-12);
}

#[test]
fn end_data_matches_profiles() {
    // total slip: uniform inflow
    let c = SolverConfig { phi: 1.0, alpha: Friction::Finite(0.0), zeta: 2.0, h: 0.125, ..Default::default() };
    let sys = build_system(&c, &StripGeometry::straight()).unwrap();
    let lift = sys.boundary_lift();
    let dofs = sys.dofs();
    for (i, e) in dofs.end.iter().enumerate() {
        if e.is_some() {
            let u = lift.node_velocity(i);
            assert!((u[0] - 1.0).abs() < 1e-15 && u[1].abs() < 1e-15);
        }
    }
    // imposed flux by Simpson's rule on the end edges (exact for quadratic traces)
    let c = SolverConfig { phi: 0.7, alpha: Friction::Finite(3.0), zeta: 2.0, h: 0.1, ..Default::default() };
    let g = StripGeometry::s_bend(SBendParams { c0: 2.0, ..Default::default() }).unwrap();
    let sys = build_system(&c, &g).unwrap();
    let lift = sys.boundary_lift();
    let dofs = sys.dofs();
    for side in [leray_strip::Side::Left, leray_strip::Side::Right] {
        let flux: f64 = dofs
            .end_edges
            .iter()
            .filter(|e| e.side == side)
            .map(|e| {
                let len = (dofs.nodes[e.b][1] - dofs.nodes[e.a][1]).abs();
                len / 6.0 * (lift.node_velocity(e.a)[0] + 4.0 * lift.node_velocity(e.mid)[0] + lift.node_velocity(e.b)[0])
            })
            .sum();
        assert!((flux - 0.7).abs() <= 1e-12, "{side:?}: {flux}");
    }
    // left section of width 2 at alpha = 1: direct evaluation of the profile
    let c = SolverConfig { phi: 1.3, alpha: Friction::Finite(1.0), zeta: 2.0, h: 0.1, ..Default::default() };
    let sys = build_system(&c, &g).unwrap();
    let lift = sys.boundary_lift();
    let k = 6.0 * 1.3 / (4.0 * (6.0 + 2.0));
    for (i, e) in sys.dofs().end.iter().enumerate() {
        if *e == Some(leray_strip::Side::Left) {
            let y = sys.dofs().nodes[i][1] - g.left_offset;
            let expect = k * ((2.0 * y - y * y) + 2.0);
            let u = lift.node_velocity(i);
            assert!((u[0] - expect).abs() <= 1e-14 && u[1].abs() <= 1e-14);
        }
    }
}

#[test]
fn mismatched_profiles_are_config_errors() {
    let c = SolverConfig { zeta: 2.0, h: 0.25, ..Default::default() };
    let sys = build_system(&c, &StripGeometry::straight()).unwrap();
    let g = StripGeometry::straight();
    let right = Profile::right(0.1, Friction::Finite(1.0)).unwrap();
    let bad_phi = Profile::left(0.2, Friction::Finite(1.0), 1.0).unwrap();
    let bad_alpha = Profile::left(0.1, Friction::Finite(2.0), 1.0).unwrap();
    let bad_width = Profile::left(0.1, Friction::Finite(1.0), 1.5).unwrap();
    for left in [bad_phi, bad_alpha, bad_width] {
        assert!(matches!(apply_end_data(&sys.forms, &g, &left, &right), Err(Error::Config(_))));
    }
    let swapped = Profile::right(0.1, Friction::Finite(1.0)).unwrap();
    assert!(matches!(apply_end_data(&sys.forms, &g, &swapped, &right), Err(Error::Config(_))));
}

#[test]
fn straight_strip_reproduces_poiseuille() {
    let g = StripGeometry::straight();
    for phi in [0.5, 2.0] {
        for alpha in [Friction::Finite(0.0), Friction::Finite(1.0), Friction::Finite(6.0), Friction::NoSlip] {
            let c = SolverConfig { phi, alpha, zeta: 4.0, h: 0.05, ..Default::default() };
            let s = solve_stationary(&c, &g).unwrap();
            check_solution_invariants(&s);
            let exact = s.system.dofs().interpolate(|x| [poiseuille_oracle(phi, alpha, x[1]), 0.0]);
            let err = h1_distance(&s.system.forms, s.velocity(), &exact);
            assert!(err <= 1e-9, "phi {phi} alpha {alpha}: H1 error {err:e}");
            let pr = recover_pressure(&s).unwrap();
            let expect = pressure_gradient_oracle(phi, alpha);
            for grad in [pr.left_gradient, pr.right_gradient] {
                if expect == 0.0 {
                    assert!(grad.abs() <= 1e-8, "alpha 0 gradient {grad:e}");
                } else {
                    assert!((grad - expect).abs() <= 0.02 * expect.abs(), "{grad} vs {expect}");
                }
            }
        }
    }
}

#[test]
fn newton_from_exact_poiseuille_is_converged() {
    let g = StripGeometry::straight();
    let c = SolverConfig { phi: 1.0, alpha: Friction::Finite(6.0), zeta: 2.0, h: 0.1, ..Default::default() };
    let sys = Arc::new(build_system(&c, &g).unwrap());
    let dofs = sys.dofs().clone();
    let guess = FieldVector::interpolate(dofs, |x| [poiseuille_oracle(1.0, c.alpha, x[1]), 0.0], |x| -6.0 * x[0]);
    let s = solve_from(sys.clone(), &c, Some(&guess)).unwrap();
    assert_eq!(s.nonlinear_iterations, 0);
    assert_eq!(s.iteration_log.len(), 1);
    assert!(s.iteration_log[0].residual <= c.newton_tol);
    let step = sys.newton_step(&s.field).unwrap();
    assert!(sys.residual_norm(&step) <= c.newton_tol);
}

#[test]
fn zero_data_gives_zero_fixed_point() {
    let c = SolverConfig { phi: 0.0, zeta: 2.0, h: 0.125, ..Default::default() };
    let sys = build_system(&c, &s_bend()).unwrap();
    let zero = sys.boundary_lift();
    let next = sys.picard_step(&zero).unwrap();
    assert!(next.velocity.iter().chain(&next.pressure).all(|v| v.abs() <= 1e-14));
    let s = solve_stationary(&c, &s_bend()).unwrap();
    assert_eq!(s.nonlinear_iterations, 0);
    assert!(s.velocity().iter().all(|v| v.abs() <= 1e-14));
}

#[test]
fn picard_contracts_from_stokes() {
    let g = s_bend();
    for phi in [0.1, 0.5, 1.0] {
        let c = SolverConfig { phi, zeta: 3.0, h: 0.1, ..acceptance_config() };
        let sys = build_system(&c, &g).unwrap();
        let stokes = sys.stokes().unwrap();
        let r0 = sys.residual_norm(&stokes);
        let r1 = sys.residual_norm(&sys.picard_step(&stokes).unwrap());
        assert!(r1 * 10.0 <= r0, "phi {phi}: {r0:e} -> {r1:e}");
    }
}

#[test]
fn s_bend_acceptance_case() {
    let c = acceptance_config();
    let s = solve_stationary(&c, &s_bend()).unwrap();
    check_solution_invariants(&s);
    assert!(s.nonlinear_iterations <= 25);
    assert!(!s.continuation_used && !s.smallness_warning);
    let fluxes = section_fluxes(&s.field, 10).unwrap();
    assert_eq!(fluxes.len(), 10);
    assert!(fluxes.first().unwrap().x_left < -4.0 && fluxes.last().unwrap().x_right > 0.0);
    for f in &fluxes {
        assert!((f.flux - c.phi).abs() <= 1e-8, "{f:?}");
    }
    let e = energy_identity(&s);
    assert!(e.dissipation > 0.0);
    assert!(e.relative_defect <= 1e-6, "{e:?}");
    // far-field slopes against the end profiles
    let pr = recover_pressure(&s).unwrap();
    let cl = -pressure_gradient_oracle(c.phi, c.alpha);
    assert!((pr.right_gradient + cl).abs() <= 0.05 * cl);
    assert!((pr.left_gradient + cl).abs() <= 0.05 * cl);
}

#[test]
fn mirror_symmetric_geometry_gives_mirror_symmetric_solution() {
    let g = StripGeometry::constriction(ConstrictionParams { symmetric: true, amplitude: 0.2, ..Default::default() }).unwrap();
    let c = acceptance_config();
    let s = solve_stationary(&c, &g).unwrap();
    let m = mirror_defect(&s).unwrap();
    assert!(m.velocity <= c.linear_tol && m.pressure <= c.linear_tol, "{m:?}");
    // the S-bend is not symmetric
    let s = solve_stationary(&SolverConfig { zeta: 2.0, ..c.clone() }, &s_bend()).unwrap();
    assert!(mirror_defect(&s).is_err());
    let a = StripGeometry::constriction(ConstrictionParams { symmetric: false, ..Default::default() }).unwrap();
    let s = solve_stationary(&SolverConfig { zeta: 2.0, ..c }, &a).unwrap();
    assert!(mirror_defect(&s).is_err());
}

#[test]
fn wall_slip_decreases_with_friction() {
    let g = s_bend();
    let mut last = f64::INFINITY;
    for alpha in [Friction::Finite(0.0), Friction::Finite(1.0), Friction::Finite(10.0), Friction::Finite(1e4)] {
        let c = SolverConfig { phi: 0.5, alpha, zeta: 3.0, h: 0.1, ..Default::default() };
        let s = solve_stationary(&c, &g).unwrap();
        let v = s.field.eval([-2.0, g.wall_heights(-2.0).unwrap().0]).unwrap().velocity;
        let speed = v[0].hypot(v[1]);
        assert!(speed <= last, "alpha {alpha}: {speed} > {last}");
        last = speed;
    }
    assert!(last < 1e-3);
}

#[test]
fn uniqueness_probe_and_disturbance_growth() {
    let g = s_bend();
    let c = acceptance_config();
    let r = uniqueness_probe(&c, &g, 3, 0xC0FFEE).unwrap();
    assert!(!r.partial && r.converged.len() == 3);
    assert!(r.max_distance <= 1e-8, "{r:?}");
    let r0 = uniqueness_probe(&SolverConfig { phi: 0.0, ..c.clone() }, &g, 3, 0xC0FFEE).unwrap();
    assert!(r0.max_distance <= 1e-12);
    let growth = disturbance_growth(&c, &g, &[4.0, 6.0, 8.0]).unwrap();
    let lo = growth.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = growth.iter().map(|p| p.1).fold(0.0, f64::max);
    assert!(lo > 0.0 && hi / lo <= 1.1, "{growth:?}");
}

#[test]
fn large_flux_small_friction_converges() {
    let c = SolverConfig { phi: 5.0, alpha: Friction::Finite(0.01), ..acceptance_config() };
    assert!(!c.smallness_warning());
    let s = solve_stationary(&c, &s_bend()).unwrap();
    check_solution_invariants(&s);
    for f in section_fluxes(&s.field, 10).unwrap() {
        assert!((f.flux - 5.0).abs() <= 1e-8);
    }
}

#[test]
fn continuation_and_convergence_failure() {
    let g = s_bend();
    // two Newton steps from Stokes leave a residual of about 5e-8 at phi = 10
    let base = SolverConfig {
        phi: 10.0,
        zeta: 2.0,
        h: 0.125,
        picard_iters: 0,
        newton_max_iters: 2,
        newton_tol: 1e-8,
        continuation_steps: 1,
        ..Default::default()
    };
    match solve_stationary(&SolverConfig { newton_max_iters: 1, ..base.clone() }, &g) {
        Err(Error::Convergence { residuals, .. }) => assert_eq!(residuals.len(), 4),
        other => panic!("expected a convergence error, got {other:?}"),
    }
    let s = solve_stationary(&base, &g).unwrap();
    assert!(s.continuation_used);
    check_solution_invariants(&s);
    let phis: Vec<f64> = s.iteration_log.iter().map(|r| r.phi).collect();
    assert!(phis.contains(&5.0) && *phis.last().unwrap() == 10.0);
    let direct = solve_stationary(&SolverConfig { newton_max_iters: 12, newton_tol: 1e-10, ..base }, &g).unwrap();
    assert!(!direct.continuation_used);
    let d = h1_distance(&s.system.forms, s.velocity(), direct.velocity());
    assert!(d <= 1e-7, "{d:e}");
}

#[test]
fn no_slip_clamps_wall_velocity() {
    let c = SolverConfig { phi: 1.0, alpha: Friction::NoSlip, zeta: 2.0, h: 0.1, ..Default::default() };
    let s = solve_stationary(&c, &s_bend()).unwrap();
    check_solution_invariants(&s);
    let dofs = s.system.dofs();
    for i in 0..dofs.n_nodes() {
        if dofs.wall[i].is_some() {
            let u = s.field.node_velocity(i);
            assert!(u[0].abs() + u[1].abs() <= 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn converged_solutions_conserve_flux(phi in 0.0f64..1.5, alpha in 0.0f64..20.0, bend in 0.0f64..0.6) {
        let g = StripGeometry::s_bend(SBendParams { amplitude: bend, length: 2.0, ..Default::default() }).unwrap();
        let c = SolverConfig { phi, alpha: Friction::Finite(alpha), zeta: 2.0, h: 0.125, ..Default::default() };
        let s = solve_stationary(&c, &g).unwrap();
        check_solution_invariants(&s);
        for f in section_fluxes(&s.field, 10).unwrap() {
            prop_assert!((f.flux - phi).abs() <= 1e-8);
        }
        prop_assert!(energy_identity(&s).relative_defect <= 1e-6 || phi == 0.0);
    }
}
