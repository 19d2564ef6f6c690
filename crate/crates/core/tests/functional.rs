use std::f64::consts::PI;
use std::sync::Arc;

use leray_strip::functional::*;
use leray_strip::geometry::{build_mesh, Mesh, SBendParams, StripGeometry};
use leray_strip::linalg::{dot, generalized_symmetric_eigen};
use leray_strip::quadrature::GaussLegendre;
use leray_strip::{Error, Friction};
use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn straight(zeta: f64, h: f64) -> Mesh {
    build_mesh(&StripGeometry::straight(), zeta, h).unwrap()
}

fn s_bend(zeta: f64, h: f64) -> Mesh {
    build_mesh(&StripGeometry::s_bend(SBendParams::default()).unwrap(), zeta, h).unwrap()
}

/// Tensor Gauss integral over `[x0, x1] x [y0, y1]`.
fn box_integral<F: Fn(f64, f64) -> f64>(x0: f64, x1: f64, y0: f64, y1: f64, f: F) -> f64 {
    let g = GaussLegendre::<f64>::new(10);
    g.integrate(x0, x1, |x| g.integrate(y0, y1, |y| f(x, y)))
}

#[test]
fn layout_counts() {
    let mesh = Mesh::rectangle(0.0, 2.0, 0.0, 1.0, 4, 2).unwrap();
    let dofs = DofMap::new(Arc::new(mesh.clone())).unwrap();
    // edges of a structured nx x ny triangulation: nx(ny+1) + ny(nx+1) + nx ny
    let edges = 4 * 3 + 2 * 5 + 4 * 2;
    assert_eq!(dofs.n_nodes(), mesh.vertices.len() + edges);
    assert_eq!(dofs.n_velocity(), 2 * dofs.n_nodes());
    assert_eq!(dofs.n_pressure(), 15);
    assert_eq!(dofs.wall_edges.len(), 8);
    assert_eq!(dofs.end_edges.len(), 4);
}

#[test]
fn rigid_motions_have_zero_strain() {
    for mesh in [straight(2.0, 0.25), s_bend(2.0, 0.2)] {
        let forms = assemble_forms(&mesh, Friction::Finite(1.0)).unwrap();
        let dofs = &forms.dofs;
        let n = mesh.vertices.len() as f64;
        let c = mesh.vertices.iter().fold([0.0, 0.0], |s, v| [s[0] + v[0] / n, s[1] + v[1] / n]);
        for rigid in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            let u = dofs.interpolate(|x| [rigid[0] - rigid[2] * (x[1] - c[1]), rigid[1] + rigid[2] * (x[0] - c[0])]);
            let e = forms.strain.bilinear(&u, &u);
            assert!(e.abs() <= 1e-12, "rigid {rigid:?}: {e:e}");
        }
    }
}

#[test]
fn strain_energy_matches_quadrature_oracle() {
    let mesh = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap();
    let forms = assemble_forms(&mesh, Friction::Finite(0.0)).unwrap();
    // u = (x2^2, 0): S12 = x2, 2 int |S u|^2 = 4 int x2^2 = 4/3
    let u = forms.dofs.interpolate(|x| [x[1] * x[1], 0.0]);
    let e = forms.strain.bilinear(&u, &u);
    let oracle = box_integral(0.0, 1.0, 0.0, 1.0, |_, y| 2.0 * 2.0 * y * y);
    assert!((oracle - 4.0 / 3.0).abs() < 1e-13);
    assert!((e - oracle).abs() < 1e-10, "{e} vs {oracle}");
    // a general quadratic field and the gradient, mass and divergence forms
    let f = |x: f64, y: f64| [x * y - 0.3 * x * x + y, x * x - 3.0 * y * y + 0.5 * x];
    let j = |x: f64, y: f64| [[y - 0.6 * x, x + 1.0], [2.0 * x + 0.5, -6.0 * y]];
    let u = forms.dofs.interpolate(|p| f(p[0], p[1]));
    let strain_oracle = box_integral(0.0, 1.0, 0.0, 1.0, |x, y| {
        let g = j(x, y);
        let s01 = 0.5 * (g[0][1] + g[1][0]);
        2.0 * (g[0][0] * g[0][0] + 2.0 * s01 * s01 + g[1][1] * g[1][1])
    });
    let grad_oracle = box_integral(0.0, 1.0, 0.0, 1.0, |x, y| j(x, y).iter().flatten().map(|v| v * v).sum());
    let mass_oracle = box_integral(0.0, 1.0, 0.0, 1.0, |x, y| f(x, y).iter().map(|v| v * v).sum());
    assert!((forms.strain.bilinear(&u, &u) - strain_oracle).abs() < 1e-10);
    assert!((forms.stiffness.bilinear(&u, &u) - grad_oracle).abs() < 1e-10);
    assert!((forms.mass.bilinear(&u, &u) - mass_oracle).abs() < 1e-10);
    // -int q div u with q = 1 + x - 2y
    let q: Vec<f64> = mesh.vertices.iter().map(|v| 1.0 + v[0] - 2.0 * v[1]).collect();
    let div_oracle = -box_integral(0.0, 1.0, 0.0, 1.0, |x, y| {
        let g = j(x, y);
        (1.0 + x - 2.0 * y) * (g[0][0] + g[1][1])
    });
    assert!((forms.divergence.bilinear(&q, &u) - div_oracle).abs() < 1e-10);
}

#[test]
fn matrices_symmetric_and_semidefinite() {
    let mesh = s_bend(2.0, 0.2);
    let forms = assemble_forms(&mesh, Friction::Finite(3.0)).unwrap();
    for (name, m) in [("strain", &forms.strain), ("friction", &forms.friction), ("mass", &forms.mass), ("stiffness", &forms.stiffness)] {
        assert!(m.max_asymmetry() <= 1e-12, "{name}: {:e}", m.max_asymmetry());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let u: Vec<f64> = (0..forms.dofs.n_velocity()).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert!(forms.strain.bilinear(&u, &u) >= -1e-12);
        assert!(forms.friction.bilinear(&u, &u) >= -1e-12);
    }
}

#[test]
fn friction_lives_on_wall_tangents_and_scales_with_alpha() {
    let mesh = s_bend(2.0, 0.2);
    let zero = assemble_forms(&mesh, Friction::Finite(0.0)).unwrap();
    assert_eq!(zero.friction.nnz(), 0);
    let one = assemble_forms(&mesh, Friction::Finite(1.0)).unwrap();
    let dofs = &one.dofs;
    for i in 0..one.friction.nrows {
        for (j, _) in one.friction.row(i) {
            for k in [i, j] {
                assert!(dofs.wall[k / 2].is_some(), "friction entry off the wall at coefficient {k}");
                assert_eq!(k % 2, 1, "friction entry on a normal coefficient");
            }
        }
    }
    // unit tangential slip: energy = alpha * wall length
    let mut u = vec![0.0; dofs.n_velocity()];
    for (i, w) in dofs.wall.iter().enumerate() {
        if w.is_some() {
            u[2 * i + 1] = 1.0;
        }
    }
    let length: f64 = dofs.wall_edges.iter().map(|e| e.length).sum();
    let mut previous = 0.0;
    for alpha in [1.0, 2.0, 4.0, 8.0] {
        let f = assemble_forms(&mesh, Friction::Finite(alpha)).unwrap();
        let e = f.friction.bilinear(&u, &u);
        assert!(e > previous);
        // tangents of adjacent chords differ slightly; energy is alpha * length up to that
        assert!((e / alpha - length).abs() <= 1e-3 * length, "alpha {alpha}: {e} vs {}", alpha * length);
        let ratio: f64 = e / one.friction.bilinear(&u, &u);
        assert!((ratio - alpha).abs() <= 1e-12 * alpha);
        previous = e;
    }
    let no_slip = assemble_forms(&mesh, Friction::NoSlip).unwrap();
    assert_eq!(no_slip.friction.nnz(), 0);
}

#[test]
fn strain_kernel_is_rigid_motions() {
    let mesh = Mesh::rectangle(0.0, 2.0, 0.0, 1.0, 4, 2).unwrap();
    let forms = assemble_forms(&mesh, Friction::Finite(0.0)).unwrap();
    let n = forms.dofs.n_velocity();
    let a = DMatrix::from_fn(n, n, |i, j| forms.strain.get(i, j));
    let m = DMatrix::from_fn(n, n, |i, j| forms.mass.get(i, j));
    let e = generalized_symmetric_eigen(&a, &m).unwrap();
    let h: f64 = 0.5;
    assert!(e.values[..3].iter().all(|v| v.abs() <= 1e-10), "{:?}", &e.values[..4]);
    assert!(e.values[3] >= 0.1 * h * h, "fourth eigenvalue {}", e.values[3]);
}

#[test]
fn wall_constraint_and_consistent_normals() {
    let mesh = s_bend(2.0, 0.2);
    let dofs = Arc::new(DofMap::new(Arc::new(mesh)).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut field = FieldVector::zeros(dofs.clone());
    field.velocity.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    assert!(field.max_wall_normal() > 1e-3);
    field.apply_wall_constraint(Friction::Finite(1.0));
    assert!(field.max_wall_normal() <= 1e-12);
    // int psi_k u . n dS over the wall vanishes for every vertex hat psi_k
    let mut moments = vec![0.0; dofs.n_vertices()];
    for e in &dofs.wall_edges {
        let un = |i: usize| {
            let u = field.node_velocity(i);
            u[0] * e.normal[0] + u[1] * e.normal[1]
        };
        moments[e.a] += e.length * (un(e.a) / 6.0 + un(e.mid) / 3.0);
        moments[e.b] += e.length * (un(e.b) / 6.0 + un(e.mid) / 3.0);
    }
    let worst = moments.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst <= 1e-14, "{worst:e}");
    let mut clamped = field.clone();
    clamped.apply_wall_constraint(Friction::NoSlip);
    for (i, w) in dofs.wall.iter().enumerate() {
        if w.is_some() {
            assert_eq!(clamped.node_velocity(i), [0.0, 0.0]);
        }
    }
}

#[test]
fn point_evaluation_reproduces_quadratics() {
    let mesh = s_bend(2.0, 0.2);
    let dofs = Arc::new(DofMap::new(Arc::new(mesh.clone())).unwrap());
    let f = |x: [f64; 2]| [x[0] * x[1] - x[1] * x[1], 2.0 * x[0] * x[0] + x[1]];
    let field = FieldVector::interpolate(dofs, f, |x| 1.0 + 2.0 * x[0] - x[1]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut hits = 0;
    for _ in 0..200 {
        let t = rng.random_range(0..mesh.triangles.len());
        let l: [f64; 3] = {
            let (a, b) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
            [1.0 - a - b, a, b]
        };
        let v = mesh.triangles[t].map(|i| mesh.vertices[i]);
        let x = [0, 1].map(|d| l[0] * v[0][d] + l[1] * v[1][d] + l[2] * v[2][d]);
        let p = field.eval(x).expect("point inside the mesh");
        let exact = f(x);
        assert!((p.velocity[0] - exact[0]).abs() < 1e-12 && (p.velocity[1] - exact[1]).abs() < 1e-12);
        assert!((p.gradient[1][0] - 4.0 * x[0]).abs() < 1e-10 && (p.gradient[0][1] - (x[0] - 2.0 * x[1])).abs() < 1e-10);
        assert!((p.pressure - (1.0 + 2.0 * x[0] - x[1])).abs() < 1e-12);
        hits += 1;
    }
    assert_eq!(hits, 200);
    assert!(field.eval([100.0, 0.5]).is_none());
}

#[test]
fn convection_forms_match_quadrature_oracle() {
    let mesh = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 3, 3).unwrap();
    let forms = assemble_forms(&mesh, Friction::Finite(0.0)).unwrap();
    let dofs = &forms.dofs;
    let fu = |x: f64, y: f64| [1.0 + x * y, y - x * x];
    let ju = |x: f64, y: f64| [[y, x], [-2.0 * x, 1.0]];
    let fv = |x: f64, y: f64| [y * y, x + 0.5 * x * y];
    let jv = |x: f64, y: f64| [[0.0, 2.0 * y], [1.0 + 0.5 * y, 0.5 * x]];
    let fz = |x: f64, y: f64| [x - y, x * x];
    let (u, v, z) = (
        dofs.interpolate(|p| fu(p[0], p[1])),
        dofs.interpolate(|p| fv(p[0], p[1])),
        dofs.interpolate(|p| fz(p[0], p[1])),
    );
    let oracle = box_integral(0.0, 1.0, 0.0, 1.0, |x, y| {
        let (a, g, c) = (fu(x, y), jv(x, y), fz(x, y));
        (a[0] * g[0][0] + a[1] * g[0][1]) * c[0] + (a[0] * g[1][0] + a[1] * g[1][1]) * c[1]
    });
    let conv = forms.convection();
    assert!((conv.trilinear(&u, &v, &z) - oracle).abs() < 1e-12);
    let picard = conv.matrix(&u, false);
    assert!((picard.bilinear(&z, &v) - oracle).abs() < 1e-12);
    let self_oracle = box_integral(0.0, 1.0, 0.0, 1.0, |x, y| {
        let (a, g, c) = (fu(x, y), ju(x, y), fz(x, y));
        (a[0] * g[0][0] + a[1] * g[0][1]) * c[0] + (a[0] * g[1][0] + a[1] * g[1][1]) * c[1]
    });
    assert!((dot(&conv.apply(&u), &z) - self_oracle).abs() < 1e-12);
    // N is quadratic: N(u + v) - N(u - v) = 2 J(u) v
    let plus: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
    let minus: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
    let jv_vec = conv.matrix(&u, true).mul_vec(&v);
    let (np, nm) = (conv.apply(&plus), conv.apply(&minus));
    for k in 0..jv_vec.len() {
        assert!((np[k] - nm[k] - 2.0 * jv_vec[k]).abs() < 1e-12);
    }
}

#[test]
fn degenerate_triangle_is_an_assembly_error() {
    let mut mesh = Mesh::rectangle(0.0, 1.0, 0.0, 1.0, 2, 2).unwrap();
    let t = mesh.triangles[0];
    mesh.vertices[t[2]] = [0.5 * (mesh.vertices[t[0]][0] + mesh.vertices[t[1]][0]), 0.5 * (mesh.vertices[t[0]][1] + mesh.vertices[t[1]][1])];
    assert!(matches!(assemble_forms(&mesh, Friction::Finite(1.0)), Err(Error::Assembly(_))));
}

#[test]
fn poincare_scalar_matches_neumann_eigenvalue() {
    let c = estimate_poincare_constant(&straight(2.0, 0.05), PoincareConstraint::ScalarSectionMean).unwrap();
    let oracle = 1.0 / PI;
    assert!((c.constant - oracle).abs() <= 0.02 * oracle, "C = {} vs {oracle}", c.constant);
    assert!(c.iterations <= EIGEN_MAX_ITER);
}

#[test]
fn poincare_constant_scales_with_width() {
    let narrow = Mesh::rectangle(-2.0, 2.0, 0.0, 1.0, 40, 10).unwrap();
    let wide = Mesh::rectangle(-2.0, 2.0, 0.0, 2.0, 40, 20).unwrap();
    let a = estimate_poincare_constant(&narrow, PoincareConstraint::ScalarSectionMean).unwrap().constant;
    let b = estimate_poincare_constant(&wide, PoincareConstraint::ScalarSectionMean).unwrap().constant;
    assert!((b / a - 2.0).abs() <= 0.02, "{a} -> {b}");
    let va = estimate_poincare_constant(&narrow, PoincareConstraint::ZeroMeanU1AndWallNormal).unwrap().constant;
    let vb = estimate_poincare_constant(&wide, PoincareConstraint::ZeroMeanU1AndWallNormal).unwrap().constant;
    assert!((vb / va - 2.0).abs() <= 0.02, "{va} -> {vb}");
}

#[test]
fn poincare_uniform_in_truncation_on_s_bend() {
    let values: Vec<f64> = [2.0, 4.0, 8.0]
        .iter()
        .map(|&z| estimate_poincare_constant(&s_bend(z, 0.1), PoincareConstraint::ZeroMeanU1AndWallNormal).unwrap().constant)
        .collect();
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    assert!(hi / lo <= 1.25, "{values:?}");
}

#[test]
fn korn_uniform_in_truncation_and_geometry() {
    let straight_c: Vec<f64> = [2.0, 4.0, 8.0].iter().map(|&z| estimate_korn_constant(&straight(z, 0.1)).unwrap().constant).collect();
    assert!(straight_c[2] / straight_c[0] <= 1.5, "{straight_c:?}");
    let bend = estimate_korn_constant(&s_bend(4.0, 0.1)).unwrap();
    assert!(bend.strain_eigenvalue > 0.0);
    let r = bend.constant / straight_c[1];
    assert!((1.0 / 3.0..=3.0).contains(&r), "S-bend {} vs straight {}", bend.constant, straight_c[1]);
}

#[test]
fn rigid_rotation_violates_korn_constraints() {
    let mesh = straight(2.0, 0.25);
    let dofs = Arc::new(DofMap::new(Arc::new(mesh)).unwrap());
    let rot = FieldVector::interpolate(dofs.clone(), |x| [-x[1], x[0]], |_| 0.0);
    assert!(rot.max_wall_normal() > 1.0);
    let shift = FieldVector::interpolate(dofs, |_| [1.0, 0.0], |_| 0.0);
    assert!(shift.max_wall_normal() < 1e-14);
    let est = estimate_korn_constant(&straight(2.0, 0.25)).unwrap();
    assert!(est.strain_eigenvalue > 0.1, "{}", est.strain_eigenvalue);
}

#[test]
fn inf_sup_bounded_under_refinement() {
    let coarse = inf_sup_witness(&straight(2.0, 0.25)).unwrap().beta;
    let fine = inf_sup_witness(&straight(2.0, 0.125)).unwrap().beta;
    assert!(coarse > 0.0 && fine >= 0.5 * coarse, "{coarse} -> {fine}");
    let bend = inf_sup_witness(&s_bend(2.0, 0.2)).unwrap().beta;
    assert!(bend > 0.05, "{bend}");
}

#[test]
fn estimates_invariant_under_translation() {
    let mesh = s_bend(2.0, 0.2);
    let moved = mesh.translated([3.25, -1.5]);
    let p0 = estimate_poincare_constant(&mesh, PoincareConstraint::ZeroMeanU1AndWallNormal).unwrap().constant;
    let p1 = estimate_poincare_constant(&moved, PoincareConstraint::ZeroMeanU1AndWallNormal).unwrap().constant;
    assert!((p0 - p1).abs() <= 1e-8 * p0, "{p0} vs {p1}");
    let k0 = estimate_korn_constant(&mesh).unwrap().constant;
    let k1 = estimate_korn_constant(&moved).unwrap().constant;
    assert!((k0 - k1).abs() <= 1e-8 * k0, "{k0} vs {k1}");
}

#[test]
fn korn3d_counterexample() {
    let den = |r: f64| korn3d_counterexample_ratio(r).unwrap().denominator;
    assert!((den(10.0) - den(5.0)).abs() <= 1e-10);
    for r in [5.0, 10.0, 20.0] {
        let rep = korn3d_counterexample_ratio(r).unwrap();
        assert!(rep.numerator >= 2.0 * PI * r);
        // closed form: (4 pi R + 7 pi / 3) / (pi / 2)
        assert!((rep.ratio - (8.0 * r + 14.0 / 3.0)).abs() <= 1e-10 * rep.ratio);
    }
    let q: f64 = korn3d_counterexample_ratio(20.0).unwrap().ratio / korn3d_counterexample_ratio(10.0).unwrap().ratio;
    assert!((q - 2.0).abs() <= 0.2, "{q}");
    let single = korn3d_counterexample_ratio(10.0f32).unwrap();
    assert!((single.ratio - 84.666_67).abs() < 1e-3);
    assert!(korn3d_counterexample_ratio(0.5).is_err());
}

/// Dense bivariate polynomial, coefficient `[a][b]` of `x^a y^b`.
#[derive(Clone, Debug)]
struct Poly2(Vec<Vec<f64>>);

impl Poly2 {
    fn zero(n: usize) -> Self {
        Poly2(vec![vec![0.0; n]; n])
    }
    fn var(k: usize) -> Self {
        let mut p = Poly2::zero(2);
        if k == 0 {
            p.0[1][0] = 1.0;
        } else {
            p.0[0][1] = 1.0;
        }
        p
    }
    fn add(&self, o: &Poly2) -> Poly2 {
        let n = self.0.len().max(o.0.len());
        let mut r = Poly2::zero(n);
        for (src, _) in [(self, 0), (o, 1)] {
            for (a, row) in src.0.iter().enumerate() {
                for (b, v) in row.iter().enumerate() {
                    r.0[a][b] += v;
                }
            }
        }
        r
    }
    fn mul(&self, o: &Poly2) -> Poly2 {
        let n = self.0.len() + o.0.len();
        let mut r = Poly2::zero(n);
        for (a, row) in self.0.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                for (c, row2) in o.0.iter().enumerate() {
                    for (d, w) in row2.iter().enumerate() {
                        r.0[a + c][b + d] += v * w;
                    }
                }
            }
        }
        r
    }
    fn d(&self, k: usize) -> Poly2 {
        let n = self.0.len();
        let mut r = Poly2::zero(n);
        for (a, row) in self.0.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if k == 0 && a > 0 {
                    r.0[a - 1][b] += v * a as f64;
                }
                if k == 1 && b > 0 {
                    r.0[a][b - 1] += v * b as f64;
                }
            }
        }
        r
    }
    fn eval(&self, x: [f64; 2]) -> f64 {
        let mut s = 0.0;
        for (a, row) in self.0.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                s += v * x[0].powi(a as i32) * x[1].powi(b as i32);
            }
        }
        s
    }
}

fn random_cubic(rng: &mut ChaCha8Rng) -> [Vec<Vec<f64>>; 2] {
    let one = || {
        let mut c = vec![vec![0.0; 4]; 4];
        for (a, row) in c.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                if a + b <= 3 {
                    *v = (rng.random_range(-1.0f64..1.0) * 8.0).round() / 8.0;
                }
            }
        }
        c
    };
    let mut one = one;
    [one(), one()]
}

#[test]
fn payne_identity_on_simple_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let points: Vec<[f64; 2]> = (0..100).map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
    let constant = PolynomialField { coeffs: [vec![vec![1.0]], vec![vec![0.0]]] };
    assert_eq!(payne_identity_residual(&constant, &points), 0.0);
    let rotation = PolynomialField { coeffs: [vec![vec![0.0, 1.0]], vec![vec![0.0], vec![-1.0]]] };
    assert!(payne_identity_residual(&rotation, &points) <= 1e-12);
}

#[test]
fn payne_terms_match_symbolic_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for _ in 0..100 {
        let coeffs = random_cubic(&mut rng);
        let field = PolynomialField { coeffs: coeffs.clone() };
        let h = [Poly2(coeffs[0].clone()), Poly2(coeffs[1].clone())];
        let x = [Poly2::var(0), Poly2::var(1)];
        let xh = x[0].mul(&h[0]).add(&x[1].mul(&h[1]));
        let flux = h[0].mul(&xh).d(0).add(&h[1].mul(&xh).d(1));
        let div = h[0].d(0).add(&h[1].d(1));
        let points: Vec<[f64; 2]> = (0..5).map(|_| [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)]).collect();
        for p in &points {
            let t = payne_terms(&field, p);
            let scale = 1.0 + flux.eval(*p).abs();
            assert!((t.flux_divergence - flux.eval(*p)).abs() <= 1e-12 * scale);
            assert!((t.divergence - div.mul(&xh).eval(*p)).abs() <= 1e-12 * scale);
            let mut transport = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    transport += h[i].mul(&x[j]).mul(&h[j].d(i)).eval(*p);
                }
            }
            assert!((t.transport - transport).abs() <= 1e-12 * scale);
        }
        assert!(payne_identity_residual(&field, &points) <= 1e-10);
    }
}

#[test]
fn payne_identity_is_exact_in_rationals() {
    let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let row = |v: Vec<BigRational>| v;
    let field = PolynomialField {
        coeffs: [
            vec![row(vec![r(1, 2), r(-3, 4), r(0, 1), r(2, 3)]), row(vec![r(5, 7), r(1, 1)]), row(vec![r(-1, 3)])],
            vec![row(vec![r(0, 1), r(2, 1)]), row(vec![r(-7, 5), r(0, 1), r(1, 9)]), row(vec![r(0, 1), r(3, 2)]), row(vec![r(-1, 1)])],
        ],
    };
    let points = vec![[r(1, 3), r(-2, 5)], [r(7, 2), r(1, 1)], [BigRational::zero(), BigRational::one()]];
    assert!(payne_identity_residual(&field, &points).is_zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn strain_energy_ignores_rigid_motions(seed in 0u64..1000, a in -2.0f64..2.0, b1 in -2.0f64..2.0, b2 in -2.0f64..2.0) {
        let mesh = Mesh::rectangle(0.0, 1.5, 0.0, 1.0, 3, 2).unwrap();
        let forms = assemble_forms(&mesh, Friction::Finite(0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..forms.dofs.n_velocity()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rigid = forms.dofs.interpolate(|x| [b1 - a * x[1], b2 + a * x[0]]);
        let moved: Vec<f64> = u.iter().zip(&rigid).map(|(p, q)| p + q).collect();
        let e0 = forms.strain.bilinear(&u, &u);
        let e1 = forms.strain.bilinear(&moved, &moved);
        prop_assert!(e0 >= 0.0);
        prop_assert!((e0 - e1).abs() <= 1e-10 * (1.0 + e0));
    }
}
