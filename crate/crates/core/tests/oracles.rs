mod common;

use std::f64::consts::PI;

use boussinesq::assembly::{
    assemble_f, assemble_gh, assemble_mass, assemble_stiffness, dirichlet_nodes, integrate, BoundarySpec,
    SolverOptions, Variable,
};
use boussinesq::mesh::{build_rect_mesh, TriMesh};
use boussinesq::model::{family_preset, SystemFamily};
use boussinesq::stepper::{gaussian_heap, Fields, MassSolveUpdate, NodalUpdate, Simulation, StepOptions};
use boussinesq::verify::{l2_error, manufactured_forcing, ManufacturedSolution};
use common::*;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tight() -> StepOptions {
    StepOptions {
        reuse_operators: true,
        solver: SolverOptions {
            rel_tol: 1e-14,
            ..SolverOptions::default()
        },
    }
}

fn skewed_mesh() -> TriMesh {
    build_rect_mesh(-1.3, 2.1, 0.4, 1.9, 5, 3).unwrap()
}

#[test]
fn mass_and_stiffness_match_dense_quadrature() {
    for mesh in [skewed_mesh(), build_rect_mesh(0.0, 1.0, 0.0, 1.0, 4, 4).unwrap()] {
        let (m, k) = (assemble_mass(&mesh), assemble_stiffness(&mesh));
        let (dm, dk) = (dense_mass(&mesh), dense_stiffness(&mesh));
        let (m, k) = (m.to_dense(), k.to_dense());
        for i in 0..mesh.num_nodes() {
            for j in 0..mesh.num_nodes() {
                assert!((m[i][j] - dm[(i, j)]).abs() < 1e-12);
                assert!((k[i][j] - dk[(i, j)]).abs() < 1e-12);
            }
        }
    }
}

fn random_fields(mesh: &TriMesh, rng: &mut ChaCha8Rng) -> Fields {
    let n = mesh.num_nodes();
    let mut r = || (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    Fields { eta: r(), u: r(), v: r() }
}

#[test]
fn nonlinear_loads_match_dense_quadrature() {
    let mesh = skewed_mesh();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = random_fields(&mesh, &mut rng);
    let aux = random_fields(&mesh, &mut rng);
    let coef = family_preset(SystemFamily::KdvKdv, None).unwrap();
    let [f, g, h] = dense_loads(&mesh, &coef, &x, &aux.eta, &aux.u, &aux.v);
    let lf = assemble_f(&mesh, &x.eta, &x.u, &x.v, &aux.eta, &aux.u, coef.a).unwrap();
    let (lg, lh) = assemble_gh(&mesh, &x.eta, &x.u, &x.v, &aux.v, coef.c).unwrap();
    assert!(max_diff(&lf, f.as_slice()) < 1e-13);
    assert!(max_diff(&lg, g.as_slice()) < 1e-13);
    assert!(max_diff(&lh, h.as_slice()) < 1e-13);
}

fn dirichlet_sets(mesh: &TriMesh, bc: &BoundarySpec) -> [Vec<bool>; 3] {
    Variable::ALL.map(|v| dirichlet_nodes(mesh, bc, v))
}

#[test]
fn one_bbm_step_matches_dense_reference() {
    let mesh = build_rect_mesh(-5.0, 5.0, -5.0, 5.0, 10, 10).unwrap();
    let coef = family_preset(SystemFamily::BbmBbm, None).unwrap();
    let bc = BoundarySpec::dirichlet();
    let mut sim = Simulation::new(mesh.clone(), coef, bc, 0.1, Box::new(NodalUpdate), tight()).unwrap();
    sim.set_initial(gaussian_heap(0.2, 5.0)).unwrap();
    let reference = dense_step(&mesh, &coef, &dirichlet_sets(&mesh, &bc), sim.fields(), 0.1);
    let work = sim.compute_stages().unwrap();
    for (i, k) in work.k1().iter().enumerate() {
        assert!(max_diff(k, reference.k1[i].as_slice()) < 1e-10, "k1[{i}]");
    }
    for (i, k) in work.k2().iter().enumerate() {
        assert!(max_diff(k, reference.k2[i].as_slice()) < 1e-10, "k2[{i}]");
    }
    sim.step().unwrap();
    assert!(sim.fields().max_abs_diff(&reference.next) < 1e-10);
}

#[test]
fn linear_regime_stages_match_dense_reference_with_mixed_conditions() {
    let mesh = build_rect_mesh(0.0, 6.0, 0.0, 4.0, 9, 7).unwrap();
    let coef = family_preset(SystemFamily::BonaSmith, None).unwrap();
    let bc = boussinesq::config::reflection_bc();
    let mut sim = Simulation::new(mesh.clone(), coef, bc, 0.05, Box::new(NodalUpdate), tight()).unwrap();
    sim.set_initial(|p| {
        let g = 1e-8 * (-(p[0] - 3.0).powi(2) - (p[1] - 2.0).powi(2)).exp();
        [g, 0.3 * g, -0.2 * g]
    })
    .unwrap();
    let reference = dense_step(&mesh, &coef, &dirichlet_sets(&mesh, &bc), sim.fields(), 0.05);
    let work = sim.compute_stages().unwrap();
    for (i, k) in work.k1().iter().enumerate() {
        assert!(max_diff(k, reference.k1[i].as_slice()) < 1e-10 * 1e-8, "k1[{i}]");
    }
    let aux = [&work.aux.p, &work.aux.q, &work.aux.t];
    for (i, a) in aux.iter().enumerate() {
        assert!(max_diff(a, reference.aux[i].as_slice()) < 1e-10 * 1e-8, "aux[{i}]");
    }
}

#[test]
fn mass_solve_update_equals_nodal_addition() {
    let mesh = build_rect_mesh(-10.0, 10.0, -10.0, 10.0, 16, 16).unwrap();
    let coef = family_preset(SystemFamily::BbmBbm, None).unwrap();
    let mk = |s: Box<dyn boussinesq::stepper::UpdateScheme>| {
        let mut sim = Simulation::new(mesh.clone(), coef, BoundarySpec::dirichlet(), 0.1, s, tight()).unwrap();
        sim.set_initial(gaussian_heap(0.2, 5.0)).unwrap();
        sim
    };
    let (mut a, mut b) = (mk(Box::new(NodalUpdate)), mk(Box::new(MassSolveUpdate)));
    for _ in 0..5 {
        a.step().unwrap();
        b.step().unwrap();
        assert!(a.fields().max_abs_diff(b.fields()) < 1e-12);
    }
}

#[test]
fn weak_laplacian_of_quadratic_is_two_inside() {
    let mesh = build_rect_mesh(0.0, 1.0, 0.0, 1.0, 40, 40).unwrap();
    let coef = family_preset(SystemFamily::BbmBbm, None).unwrap();
    let sim = Simulation::new(mesh.clone(), coef, BoundarySpec::dirichlet(), 0.1, Box::new(NodalUpdate), tight()).unwrap();
    let x2: Vec<f64> = mesh.nodes().iter().map(|p| p[0] * p[0]).collect();
    let zero = vec![0.0; mesh.num_nodes()];
    let aux = sim.laplacians(&zero, &x2, &zero).unwrap();
    let mut worst = 0.0f64;
    for (i, p) in mesh.nodes().iter().enumerate() {
        if p[0] > 0.2 && p[0] < 0.8 && p[1] > 0.2 && p[1] < 0.8 {
            worst = worst.max((aux.p[i] - 2.0).abs());
        }
        assert!(aux.q[i].abs() < 1e-12);
    }
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn forcing_matches_finite_differences() {
    let coef = family_preset(SystemFamily::BbmBbm, None).unwrap();
    let ms = ManufacturedSolution;
    let eta = |t: f64, x: f64, y: f64| ms.eta(t, [x, y]);
    let u = |t: f64, x: f64, y: f64| ms.u(t, [x, y]);
    let v = |t: f64, x: f64, y: f64| ms.v(t, [x, y]);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let (t, x, y) = (rng.gen_range(0.0..1.0), rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99));
        let analytic = manufactured_forcing(t, [x, y], &coef).unwrap();
        let fd = fd_forcing(&eta, &u, &v, coef.b, coef.d, t, x, y);
        for k in 0..3 {
            assert!((analytic[k] - fd[k]).abs() < 1e-6, "({t},{x},{y}) component {k}");
        }
    }
}

#[test]
fn exact_eta_norm_at_time_zero() {
    let mesh = build_rect_mesh(0.0, 1.0, 0.0, 1.0, 32, 32).unwrap();
    let zero = vec![0.0; mesh.num_nodes()];
    let e = l2_error(&mesh, &zero, |p| ManufacturedSolution.eta(0.0, p));
    assert!((e - (1.0f64 / 60.0).sqrt()).abs() < 1e-6, "{e}");
}

#[test]
fn gaussian_mass_approaches_closed_form() {
    let mesh = build_rect_mesh(-40.0, 40.0, -40.0, 40.0, 160, 160).unwrap();
    let f = Fields::from_fn(&mesh, gaussian_heap(0.5, 5.0));
    let mass = integrate(&assemble_mass(&mesh), &f.eta);
    assert!((mass - 2.5 * PI).abs() < 1e-6, "{mass}");
    assert!((mass - 7.84527).abs() < 0.01);
}

#[test]
fn dense_stiffness_of_linear_field_is_boundary_flux_only() {
    // K x gives the boundary flux of grad x, so interior rows vanish.
    let mesh = build_rect_mesh(0.0, 2.0, 0.0, 2.0, 4, 4).unwrap();
    let k = dense_stiffness(&mesh);
    let x = DVector::from_iterator(mesh.num_nodes(), mesh.nodes().iter().map(|p| p[0]));
    let r = &k * &x;
    let sides = mesh.node_sides();
    for i in 0..mesh.num_nodes() {
        if !sides[i].iter().any(|&s| s) {
            assert!(r[i].abs() < 1e-13);
        }
    }
}
