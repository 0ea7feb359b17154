use boussinesq::assembly::BoundarySpec;
use boussinesq::mesh::{build_periodic_map, build_rect_mesh, PeriodicDirections, TriMesh};
use boussinesq::model::{family_preset, SystemFamily};
use boussinesq::stepper::{
    gaussian_heap, BlockUpdate, Fields, NodalUpdate, SchemeRegistry, Simulation, StepOptions, UpdateScheme,
};
use boussinesq::verify::{manufactured_run, ManufacturedSolution};
use boussinesq::Error;

fn bbm(mesh: TriMesh, bc: BoundarySpec, dt: f64, scheme: Box<dyn UpdateScheme>, reuse: bool) -> Simulation {
    let coef = family_preset(SystemFamily::BbmBbm, None).unwrap();
    let options = StepOptions {
        reuse_operators: reuse,
        ..StepOptions::default()
    };
    Simulation::new(mesh, coef, bc, dt, scheme, options).unwrap()
}

fn square(half: f64, n: usize) -> TriMesh {
    build_rect_mesh(-half, half, -half, half, n, n).unwrap()
}

#[test]
fn rest_stays_at_rest() {
    let mut sim = bbm(square(10.0, 10), BoundarySpec::neumann(), 0.1, Box::new(NodalUpdate), true);
    for _ in 0..100 {
        sim.step().unwrap();
    }
    assert!(sim.fields().max_abs_diff(&Fields::zeros(sim.mesh().num_nodes())) == 0.0);
}

#[test]
fn zero_state_gives_zero_stages() {
    let sim = bbm(square(5.0, 6), BoundarySpec::dirichlet(), 0.1, Box::new(NodalUpdate), true);
    let work = sim.compute_stages().unwrap();
    for k in work.k1().into_iter().chain(work.k2()) {
        assert!(k.iter().all(|&x| x == 0.0));
    }
}

#[test]
fn end_time_equal_to_start_takes_no_step() {
    let mut sim = bbm(square(5.0, 6), BoundarySpec::dirichlet(), 0.1, Box::new(NodalUpdate), true);
    sim.set_initial(gaussian_heap(0.2, 5.0)).unwrap();
    let before = sim.fields().clone();
    let mut calls = 0;
    let summary = sim
        .run(0.0, None, |_, _| {
            calls += 1;
            Ok(())
        })
        .unwrap();
    assert_eq!((summary.steps, calls), (0, 0));
    assert_eq!(sim.fields(), &before);
    assert!(matches!(sim.run(-1.0, None, |_, _| Ok(())), Err(Error::InvalidArgument(_))));
}

#[test]
fn operator_reuse_does_not_change_results() {
    let make = |reuse| {
        let mut sim = bbm(square(40.0, 20), BoundarySpec::dirichlet(), 0.1, Box::new(NodalUpdate), reuse);
        sim.set_initial(gaussian_heap(0.2, 5.0)).unwrap();
        sim.run(10.0, None, |_, _| Ok(())).unwrap();
        sim
    };
    let (a, b) = (make(true), make(false));
    assert_eq!(a.steps(), 100);
    assert!(a.fields().max_abs_diff(b.fields()) <= 1e-12);
}

#[test]
fn block_update_matches_nodal_update() {
    let make = |scheme: Box<dyn UpdateScheme>| {
        let mut sim = bbm(square(40.0, 20), BoundarySpec::dirichlet(), 0.1, scheme, true);
        sim.set_initial(gaussian_heap(0.2, 5.0)).unwrap();
        sim.run(5.0, None, |_, _| Ok(())).unwrap();
        sim
    };
    let a = make(Box::new(NodalUpdate));
    let b = make(Box::<BlockUpdate>::default());
    assert!(a.fields().max_abs_diff(b.fields()) <= 1e-8);
}

#[test]
fn registry_knows_all_update_schemes() {
    let registry = SchemeRegistry::default();
    let names: Vec<_> = registry.names().collect();
    for name in ["algorithm1", "algorithm1-mass", "algorithm2"] {
        assert!(names.contains(&name));
        assert_eq!(registry.create(name).unwrap().name(), name);
    }
    assert!(registry.create("algorithm3").is_err());
}

#[test]
fn time_error_is_second_order() {
    let coef = family_preset(SystemFamily::BbmBbm, None).unwrap();
    let run = |dt: f64| {
        manufactured_run(&coef, 12, dt, 0.5, Box::new(NodalUpdate), StepOptions::default())
            .unwrap()
            .fields()
            .clone()
    };
    let reference = run(1.0 / 1280.0);
    let errors: Vec<f64> = [10.0, 20.0, 40.0]
        .iter()
        .map(|n| run(1.0 / n).max_abs_diff(&reference))
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn forced_error_decreases_with_resolution() {
    let coef = family_preset(SystemFamily::BbmBbm, None).unwrap();
    let mut last = f64::INFINITY;
    for n in [4, 8, 16] {
        let sim = manufactured_run(&coef, n, 1.0 / n as f64, 1.0, Box::new(NodalUpdate), StepOptions::default()).unwrap();
        assert!((sim.t() - 1.0).abs() < 1e-12);
        let e = boussinesq::verify::manufactured_errors(&sim);
        assert!(e[0] < last);
        last = e[0];
        let exact = Fields::from_fn(sim.mesh(), |p| ManufacturedSolution.fields(1.0, p));
        assert!(sim.fields().max_abs_diff(&exact) < 0.5);
    }
}

#[test]
fn symmetric_heap_stays_mirror_symmetric() {
    let n = 16;
    let mut sim = bbm(square(8.0, n), BoundarySpec::neumann(), 0.1, Box::new(NodalUpdate), true);
    sim.set_initial(gaussian_heap(0.3, 2.0)).unwrap();
    let mirror = |i: usize| (i % (n + 1)) * (n + 1) + i / (n + 1);
    sim.run(5.0, None, |s, _| {
        let e = &s.fields().eta;
        let defect = (0..e.len()).map(|i| (e[i] - e[mirror(i)]).abs()).fold(0.0, f64::max);
        assert!(defect <= 1e-8, "t={} defect={defect}", s.t());
        Ok(())
    })
    .unwrap();
}

#[test]
fn periodic_kdv_conserves_mass() {
    let mesh = build_periodic_map(square(10.0, 20), PeriodicDirections::Both).unwrap();
    let coef = family_preset(SystemFamily::KdvKdv, None).unwrap();
    let mut sim = Simulation::new(
        mesh,
        coef,
        BoundarySpec::periodic(),
        0.001,
        Box::new(NodalUpdate),
        StepOptions::default(),
    )
    .unwrap();
    sim.set_initial(gaussian_heap(0.5, 5.0)).unwrap();
    let m0 = sim.conserved().mass_eta;
    sim.run(0.2, None, |s, _| {
        let c = s.conserved();
        assert!(((c.mass_eta - m0) / m0).abs() <= 1e-6);
        assert!(c.mass_u.abs() <= 1e-9 && c.mass_v.abs() <= 1e-9);
        Ok(())
    })
    .unwrap();
}

#[test]
fn blow_up_is_reported_as_divergence() {
    let mut sim = bbm(square(5.0, 4), BoundarySpec::neumann(), 0.1, Box::new(NodalUpdate), true);
    sim.set_initial(|_| [f64::MAX / 4.0, f64::MAX / 4.0, 0.0]).unwrap();
    let err = sim.run(1.0, None, |_, _| Ok(())).unwrap_err();
    assert!(matches!(err, Error::Divergence { .. } | Error::Solver { .. }), "{err}");
}

#[test]
fn invalid_time_step_is_rejected() {
    let coef = family_preset(SystemFamily::BbmBbm, None).unwrap();
    for dt in [0.0, -0.1, f64::NAN] {
        let r = Simulation::new(square(1.0, 2), coef, BoundarySpec::dirichlet(), dt, Box::new(NodalUpdate), StepOptions::default());
        assert!(r.is_err());
    }
}
