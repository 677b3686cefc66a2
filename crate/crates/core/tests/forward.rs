mod common;

use std::sync::Arc;

use acidfront::forward::{
    diffusion_step, estimate_error, initial_condition, reaction_step, solve_direct_detailed, solve_direct_scheduled,
};
use acidfront::ode::OdeTolerances;
use acidfront::{
    make_uniform_mesh, solve_direct, FemSpace, InitialProfile, ModelParams, NodalField, SolverConfig, StateField,
};
use proptest::prelude::*;

fn params(delta1: f64, rho2: f64, d2: f64, delta3: f64) -> ModelParams {
    ModelParams::new(delta1, rho2, d2, delta3).unwrap()
}

#[test]
fn gaussian_seed_values() {
    let mesh = make_uniform_mesh(4).unwrap();
    let profile = InitialProfile::GaussianSeed {
        center: [0.5, 0.5],
        width_sq: 0.0625,
    };
    let s = initial_condition(&mesh, &profile).unwrap();
    let at = |x: f64, y: f64| {
        let i = mesh.nodes().iter().position(|p| p[0] == x && p[1] == y).unwrap();
        s.at(i)
    };
    assert_eq!(at(0.5, 0.5), [0.0, 1.0, 1.0]);
    let [u1, u2, u3] = at(0.75, 0.5);
    assert!((u2 - (-1.0f64).exp()).abs() < 1e-15);
    assert_eq!(u2, u3);
    assert!((u1 - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    for i in 0..mesh.node_count() {
        let [u1, u2, _] = s.at(i);
        assert!((u1 + u2 - 1.0).abs() < 1e-15);
    }
}

#[test]
fn profile_text_round_trip() {
    for text in ["gaussian-seed(0.5, 0.5, 0.0005)", "uniform(1, 0, 0)", "file(data/state.txt)"] {
        let p: InitialProfile = text.parse().unwrap();
        assert_eq!(p.to_string(), text);
    }
    assert!("gaussian-seed(0.5, 0.5, 0)".parse::<InitialProfile>().is_err());
    assert!("blob(1)".parse::<InitialProfile>().is_err());
}

#[test]
fn reaction_fixed_points() {
    let mesh = make_uniform_mesh(2).unwrap();
    let p = params(12.5, 1.0, 4e-5, 1.0);
    for u in [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]] {
        let s = StateField::uniform(&mesh, u, 0.0);
        let r = reaction_step(&s, &p, 0.7, OdeTolerances::default()).unwrap();
        assert_eq!(r.at(3), u);
    }
}

#[test]
fn reaction_logistic_step() {
    let mesh = make_uniform_mesh(1).unwrap();
    let s = StateField::uniform(&mesh, [0.0, 0.5, 0.0], 0.0);
    let r = reaction_step(&s, &params(0.0, 1.0, 0.0, 0.0), 0.1, OdeTolerances::default()).unwrap();
    let exact = 0.1f64.exp() / (1.0 + 0.1f64.exp());
    assert!((exact - 0.524_979_2).abs() < 1e-7);
    assert!((r.at(0)[1] - exact).abs() < 1e-8);
}

#[test]
fn diffusion_keeps_constants_and_mass() {
    let mesh = Arc::new(make_uniform_mesh(6).unwrap());
    let space = FemSpace::new(mesh.clone());
    let u1 = NodalField::from_fn(&mesh, |x, _| 0.3 + 0.4 * x);
    let u2 = NodalField::constant(&mesh, 0.25);
    let u3 = NodalField::from_fn(&mesh, |x, y| (-(x - 0.3).powi(2) / 0.02 - (y - 0.6).powi(2) / 0.05).exp());
    let s = StateField::new(u1.clone(), u2.clone(), u3.clone(), 0.0).unwrap();
    let d = diffusion_step(&space, &s, &params(1.0, 1.0, 0.3, 1.0), 0.1, 1e-13).unwrap();
    assert_eq!(d.u1, u1);
    for v in d.u2.values() {
        assert!((v - 0.25).abs() < 1e-12);
    }
    let ones = vec![1.0; mesh.node_count()];
    let before = space.mass_inner(&ones, u3.values());
    let after = space.mass_inner(&ones, d.u3.values());
    assert!((before - after).abs() < 1e-12);

    let bumpy = StateField::new(u1, u3.clone(), u3, 0.0).unwrap();
    let d = diffusion_step(&space, &bumpy, &params(1.0, 1.0, 0.0, 1.0), 0.1, 1e-13).unwrap();
    assert_eq!(d.u2, bumpy.u2);
}

#[test]
fn estimator_vanishes_at_equilibrium() {
    let mesh = Arc::new(make_uniform_mesh(4).unwrap());
    let space = FemSpace::new(mesh.clone());
    let s = StateField::uniform(&mesh, [1.0, 0.0, 0.0], 0.0);
    let e = estimate_error(&space, &s, &s, 0.1, &ModelParams::default()).unwrap();
    assert_eq!(e.global, 0.0);
}

#[test]
fn estimator_sums_and_affine_jumps() {
    let mesh = Arc::new(make_uniform_mesh(4).unwrap());
    let space = FemSpace::new(mesh.clone());
    let u3 = NodalField::from_fn(&mesh, |x, y| 0.2 + 0.5 * x - 0.3 * y);
    let s = StateField::new(
        NodalField::constant(&mesh, 0.7),
        NodalField::from_fn(&mesh, |x, y| x * y),
        u3,
        0.0,
    )
    .unwrap();
    let e = estimate_error(&space, &s, &s, 0.1, &ModelParams::default()).unwrap();
    let sum: f64 = e.per_element.iter().map(|v| v * v).sum();
    assert!((sum - e.global * e.global).abs() <= 1e-10 * sum);
    assert!(e.per_element.iter().chain(&e.per_edge).all(|v| *v >= 0.0));

    // u2 = 0 isolates the u3 flux: interior jumps of an affine field vanish
    let s = StateField::new(s.u1.clone(), NodalField::zeros(&mesh), s.u3.clone(), 0.0).unwrap();
    let e = estimate_error(&space, &s, &s, 0.1, &ModelParams::default()).unwrap();
    for (k, edge) in mesh.edges().iter().enumerate() {
        if !edge.boundary {
            assert!(e.per_edge[k] < 1e-12, "edge {k}: {}", e.per_edge[k]);
        } else {
            assert!(e.per_edge[k] > 0.0);
        }
    }
}

#[test]
fn estimator_decays_first_order() {
    let eta = |n: usize| {
        let mesh = Arc::new(make_uniform_mesh(n).unwrap());
        let space = FemSpace::new(mesh.clone());
        let pi = std::f64::consts::PI;
        let u3 = NodalField::from_fn(&mesh, |x, y| (pi * x).cos() * (pi * y).cos());
        let s = StateField::new(NodalField::constant(&mesh, 1.0), NodalField::zeros(&mesh), u3, 0.0).unwrap();
        estimate_error(&space, &s, &s, 0.1, &params(0.0, 1.0, 4e-5, 0.0)).unwrap().global
    };
    let ratio = eta(4) / eta(8);
    assert!((ratio - 2.0).abs() <= 0.5, "ratio {ratio}");
}

#[test]
fn equilibrium_run_is_constant() {
    let config = SolverConfig {
        t_final: 1.0,
        coarse_n: 4,
        ..SolverConfig::default()
    };
    let sol = solve_direct_detailed(&ModelParams::default(), &config, &InitialProfile::Uniform([1.0, 0.0, 0.0])).unwrap();
    assert_eq!(sol.trajectory.levels(), 11);
    assert_eq!(sol.schedule.total_refinements(), 0);
    for s in &sol.trajectory.states {
        assert_eq!(s.u1, sol.trajectory.states[0].u1);
        assert_eq!(s.u3, sol.trajectory.states[0].u3);
    }
}

#[test]
fn logistic_host_growth_over_unit_time() {
    let config = SolverConfig {
        t_final: 1.0,
        coarse_n: 2,
        ..SolverConfig::default()
    };
    let traj = solve_direct(&params(0.0, 1.0, 4e-5, 1.0), &config, &InitialProfile::Uniform([0.5, 0.0, 0.0])).unwrap();
    let e = std::f64::consts::E;
    for v in traj.states.last().unwrap().u1.values() {
        assert!((v - e / (1.0 + e)).abs() < 1e-6);
    }
    let steps: Vec<f64> = traj.times.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.iter().all(|d| (d - 0.1).abs() < 1e-12));
    assert!((traj.t_final() - 1.0).abs() < 1e-12);
}

#[test]
fn replayed_schedule_reproduces_the_run() {
    let config = SolverConfig {
        t_final: 0.5,
        ..SolverConfig::desk()
    };
    let p = ModelParams::default();
    let init = InitialProfile::default();
    let first = solve_direct_detailed(&p, &config, &init).unwrap();
    assert!(first.schedule.total_refinements() > 0);
    let again = solve_direct_scheduled(&p, &config, &init, &first.schedule).unwrap();
    assert_eq!(again.trajectory, first.trajectory);
    assert_eq!(again.final_mesh.nodes(), first.final_mesh.nodes());

    let mut short = first.schedule.clone();
    short.steps.pop();
    assert!(solve_direct_scheduled(&p, &config, &init, &short).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = SolverConfig {
        t_final: 1.05,
        tau: 0.1,
        ..SolverConfig::default()
    };
    assert!(solve_direct(&ModelParams::default(), &bad, &InitialProfile::default()).is_err());
    assert!(ModelParams::new(-1.0, 1.0, 1.0, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reaction_keeps_densities_in_range(
        u in prop::array::uniform3(0.0f64..=1.0),
        delta1 in 0.0f64..20.0,
        rho2 in 0.0f64..3.0,
        delta3 in 0.0f64..3.0,
        dt in 0.01f64..1.0,
    ) {
        let mesh = make_uniform_mesh(1).unwrap();
        let s = StateField::uniform(&mesh, u, 0.0);
        let r = reaction_step(&s, &params(delta1, rho2, 4e-5, delta3), dt, OdeTolerances::default()).unwrap();
        let [a, b, c] = r.at(0);
        let slack = 1e-7;
        prop_assert!(a >= -slack && a <= 1.0 + slack, "u1 = {}", a);
        prop_assert!(b >= -slack && b <= 1.0 + slack, "u2 = {}", b);
        prop_assert!(c >= -slack, "u3 = {}", c);
    }
}
