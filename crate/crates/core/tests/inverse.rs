mod common;

use acidfront::inverse::{
    add_noise, add_noise_stream, generate_data, nondimensionalize, random_starts, recovery_experiment,
    DimensionalParams, ExperimentSetup, Termination,
};
use acidfront::{make_uniform_mesh, minimize, ModelParams, NodalField, SolverConfig};

fn quick_setup() -> ExperimentSetup {
    ExperimentSetup {
        config: SolverConfig {
            t_final: 1.0,
            ..SolverConfig::desk()
        },
        ..ExperimentSetup::default()
    }
}

fn ones() -> DimensionalParams {
    DimensionalParams {
        d1: 1.0,
        r1: 1.0,
        r2: 1.0,
        r3: 1.0,
        d3: 1.0,
        k2: 1.0,
        dn2: 1.0,
        dn3: 1.0,
    }
}

#[test]
fn nondimensional_groups() {
    assert_eq!(nondimensionalize(&ones()).unwrap(), ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap());
    let p = nondimensionalize(&DimensionalParams { r2: 2.0, ..ones() }).unwrap();
    assert_eq!(p.rho2, 2.0);
    let p = nondimensionalize(&DimensionalParams {
        d1: 2.0,
        r3: 3.0,
        k2: 4.0,
        d3: 6.0,
        r1: 2.0,
        ..ones()
    })
    .unwrap();
    assert_eq!(p.delta1, 2.0);
    assert!(nondimensionalize(&DimensionalParams { d3: 0.0, ..ones() }).is_err());
    assert!(nondimensionalize(&DimensionalParams { dn3: 0.0, ..ones() }).is_err());
}

fn series(levels: usize) -> Vec<NodalField> {
    let mesh = make_uniform_mesh(16).unwrap();
    (0..levels).map(|k| NodalField::from_fn(&mesh, |x, y| x * y + k as f64)).collect()
}

#[test]
fn noise_is_reproducible() {
    let data = series(3);
    assert_eq!(add_noise(&data, 0.0, 7).unwrap(), data);
    let a = add_noise(&data, 0.1, 7).unwrap();
    assert_eq!(a, add_noise(&data, 0.1, 7).unwrap());
    assert_ne!(a, add_noise(&data, 0.1, 8).unwrap());
    assert_ne!(a, add_noise_stream(&data, 0.1, 7, 1).unwrap());
    assert!(add_noise(&data, -0.1, 7).is_err());
}

#[test]
fn noise_statistics() {
    let data = series(41);
    let noisy = add_noise(&data, 0.1, 2024).unwrap();
    let draws: Vec<f64> = data
        .iter()
        .zip(&noisy)
        .flat_map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, y)| y - x).collect::<Vec<_>>())
        .collect();
    let n = draws.len() as f64;
    assert!(n >= 1e4);
    let mean = draws.iter().sum::<f64>() / n;
    let std = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() <= 3.0 * 0.1 / n.sqrt(), "mean {mean}");
    assert!((std - 0.1).abs() <= 0.002, "std {std}");
}

#[test]
fn random_starts_lie_in_bounds() {
    let s = random_starts([2.0, 5.0], 50, 3);
    assert_eq!(s, random_starts([2.0, 5.0], 50, 3));
    assert!(s.iter().all(|x| (2.0..=5.0).contains(x)));
}

#[test]
fn starting_at_the_truth_stops_at_once() {
    let setup = quick_setup();
    let data = generate_data(&setup, 12.5).unwrap();
    let r = minimize(&setup.problem(&data, 12.5)).unwrap();
    assert!(r.evaluations <= 2);
    assert_eq!(r.delta1_star, 12.5);
    assert_eq!(r.termination, Termination::Gradient);
}

#[test]
fn history_descends_inside_the_box() {
    let setup = ExperimentSetup {
        bounds: [0.0, 10.0],
        ..quick_setup()
    };
    let data = generate_data(&setup, 12.5).unwrap();
    let r = minimize(&setup.problem(&data, 2.0)).unwrap();
    assert!(!r.history.is_empty());
    for w in r.history.windows(2) {
        assert!(w[1].objective <= w[0].objective);
    }
    assert!(r.history.iter().all(|h| (0.0..=10.0).contains(&h.delta1)));
    // the truth lies outside, so the estimate sits on the upper bound
    assert!((r.delta1_star - 10.0).abs() < 1e-9, "{}", r.delta1_star);
}

#[test]
fn noiseless_starts_agree() {
    let setup = quick_setup();
    let data = generate_data(&setup, 4.0).unwrap();
    let estimates: Vec<f64> = random_starts(setup.bounds, 5, 1)
        .into_iter()
        .map(|x0| minimize(&setup.problem(&data, x0)).unwrap().delta1_star)
        .collect();
    let lo = estimates.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = estimates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo <= 1e-3, "{estimates:?}");
    assert!(common::rel(lo, 4.0) < 0.01);
}

#[test]
fn noiseless_recovery_has_no_spread() {
    let s = recovery_experiment(&quick_setup(), 12.5, 0.0, 3, 0).unwrap();
    assert_eq!(s.failures, 0);
    assert!(s.std <= 1e-6);
    assert!(s.rel_error < 0.01);
}

#[test]
fn bad_problems_are_rejected() {
    let setup = quick_setup();
    let data = generate_data(&setup, 4.0).unwrap();
    assert!(minimize(&setup.problem(&data, 25.0)).is_err());
    let inverted = ExperimentSetup {
        bounds: [5.0, 1.0],
        ..quick_setup()
    };
    assert!(minimize(&inverted.problem(&data, 3.0)).is_err());
    assert!(recovery_experiment(&setup, 4.0, 0.0, 0, 0).is_err());
}
