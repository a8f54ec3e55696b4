//! Randomized invariants of the propagator over physical parameter ranges.

use donor_transport::liouville::{
    dissipator, generator, propagate, steady_state, DensityState, Generator,
};
use donor_transport::spin::{build_hamiltonian, Direction, ElectronState, SystemConfig};
use proptest::prelude::*;

fn transport_generator(cfg: &SystemConfig) -> Generator {
    let b = cfg.basis().unwrap();
    generator(
        &build_hamiltonian(cfg, &b).unwrap(),
        &dissipator(cfg, &b).unwrap(),
    )
    .unwrap()
}

fn config() -> impl Strategy<Value = SystemConfig> {
    (
        0.0..1.0f64,
        10.0..500.0f64,
        -500.0..500.0f64,
        0.0..150.0f64,
        0.0..150.0f64,
        1.0..200.0f64,
        1.0..200.0f64,
        any::<bool>(),
    )
        .prop_map(|(b0, tc, delta, al, ar, gl, gr, fwd)| SystemConfig {
            b0,
            tc,
            delta,
            a_left: vec![al],
            a_right: vec![ar],
            gamma_l: gl,
            gamma_r: gr,
            direction: if fwd {
                Direction::Forward
            } else {
                Direction::Reverse
            },
            ..Default::default()
        })
}

/// A random mixture over basis states of the loaded or (1,1) sectors.
fn initial(weights: &[f64], dim: usize) -> DensityState {
    let mut p = vec![0.0; dim];
    for (k, w) in weights.iter().enumerate() {
        p[(k * 5) % dim] += w;
    }
    let total: f64 = p.iter().sum();
    DensityState::from_populations(&p.iter().map(|x| x / total).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, .. ProptestConfig::default() })]

    #[test]
    fn propagation_preserves_state_properties(
        cfg in config(),
        w in prop::collection::vec(0.01..1.0f64, 1..6),
        t in 0.0..1.0f64,
    ) {
        let g = transport_generator(&cfg);
        let rho = propagate(&g, &initial(&w, 28), t).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-9);
        prop_assert!(rho.trace().im.abs() < 1e-9);
        prop_assert!(rho.hermiticity_error() < 1e-9);
        prop_assert!(rho.min_eigenvalue().unwrap() > -1e-8);
    }

    #[test]
    fn semigroup_composition(
        cfg in config(),
        w in prop::collection::vec(0.01..1.0f64, 1..6),
        t1 in 0.0..0.5f64,
        t2 in 0.0..0.5f64,
    ) {
        let g = transport_generator(&cfg);
        let rho0 = initial(&w, 28);
        let a = propagate(&g, &propagate(&g, &rho0, t1).unwrap(), t2).unwrap();
        let b = propagate(&g, &rho0, t1 + t2).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-8, "{}", a.max_abs_diff(&b));
    }

    #[test]
    fn steady_state_is_a_valid_fixed_point(cfg in config()) {
        let g = transport_generator(&cfg);
        let ss = steady_state(&g).unwrap();
        prop_assert!((ss.state.trace().re - 1.0).abs() < 1e-9);
        prop_assert!(ss.state.hermiticity_error() < 1e-9);
        prop_assert!(ss.state.min_eigenvalue().unwrap() > -1e-8);
        prop_assert!(ss.residual < 1e-8, "residual {}", ss.residual);
    }
}

#[test]
fn long_propagation_approaches_steady_state() {
    let cfg = SystemConfig {
        direction: Direction::Reverse,
        tc: 500.0,
        delta: 300.0,
        b0: 0.02,
        ..Default::default()
    };
    let g = transport_generator(&cfg);
    let ss = steady_state(&g).unwrap();
    assert!(!ss.degenerate);
    let b = cfg.basis().unwrap();
    let mut p = vec![0.0; b.dim()];
    p[b.index(ElectronState::Up01, 0)] = 1.0;
    let rho = propagate(&g, &DensityState::from_populations(&p), 200.0).unwrap();
    assert!(
        rho.max_abs_diff(&ss.state) < 1e-6,
        "{}",
        rho.max_abs_diff(&ss.state)
    );
}
