//! Matrix-exponential propagation against an adaptive Dormand-Prince 5(4)
//! integrator applied directly to dρ/dt = Gρ.

mod common;

use common::dopri5;
use donor_transport::liouville::{dissipator, generator, propagate, DensityState, Generator};
use donor_transport::spin::{
    build_hamiltonian, rotating_frame_hamiltonian, ElectronState, SystemConfig,
};
use ndarray::Array1;

fn loaded(cfg: &SystemConfig) -> DensityState {
    let b = cfg.basis().unwrap();
    let nn = b.nuclear_count();
    let mut p = vec![0.0; b.dim()];
    for e in [ElectronState::Up01, ElectronState::Down01] {
        for k in 0..nn {
            p[b.index(e, k)] = 0.5 / nn as f64;
        }
    }
    DensityState::from_populations(&p)
}

fn max_population_error(g: &Generator, rho0: &DensityState, t: f64) -> f64 {
    let a = propagate(g, rho0, t).unwrap();
    let x = dopri5(g, rho0.vector(), t, 1e-10, 1e-12);
    let b = DensityState::from_vector(Array1::from(x.to_vec()), rho0.dim()).unwrap();
    a.populations()
        .iter()
        .zip(b.populations())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

#[test]
fn undriven_transport_matches_ode_integrator() {
    for b0 in [0.01, 0.25] {
        let cfg = SystemConfig {
            b0,
            ..Default::default()
        };
        let basis = cfg.basis().unwrap();
        let g = generator(
            &build_hamiltonian(&cfg, &basis).unwrap(),
            &dissipator(&cfg, &basis).unwrap(),
        )
        .unwrap();
        let err = max_population_error(&g, &loaded(&cfg), 0.2);
        assert!(err < 1e-6, "b0 = {b0}: {err:e}");
    }
}

#[test]
fn rotating_frame_segment_matches_ode_integrator() {
    let mut cfg = SystemConfig {
        b0: 0.01,
        ..Default::default()
    };
    cfg.omega_drive = donor_transport::spin::resonance_frequency(&cfg).unwrap();
    let basis = cfg.basis().unwrap();
    let g = generator(
        &rotating_frame_hamiltonian(&cfg, &basis).unwrap(),
        &dissipator(&cfg, &basis).unwrap(),
    )
    .unwrap();
    let err = max_population_error(&g, &loaded(&cfg), 1.0);
    assert!(err < 1e-6, "{err:e}");
}
