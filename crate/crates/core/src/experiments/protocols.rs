use ndarray::Array2;
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::sweep::sweep;
use crate::experiments::{base_metadata, ExperimentSpec, FunnelMode, NuclearInit, Timing};
use crate::linalg::{CMatrix, C64};
use crate::liouville::{
    dissipator, evolve_trace, generator, liouville_index, propagate, steady_state, time_average,
    DensityState, Evolution, Stage,
};
use crate::observables::{detuning_for_exchange, iqd_reference, Observable};
use crate::results::{Column, GridAxis, SweepGrid, TimeTrace};
use crate::spin::{
    build_hamiltonian, dominant_esr_frequency, resonance_frequency, rotating_frame_hamiltonian,
    Basis, ChargeSector, ElectronState, SystemConfig,
};

/// Mixed (0,1) electron spin ⊗ `nuclear` density matrix.
pub fn loaded_state(basis: &Basis, nuclear: &CMatrix) -> Result<DensityState> {
    let nn = basis.nuclear_count();
    if nuclear.dim() != (nn, nn) {
        return Err(Error::DimensionMismatch {
            expected: nn,
            found: nuclear.nrows(),
        });
    }
    let n = basis.dim();
    let mut v = ndarray::Array1::zeros(n * n);
    for e in [ElectronState::Up01, ElectronState::Down01] {
        for a in 0..nn {
            for b in 0..nn {
                v[liouville_index(basis.index(e, a), basis.index(e, b), n)] = nuclear[[a, b]] * 0.5;
            }
        }
    }
    DensityState::from_vector(v, n)
}

fn mixed_nuclear(basis: &Basis) -> CMatrix {
    let nn = basis.nuclear_count();
    Array2::from_diag_elem(nn, C64::new(1.0 / nn as f64, 0.0))
}

fn all_up_nuclear(basis: &Basis) -> CMatrix {
    let nn = basis.nuclear_count();
    let mut m = Array2::zeros((nn, nn));
    m[[0, 0]] = C64::new(1.0, 0.0);
    m
}

/// All nuclei up, then the left nucleus rotated by θ about x:
/// (cos θ/2 |⇑⟩ − i sin θ/2 |⇓⟩)_L ⊗ |⇑…⟩_R.
pub fn readout_nuclear_state(basis: &Basis, theta: f64) -> CMatrix {
    let nn = basis.nuclear_count();
    let down_left = 1 << (basis.nuclear_spins() - 1);
    let mut psi = vec![C64::new(0.0, 0.0); nn];
    psi[0] = C64::new((theta / 2.0).cos(), 0.0);
    psi[down_left] = C64::new(0.0, -(theta / 2.0).sin());
    Array2::from_shape_fn((nn, nn), |(a, b)| psi[a] * psi[b].conj())
}

fn initial_state(basis: &Basis, init: NuclearInit) -> Result<DensityState> {
    match init {
        NuclearInit::Mixed => loaded_state(basis, &mixed_nuclear(basis)),
        NuclearInit::AllUp => loaded_state(basis, &all_up_nuclear(basis)),
    }
}

/// ESR frequency: explicit override, the resonance formula for one donor per
/// dot, or the dominant driven transition of the spectrum otherwise.
fn drive_frequency(config: &SystemConfig, explicit: Option<f64>) -> Result<f64> {
    if let Some(f) = explicit {
        return Ok(f);
    }
    if config.is_single_donor_pair() {
        resonance_frequency(config)
    } else {
        dominant_esr_frequency(config)
    }
}

fn trace_observables(config: &SystemConfig, basis: &Basis) -> Vec<Observable> {
    let mut obs = vec![Observable::current(config, basis)];
    for s in [
        ChargeSector::OneOne,
        ChargeSector::ZeroTwo,
        ChargeSector::ZeroOne,
    ] {
        obs.push(Observable::charge_population(basis, s));
    }
    for k in 0..basis.nuclear_count() {
        obs.push(Observable::nuclear_population(basis, k));
    }
    obs
}

/// Undriven transport for `timing.transport`, then ESR at `omega` for
/// `timing.esr`, sampled every `timing.sample_step`.
pub fn transport_then_esr(
    config: &SystemConfig,
    rho0: &DensityState,
    timing: &Timing,
    omega: f64,
    observables: &[Observable],
) -> Result<Evolution> {
    let basis = config.basis()?;
    let d = dissipator(config, &basis)?;
    let g1 = generator(&build_hamiltonian(config, &basis)?, &d)?;
    let driven = SystemConfig {
        omega_drive: omega,
        ..config.clone()
    };
    let g2 = generator(&rotating_frame_hamiltonian(&driven, &basis)?, &d)?;
    evolve_trace(
        &[
            Stage::new(&g1, timing.transport, timing.sample_step),
            Stage::new(&g2, timing.esr, timing.sample_step),
        ],
        rho0,
        observables,
    )
}

/// Mean current over the last `readout_fraction` of the ESR stage, computed
/// with exact propagators instead of sampling.
pub fn esr_window_current(
    config: &SystemConfig,
    rho0: &DensityState,
    timing: &Timing,
    omega: f64,
) -> Result<f64> {
    let basis = config.basis()?;
    let d = dissipator(config, &basis)?;
    let g1 = generator(&build_hamiltonian(config, &basis)?, &d)?;
    let driven = SystemConfig {
        omega_drive: omega,
        ..config.clone()
    };
    let g2 = generator(&rotating_frame_hamiltonian(&driven, &basis)?, &d)?;
    let window = timing.esr * timing.readout_fraction;
    let rho = propagate(&g1, rho0, timing.transport)?;
    let rho = propagate(&g2, &rho, timing.esr - window)?;
    let avg = time_average(&g2, &rho, window)?;
    Ok(Observable::current(config, &basis).evaluate(&avg.average))
}

fn annotate(trace: &mut TimeTrace, spec: &ExperimentSpec, omega: f64) -> Result<f64> {
    let end = spec.timing.transport + spec.timing.esr;
    let from = end - spec.timing.esr * spec.timing.readout_fraction;
    let steady = trace.window_mean("current", from, end)?;
    trace.metadata = base_metadata(spec);
    trace
        .metadata
        .insert("drive_frequency_MHz".into(), json!(omega));
    trace
        .metadata
        .insert("esr_onset_us".into(), json!(spec.timing.transport));
    trace
        .metadata
        .insert("readout_current_pA".into(), json!(steady));
    Ok(steady)
}

pub fn run_psb_esr(spec: &ExperimentSpec) -> Result<TimeTrace> {
    spec.validate()?;
    let basis = spec.config.basis()?;
    let omega = drive_frequency(&spec.config, spec.drive_frequency)?;
    let rho0 = initial_state(&basis, spec.nuclear_init)?;
    let obs = trace_observables(&spec.config, &basis);
    let mut ev = transport_then_esr(&spec.config, &rho0, &spec.timing, omega, &obs)?;
    annotate(&mut ev.trace, spec, omega)?;
    Ok(ev.trace)
}

/// Trace of the readout protocol and the steady current it reads out.
#[derive(Clone, Debug)]
pub struct ReadoutResult {
    pub trace: TimeTrace,
    /// Mean current over the final window of the ESR stage, pA.
    pub current: f64,
    /// θ folded into [0, 2π).
    pub theta: f64,
}

pub fn run_readout_protocol(spec: &ExperimentSpec) -> Result<ReadoutResult> {
    spec.validate()?;
    let basis = spec.config.basis()?;
    let theta = spec.normalized_theta();
    let omega = drive_frequency(&spec.config, spec.drive_frequency)?;
    let rho0 = loaded_state(&basis, &readout_nuclear_state(&basis, theta))?;
    let obs = trace_observables(&spec.config, &basis);
    let mut ev = transport_then_esr(&spec.config, &rho0, &spec.timing, omega, &obs)?;
    let current = annotate(&mut ev.trace, spec, omega)?;
    ev.trace.metadata.insert("theta_rad".into(), json!(theta));
    Ok(ReadoutResult {
        trace: ev.trace,
        current,
        theta,
    })
}

pub fn run_cluster(spec: &ExperimentSpec) -> Result<TimeTrace> {
    spec.validate()?;
    run_psb_esr(spec)
}

/// Reverse-bias current minus the two-level reference over (Δ, B₀).
pub fn run_spin_funnel(spec: &ExperimentSpec) -> Result<SweepGrid> {
    spec.validate()?;
    let xs = spec.x_axis.as_ref().expect("validated").values();
    let ys = spec.y_axis.as_ref().expect("validated").values();
    let base = spec.config.clone();
    let basis = base.basis()?;
    let rho0 = loaded_state(&basis, &mixed_nuclear(&basis))?;
    let mode = spec.funnel_mode;
    let window = spec.timing.funnel_window;
    let point = |delta: f64, b0_mt: f64| -> Result<f64> {
        let cfg = SystemConfig {
            delta,
            b0: b0_mt * 1e-3,
            ..base.clone()
        };
        let d = dissipator(&cfg, &basis)?;
        let g = generator(&build_hamiltonian(&cfg, &basis)?, &d)?;
        let state = match mode {
            FunnelMode::Window => time_average(&g, &rho0, window)?.average,
            FunnelMode::SteadyState => steady_state(&g)?.state,
        };
        Ok(Observable::current(&cfg, &basis).evaluate(&state) - iqd_reference(&cfg)?)
    };
    let mut grid = sweep(
        GridAxis {
            column: Column::new("delta", "MHz"),
            values: xs,
        },
        GridAxis {
            column: Column::new("b0", "mT"),
            values: ys.clone(),
        },
        Column::new("delta_current", "pA"),
        point,
    )?;
    // J(Δ) = γ_e B₀ overlay: detuning of the funnel for each field row
    let curve: Vec<_> = ys
        .iter()
        .filter_map(|&b| {
            detuning_for_exchange(base.tc, base.gamma_e * b * 1e-3)
                .ok()
                .map(|d| json!({ "b0_mT": b, "delta_MHz": d }))
        })
        .collect();
    grid.metadata = base_metadata(spec);
    grid.metadata
        .insert("exchange_resonance".into(), json!(curve));
    Ok(grid)
}

/// Post-ESR current over (B₀, δA_LR) with the left hyperfine constant
/// reduced by δA_LR.
pub fn run_stark_sweep(spec: &ExperimentSpec) -> Result<SweepGrid> {
    spec.validate()?;
    let xs = spec.x_axis.as_ref().expect("validated").values();
    let ys = spec.y_axis.as_ref().expect("validated").values();
    let base = spec.config.clone();
    let basis = base.basis()?;
    let rho0 = initial_state(&basis, spec.nuclear_init)?;
    let a_left = base.a_left[0];
    let point = |b0_mt: f64, da: f64| -> Result<f64> {
        let cfg = SystemConfig {
            b0: b0_mt * 1e-3,
            a_left: vec![a_left - da],
            ..base.clone()
        };
        let omega = drive_frequency(&cfg, spec.drive_frequency)?;
        esr_window_current(&cfg, &rho0, &spec.timing, omega)
    };
    let mut grid = sweep(
        GridAxis {
            column: Column::new("b0", "mT"),
            values: xs,
        },
        GridAxis {
            column: Column::new("delta_a", "MHz"),
            values: ys,
        },
        Column::new("current", "pA"),
        point,
    )?;
    grid.metadata = base_metadata(spec);
    Ok(grid)
}
