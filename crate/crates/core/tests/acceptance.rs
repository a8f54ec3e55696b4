//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any of them fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use donor_transport::experiments::{
    run_experiment, run_psb_esr, run_readout_protocol, AxisSpec, ExperimentId, ExperimentOutput,
    ExperimentSpec, Timing,
};
use donor_transport::liouville::{
    dissipator, generator, propagate, steady_state, DensityState, Generator,
};
use donor_transport::observables::current;
use donor_transport::results::TimeTrace;
use donor_transport::spin::{
    build_hamiltonian, nearest_triplet_transition, resonance_frequency, rotating_frame_hamiltonian,
    Direction, ElectronState, SystemConfig,
};

type Check = Result<String, String>;

struct Report {
    failures: usize,
}

impl Report {
    fn run(&mut self, n: usize, name: &str, limit: Duration, f: impl FnOnce() -> Check) {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        if !ok {
            self.failures += 1;
        }
        println!(
            "{} {n:>2} {name}: {detail} [{:.1} s, limit {} s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
}

fn require(cond: bool, detail: String) -> Check {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn psb_trace(b0: f64) -> Result<TimeTrace, String> {
    let mut spec = ExperimentSpec::defaults(ExperimentId::PsbEsr);
    spec.config.b0 = b0;
    run_psb_esr(&spec).map_err(err)
}

fn samples(trace: &TimeTrace, name: &str, from: f64, to: f64) -> Result<Vec<f64>, String> {
    let col = trace.column(name).map_err(err)?;
    Ok(trace
        .times
        .iter()
        .zip(col)
        .filter(|(t, _)| **t >= from && **t <= to)
        .map(|(_, v)| v)
        .collect())
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn psb_onset() -> Check {
    let tr = psb_trace(1.0)?;
    let peak = max(&samples(&tr, "current", 0.0, 1.0)?);
    let onset = tr.transport_end();
    // from 1 μs until the drive is switched on
    let blocked = max(&samples(&tr, "current", 1.0, onset - 1e-9)?);
    require(
        blocked < 0.01 * peak,
        format!(
            "peak {peak:.4} pA, max after 1 μs {blocked:.3e} pA (ratio {:.2e})",
            blocked / peak
        ),
    )
}

fn nuclear_blockade() -> Check {
    let tr = psb_trace(0.01)?;
    let last = tr.rows.last().ok_or("empty trace")?;
    let ud = last[tr.column_index("N_ud").ok_or("no N_ud")?];
    let du = last[tr.column_index("N_du").ok_or("no N_du")?];
    let onset = tr.transport_end();
    let spike = max(&samples(&tr, "current", onset, onset + 5.0)?);
    let fin = tr.metadata["readout_current_pA"]
        .as_f64()
        .ok_or("no readout")?;
    require(
        ud < 0.05 && du < 0.05 && fin < 0.1 * spike,
        format!(
            "P(ud) {ud:.4}, P(du) {du:.4}, final window {fin:.3e} pA vs spike {spike:.4} pA (ratio {:.3})",
            fin / spike
        ),
    )
}

fn high_field_invariance() -> Check {
    let tr = psb_trace(1.0)?;
    let mut worst: f64 = 0.0;
    for name in ["N_uu", "N_ud", "N_du", "N_dd"] {
        for v in tr.column(name).map_err(err)? {
            worst = worst.max((v - 0.25).abs());
        }
    }
    require(
        worst <= 0.01,
        format!("max |P - 0.25| = {worst:.2e} over {} samples", tr.len()),
    )
}

fn spin_funnel() -> Check {
    let spec = ExperimentSpec::defaults(ExperimentId::SpinFunnel);
    let ExperimentOutput::Grid(g) = run_experiment(&spec).map_err(err)? else {
        return Err("expected a grid".into());
    };
    let iy =
        g.y.values
            .iter()
            .position(|b| (b - 250.0).abs() < 1e-9)
            .ok_or("grid has no 250 mT row")?;
    let ix = g.argmax_x(iy);
    let found = g.x.values[ix];
    // J(Δ) = Δ/2 + √((t_c/2)² + (Δ/2)²) = γ_e B₀ solved for Δ
    let j = spec.config.gamma_e * 0.25;
    let expected = j - (spec.config.tc / 2.0).powi(2) / j;
    let step = spec.x_axis.as_ref().unwrap().step();
    require(
        (found - expected).abs() <= step,
        format!(
            "{}x{} grid, peak at Δ = {found:.1} MHz, expected {expected:.1} ± {step:.1} MHz",
            g.nx(),
            g.ny()
        ),
    )
}

/// Two-level double-dot current, written out directly.
fn lorentzian(gl: f64, gr: f64, tc: f64, delta: f64) -> f64 {
    let e_over_us_in_pa = 1.602176634e-19 * 1e6 * 1e12;
    let x = tc * tc / 4.0;
    e_over_us_in_pa * gl * x / (gr * gr / 4.0 + x * (2.0 + gl / gr) + delta * delta)
}

fn quantum_dot_oracle() -> Check {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for b0 in [0.025, 0.25] {
        for k in 0..=40 {
            let cfg = SystemConfig {
                direction: Direction::Reverse,
                tc: 2000.0,
                delta: 200.0 * k as f64,
                b0,
                a_left: vec![0.0],
                a_right: vec![0.0],
                ..Default::default()
            };
            let b = cfg.basis().map_err(err)?;
            let g = generator(
                &build_hamiltonian(&cfg, &b).map_err(err)?,
                &dissipator(&cfg, &b).map_err(err)?,
            )
            .map_err(err)?;
            let ss = steady_state(&g).map_err(err)?;
            let i = current(&ss.state, &cfg).map_err(err)?;
            let r = lorentzian(cfg.gamma_l, cfg.gamma_r, cfg.tc, cfg.delta);
            worst = worst.max(((i - r) / r).abs());
            points += 1;
        }
    }
    require(
        worst < 0.01,
        format!("{points} points, worst relative deviation {worst:.2e}"),
    )
}

fn readout_linearity() -> Check {
    let thetas = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];
    let mut currents = Vec::new();
    for th in thetas {
        let mut spec = ExperimentSpec::defaults(ExperimentId::Readout);
        spec.theta = th;
        currents.push(run_readout_protocol(&spec).map_err(err)?.current);
    }
    let xs: Vec<f64> = thetas.iter().map(|t| (t / 2.0).sin().powi(2)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = currents.iter().sum::<f64>() / n;
    let sxy: f64 = xs
        .iter()
        .zip(&currents)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&currents)
        .map(|(x, y)| (y - icept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = currents.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    let (i0, ihalf, ipi) = (currents[0], currents[2], currents[4]);
    let ratio = ihalf / ipi;
    require(
        i0 < 0.02 * ipi && (ratio - 0.5).abs() <= 0.05 && r2 > 0.99,
        format!(
            "I = {:?} pA, I(0)/I(π) {:.3e}, I(π/2)/I(π) {ratio:.4}, R² {r2:.5}",
            currents
                .iter()
                .map(|c| format!("{c:.4}"))
                .collect::<Vec<_>>(),
            i0 / ipi
        ),
    )
}

fn stark_optimum() -> Check {
    let spec = ExperimentSpec::defaults(ExperimentId::StarkSweep);
    let ExperimentOutput::Grid(g) = run_experiment(&spec).map_err(err)? else {
        return Err("expected a grid".into());
    };
    let mut edge_rows = Vec::new();
    let mut peaks = Vec::new();
    for iy in 0..g.ny() {
        let ix = g.argmax_x(iy);
        peaks.push(g.x.values[ix]);
        if ix == 0 || ix == g.nx() - 1 {
            edge_rows.push(g.y.values[iy]);
        }
    }
    let top = g.column_values(g.nx() - 1);
    let decreasing = top.windows(2).all(|w| w[1] < w[0]);
    require(
        edge_rows.is_empty() && decreasing,
        format!(
            "{}x{} grid, optimum B0 per row {:?} mT, edge rows {edge_rows:?}, top-field column decreasing: {decreasing}",
            g.nx(),
            g.ny(),
            peaks.iter().map(|p| p.round()).collect::<Vec<_>>()
        ),
    )
}

fn cluster_current() -> Check {
    let spec = ExperimentSpec::defaults(ExperimentId::Cluster);
    let ExperimentOutput::Trace(tr) = run_experiment(&spec).map_err(err)? else {
        return Err("expected a trace".into());
    };
    let fin = tr.metadata["readout_current_pA"]
        .as_f64()
        .ok_or("no readout")?;
    let mut single = ExperimentSpec::defaults(ExperimentId::PsbEsr);
    single.config.b0 = spec.config.b0;
    single.timing = spec.timing.clone();
    let reference = run_psb_esr(&single).map_err(err)?.metadata["readout_current_pA"]
        .as_f64()
        .ok_or("no readout")?;
    // no decay: the final window holds at least half of the mean current
    // over the window one readout length earlier
    let (t0, esr) = (spec.timing.transport, spec.timing.esr);
    let w = esr * spec.timing.readout_fraction;
    let end = t0 + esr;
    let earlier = tr
        .window_mean("current", end - 2.0 * w, end - w)
        .map_err(err)?;
    require(
        fin > 10.0 * reference && fin > 0.5 * earlier,
        format!(
            "cluster {fin:.4e} pA vs two single donors {reference:.4e} pA (x{:.1}); preceding window {earlier:.4e} pA",
            fin / reference
        ),
    )
}

fn resonance_cross_check() -> Check {
    let cfg = SystemConfig::default();
    let omega = resonance_frequency(&cfg).map_err(err)?;
    let t = nearest_triplet_transition(&cfg, omega).map_err(err)?;
    let target = 28101.85;
    let tol = 14.0;
    require(
        (t.frequency - target).abs() <= tol && (omega - target).abs() < 0.01,
        format!(
            "formula {omega:.3} MHz, eigenspectrum {:.3} MHz, target {target} ± {tol} MHz",
            t.frequency
        ),
    )
}

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

fn transport_generator(cfg: &SystemConfig, driven: bool) -> Result<Generator, String> {
    let b = cfg.basis().map_err(err)?;
    let h = if driven {
        rotating_frame_hamiltonian(cfg, &b)
    } else {
        build_hamiltonian(cfg, &b)
    }
    .map_err(err)?;
    generator(&h, &dissipator(cfg, &b).map_err(err)?).map_err(err)
}

fn property_suites() -> Check {
    let mut trace_err: f64 = 0.0;
    let mut herm: f64 = 0.0;
    let mut min_eig: f64 = 0.0;
    let mut semigroup: f64 = 0.0;
    let mut ode: f64 = 0.0;
    let configs = [
        (0.01, 117.53, 0.0, Direction::Forward, false),
        (1.0, 117.53, 0.0, Direction::Forward, false),
        (0.1, 117.53, 0.0, Direction::Forward, true),
        (0.25, 2000.0, 6863.0, Direction::Reverse, false),
        (0.5, 300.0, -200.0, Direction::Reverse, false),
    ];
    for (b0, tc, delta, direction, driven) in configs {
        let mut cfg = SystemConfig {
            b0,
            tc,
            delta,
            direction,
            ..Default::default()
        };
        if driven {
            cfg.omega_drive = resonance_frequency(&cfg).map_err(err)?;
        }
        let g = transport_generator(&cfg, driven)?;
        let rho0 = loaded(&cfg);
        for t in [0.05, 0.4, 1.0] {
            let rho = propagate(&g, &rho0, t).map_err(err)?;
            trace_err = trace_err.max((rho.trace() - 1.0).norm());
            herm = herm.max(rho.hermiticity_error());
            min_eig = min_eig.min(rho.min_eigenvalue().map_err(err)?);
            let half = propagate(&g, &rho0, t / 2.0).map_err(err)?;
            let composed = propagate(&g, &half, t / 2.0).map_err(err)?;
            semigroup = semigroup.max(composed.max_abs_diff(&rho));
        }
        if b0 <= 0.1 {
            let t = 1.0;
            let a = propagate(&g, &rho0, t).map_err(err)?;
            let x = common::dopri5(&g, rho0.vector(), t, 1e-10, 1e-12);
            let b = DensityState::from_vector(x, rho0.dim()).map_err(err)?;
            let e = a
                .populations()
                .iter()
                .zip(b.populations())
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            ode = ode.max(e);
        }
    }

    let mut spec = ExperimentSpec::defaults(ExperimentId::StarkSweep);
    spec.x_axis = Some(AxisSpec::linear(100.0, 1000.0, 3));
    spec.y_axis = Some(AxisSpec::linear(0.0, 20.0, 3));
    spec.timing = Timing {
        transport: 2.0,
        esr: 2.0,
        ..Default::default()
    };
    let reference = run_experiment(&spec).map_err(err)?;
    let mut identical = true;
    for threads in [1, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(err)?;
        identical &= pool.install(|| run_experiment(&spec)).map_err(err)? == reference;
    }
    require(
        trace_err < 1e-9
            && herm < 1e-9
            && min_eig >= -1e-8
            && semigroup < 1e-8
            && ode < 1e-6
            && identical,
        format!(
            "trace {trace_err:.1e}, hermiticity {herm:.1e}, min eigenvalue {min_eig:.1e}, semigroup {semigroup:.1e}, expm vs ODE {ode:.1e}, sweeps identical over 1/2/4 threads: {identical}"
        ),
    )
}

trait TraceExt {
    fn transport_end(&self) -> f64;
}

impl TraceExt for TimeTrace {
    fn transport_end(&self) -> f64 {
        self.metadata["esr_onset_us"].as_f64().unwrap_or(f64::NAN)
    }
}

fn main() {
    let only: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let want = |n: usize| only.is_empty() || only.contains(&n);
    let mut r = Report { failures: 0 };
    let s = Duration::from_secs;
    if want(1) {
        r.run(1, "PSB onset at 1 T", s(30), psb_onset);
    }
    if want(2) {
        r.run(
            2,
            "nuclear spin blockade at 10 mT",
            s(120),
            nuclear_blockade,
        );
    }
    if want(3) {
        r.run(
            3,
            "nuclear projections at 1 T",
            s(120),
            high_field_invariance,
        );
    }
    if want(4) {
        r.run(4, "spin funnel at 250 mT", s(600), spin_funnel);
    }
    if want(5) {
        r.run(5, "quantum-dot current oracle", s(60), quantum_dot_oracle);
    }
    if want(6) {
        r.run(6, "readout linearity", s(300), readout_linearity);
    }
    if want(7) {
        r.run(7, "Stark optimum", s(900), stark_optimum);
    }
    if want(8) {
        r.run(8, "cluster without blockade", s(600), cluster_current);
    }
    if want(9) {
        r.run(
            9,
            "resonance formula vs eigenspectrum",
            s(60),
            resonance_cross_check,
        );
    }
    if want(10) {
        r.run(10, "property suites", s(600), property_suites);
    }
    if r.failures > 0 {
        println!("{} criteria failed", r.failures);
        std::process::exit(1);
    }
}
