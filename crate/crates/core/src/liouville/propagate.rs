use std::collections::VecDeque;

use ndarray::{s, Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{expm, matvec_into, CMatrix, CVector, C64, ZERO};
use crate::liouville::generator::Generator;
use crate::liouville::state::DensityState;
use crate::observables::Observable;
use crate::results::{Column, TimeTrace};

/// Liouville indices closed under the action of a generator.
///
/// The nuclear Zeeman, hyperfine and tunnelling terms conserve enough
/// structure that a state started from a diagonal density matrix never
/// populates most coherences. Working on the reachable subspace shrinks the
/// dense matrices by a large factor without any approximation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    full_dim: usize,
    indices: Vec<usize>,
}

impl Subspace {
    /// Breadth-first closure of `seeds` under the non-zero pattern of `g`.
    pub fn reachable(g: &Generator, seeds: &[usize]) -> Subspace {
        let n2 = g.liouville_dim();
        let m = g.matrix();
        let mut seen = vec![false; n2];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in seeds {
            if s < n2 && !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(col) = queue.pop_front() {
            for (row, z) in m.column(col).iter().enumerate() {
                if !seen[row] && *z != ZERO {
                    seen[row] = true;
                    queue.push_back(row);
                }
            }
        }
        let indices = (0..n2).filter(|&i| seen[i]).collect();
        Subspace {
            full_dim: n2,
            indices,
        }
    }

    pub fn full(n2: usize) -> Subspace {
        Subspace {
            full_dim: n2,
            indices: (0..n2).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn gather(&self, v: &CVector) -> CVector {
        Generator::gather(&self.indices, v)
    }

    pub fn scatter(&self, reduced: &CVector) -> CVector {
        let mut out = Array1::zeros(self.full_dim);
        for (k, &i) in self.indices.iter().enumerate() {
            out[i] = reduced[k];
        }
        out
    }
}

/// Fixed-step propagator exp(G·dt) restricted to an invariant subspace.
#[derive(Clone, Debug)]
pub struct Propagator {
    subspace: Subspace,
    step: f64,
    matrix: CMatrix,
}

impl Propagator {
    pub fn new(g: &Generator, subspace: Subspace, step: f64) -> Result<Self> {
        check_time(step)?;
        let gr = g.restricted(subspace.indices()) * C64::new(step, 0.0);
        let matrix = expm(&gr.view())?;
        Ok(Propagator {
            subspace,
            step,
            matrix,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    /// `out = exp(G·dt) x` on reduced vectors.
    pub fn apply_into(&self, x: &CVector, out: &mut CVector) {
        matvec_into(
            &self.matrix.view(),
            &x.view(),
            out.as_slice_mut().expect("contiguous"),
        );
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    if t < 0.0 {
        return Err(Error::invalid("t", format!("must be >= 0, got {t}")));
    }
    Ok(())
}

fn check_state(g: &Generator, rho: &DensityState) -> Result<()> {
    if rho.dim() != g.hilbert_dim() {
        return Err(Error::DimensionMismatch {
            expected: g.hilbert_dim(),
            found: rho.dim(),
        });
    }
    if !rho
        .vector()
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
    {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// ρ(t) = exp(G t) ρ₀.
pub fn propagate(g: &Generator, rho0: &DensityState, t: f64) -> Result<DensityState> {
    check_time(t)?;
    check_state(g, rho0)?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let sub = Subspace::reachable(g, &rho0.support());
    if sub.is_empty() {
        return Ok(rho0.clone());
    }
    let p = Propagator::new(g, sub, t)?;
    let x = p.subspace.gather(rho0.vector());
    let mut y = Array1::zeros(x.len());
    p.apply_into(&x, &mut y);
    DensityState::from_vector(p.subspace.scatter(&y), rho0.dim())
}

/// Final state and time average over one window of constant generator.
#[derive(Clone, Debug)]
pub struct WindowAverage {
    pub final_state: DensityState,
    pub average: DensityState,
}

/// Exact average (1/T)∫₀ᵀ exp(G t)ρ₀ dt together with exp(G T)ρ₀.
///
/// Both come from one exponential of the augmented matrix [[G, ρ₀], [0, 0]]·T.
pub fn time_average(g: &Generator, rho0: &DensityState, window: f64) -> Result<WindowAverage> {
    check_time(window)?;
    check_state(g, rho0)?;
    if window == 0.0 {
        return Ok(WindowAverage {
            final_state: rho0.clone(),
            average: rho0.clone(),
        });
    }
    let sub = Subspace::reachable(g, &rho0.support());
    let m = sub.len();
    let x = sub.gather(rho0.vector());
    let mut aug: CMatrix = Array2::zeros((m + 1, m + 1));
    let tw = C64::new(window, 0.0);
    aug.slice_mut(s![..m, ..m])
        .assign(&(g.restricted(sub.indices()) * tw));
    for k in 0..m {
        aug[[k, m]] = x[k] * tw;
    }
    let e = expm(&aug.view())?;
    // top-right column of the exponential is ∫₀ᵀ exp(G s) ρ₀ ds
    let integral: CVector = (0..m).map(|k| e[[k, m]] / tw).collect();
    let fin: CVector = e.slice(s![..m, ..m]).dot(&x);
    Ok(WindowAverage {
        final_state: DensityState::from_vector(sub.scatter(&fin), rho0.dim())?,
        average: DensityState::from_vector(sub.scatter(&integral), rho0.dim())?,
    })
}

/// One piece of a piecewise-constant protocol.
#[derive(Clone, Copy, Debug)]
pub struct Stage<'a> {
    pub generator: &'a Generator,
    /// μs.
    pub duration: f64,
    /// Sampling interval in μs; the last step of the stage is shortened to
    /// land exactly on the stage boundary.
    pub sample_step: f64,
    /// When false the stage is propagated in one step and only its end point
    /// is recorded.
    pub record: bool,
}

impl<'a> Stage<'a> {
    pub fn new(generator: &'a Generator, duration: f64, sample_step: f64) -> Self {
        Stage {
            generator,
            duration,
            sample_step,
            record: true,
        }
    }

    pub fn unrecorded(generator: &'a Generator, duration: f64) -> Self {
        Stage {
            generator,
            duration,
            sample_step: duration,
            record: false,
        }
    }
}

/// Output of [`evolve_trace`].
#[derive(Clone, Debug)]
pub struct Evolution {
    pub trace: TimeTrace,
    pub final_state: DensityState,
}

fn sample(observables: &[Observable], state: &DensityState) -> Vec<f64> {
    observables.iter().map(|o| o.evaluate(state)).collect()
}

/// Propagates `rho0` through consecutive stages, recording the observables
/// at t = 0, at every sample step and at each stage boundary.
///
/// The state is carried across stage boundaries unchanged.
pub fn evolve_trace(
    stages: &[Stage<'_>],
    rho0: &DensityState,
    observables: &[Observable],
) -> Result<Evolution> {
    if stages.is_empty() {
        return Err(Error::EmptyStages);
    }
    for st in stages {
        check_time(st.duration)?;
        check_state(st.generator, rho0)?;
        if st.record && !(st.sample_step.is_finite() && st.sample_step > 0.0) {
            return Err(Error::invalid(
                "sample_step",
                format!("must be > 0, got {}", st.sample_step),
            ));
        }
    }
    let columns: Vec<Column> = observables.iter().map(|o| o.column()).collect();
    let mut trace = TimeTrace::new(columns);
    let mut state = rho0.clone();
    let mut t0 = 0.0;
    trace.push(0.0, sample(observables, &state));

    for st in stages {
        if st.duration == 0.0 {
            continue;
        }
        if !st.record {
            state = propagate(st.generator, &state, st.duration)?;
            t0 += st.duration;
            trace.push(t0, sample(observables, &state));
            continue;
        }
        let sub = Subspace::reachable(st.generator, &state.support());
        let dt = st.sample_step.min(st.duration);
        let mut full_steps = (st.duration / dt + 1e-9).floor() as usize;
        let mut rest = st.duration - full_steps as f64 * dt;
        if rest < 0.0 {
            // rounding put us just past the boundary
            full_steps -= 1;
            rest += dt;
        }
        if rest <= 1e-12 * st.duration {
            rest = 0.0;
        }
        let step = Propagator::new(st.generator, sub.clone(), dt)?;
        let mut x = sub.gather(state.vector());
        let mut y = Array1::zeros(x.len());
        for k in 1..=full_steps {
            step.apply_into(&x, &mut y);
            std::mem::swap(&mut x, &mut y);
            state = DensityState::from_vector(sub.scatter(&x), state.dim())?;
            let t = if k == full_steps && rest == 0.0 {
                t0 + st.duration
            } else {
                t0 + k as f64 * dt
            };
            trace.push(t, sample(observables, &state));
        }
        if rest > 0.0 {
            let last = Propagator::new(st.generator, sub.clone(), rest)?;
            last.apply_into(&x, &mut y);
            state = DensityState::from_vector(sub.scatter(&y), state.dim())?;
            trace.push(t0 + st.duration, sample(observables, &state));
        }
        t0 += st.duration;
    }
    Ok(Evolution {
        trace,
        final_state: state,
    })
}
