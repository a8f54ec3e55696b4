use ndarray::Array1;

use crate::error::{Error, Result};
use crate::linalg::{CVector, Lu, C64};
use crate::liouville::generator::Generator;
use crate::liouville::propagate::Subspace;
use crate::liouville::state::{liouville_index, DensityState};

/// Null-space solution of G ρ = 0.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub state: DensityState,
    /// True when the kernel of G is more than one-dimensional, so the result
    /// depends on the initial state. The returned state is then the long-time
    /// limit reached from the maximally mixed state.
    pub degenerate: bool,
    /// max |G ρ|.
    pub residual: f64,
}

const ITERATIONS: usize = 3;

fn trace_of(sub: &Subspace, diag: &[bool], x: &CVector) -> C64 {
    sub.indices()
        .iter()
        .zip(x.iter())
        .filter(|(i, _)| diag[**i])
        .map(|(_, z)| *z)
        .sum()
}

/// Shifted inverse iteration (εI − G)⁻¹ started from `start`.
///
/// For small ε the iteration projects onto the kernel of G along its
/// spectral complement, i.e. it returns lim_{t→∞} exp(Gt)·start whenever
/// that limit exists.
fn inverse_iteration(
    lu: &Lu,
    sub: &Subspace,
    diag: &[bool],
    start: &DensityState,
) -> Result<CVector> {
    let mut x = sub.gather(start.vector());
    for _ in 0..ITERATIONS {
        x = lu.solve_vec(&x.view());
        let tr = trace_of(sub, diag, &x);
        if !(tr.norm().is_finite()) || tr.norm() == 0.0 {
            return Err(Error::NoSteadyState { trace: tr.norm() });
        }
        x.mapv_inplace(|z| z / tr);
    }
    if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(x)
}

pub fn steady_state(g: &Generator) -> Result<SteadyState> {
    let n = g.hilbert_dim();
    let diag_idx: Vec<usize> = (0..n).map(|i| liouville_index(i, i, n)).collect();
    let mut diag = vec![false; n * n];
    for &i in &diag_idx {
        diag[i] = true;
    }
    let sub = Subspace::reachable(g, &diag_idx);
    let mut a = g.restricted(sub.indices());
    let scale = crate::linalg::one_norm(&a.view()).max(1.0);
    let eps = 1e-12 * scale;
    a.mapv_inplace(|z| -z);
    for k in 0..a.nrows() {
        a[[k, k]] += C64::new(eps, 0.0);
    }
    let lu = Lu::factor(a)?;

    let mixed = DensityState::maximally_mixed(n);
    let x = inverse_iteration(&lu, &sub, &diag, &mixed)?;
    // second, strongly non-uniform start to detect several invariant states
    let weights: Vec<f64> = (0..n).map(|i| (i + 1) as f64 * (i + 1) as f64).collect();
    let total: f64 = weights.iter().sum();
    let other =
        DensityState::from_populations(&weights.iter().map(|w| w / total).collect::<Vec<_>>());
    let y = inverse_iteration(&lu, &sub, &diag, &other)?;
    let spread = x
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let full = sub.scatter(&x);
    let mut state = DensityState::from_vector(full, n)?;
    state = hermitize(&state)?;
    let r: Array1<C64> = g.matrix().dot(state.vector());
    let residual = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(SteadyState {
        state,
        degenerate: spread > 1e-6,
        residual,
    })
}

fn hermitize(s: &DensityState) -> Result<DensityState> {
    let n = s.dim();
    let mut v = s.vector().clone();
    for i in 0..n {
        for j in 0..n {
            v[liouville_index(i, j, n)] = 0.5 * (s.element(i, j) + s.element(j, i).conj());
        }
    }
    DensityState::from_vector(v, n)
}
