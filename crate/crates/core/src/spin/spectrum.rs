use nalgebra::DMatrix;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::spin::basis::{Basis, ElectronState};
use crate::spin::config::SystemConfig;
use crate::spin::hamiltonian::{build_hamiltonian, dot_spin, Axis};
use crate::spin::operator::Operator;

/// Eigen-decomposition of a Hermitian operator, energies ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, in the order of `energies`.
    pub vectors: CMatrix,
}

pub fn eigenspectrum(h: &Operator) -> Result<Spectrum> {
    h.ensure_hermitian()?;
    let n = h.dim();
    // symmetrize so rounding-level anti-Hermitian residue cannot leak in
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (h.get(i, j) + h.get(j, i).conj()));
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, c)| eig.eigenvectors[(i, order[c])]);
    Ok(Spectrum { energies, vectors })
}

impl Spectrum {
    /// Probability that eigenvector `k` has electron configuration `e`,
    /// summed over nuclear states.
    pub fn electron_weight(&self, basis: &Basis, k: usize, e: ElectronState) -> f64 {
        (0..basis.nuclear_count())
            .map(|n| self.vectors[[basis.index(e, n), k]].norm_sqr())
            .sum()
    }
}

/// An allowed ESR transition between two eigenstates of H.
#[derive(Clone, Debug, PartialEq)]
pub struct EsrTransition {
    pub lower: usize,
    pub upper: usize,
    pub frequency: f64,
    /// |⟨upper| S_Lx + S_Rx |lower⟩|² on the (1,1) block.
    pub strength: f64,
}

/// T⁰→T⁺ transitions of the (1,1) manifold with a non-negligible drive
/// matrix element, sorted by frequency.
pub fn triplet_transitions(config: &SystemConfig) -> Result<Vec<EsrTransition>> {
    let basis = config.basis()?;
    let h = build_hamiltonian(config, &basis)?;
    let spec = eigenspectrum(&h)?;
    let n = basis.dim();
    let sx_e = dot_spin(true, Axis::X) + dot_spin(false, Axis::X);
    let sx = crate::linalg::kron(
        &sx_e.view(),
        &crate::linalg::identity(basis.nuclear_count()).view(),
    );
    let v = &spec.vectors;
    let vh = v.t().mapv(|z| z.conj());
    let m = vh.dot(&sx).dot(v);

    let t0_like: Vec<f64> = (0..n)
        .map(|k| {
            spec.electron_weight(&basis, k, ElectronState::TZero)
                + spec.electron_weight(&basis, k, ElectronState::S11)
                + spec.electron_weight(&basis, k, ElectronState::S02)
        })
        .collect();
    let tplus: Vec<f64> = (0..n)
        .map(|k| spec.electron_weight(&basis, k, ElectronState::TPlus))
        .collect();

    let mut out = Vec::new();
    for lower in 0..n {
        if t0_like[lower] < 0.5 {
            continue;
        }
        for upper in 0..n {
            if tplus[upper] < 0.5 {
                continue;
            }
            let strength = m[[upper, lower]].norm_sqr();
            if strength < 1e-3 {
                continue;
            }
            out.push(EsrTransition {
                lower,
                upper,
                frequency: spec.energies[upper] - spec.energies[lower],
                strength,
            });
        }
    }
    out.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(out)
}

/// Drive frequency for configurations outside the single-donor resonance
/// formula: the strongest T⁰→T⁺ transition of H at the operating point,
/// lowest frequency first on ties.
pub fn dominant_esr_frequency(config: &SystemConfig) -> Result<f64> {
    let transitions = triplet_transitions(config)?;
    let best = transitions
        .iter()
        .max_by(|a, b| {
            a.strength
                .total_cmp(&b.strength)
                .then(b.frequency.total_cmp(&a.frequency))
        })
        .ok_or_else(|| Error::OutOfDomain("no driven triplet transition found".into()))?;
    Ok(best.frequency)
}

/// The allowed T⁰→T⁺ transition closest to `omega`.
pub fn nearest_triplet_transition(config: &SystemConfig, omega: f64) -> Result<EsrTransition> {
    triplet_transitions(config)?
        .into_iter()
        .min_by(|a, b| {
            (a.frequency - omega)
                .abs()
                .total_cmp(&(b.frequency - omega).abs())
        })
        .ok_or_else(|| Error::OutOfDomain("no driven triplet transition found".into()))
}
