use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64, ZERO};
use crate::spin::{eigenspectrum, Operator};

/// Column-stacked Liouville-space index of matrix element (row, col).
#[inline]
pub fn liouville_index(row: usize, col: usize, dim: usize) -> usize {
    row + col * dim
}

/// Vectorized density operator of a `dim`-level system (length `dim²`,
/// column stacking).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    dim: usize,
    data: CVector,
}

impl DensityState {
    pub fn from_vector(data: CVector, dim: usize) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(DensityState { dim, data })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut data = Array1::zeros(dim * dim);
        for i in 0..dim {
            data[liouville_index(i, i, dim)] = C64::new(1.0 / dim as f64, 0.0);
        }
        DensityState { dim, data }
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(populations: &[f64]) -> Self {
        let dim = populations.len();
        let mut data = Array1::zeros(dim * dim);
        for (i, &p) in populations.iter().enumerate() {
            data[liouville_index(i, i, dim)] = C64::new(p, 0.0);
        }
        DensityState { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self) -> &CVector {
        &self.data
    }

    pub fn into_vector(self) -> CVector {
        self.data
    }

    #[inline]
    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.data[liouville_index(row, col, self.dim)]
    }

    #[inline]
    pub fn population(&self, i: usize) -> f64 {
        self.element(i, i).re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.population(i)).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.element(i, i)).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.element(i, j) - self.element(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Tr(ρ²) (real part).
    pub fn purity(&self) -> f64 {
        let mut p = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                p += (self.element(i, j) * self.element(j, i)).re;
            }
        }
        p
    }

    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let rho = devectorize(self);
        let herm = Operator::from_matrix(
            (rho.matrix() + &crate::linalg::adjoint(&rho.view())) * C64::new(0.5, 0.0),
        );
        Ok(eigenspectrum(&herm)?.energies[0])
    }

    /// Liouville indices of structurally non-zero entries.
    pub fn support(&self) -> Vec<usize> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != ZERO)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn max_abs_diff(&self, other: &DensityState) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub fn vectorize(rho: &Operator) -> DensityState {
    let n = rho.dim();
    let mut data = Array1::zeros(n * n);
    for col in 0..n {
        for row in 0..n {
            data[liouville_index(row, col, n)] = rho.get(row, col);
        }
    }
    DensityState { dim: n, data }
}

pub fn devectorize(state: &DensityState) -> Operator {
    let n = state.dim;
    Operator::from_matrix(Array2::from_shape_fn((n, n), |(r, c)| state.element(r, c)))
}
