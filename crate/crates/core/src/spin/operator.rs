use std::ops::{Add, Sub};

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

/// Dense complex square matrix over the system basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
}

impl Operator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Operator { matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            matrix: Array2::zeros((dim, dim)),
        }
    }

    pub(crate) fn from_matrix(matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Operator { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn view(&self) -> ArrayView2<'_, C64> {
        self.matrix.view()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix.view())
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.matrix.view())
    }

    /// Hermitian to `1e-12` relative to the largest entry.
    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= 1e-12 * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub(crate) fn ensure_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                deviation: self.hermiticity_error(),
            })
        }
    }

    pub fn adjoint(&self) -> Operator {
        Operator::from_matrix(linalg::adjoint(&self.matrix.view()))
    }

    pub fn scaled(&self, c: f64) -> Operator {
        Operator::from_matrix(&self.matrix * linalg::real(c))
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator::from_matrix(self.matrix.dot(&other.matrix) - other.matrix.dot(&self.matrix))
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[[row, col]]
    }

    /// Zero entries whose magnitude is below `rel` times the largest entry.
    pub(crate) fn chop(mut self, rel: f64) -> Self {
        let cut = rel * self.max_abs();
        self.matrix.mapv_inplace(|z| {
            C64::new(
                if z.re.abs() <= cut { 0.0 } else { z.re },
                if z.im.abs() <= cut { 0.0 } else { z.im },
            )
        });
        self
    }

    fn check_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            })
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator::from_matrix(&self.matrix + &other.matrix))
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator::from_matrix(&self.matrix - &other.matrix))
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operator dimensions differ")
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        self.try_sub(rhs).expect("operator dimensions differ")
    }
}
