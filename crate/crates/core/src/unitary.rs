use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{c, cis, hermitian_eigen, hermiticity_residual, log2_exact, unitarity_residual, Mat, Vector, ONE, ZERO};

/// Tolerance for unitarity and normalization checks.
pub const TOL: f64 = 1e-10;

/// A dense unitary on `2^k` basis states. Index bit `j` addresses target `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryBlock {
    matrix: Arc<Mat>,
    num_qubits: usize,
}

impl UnitaryBlock {
    pub fn new(matrix: Mat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let num_qubits = log2_exact(matrix.nrows())
            .ok_or_else(|| Error::invalid(format!("dimension {} is not a power of two", matrix.nrows())))?;
        let res = unitarity_residual(&matrix);
        if res > TOL {
            return Err(Error::NonUnitary(res));
        }
        Ok(Self { matrix: Arc::new(matrix), num_qubits })
    }

    pub(crate) fn new_unchecked(matrix: Mat) -> Self {
        let num_qubits = log2_exact(matrix.nrows()).expect("power-of-two block");
        Self { matrix: Arc::new(matrix), num_qubits }
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn adjoint(&self) -> Self {
        Self::new_unchecked(self.matrix.adjoint())
    }

    pub fn identity(num_qubits: usize) -> Self {
        let n = 1 << num_qubits;
        Self::new_unchecked(Mat::identity(n, n))
    }

    pub fn diagonal(phases: &[f64]) -> Result<Self> {
        let n = phases.len();
        Self::new(Mat::from_diagonal(&Vector::from_iterator(n, phases.iter().map(|&p| cis(p)))))
    }
}

/// `e^{iAt}` by exact eigendecomposition of Hermitian `A`.
pub fn evolution_unitary(a: &Mat, t: f64) -> Result<UnitaryBlock> {
    let res = hermiticity_residual(a);
    if res > TOL {
        return Err(Error::NonHermitian(res));
    }
    let (values, v) = hermitian_eigen(a);
    let d = Mat::from_diagonal(&Vector::from_iterator(values.len(), values.iter().map(|&l| cis(l * t))));
    UnitaryBlock::new(&v * d * v.adjoint())
}

pub fn rx(theta: f64) -> Mat {
    let (s, co) = (theta / 2.0).sin_cos();
    Mat::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
}

pub fn ry(theta: f64) -> Mat {
    let (s, co) = (theta / 2.0).sin_cos();
    Mat::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

pub fn rz(theta: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[cis(-theta / 2.0), ZERO, ZERO, cis(theta / 2.0)])
}

/// `exp(-i θ/2 X⊗X)`.
pub fn rxx(theta: f64) -> Mat {
    let (s, co) = (theta / 2.0).sin_cos();
    let a = c(co, 0.0);
    let b = c(0.0, -s);
    Mat::from_row_slice(4, 4, &[a, ZERO, ZERO, b, ZERO, a, b, ZERO, ZERO, b, a, ZERO, b, ZERO, ZERO, a])
}

pub fn pauli_x() -> Mat {
    Mat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> Mat {
    Mat::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> Mat {
    Mat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(-1.0, 0.0)])
}

pub fn hadamard() -> Mat {
    let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Mat::from_row_slice(2, 2, &[h, h, h, -h])
}

pub fn swap() -> Mat {
    Mat::from_row_slice(4, 4, &[ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE])
}
