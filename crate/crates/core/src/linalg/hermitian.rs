use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::eig::{hermitian_eig, hermitian_eigenvalues, EigenDecomp};
use super::matrix::{ComplexMatrix, MatrixJson, C64, HERMITIAN_TOL};
use crate::error::{invalid, Result};

/// A complex matrix with `A = A*`.
///
/// Construction accepts matrices whose symmetry defect is within
/// `1e-12 · max(1, ‖A‖_max)` and stores the symmetrized `(A + A*)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let defect = m.hermitian_defect();
        let tol = HERMITIAN_TOL * m.max_abs().max(1.0);
        if defect > tol {
            return Err(invalid(format!(
                "matrix is not Hermitian (defect {defect:.3e} > {tol:.3e})"
            )));
        }
        Ok(Self::symmetrized(&m))
    }

    /// `(A + A*)/2` without any tolerance check.
    pub fn symmetrized(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let mut out = ComplexMatrix::from_fn(n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        for i in 0..n {
            out[(i, i)].im = 0.0;
        }
        Self(out)
    }

    /// Wraps a matrix already known to be exactly Hermitian, such as a real
    /// linear combination of Hermitian matrices.
    pub(crate) fn from_exact(m: ComplexMatrix) -> Self {
        debug_assert!(m.hermitian_defect() == 0.0);
        Self(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self(ComplexMatrix::from_real_diag(diag))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(rows)?)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn eig(&self) -> EigenDecomp {
        hermitian_eig(self)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self)
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues().last().expect("non-empty spectrum")
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Operator norm, i.e. largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        let ev = self.eigenvalues();
        ev[0].abs().max(ev[ev.len() - 1].abs())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.scale_real(c))
    }

    /// `exp(A)`, Hermitian positive definite.
    pub fn exp(&self) -> Self {
        Self::symmetrized(&self.eig().map_spectrum(|l| C64::new(l.exp(), 0.0)))
    }

    /// Principal logarithm of a positive definite matrix.
    pub fn log(&self) -> Result<Self> {
        let e = self.eig();
        if e.lambda_min() <= 0.0 {
            return Err(crate::Error::Domain(format!(
                "matrix logarithm needs a positive definite argument (lambda_min = {})",
                e.lambda_min()
            )));
        }
        Ok(Self::symmetrized(
            &e.map_spectrum(|l| C64::new(l.ln(), 0.0)),
        ))
    }

    /// `Σ_i A_i`; panics on an empty slice.
    pub fn sum<'a>(items: impl IntoIterator<Item = &'a HermitianMatrix>) -> Self {
        let mut it = items.into_iter();
        let first = it.next().expect("sum of an empty list").clone();
        it.fold(first, |acc, h| &acc + h)
    }
}

impl TryFrom<ComplexMatrix> for HermitianMatrix {
    type Error = crate::Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl TryFrom<MatrixJson> for HermitianMatrix {
    type Error = crate::Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        Self::new(ComplexMatrix::try_from(j)?)
    }
}

impl From<HermitianMatrix> for MatrixJson {
    fn from(h: HermitianMatrix) -> Self {
        h.0.into()
    }
}

impl AsRef<ComplexMatrix> for HermitianMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn neg(self) -> HermitianMatrix {
        HermitianMatrix(-&self.0)
    }
}
