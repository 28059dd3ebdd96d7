use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type C64 = Complex<f64>;

/// Symmetry tolerance used when accepting a matrix as Hermitian, relative to
/// `max(1, max|a_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("matrix dimension must be positive"));
        }
        if data.len() != dim * dim {
            return Err(invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("rows must form a square matrix"));
        }
        Self::new(dim, rows.concat())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                diag[i]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            C64::new(if i == j { diag[i] } else { 0.0 }, 0.0)
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let rrow = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in row.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    pub fn mat_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim, "mat_vec dimension mismatch");
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `max_{i,j} |a_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation `|a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max_{i,j} |a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for row in self.data.chunks_exact(self.dim) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Matrix wire format: `{"d": int, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub d: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        let rows = |part: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            m.data
                .chunks_exact(m.dim)
                .map(|row| row.iter().map(part).collect())
                .collect()
        };
        MatrixJson {
            d: m.dim,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = crate::Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let d = j.d;
        if j.re.len() != d || j.im.len() != d {
            return Err(invalid(format!("matrix JSON: expected {d} rows")));
        }
        let mut data = Vec::with_capacity(d * d);
        for (re_row, im_row) in j.re.iter().zip(&j.im) {
            if re_row.len() != d || im_row.len() != d {
                return Err(invalid(format!("matrix JSON: expected {d} columns")));
            }
            data.extend(re_row.iter().zip(im_row).map(|(&r, &i)| C64::new(r, i)));
        }
        ComplexMatrix::new(d, data)
    }
}
