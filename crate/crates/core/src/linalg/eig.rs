//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies the real symmetric Jacobi rotation to the
//! resulting 2x2 block, so the update `A <- V* A V` with
//!
//! ```text
//! V = [[ c,      s    ],
//!      [ -s·ē,   c·ē  ]]      e = a_pq / |a_pq|
//! ```
//!
//! zeroes `a_pq` exactly. Sweeps stop once the off-diagonal Frobenius mass
//! drops below `1e-13 · ‖A‖_F`.

use super::{ComplexMatrix, HermitianMatrix, C64};

const REL_OFF_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `A = Q diag(values) Q*` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    /// Unitary matrix whose columns are eigenvectors.
    pub vectors: ComplexMatrix,
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
}

impl EigenDecomp {
    /// `Q diag(g(λ_i)) Q*`.
    pub fn map_spectrum(&self, mut g: impl FnMut(f64) -> C64) -> ComplexMatrix {
        let gs: Vec<C64> = self.values.iter().map(|&l| g(l)).collect();
        let q = &self.vectors;
        let n = q.dim();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| q[(i, k)] * gs[k] * q[(j, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| C64::new(l, 0.0))
    }

    pub fn lambda_max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn lambda_min(&self) -> f64 {
        self.values[0]
    }
}

fn off_diagonal_mass(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Hermitian eigendecomposition by cyclic Jacobi sweeps.
pub fn hermitian_eig(h: &HermitianMatrix) -> EigenDecomp {
    let n = h.dim();
    let (a, v) = jacobi(h.as_matrix(), true);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| v[i * n + order[j]]);
    EigenDecomp { vectors, values }
}

/// Eigenvalues only, ascending. Skips eigenvector accumulation.
pub fn hermitian_eigenvalues(h: &HermitianMatrix) -> Vec<f64> {
    let n = h.dim();
    if n == 1 {
        return vec![h.as_matrix()[(0, 0)].re];
    }
    let (a, _) = jacobi(h.as_matrix(), false);
    let mut values: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    values.sort_by(f64::total_cmp);
    values
}

fn jacobi(m: &ComplexMatrix, want_vectors: bool) -> (Vec<C64>, Vec<C64>) {
    let n = m.dim();
    let mut a: Vec<C64> = m.data().to_vec();
    let mut v: Vec<C64> = if want_vectors {
        ComplexMatrix::identity(n).into_data()
    } else {
        Vec::new()
    };

    let scale = m.frobenius_norm();
    let target = REL_OFF_TOL * scale;

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_mass(&a, n);
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let beta = apq.norm();
                if beta == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // Pivot is below rounding level of both diagonal entries.
                if beta <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[p * n + q] = C64::new(0.0, 0.0);
                    a[q * n + p] = C64::new(0.0, 0.0);
                    continue;
                }
                let ebar = (apq / beta).conj();
                let theta = (aqq - app) / (2.0 * beta);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let vpp = C64::new(c, 0.0);
                let vpq = C64::new(s, 0.0);
                let vqp = ebar * (-s);
                let vqq = ebar * c;

                // A <- A V (columns p, q)
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * vpp + akq * vqp;
                    a[k * n + q] = akp * vpq + akq * vqq;
                }
                // A <- V* A (rows p, q)
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = vpp.conj() * apk + vqp.conj() * aqk;
                    a[q * n + k] = vpq.conj() * apk + vqq.conj() * aqk;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;

                if want_vectors {
                    // Q <- Q V
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * vpp + vkq * vqp;
                        v[k * n + q] = vkp * vpq + vkq * vqq;
                    }
                }
            }
        }
    }
    (a, v)
}
