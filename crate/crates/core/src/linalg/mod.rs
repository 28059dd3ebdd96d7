//! Dense complex matrix primitives: Hermitian spectral calculus, Schatten
//! norms, Kronecker/vec calculus and the Hermitian dilation.
//!
//! `vec` is row-major: `vec(X) = Σ X(i,j) e_i ⊗ e_j`, so that
//! `vec(A X B) = (A ⊗ Bᵀ) vec(X)` and
//! `⟨vec(I), (A ⊗ B) vec(I)⟩ = tr[A Bᵀ]`.

mod eig;
mod hermitian;
mod matrix;

pub use eig::{hermitian_eig, hermitian_eigenvalues, EigenDecomp};
pub use hermitian::HermitianMatrix;
pub use matrix::{ComplexMatrix, MatrixJson, C64, HERMITIAN_TOL};

use crate::error::{invalid, Result};

/// `exp(z·A) = Q diag(e^{z λ_i}) Q*` for Hermitian `A` and complex `z`.
pub fn matrix_exp_z(a: &HermitianMatrix, z: C64) -> ComplexMatrix {
    a.eig().map_spectrum(|l| (z * l).exp())
}

/// Singular values in descending order, as square roots of the eigenvalues
/// of `A*A`.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let gram = HermitianMatrix::symmetrized(&(&a.adjoint() * a));
    let mut s: Vec<f64> = gram
        .eigenvalues()
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    s.reverse();
    s
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a)[0]
}

/// Schatten `p`-norm, `p ∈ [1, ∞]` (`f64::INFINITY` selects the spectral norm).
pub fn schatten_norm(a: &ComplexMatrix, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid(format!("Schatten exponent must be >= 1, got {p}")));
    }
    let s = singular_values(a);
    Ok(schatten_from_singular_values(&s, p))
}

/// `(Σ s_i^p)^{1/p}` evaluated with the largest value factored out.
pub fn schatten_from_singular_values(s: &[f64], p: f64) -> f64 {
    let top = s.iter().copied().fold(0.0, f64::max);
    if p.is_infinite() || top == 0.0 {
        return top;
    }
    let sum: f64 = s.iter().map(|x| (x / top).powf(p)).sum();
    top * sum.powf(1.0 / p)
}

/// Kronecker product; the `((i,k),(j,l))` entry is `A(i,j) B(k,l)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    ComplexMatrix::from_fn(da * db, |r, c| {
        let (i, k) = (r / db, r % db);
        let (j, l) = (c / db, c % db);
        a[(i, j)] * b[(k, l)]
    })
}

/// Row-major vectorization, length `d²`.
pub fn vec_embed(x: &ComplexMatrix) -> Vec<C64> {
    x.data().to_vec()
}

/// Inverse of [`vec_embed`].
pub fn unvec(v: &[C64]) -> Result<ComplexMatrix> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(invalid(format!(
            "vector of length {} is not a square",
            v.len()
        )));
    }
    ComplexMatrix::new(d, v.to_vec())
}

/// `tr[A Bᵀ] = Σ_{i,j} A(i,j) B(i,j)`, which equals `⟨vec(I), (A ⊗ B) vec(I)⟩`.
pub fn inner_vec_identity(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum())
}

/// Hermitian dilation `[[0, M], [M*, 0]]` of dimension `2d`.
pub fn dilate(m: &ComplexMatrix) -> HermitianMatrix {
    let d = m.dim();
    let zero = C64::new(0.0, 0.0);
    let out = ComplexMatrix::from_fn(2 * d, |i, j| match (i < d, j < d) {
        (true, false) => m[(i, j - d)],
        (false, true) => m[(j, i - d)].conj(),
        _ => zero,
    });
    HermitianMatrix::symmetrized(&out)
}

/// `⟨x, y⟩ = Σ conj(x_i) y_i`.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
