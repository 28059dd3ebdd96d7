//! Deterministic random streams.
//!
//! Every random quantity in the crate is drawn from ChaCha8 (`rand_chacha`),
//! a counter-based generator: `stream_rng(seed, stream)` selects the 64-bit
//! key from `seed` and an independent stream id, so per-trial generators
//! `(seed_base, trial_index)` never overlap and results do not depend on
//! scheduling order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};

pub type XRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> XRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(seed: u64, stream: u64) -> XRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform integer in `[0, n)` by rejection on `next_u64`; no modulo bias.
pub fn uniform_below(rng: &mut impl RngCore, n: u64) -> u64 {
    assert!(n > 0, "uniform_below(0)");
    if n.is_power_of_two() {
        return rng.next_u64() & (n - 1);
    }
    // Largest multiple of n that fits in 2^64.
    let zone = u64::MAX - (u64::MAX % n) - 1;
    loop {
        let x = rng.next_u64();
        if x <= zone {
            return x % n;
        }
    }
}

/// Uniform real in `[0, 1)` with 53 random bits.
pub fn uniform_unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    StandardNormal.sample(rng)
}

/// Hermitian matrix with i.i.d. standard normal entries: real diagonal,
/// complex off-diagonal with independent real and imaginary parts.
pub fn random_hermitian(rng: &mut impl RngCore, d: usize) -> HermitianMatrix {
    let mut m = ComplexMatrix::zeros(d);
    for i in 0..d {
        m[(i, i)] = C64::new(standard_normal(rng), 0.0);
        for j in (i + 1)..d {
            let z = C64::new(standard_normal(rng), standard_normal(rng));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianMatrix::symmetrized(&m)
}

/// Random Hermitian matrix rescaled to the given spectral norm.
pub fn random_hermitian_with_norm(rng: &mut impl RngCore, d: usize, norm: f64) -> HermitianMatrix {
    let h = random_hermitian(rng, d);
    let s = h.spectral_norm();
    if s == 0.0 {
        return h;
    }
    h.scaled(norm / s)
}

pub fn random_complex_matrix(rng: &mut impl RngCore, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, |_, _| {
        C64::new(standard_normal(rng), standard_normal(rng))
    })
}

pub fn random_complex_vector(rng: &mut impl RngCore, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| C64::new(standard_normal(rng), standard_normal(rng)))
        .collect()
}
