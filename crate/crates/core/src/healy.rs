//! The tensorized transfer operator of a matrix-weighted walk and the
//! contraction estimates that drive the expander matrix Chernoff bound.
//!
//! For a walk `v_1..v_k` put `A_v = exp(t(γ+ib)f(v)/2)` and
//! `B_v = exp(t(γ-ib)f(v)/2)`. With row-major `vec`,
//! `vec(A Y B) = (A ⊗ Bᵀ) vec(Y)`, so the blocks are `M_v = A_v ⊗ B_vᵀ` and
//!
//! ```text
//! E tr[A_{v_1}..A_{v_k} B_{v_k}..B_{v_1}] = ⟨z_0, (E P̃)^k z_0⟩,
//! z_0 = n^{-1/2} 1 ⊗ vec(I_d),  P̃ = P ⊗ I_{d²},  E = diag(M_v).
//! ```
//!
//! `M_v = exp(t H_v)` with `H_v = (γ+ib)/2 f(v) ⊗ I + I ⊗ (γ-ib)/2 f(v)ᵀ`.
//! For real symmetric `f` the transpose is invisible; for complex Hermitian
//! `f` it is what makes the identity hold.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::conformal::MuMeasure;
use crate::error::{invalid, Error, Result};
use crate::expander::ExpanderGraph;
use crate::linalg::{inner, kron, norm2, spectral_norm, ComplexMatrix, C64};
use crate::rng::{standard_normal, stream_rng};
use crate::sampler::{bound_chain_exact, bound_variant, BoundVariant, MatrixFn, WalkLaw};

/// Additive slack on the four contraction inequalities and the recursion.
pub const HEALY_TOL: f64 = 1e-9;

/// Relative slack on the moment generating function bound.
pub const MGF_REL_TOL: f64 = 1e-8;

/// Below this `λ` the constraint `tγ ≤ (1-λ)/(4λ)` is treated as vacuous.
pub const LAMBDA_ZERO: f64 = 1e-12;

pub struct TransferOperator<'a> {
    graph: &'a ExpanderGraph,
    f: &'a MatrixFn,
    t: f64,
    gamma: f64,
    b: f64,
    d2: usize,
    blocks: Vec<ComplexMatrix>,
    h_norm_max: f64,
}

impl<'a> TransferOperator<'a> {
    pub fn new(
        graph: &'a ExpanderGraph,
        f: &'a MatrixFn,
        t: f64,
        gamma: f64,
        b: f64,
    ) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("t must be positive, got {t}")));
        }
        if !(gamma.is_finite() && b.is_finite()) {
            return Err(invalid("gamma and b must be finite"));
        }
        f.check_graph(graph)?;
        let d = f.d();
        let ell = gamma.hypot(b);
        let zp = C64::new(gamma, b) * (0.5 * t);
        let zm = C64::new(gamma, -b) * (0.5 * t);
        let mut blocks = Vec::with_capacity(f.n());
        let mut h_norm_max = 0.0f64;
        for fv in f.table() {
            let e = fv.eig();
            let a = e.map_spectrum(|l| (zp * l).exp());
            let bt = e.map_spectrum(|l| (zm * l).exp()).transpose();
            blocks.push(kron(&a, &bt));
            h_norm_max = h_norm_max.max(spectral_norm(&generator(fv.as_matrix(), gamma, b)));
        }
        if h_norm_max > ell * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::Numerical(format!(
                "max ||H_v|| = {h_norm_max} exceeds sqrt(gamma^2 + b^2) = {ell}"
            )));
        }
        Ok(Self {
            graph,
            f,
            t,
            gamma,
            b,
            d2: d * d,
            blocks,
            h_norm_max,
        })
    }

    pub fn graph(&self) -> &ExpanderGraph {
        self.graph
    }

    pub fn f(&self) -> &MatrixFn {
        self.f
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `ℓ = √(γ² + b²)`.
    pub fn ell(&self) -> f64 {
        self.gamma.hypot(self.b)
    }

    /// Exact `max_v ‖H_v‖`.
    pub fn h_norm_max(&self) -> f64 {
        self.h_norm_max
    }

    pub fn block(&self, v: usize) -> &ComplexMatrix {
        &self.blocks[v]
    }

    /// `n·d²`.
    pub fn len(&self) -> usize {
        self.graph.n() * self.d2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn block_dim(&self) -> usize {
        self.d2
    }

    /// `n^{-1/2} 1 ⊗ vec(I_d)`.
    pub fn z0(&self) -> Vec<C64> {
        let d = self.f.d();
        let scale = 1.0 / (self.graph.n() as f64).sqrt();
        let mut w = vec![C64::new(0.0, 0.0); self.d2];
        for i in 0..d {
            w[i * d + i] = C64::new(scale, 0.0);
        }
        w.repeat(self.graph.n())
    }

    /// `P̃ z`: each block replaced by the average of its neighbors' blocks.
    pub fn apply_p(&self, z: &[C64]) -> Vec<C64> {
        let d2 = self.d2;
        let inv = 1.0 / self.graph.degree() as f64;
        let mut out = vec![C64::new(0.0, 0.0); z.len()];
        for (u, dst) in out.chunks_exact_mut(d2).enumerate() {
            for &v in self.graph.neighbors(u) {
                for (o, x) in dst.iter_mut().zip(&z[v * d2..(v + 1) * d2]) {
                    *o += x;
                }
            }
            dst.iter_mut().for_each(|o| *o *= inv);
        }
        out
    }

    /// `E z`: block `v` multiplied by `M_v`.
    pub fn apply_e(&self, z: &[C64]) -> Vec<C64> {
        z.chunks_exact(self.d2)
            .zip(&self.blocks)
            .flat_map(|(x, m)| m.mat_vec(x))
            .collect()
    }

    /// `E P̃ z`.
    pub fn apply(&self, z: &[C64]) -> Vec<C64> {
        assert_eq!(z.len(), self.len(), "vector length must be n·d²");
        self.apply_e(&self.apply_p(z))
    }

    /// `z_0, z_1 = E P̃ z_0, …, z_k`.
    pub fn trajectory(&self, k: usize) -> Vec<Vec<C64>> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(self.z0());
        for i in 0..k {
            let next = self.apply(&out[i]);
            out.push(next);
        }
        out
    }

    /// `⟨z_0, (E P̃)^k z_0⟩` as a complex number.
    pub fn quadratic_form_complex(&self, k: usize) -> C64 {
        let z0 = self.z0();
        let mut z = z0.clone();
        for _ in 0..k {
            z = self.apply(&z);
        }
        inner(&z0, &z)
    }

    /// `⟨z_0, (E P̃)^k z_0⟩`, which equals the expected two-sided trace
    /// product and is real and nonnegative.
    pub fn quadratic_form(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        let q = self.quadratic_form_complex(k);
        if q.im.abs() > 1e-9 * q.re.abs().max(1.0) {
            return Err(Error::Numerical(format!("quadratic form {q} is not real")));
        }
        if q.re < -1e-9 {
            return Err(Error::Numerical(format!("quadratic form {q} is negative")));
        }
        Ok(q.re)
    }

    /// Splits a vector of this operator's length.
    pub fn split(&self, z: &[C64]) -> Result<SplitVector> {
        split(z, self.graph.n(), self.d2)
    }

    /// `H_v = (γ+ib)/2 f(v) ⊗ I + I ⊗ (γ-ib)/2 f(v)ᵀ`, so that `M_v = exp(t H_v)`.
    pub fn generator(&self, v: usize) -> ComplexMatrix {
        generator(self.f.get(v).as_matrix(), self.gamma, self.b)
    }
}

fn generator(fm: &ComplexMatrix, gamma: f64, b: f64) -> ComplexMatrix {
    let eye = ComplexMatrix::identity(fm.dim());
    &kron(fm, &eye).scale(C64::new(gamma, b) * 0.5)
        + &kron(&eye, &fm.transpose()).scale(C64::new(gamma, -b) * 0.5)
}

/// `z = z^∥ + z^⊥`, with `z^∥ = 1 ⊗ w`, `w` the mean block.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitVector {
    pub full: Vec<C64>,
    pub par: Vec<C64>,
    pub perp: Vec<C64>,
}

impl SplitVector {
    pub fn par_norm(&self) -> f64 {
        norm2(&self.par)
    }

    pub fn perp_norm(&self) -> f64 {
        norm2(&self.perp)
    }
}

pub fn split(z: &[C64], n: usize, block: usize) -> Result<SplitVector> {
    if block == 0 || z.len() != n * block {
        return Err(invalid(format!(
            "vector of length {} does not split into {n} blocks of {block}",
            z.len()
        )));
    }
    let mut w = vec![C64::new(0.0, 0.0); block];
    for chunk in z.chunks_exact(block) {
        w.iter_mut().zip(chunk).for_each(|(a, x)| *a += x);
    }
    let inv = 1.0 / n as f64;
    w.iter_mut().for_each(|a| *a *= inv);
    let par = w.repeat(n);
    let perp = z.iter().zip(&par).map(|(x, p)| x - p).collect();
    Ok(SplitVector {
        full: z.to_vec(),
        par,
        perp,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alphas {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl Alphas {
    /// Growth factor of the parallel part, `α₁ + α₂α₃/(1-α₄)`; infinite when
    /// `α₄ ≥ 1`.
    pub fn growth(&self) -> f64 {
        if self.a4 >= 1.0 {
            f64::INFINITY
        } else {
            self.a1 + self.a2 * self.a3 / (1.0 - self.a4)
        }
    }
}

/// `α₁ = e^{tℓ} - tℓ`, `α₂ = e^{tℓ} - 1`, `α₃ = λ(e^{tℓ} - 1)`, `α₄ = λe^{tγ}`.
pub fn alpha_values(t: f64, ell: f64, gamma: f64, lambda: f64) -> Alphas {
    let x = t * ell;
    let em1 = x.exp_m1();
    Alphas {
        a1: em1 - x + 1.0,
        a2: em1,
        a3: lambda * em1,
        a4: lambda * (t * gamma).exp(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HealyViolation {
    /// 1 to 4.
    pub part: u8,
    pub lhs: f64,
    pub rhs: f64,
    /// `[re, im]` pairs.
    pub witness: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HealyReport {
    pub n: usize,
    pub d: usize,
    pub t: f64,
    pub gamma: f64,
    pub b: f64,
    pub ell: f64,
    pub lambda: f64,
    pub h_norm_max: f64,
    pub alphas: Alphas,
    pub vectors: usize,
    /// `max (lhs - rhs)` per part; nonpositive when the part holds exactly.
    pub max_slack: [f64; 4],
    pub violations: Vec<HealyViolation>,
    pub passed: bool,
}

/// Checks the four contraction inequalities on `trials` random complex
/// Gaussian vectors plus `z_0` and the pure parallel/perpendicular parts of a
/// random vector.
pub fn check_healy_lemma(
    op: &TransferOperator<'_>,
    trials: usize,
    rng_seed: u64,
) -> Result<HealyReport> {
    if op.gamma < 0.0 {
        return Err(invalid("the contraction estimates need gamma >= 0"));
    }
    let lambda = op.graph.lambda();
    let alphas = alpha_values(op.t, op.ell(), op.gamma, lambda);
    let len = op.len();
    let gaussian = |stream: u64| -> Vec<C64> {
        let mut rng = stream_rng(rng_seed, stream);
        (0..len)
            .map(|_| C64::new(standard_normal(&mut rng), standard_normal(&mut rng)))
            .collect()
    };
    let extra = op.split(&gaussian(trials as u64))?;
    let mut vectors: Vec<Vec<C64>> = vec![op.z0(), extra.par, extra.perp];
    vectors.extend((0..trials as u64).map(gaussian));

    let per_vector: Vec<([f64; 4], Vec<HealyViolation>)> = vectors
        .par_iter()
        .map(|z| healy_parts(op, &alphas, z))
        .collect::<Result<_>>()?;
    let mut max_slack = [f64::NEG_INFINITY; 4];
    let mut violations = Vec::new();
    for (slack, viol) in per_vector {
        for (m, s) in max_slack.iter_mut().zip(slack) {
            *m = m.max(s);
        }
        violations.extend(viol);
    }
    Ok(HealyReport {
        n: op.graph.n(),
        d: op.f.d(),
        t: op.t,
        gamma: op.gamma,
        b: op.b,
        ell: op.ell(),
        lambda,
        h_norm_max: op.h_norm_max,
        alphas,
        vectors: vectors.len(),
        max_slack,
        passed: violations.is_empty(),
        violations,
    })
}

fn healy_parts(
    op: &TransferOperator<'_>,
    al: &Alphas,
    z: &[C64],
) -> Result<([f64; 4], Vec<HealyViolation>)> {
    let s = op.split(z)?;
    let from_par = op.split(&op.apply(&s.par))?;
    let from_perp = op.split(&op.apply(&s.perp))?;
    let (np, nq) = (s.par_norm(), s.perp_norm());
    let parts = [
        (from_par.par_norm(), al.a1 * np),
        (from_par.perp_norm(), al.a2 * np),
        (from_perp.par_norm(), al.a3 * nq),
        (from_perp.perp_norm(), al.a4 * nq),
    ];
    let mut slack = [0.0; 4];
    let mut violations = Vec::new();
    for (i, &(lhs, rhs)) in parts.iter().enumerate() {
        slack[i] = lhs - rhs;
        if lhs > rhs + HEALY_TOL {
            violations.push(HealyViolation {
                part: i as u8 + 1,
                lhs,
                rhs,
                witness: z.iter().map(|c| [c.re, c.im]).collect(),
            });
        }
    }
    Ok((slack, violations))
}

#[derive(Debug, Clone, Serialize)]
pub struct MgfReport {
    pub k: usize,
    pub d: usize,
    pub t: f64,
    pub gamma: f64,
    pub b: f64,
    pub lambda: f64,
    /// `λ` is below [`LAMBDA_ZERO`], so the `tγ` constraint was not applied.
    pub lambda_zero: bool,
    pub value: f64,
    /// `d (α₁ + α₂α₃/(1-α₄))^k`.
    pub chain_bound: f64,
    /// `d exp(k t² (γ² + b²)(1 + 8/(1-λ)))`.
    pub bound: f64,
    /// Worst additive excess over the per-step recursions and the two claims.
    pub recursion_slack: f64,
    pub recursion_ok: bool,
    pub satisfied: bool,
}

/// Rejects parameters outside `t²(γ²+b²) ≤ 1`, `tγ ≤ (1-λ)/(4λ)`, `λ < 1`.
pub fn check_mgf_preconditions(lambda: f64, t: f64, gamma: f64, b: f64) -> Result<()> {
    if !(t > 0.0) || !(gamma >= 0.0) || !b.is_finite() {
        return Err(invalid(format!(
            "need t > 0, gamma >= 0, finite b; got t = {t}, gamma = {gamma}, b = {b}"
        )));
    }
    if lambda >= 1.0 - LAMBDA_ZERO {
        return Err(Error::NonExpander { lambda });
    }
    let ell2 = gamma * gamma + b * b;
    if t * t * ell2 > 1.0 {
        return Err(invalid(format!(
            "t^2 (gamma^2 + b^2) = {} exceeds 1",
            t * t * ell2
        )));
    }
    if lambda >= LAMBDA_ZERO && t * gamma > (1.0 - lambda) / (4.0 * lambda) {
        return Err(invalid(format!(
            "t gamma = {} exceeds (1 - lambda)/(4 lambda) = {}",
            t * gamma,
            (1.0 - lambda) / (4.0 * lambda)
        )));
    }
    Ok(())
}

/// `d exp(k t²(γ²+b²)(1 + 8/(1-λ)))`.
pub fn mgf_bound(d: usize, lambda: f64, k: usize, t: f64, gamma: f64, b: f64) -> f64 {
    let ell2 = gamma * gamma + b * b;
    d as f64 * (k as f64 * t * t * ell2 * (1.0 + 8.0 / (1.0 - lambda))).exp()
}

/// Exact moment generating function bound check: the transfer-operator value
/// against both the closed form and the `α`-chain, with per-step recursion
/// checks along the trajectory.
pub fn check_mgf_bound(
    g: &ExpanderGraph,
    f: &MatrixFn,
    k: usize,
    t: f64,
    gamma: f64,
    b: f64,
) -> Result<MgfReport> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let lambda = g.lambda();
    check_mgf_preconditions(lambda, t, gamma, b)?;
    let op = TransferOperator::new(g, f, t, gamma, b)?;
    let al = alpha_values(t, op.ell(), gamma, lambda);
    let d = f.d();

    let traj = op.trajectory(k);
    let z0 = &traj[0];
    let q = inner(z0, &traj[k]);
    if q.im.abs() > 1e-9 * q.re.abs().max(1.0) || q.re < -1e-9 {
        return Err(Error::Numerical(format!(
            "quadratic form {q} is not real nonnegative"
        )));
    }
    let norms: Vec<(f64, f64)> = traj
        .iter()
        .map(|z| op.split(z).map(|s| (s.par_norm(), s.perp_norm())))
        .collect::<Result<_>>()?;
    let mut worst = f64::NEG_INFINITY;
    let mut running_max_par = norms[0].0;
    let perp_factor = al.a2 / (1.0 - al.a4);
    for i in 1..=k {
        let (p_prev, q_prev) = norms[i - 1];
        let (p, q) = norms[i];
        worst = worst
            .max(q - (al.a2 * p_prev + al.a4 * q_prev))
            .max(p - (al.a1 * p_prev + al.a3 * q_prev))
            .max(q - perp_factor * running_max_par)
            .max(p - al.growth() * running_max_par);
        running_max_par = running_max_par.max(p);
    }
    let chain_bound = d as f64 * al.growth().powi(k as i32);
    let bound = mgf_bound(d, lambda, k, t, gamma, b);
    let recursion_ok = worst <= HEALY_TOL;
    let value = q.re;
    Ok(MgfReport {
        k,
        d,
        t,
        gamma,
        b,
        lambda,
        lambda_zero: lambda < LAMBDA_ZERO,
        value,
        chain_bound,
        bound,
        recursion_slack: worst,
        recursion_ok,
        satisfied: recursion_ok
            && value <= chain_bound * (1.0 + MGF_REL_TOL)
            && chain_bound <= bound * (1.0 + MGF_REL_TOL),
    })
}

/// `E tr[A_{v_1}..A_{v_k} B_{v_k}..B_{v_1}]` by visiting every walk, with
/// `A_v = exp(t(γ+ib)f(v)/2)` and `B_v = exp(t(γ-ib)f(v)/2)`.
pub fn exhaustive_two_sided_expectation(
    g: &ExpanderGraph,
    f: &MatrixFn,
    k: usize,
    t: f64,
    gamma: f64,
    b: f64,
    budget: u128,
) -> Result<C64> {
    f.check_graph(g)?;
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let walks = crate::sampler::walk_count(g, k);
    if walks > budget {
        return Err(Error::BudgetExceeded {
            needed: walks,
            budget,
        });
    }
    let zp = C64::new(gamma, b) * (0.5 * t);
    let zm = C64::new(gamma, -b) * (0.5 * t);
    let a: Vec<ComplexMatrix> = f
        .table()
        .iter()
        .map(|h| crate::linalg::matrix_exp_z(h, zp))
        .collect();
    let bm: Vec<ComplexMatrix> = f
        .table()
        .iter()
        .map(|h| crate::linalg::matrix_exp_z(h, zm))
        .collect();
    let mut total = C64::new(0.0, 0.0);
    let mut comp = C64::new(0.0, 0.0);
    crate::sampler::for_each_walk(g, k, |walk| {
        let mut left = a[walk[0]].clone();
        let mut right = bm[walk[0]].clone();
        for &v in &walk[1..] {
            left = &left * &a[v];
            right = &bm[v] * &right;
        }
        // Kahan summation over up to 10⁸ terms.
        let y = (&left * &right).trace() - comp;
        let s = total + y;
        comp = (s - total) - y;
        total = s;
    });
    Ok(total / walks as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct FinalChain {
    pub k: usize,
    pub d: usize,
    pub epsilon: f64,
    pub lambda: f64,
    /// Markov parameter `s = (1-λ)ε/36`.
    pub s: f64,
    /// Transfer-operator parameter `t = 4s/π`, so that `(π/4)t = s`.
    pub t: f64,
    /// `E tr exp(s Σ_j f(v_j))`, exact over the walk law.
    pub mgf_exact: f64,
    /// `d^{1-π/4} ∫ ⟨z_0, (E P̃)^k z_0⟩|_{γ+ib = e^{iφ}} dμ(φ)`.
    pub mgf_rotated: f64,
    /// `d^{2-π/4} exp(k t² (1 + 8/(1-λ)))`.
    pub mgf_lemma: f64,
    /// Exact `P[λ_max(Σ_j f(v_j)) ≥ kε]`.
    pub tail_exact: f64,
    /// `mgf_lemma · exp(-skε)`.
    pub tail_markov: f64,
    /// `d^{2-π/4} exp((4/π)² k s² · 9/(1-λ) - k s ε)`.
    pub tail_chain: f64,
    pub bound72: f64,
    pub bound80: f64,
    pub holds: bool,
}

/// Assembles every link of the proof of the main bound numerically for one
/// instance: exact MGF, the rotated-trace average, the lemma bound, Markov,
/// and the simplifications down to the `/72` and `/80` forms.
pub fn final_chain(
    g: &ExpanderGraph,
    f: &MatrixFn,
    k: usize,
    epsilon: f64,
    mu: &MuMeasure,
    law: &WalkLaw,
) -> Result<FinalChain> {
    let lambda = g.lambda();
    if lambda >= 1.0 {
        return Err(Error::NonExpander { lambda });
    }
    if law.n() != g.n() || law.k() != k {
        return Err(invalid("walk law does not match (graph, k)"));
    }
    let d = f.d();
    let df = d as f64;
    let s = (1.0 - lambda) * epsilon / 36.0;
    let t = 4.0 * s / PI;

    let mut mgf_sum = 0.0;
    let mut tail_hits = 0u64;
    for (counts, w) in law.entries() {
        let mut acc = ComplexMatrix::zeros(d);
        for (v, &c) in counts.iter().enumerate() {
            if c > 0 {
                acc = &acc + &f.get(v).as_matrix().scale_real(c as f64);
            }
        }
        let sum = crate::linalg::HermitianMatrix::from_exact(acc);
        let ev = sum.eigenvalues();
        mgf_sum += w as f64 * ev.iter().map(|l| (s * l).exp()).sum::<f64>();
        if ev[ev.len() - 1] >= k as f64 * epsilon - crate::sampler::EXCEED_TOL * k as f64 {
            tail_hits += w;
        }
    }
    let total = law.total_walks() as f64;
    let mgf_exact = mgf_sum / total;
    let tail_exact = tail_hits as f64 / total;

    let mut rotated = 0.0;
    for (&phi, &w) in mu.nodes.iter().zip(&mu.weights) {
        let op = TransferOperator::new(g, f, t, phi.cos().max(0.0), phi.sin())?;
        rotated += w * op.quadratic_form(k)?;
    }
    let mgf_rotated = df.powf(1.0 - PI / 4.0) * rotated;
    let mgf_lemma =
        df.powf(2.0 - PI / 4.0) * (k as f64 * t * t * (1.0 + 8.0 / (1.0 - lambda))).exp();
    let tail_markov = mgf_lemma * (-s * k as f64 * epsilon).exp();
    let tail_chain = bound_chain_exact(d, lambda, k, epsilon)?;
    let bound72 = bound_variant(d, lambda, k, epsilon, BoundVariant::Chain72)?;
    let bound80 = bound_variant(d, lambda, k, epsilon, BoundVariant::Main)?;
    let rel = 1.0 + MGF_REL_TOL;
    let holds = mgf_exact <= mgf_rotated * rel
        && mgf_rotated <= mgf_lemma * rel
        && tail_exact <= tail_markov * rel
        && tail_markov <= tail_chain * rel
        && tail_chain <= bound72 * rel
        && bound72 <= bound80;
    Ok(FinalChain {
        k,
        d,
        epsilon,
        lambda,
        s,
        t,
        mgf_exact,
        mgf_rotated,
        mgf_lemma,
        tail_exact,
        tail_markov,
        tail_chain,
        bound72,
        bound80,
        holds,
    })
}
