//! The unit-disk to half-disk conformal map, Poisson kernel estimates and the
//! bounded multi-matrix Golden-Thompson inequality
//!
//! ```text
//! log tr exp(Σ H_j) ≤ (4/π) ∫_{-π/2}^{π/2} log tr[G(φ) G(φ)*] dμ(φ),
//! G(φ) = Π_j exp(e^{iφ} H_j / 2).
//! ```
//!
//! The rotation measure `μ` is the image of the density
//! `(1/2)/(1 - cos ϕ)` on the arcs `π/2 ≤ |ϕ| ≤ π` under
//! `ϕ ↦ arg h(e^{iϕ})`. On those arcs `h(e^{iϕ}) = √(1-c²) - i c` with
//! `c = cot(ϕ/2) ∈ [-1, 1]`, so `φ = -arcsin(c)` and the image density is
//! `cos(φ)/2` on `[-π/2, π/2]`. [`build_mu`] integrates against that density
//! directly; [`build_mu_pushforward`] keeps the node-by-node construction as
//! an independent route.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{EigenDecomp, HermitianMatrix, C64};
use crate::quadrature::gauss_legendre_on;

/// Default Gauss-Legendre node count per arc.
pub const DEFAULT_NODES: usize = 128;

/// Traces below this are treated as an eigensolver failure.
const MIN_TRACE: f64 = 1e-300;

/// Inputs this close to the unit circle are evaluated on the circle.
const BOUNDARY_SNAP: f64 = 1e-12;

/// Slack used by [`kernel_bound_check`] to absorb rounding in the comparison.
const KERNEL_CMP_SLACK: f64 = 1e-15;

/// `h(z) = -(1+z)/(1-z) + √(((1+z)/(1-z))² + 1)`, mapping the closed unit disk
/// onto the right half-disk.
///
/// With `q = (1+z)/(1-z)` (right half-plane), the square root is the branch
/// continuous on `Re q ≥ 0` that is positive for real `q`; it agrees with the
/// principal root on the open disk and is evaluated as `q·√(1 + 1/q²)` when
/// `|q| ≥ 1` so boundary values never straddle the branch cut.
/// `h = 1/(q + √(q²+1))` avoids cancellation near `z = 1`.
pub fn conformal_h(z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "h is defined on the closed unit disk, got {z}"
        )));
    }
    let one = C64::new(1.0, 0.0);
    let den = one - z;
    if den.norm() == 0.0 {
        return Err(Error::Domain("h has a pole at z = 1".into()));
    }
    if (z.norm() - 1.0).abs() <= BOUNDARY_SNAP {
        return conformal_h_boundary(z.arg());
    }
    let q = (one + z) / den;
    let s = if q.norm() >= 1.0 {
        q * (one + (q * q).inv()).sqrt()
    } else {
        (q * q + one).sqrt()
    };
    let w = (q + s).inv();
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain(format!("h overflowed at z = {z}")));
    }
    Ok(w)
}

/// `h(e^{iϕ})` for `ϕ ∈ [-π, π]`, `ϕ ≠ 0`.
///
/// With `c = cot(ϕ/2)`: for `|ϕ| ≤ π/2` the value is `-i/(c(1 + √(1 - 1/c²)))`
/// on the imaginary axis, otherwise `√(1-c²) - ic` on the unit circle. The map
/// has a square-root corner at `|ϕ| = π/2`, so `c` is rebuilt from the offset
/// `δ = |ϕ| - π/2` via `t = tan(δ/2)`, `|c| = (1-t)/(1+t)`, which keeps both
/// arcs exact right up to the corner.
pub fn conformal_h_boundary(phi: f64) -> Result<C64> {
    if !phi.is_finite() || phi.abs() > PI + 1e-12 {
        return Err(Error::Domain(format!(
            "boundary angle must lie in [-pi, pi], got {phi}"
        )));
    }
    if phi == 0.0 {
        return Err(Error::Domain("h has a pole at z = 1".into()));
    }
    let sign = phi.signum();
    let t = (0.5 * (phi.abs().min(PI) - FRAC_PI_2)).tan();
    let c = sign * (1.0 - t) / (1.0 + t);
    if t <= 0.0 {
        let root = 2.0 * (-t).sqrt() / (1.0 - t);
        Ok(C64::new(0.0, -1.0 / (c * (1.0 + root))))
    } else {
        let root = 2.0 * t.sqrt() / (1.0 + t);
        Ok(C64::new(root, -c))
    }
}

/// Inverse map `f(w) = (w² + 2w - 1)/(w² - 2w - 1)`.
pub fn conformal_f_inv(w: C64) -> Result<C64> {
    let w2 = w * w;
    let num = w2 + 2.0 * w - 1.0;
    let den = w2 - 2.0 * w - 1.0;
    if den.norm() < 1e-300 {
        return Err(Error::Domain(format!("f has a pole at w = {w}")));
    }
    Ok(num / den)
}

/// Poisson kernel `(1-ρ²)/(1 - 2ρ cos φ + ρ²)` for `0 ≤ ρ < 1`.
pub fn poisson_kernel(rho: f64, phi: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) || !phi.is_finite() {
        return Err(Error::Domain(format!(
            "Poisson kernel needs 0 <= rho < 1, got rho = {rho}, phi = {phi}"
        )));
    }
    Ok(kernel_unchecked(rho, phi))
}

fn kernel_unchecked(rho: f64, phi: f64) -> f64 {
    (1.0 - rho * rho) / (1.0 - 2.0 * rho * phi.cos() + rho * rho)
}

/// The two sides of the kernel estimate and the kernel itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelBounds {
    pub lower: f64,
    pub kernel: f64,
    pub upper: f64,
}

impl KernelBounds {
    pub fn holds(&self) -> bool {
        self.lower <= self.kernel + KERNEL_CMP_SLACK && self.kernel <= self.upper + KERNEL_CMP_SLACK
    }
}

/// `(1-ρ)/(1-cos φ) - (1-ρ)²  ≤  kernel  ≤  (1-ρ)/(1-cos φ) + 2(1-ρ)²` for
/// `ρ ∈ [0, 1]`, `cos φ ∈ [-1, 0]`.
pub fn kernel_bounds(rho: f64, phi: f64) -> Result<KernelBounds> {
    let cos = phi.cos();
    if !(0.0..=1.0).contains(&rho) || !phi.is_finite() || cos > 1e-12 {
        return Err(invalid(format!(
            "kernel bounds need rho in [0,1] and cos(phi) in [-1,0], got rho = {rho}, cos = {cos}"
        )));
    }
    let gap = 1.0 - rho;
    let lead = gap / (1.0 - cos);
    Ok(KernelBounds {
        lower: lead - gap * gap,
        kernel: kernel_unchecked(rho, phi),
        upper: lead + 2.0 * gap * gap,
    })
}

pub fn kernel_bound_check(rho: f64, phi: f64) -> Result<bool> {
    Ok(kernel_bounds(rho, phi)?.holds())
}

/// Quadrature representation of the probability measure `μ` on `[-π/2, π/2]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MuMeasure {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MuMeasure {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ_j w_j g(φ_j)`.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * g(p))
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.weights.len() {
            return Err(invalid("mu: nodes and weights differ in length"));
        }
        let total = self.total_weight();
        if (total - 1.0).abs() > 1e-8 {
            return Err(invalid(format!("mu: total weight {total} is not 1")));
        }
        if self.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(invalid("mu: weights must be positive"));
        }
        if self.nodes.iter().any(|p| p.abs() > FRAC_PI_2 + 1e-12) {
            return Err(invalid("mu: nodes must lie in [-pi/2, pi/2]"));
        }
        Ok(())
    }
}

/// `μ` with density `cos(φ)/2`, Gauss-Legendre with `m` nodes on each of
/// `[-π/2, 0]` and `[0, π/2]`, normalized to unit mass.
pub fn build_mu(m: usize) -> Result<MuMeasure> {
    if m < 4 {
        return Err(invalid(format!(
            "mu needs at least 4 nodes per arc, got {m}"
        )));
    }
    let mut nodes = Vec::with_capacity(2 * m);
    let mut weights = Vec::with_capacity(2 * m);
    for (a, b) in [(-FRAC_PI_2, 0.0), (0.0, FRAC_PI_2)] {
        let (x, w) = gauss_legendre_on(m, a, b);
        for (p, v) in x.into_iter().zip(w) {
            nodes.push(p);
            weights.push(v * 0.5 * p.cos());
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mu = MuMeasure { nodes, weights };
    mu.validate()?;
    Ok(mu)
}

/// `μ` built node by node: Gauss-Legendre in `ϕ` on `[π/2, π]` and its mirror
/// with source density `(1/2)/(1 - cos ϕ)`, each node sent to
/// `arg h(e^{iϕ})`. Converges only algebraically because the map has a
/// square-root singularity at `|ϕ| = π/2`. Weights are renormalized to
/// absorb the quadrature error of the source mass.
pub fn build_mu_pushforward(m: usize) -> Result<MuMeasure> {
    if m < 4 {
        return Err(invalid(format!(
            "mu needs at least 4 nodes per arc, got {m}"
        )));
    }
    let (x, w) = gauss_legendre_on(m, FRAC_PI_2, PI);
    let mut pairs = Vec::with_capacity(2 * m);
    for (&src, &v) in x.iter().zip(&w) {
        let weight = v * 0.5 / (1.0 - src.cos());
        for s in [src, -src] {
            let image = conformal_h_boundary(s)?;
            pairs.push((image.arg(), weight));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mu = MuMeasure {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1 / total).collect(),
    };
    mu.validate()?;
    Ok(mu)
}

/// Result of one Golden-Thompson check; all quantities in nats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GtReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    #[serde(rename = "nodes")]
    pub quadrature_nodes: usize,
    pub integrand_min: f64,
}

fn check_dims(hs: &[HermitianMatrix]) -> Result<usize> {
    let d = hs
        .first()
        .ok_or_else(|| invalid("need at least one matrix"))?
        .dim();
    if hs.iter().any(|h| h.dim() != d) {
        return Err(invalid("all matrices must share one dimension"));
    }
    Ok(d)
}

/// `log tr exp(A)` via log-sum-exp over the spectrum.
pub fn log_trace_exp(a: &HermitianMatrix) -> f64 {
    log_sum_exp(&a.eigenvalues())
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// Spectral data for a fixed tuple `H_1..H_k`, reused across quadrature nodes.
pub struct GtProblem {
    eigs: Vec<EigenDecomp>,
    dim: usize,
    lhs: f64,
}

impl GtProblem {
    pub fn new(hs: &[HermitianMatrix]) -> Result<Self> {
        let dim = check_dims(hs)?;
        let total = HermitianMatrix::sum(hs);
        Ok(Self {
            eigs: hs.iter().map(|h| h.eig()).collect(),
            dim,
            lhs: log_trace_exp(&total),
        })
    }

    pub fn lhs(&self) -> f64 {
        self.lhs
    }

    /// `Re tr[Π_{j=1}^k exp(e^{iφ}H_j/2) Π_{j=k}^1 exp(e^{-iφ}H_j/2)]`, with the
    /// imaginary part checked against `1e-10` relative.
    pub fn integrand(&self, phi: f64) -> Result<f64> {
        let z = C64::from_polar(0.5, phi);
        let zc = z.conj();
        let mut left = crate::linalg::ComplexMatrix::identity(self.dim);
        let mut right = left.clone();
        for e in &self.eigs {
            left = &left * &e.map_spectrum(|l| (z * l).exp());
        }
        for e in self.eigs.iter().rev() {
            right = &right * &e.map_spectrum(|l| (zc * l).exp());
        }
        let tr = (&left * &right).trace();
        if tr.im.abs() > 1e-10 * tr.re.abs().max(1e-300) && tr.im.abs() > 1e-12 {
            return Err(Error::Numerical(format!(
                "two-sided trace has imaginary part {} (real part {}) at phi = {phi}",
                tr.im, tr.re
            )));
        }
        Ok(tr.re)
    }

    pub fn verify(&self, mu: &MuMeasure) -> Result<GtReport> {
        let mut integral = 0.0;
        let mut integrand_min = f64::INFINITY;
        for (&phi, &w) in mu.nodes.iter().zip(&mu.weights) {
            let value = self.integrand(phi)?;
            integrand_min = integrand_min.min(value);
            if !(value >= MIN_TRACE) {
                return Err(Error::Numerical(format!(
                    "two-sided trace {value:e} at phi = {phi} is not positive"
                )));
            }
            integral += w * value.ln();
        }
        let rhs = 4.0 / PI * integral;
        Ok(GtReport {
            lhs: self.lhs,
            rhs,
            margin: rhs - self.lhs,
            quadrature_nodes: mu.len(),
            integrand_min,
        })
    }
}

/// Two-sided trace at a single angle.
pub fn gt_rhs_integrand(hs: &[HermitianMatrix], phi: f64) -> Result<f64> {
    GtProblem::new(hs)?.integrand(phi)
}

/// Both sides of the bounded multi-matrix Golden-Thompson inequality with
/// `μ = build_mu(m)`.
pub fn gt_multi_verify(hs: &[HermitianMatrix], m: usize) -> Result<GtReport> {
    let mu = build_mu(m)?;
    GtProblem::new(hs)?.verify(&mu)
}

/// `tr[exp(H_1)..exp(H_k)]`, the one-sided product of the naive
/// multi-matrix Golden-Thompson inequality.
pub fn naive_product_trace(hs: &[HermitianMatrix]) -> Result<C64> {
    let dim = check_dims(hs)?;
    let mut g = crate::linalg::ComplexMatrix::identity(dim);
    for h in hs {
        g = &g * h.exp().as_matrix();
    }
    Ok(g.trace())
}

/// A tuple with `Re tr[Π_j exp(H_j)] < tr exp(Σ_j H_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveGtWitness {
    pub matrices: Vec<HermitianMatrix>,
    pub product_trace_re: f64,
    pub product_trace_im: f64,
    pub trace_exp_sum: f64,
}

impl NaiveGtWitness {
    /// Recomputes both sides; `Some` when the tuple still violates the
    /// naive inequality.
    pub fn recheck(matrices: Vec<HermitianMatrix>) -> Result<Option<Self>> {
        let prod = naive_product_trace(&matrices)?;
        let trace_exp_sum = HermitianMatrix::sum(&matrices).exp().as_matrix().trace().re;
        Ok((prod.re < trace_exp_sum).then_some(Self {
            matrices,
            product_trace_re: prod.re,
            product_trace_im: prod.im,
            trace_exp_sum,
        }))
    }
}

/// Random search over `k`-tuples of `d×d` Hermitian matrices of operator norm
/// `scale` for a violation of the naive inequality.
pub fn search_naive_gt_witness(
    seed: u64,
    k: usize,
    d: usize,
    scale: f64,
    max_trials: usize,
) -> Result<Option<NaiveGtWitness>> {
    if k == 0 || d == 0 {
        return Err(invalid("need k >= 1 and d >= 1"));
    }
    let mut rng = crate::rng::seeded_rng(seed);
    for _ in 0..max_trials {
        let hs: Vec<HermitianMatrix> = (0..k)
            .map(|_| crate::rng::random_hermitian_with_norm(&mut rng, d, scale))
            .collect();
        if let Some(w) = NaiveGtWitness::recheck(hs)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// `(2/θ) log ‖G(θ)‖_{2/θ}` with `G(θ) = Π_j exp(θ H_j / 2)`, which equals
/// `log tr[(G G*)^{1/θ}]` and tends to `log tr exp(Σ H_j)` as `θ → 0⁺`.
pub fn trotter_power(hs: &[HermitianMatrix], theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(invalid(format!("theta must lie in (0, 1], got {theta}")));
    }
    let dim = check_dims(hs)?;
    let mut g = crate::linalg::ComplexMatrix::identity(dim);
    for h in hs {
        g = &g
            * &h.eig()
                .map_spectrum(|l| C64::new((0.5 * theta * l).exp(), 0.0));
    }
    let gram = HermitianMatrix::symmetrized(&(&g * &g.adjoint()));
    let logs: Vec<f64> = gram
        .eigenvalues()
        .into_iter()
        .filter(|&s| s > 0.0)
        .map(|s| s.ln() / theta)
        .collect();
    Ok(log_sum_exp(&logs))
}
