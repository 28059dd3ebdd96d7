//! Martingale approximation of walk sums.
//!
//! With `Y_1^{(t)} = P^{t-1}f(v_1)`, `Y_i^{(t)} = P^{t-1}f(v_i) - P^t f(v_{i-1})`
//! and `Z_i = Σ_{t=1}^{min(k+1-i, T)} Y_i^{(t)}`, the walk average splits as
//!
//! ```text
//! (1/k) Σ_i f(v_i) = W + (1/k) Σ_i Z_i,   W = (1/k) Σ_{i=1}^{k-T} (P^T f)(v_i).
//! ```
//!
//! Each `Z_i` has zero conditional mean given `v_1..v_{i-1}` and `W` shrinks
//! geometrically in `T`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::expander::ExpanderGraph;
use crate::linalg::HermitianMatrix;
use crate::rng::{stream_rng, uniform_below};
use crate::sampler::{wilson_interval, MatrixFn, WILSON_Z95};

/// Slack on the reconstruction identity.
pub const RECONSTRUCTION_TOL: f64 = 1e-12;
/// Slack on exact conditional means.
pub const CONDITIONAL_TOL: f64 = 1e-10;
/// Slack on the norm bounds.
pub const BOUND_TOL: f64 = 1e-9;

const LAMBDA_ONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixNorm {
    Spectral,
    Schatten2,
    Schatten1,
    EntryMax,
}

impl MatrixNorm {
    pub const ALL: [MatrixNorm; 4] = [
        Self::Spectral,
        Self::Schatten2,
        Self::Schatten1,
        Self::EntryMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Spectral => "spectral",
            Self::Schatten2 => "schatten2",
            Self::Schatten1 => "schatten1",
            Self::EntryMax => "entry_max",
        }
    }

    pub fn eval(self, m: &HermitianMatrix) -> f64 {
        match self {
            Self::Spectral => m.spectral_norm(),
            Self::Schatten2 => m.as_matrix().frobenius_norm(),
            Self::Schatten1 => m.eigenvalues().iter().map(|x| x.abs()).sum(),
            Self::EntryMax => m.as_matrix().max_abs(),
        }
    }
}

impl fmt::Display for MatrixNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| {
                invalid(format!(
                    "unknown norm '{s}' (spectral, schatten2, schatten1, entry_max)"
                ))
            })
    }
}

/// `(Pf)(v) = (1/D) Σ_{u ~ v} f(u)`.
pub fn apply_p(g: &ExpanderGraph, f: &MatrixFn) -> Result<MatrixFn> {
    f.check_graph(g)?;
    let inv = 1.0 / g.degree() as f64;
    let table = (0..g.n())
        .map(|v| HermitianMatrix::sum(g.neighbors(v).iter().map(|&u| f.get(u))).scaled(inv))
        .collect();
    MatrixFn::new_unchecked(table)
}

/// `[f, Pf, …, P^{T-1} f]`.
pub fn p_power_table(g: &ExpanderGraph, f: &MatrixFn, depth: usize) -> Result<Vec<MatrixFn>> {
    if depth == 0 {
        return Err(invalid("truncation depth must be at least 1"));
    }
    f.check_graph(g)?;
    let mut out = Vec::with_capacity(depth);
    out.push(f.clone());
    for _ in 1..depth {
        let next = apply_p(g, out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

/// `T = min(k, ⌈2 ln(F/ε)/(1-λ)⌉)`.
pub fn truncation_depth(f_norm: f64, epsilon: f64, lambda: f64, k: usize) -> Result<usize> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if lambda >= 1.0 - LAMBDA_ONE_TOL {
        return Err(Error::NonExpander { lambda });
    }
    if !(epsilon > 0.0) || !(epsilon < f_norm) {
        return Err(invalid(format!(
            "epsilon must lie in (0, F) with F = {f_norm}, got {epsilon}"
        )));
    }
    let raw = (2.0 * (f_norm / epsilon).ln() / (1.0 - lambda)).ceil();
    Ok((raw.max(1.0) as usize).min(k))
}

/// One decomposed walk.
#[derive(Debug, Clone, Serialize)]
pub struct MartingaleDecomp {
    #[serde(rename = "T")]
    pub depth: usize,
    pub z: Vec<HermitianMatrix>,
    pub w: HermitianMatrix,
    pub epsilon_target: f64,
    pub lambda: f64,
    pub f_norm: f64,
    /// `‖(1/k)Σf(v_i) - W - (1/k)ΣZ_i‖_max`.
    pub residual: f64,
}

impl MartingaleDecomp {
    pub fn k(&self) -> usize {
        self.z.len()
    }

    pub fn dump(&self) -> DecompDump {
        DecompDump {
            depth: self.depth,
            z_norms: self
                .z
                .iter()
                .map(|z| NormRow {
                    spectral: MatrixNorm::Spectral.eval(z),
                    schatten2: MatrixNorm::Schatten2.eval(z),
                    schatten1: MatrixNorm::Schatten1.eval(z),
                    entry_max: MatrixNorm::EntryMax.eval(z),
                })
                .collect(),
            w_schatten2: MatrixNorm::Schatten2.eval(&self.w),
            residual: self.residual,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormRow {
    pub spectral: f64,
    pub schatten2: f64,
    pub schatten1: f64,
    pub entry_max: f64,
}

/// Compact JSON form of a decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct DecompDump {
    #[serde(rename = "T")]
    pub depth: usize,
    pub z_norms: Vec<NormRow>,
    pub w_schatten2: f64,
    pub residual: f64,
}

/// Precomputed `P^t f` for `t = 0..=T`, shared by every walk of length `k`.
#[derive(Debug, Clone)]
pub struct Decomposer<'a> {
    graph: &'a ExpanderGraph,
    k: usize,
    epsilon: f64,
    lambda: f64,
    f_norm: f64,
    depth: usize,
    powers: Vec<MatrixFn>,
}

impl<'a> Decomposer<'a> {
    pub fn new(graph: &'a ExpanderGraph, f: &MatrixFn, k: usize, epsilon: f64) -> Result<Self> {
        f.check_graph(graph)?;
        let lambda = graph.lambda();
        let f_norm = f.f_norm();
        let depth = truncation_depth(f_norm, epsilon, lambda, k)?;
        let powers = p_power_table(graph, f, depth + 1)?;
        Ok(Self {
            graph,
            k,
            epsilon,
            lambda,
            f_norm,
            depth,
            powers,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn f_norm(&self) -> f64 {
        self.f_norm
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `P^t f`, for `t ≤ T`.
    pub fn power(&self, t: usize) -> &MatrixFn {
        &self.powers[t]
    }

    fn terms(&self, i: usize) -> usize {
        (self.k + 1 - i).min(self.depth)
    }

    /// `Z_1` as a function of the start vertex.
    pub fn z_first(&self, v: usize) -> HermitianMatrix {
        let m = self.terms(1);
        HermitianMatrix::sum((0..m).map(|t| self.powers[t].get(v)))
    }

    /// `Z_i` for `i ≥ 2` (1-based) on the step `u → w`.
    pub fn z_step(&self, i: usize, u: usize, w: usize) -> HermitianMatrix {
        debug_assert!(i >= 2 && i <= self.k);
        let m = self.terms(i);
        let plus = HermitianMatrix::sum((0..m).map(|t| self.powers[t].get(w)));
        let minus = HermitianMatrix::sum((1..=m).map(|t| self.powers[t].get(u)));
        &plus - &minus
    }

    pub fn decompose(&self, walk: &[usize]) -> Result<MartingaleDecomp> {
        if walk.len() != self.k {
            return Err(invalid(format!(
                "walk has {} vertices, expected k = {}",
                walk.len(),
                self.k
            )));
        }
        if let Some(&v) = walk.iter().find(|&&v| v >= self.graph.n()) {
            return Err(invalid(format!("vertex {v} is out of range")));
        }
        let inv_k = 1.0 / self.k as f64;
        let mut z = Vec::with_capacity(self.k);
        z.push(self.z_first(walk[0]));
        for i in 2..=self.k {
            z.push(self.z_step(i, walk[i - 2], walk[i - 1]));
        }
        let top = &self.powers[self.depth];
        let rest = &walk[..self.k - self.depth];
        let w = if rest.is_empty() {
            HermitianMatrix::zeros(top.d())
        } else {
            HermitianMatrix::sum(rest.iter().map(|&v| top.get(v))).scaled(inv_k)
        };
        let mean = HermitianMatrix::sum(walk.iter().map(|&v| self.powers[0].get(v))).scaled(inv_k);
        let rebuilt = &w + &HermitianMatrix::sum(&z).scaled(inv_k);
        let residual = mean.as_matrix().max_abs_diff(rebuilt.as_matrix());
        Ok(MartingaleDecomp {
            depth: self.depth,
            z,
            w,
            epsilon_target: self.epsilon,
            lambda: self.lambda,
            f_norm: self.f_norm,
            residual,
        })
    }
}

pub fn decompose(
    g: &ExpanderGraph,
    f: &MatrixFn,
    walk: &[usize],
    epsilon: f64,
) -> Result<MartingaleDecomp> {
    Decomposer::new(g, f, walk.len(), epsilon)?.decompose(walk)
}

#[derive(Debug, Clone, Serialize)]
pub struct MartingaleReport {
    pub depth: usize,
    /// `‖(1/n) Σ_v Z_1(v)‖_max`.
    pub first_mean: f64,
    /// Largest `‖Σ_w P(u,w) Z_i(u→w)‖_max` over the checked `(i, u)`.
    pub max_conditional_mean: f64,
    pub pairs_checked: usize,
    pub satisfied: bool,
}

/// Exact conditional means of `Z_i` given `v_{i-1} = u`. All pairs
/// `(i, u)` are checked when there are at most `samples` of them, otherwise
/// `samples` pairs are drawn from `rng_seed`.
pub fn verify_martingale_property(
    g: &ExpanderGraph,
    f: &MatrixFn,
    epsilon: f64,
    k: usize,
    samples: usize,
    rng_seed: u64,
) -> Result<MartingaleReport> {
    let dec = Decomposer::new(g, f, k, epsilon)?;
    let n = g.n();
    let first = HermitianMatrix::sum(&(0..n).map(|v| dec.z_first(v)).collect::<Vec<_>>())
        .scaled(1.0 / n as f64);
    let first_mean = first.as_matrix().max_abs();

    let total = (k - 1) * n;
    let pairs: Vec<(usize, usize)> = if total <= samples {
        (2..=k).flat_map(|i| (0..n).map(move |u| (i, u))).collect()
    } else {
        let mut rng = stream_rng(rng_seed, 0);
        (0..samples)
            .map(|_| {
                let i = 2 + uniform_below(&mut rng, (k - 1) as u64) as usize;
                let u = uniform_below(&mut rng, n as u64) as usize;
                (i, u)
            })
            .collect()
    };
    let inv_deg = 1.0 / g.degree() as f64;
    let max_conditional_mean = pairs
        .par_iter()
        .map(|&(i, u)| {
            let steps: Vec<HermitianMatrix> = g
                .neighbors(u)
                .iter()
                .map(|&w| dec.z_step(i, u, w))
                .collect();
            HermitianMatrix::sum(&steps)
                .scaled(inv_deg)
                .as_matrix()
                .max_abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(MartingaleReport {
        depth: dec.depth(),
        first_mean,
        max_conditional_mean,
        pairs_checked: pairs.len(),
        satisfied: first_mean <= CONDITIONAL_TOL && max_conditional_mean <= CONDITIONAL_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NormBound {
    pub norm: MatrixNorm,
    /// `M_* = max_v ‖f(v)‖_*`.
    pub m_star: f64,
    pub max_z: f64,
    /// `2 T M_*`, the asserted bound.
    pub bound: f64,
    /// Number of `i` with `‖Z_i‖_* > T M_*`; informational.
    pub above_tm: usize,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub depth: usize,
    pub norms: Vec<NormBound>,
    pub w_schatten2: f64,
    pub epsilon_target: f64,
    /// `λ^{T/2} F`.
    pub w_chain: f64,
    /// `exp(-(1-λ)T/2) F`.
    pub w_chain_exp: f64,
    /// The remainder sum is empty (`T = k`), so `W = 0`.
    pub w_empty: bool,
    pub satisfied: bool,
}

/// Norm certificates for one decomposition. Each `Y_i^{(t)}` is a
/// difference of two values of norm at most `M_*`, so `‖Z_i‖_* ≤ 2TM_*`
/// is what gets asserted; exceedances of `TM_*` are counted separately.
pub fn verify_bounds(dec: &MartingaleDecomp, f: &MatrixFn, norms: &[MatrixNorm]) -> BoundsReport {
    let t = dec.depth as f64;
    let rows: Vec<NormBound> = norms
        .iter()
        .map(|&norm| {
            let m_star = f.table().iter().map(|m| norm.eval(m)).fold(0.0, f64::max);
            let values: Vec<f64> = dec.z.iter().map(|z| norm.eval(z)).collect();
            let max_z = values.iter().copied().fold(0.0, f64::max);
            let bound = 2.0 * t * m_star;
            NormBound {
                norm,
                m_star,
                max_z,
                bound,
                above_tm: values
                    .iter()
                    .filter(|&&x| x > t * m_star + BOUND_TOL)
                    .count(),
                satisfied: max_z <= bound + BOUND_TOL,
            }
        })
        .collect();
    let w_schatten2 = MatrixNorm::Schatten2.eval(&dec.w);
    let w_empty = dec.depth >= dec.k();
    let w_chain = dec.lambda.powf(t / 2.0) * dec.f_norm;
    let w_chain_exp = (-(1.0 - dec.lambda) * t / 2.0).exp() * dec.f_norm;
    let w_ok = if w_empty {
        w_schatten2 == 0.0
    } else {
        w_schatten2 <= dec.epsilon_target + BOUND_TOL && w_schatten2 <= w_chain + BOUND_TOL
    };
    BoundsReport {
        depth: dec.depth,
        satisfied: w_ok && rows.iter().all(|r| r.satisfied) && dec.residual <= RECONSTRUCTION_TOL,
        norms: rows,
        w_schatten2,
        epsilon_target: dec.epsilon_target,
        w_chain,
        w_chain_exp,
        w_empty,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub walks: usize,
    pub k: usize,
    pub depth: usize,
    pub max_residual: f64,
    pub max_w_schatten2: f64,
    /// Per norm, the largest `‖Z_i‖_*` seen and its bound.
    pub norms: Vec<NormBound>,
    pub failures: usize,
    pub satisfied: bool,
}

/// Decomposes `walks` independent stationary walks and checks every
/// certificate on each.
pub fn bounds_campaign(
    g: &ExpanderGraph,
    f: &MatrixFn,
    k: usize,
    epsilon: f64,
    walks: usize,
    rng_seed: u64,
) -> Result<CampaignReport> {
    let dec = Decomposer::new(g, f, k, epsilon)?;
    let reports: Vec<(f64, BoundsReport)> = (0..walks as u64)
        .into_par_iter()
        .map(|i| {
            let mut walk = vec![0; k];
            g.fill_walk(&mut stream_rng(rng_seed, i), &mut walk);
            let d = dec.decompose(&walk)?;
            Ok((d.residual, verify_bounds(&d, f, &MatrixNorm::ALL)))
        })
        .collect::<Result<_>>()?;
    let mut norms: Vec<NormBound> = MatrixNorm::ALL
        .iter()
        .map(|&norm| NormBound {
            norm,
            m_star: 0.0,
            max_z: 0.0,
            bound: 0.0,
            above_tm: 0,
            satisfied: true,
        })
        .collect();
    for (_, r) in &reports {
        for (agg, row) in norms.iter_mut().zip(&r.norms) {
            agg.m_star = row.m_star;
            agg.bound = row.bound;
            agg.max_z = agg.max_z.max(row.max_z);
            agg.above_tm += row.above_tm;
            agg.satisfied &= row.satisfied;
        }
    }
    let failures = reports.iter().filter(|(_, r)| !r.satisfied).count();
    Ok(CampaignReport {
        walks,
        k,
        depth: dec.depth(),
        max_residual: reports.iter().map(|(res, _)| *res).fold(0.0, f64::max),
        max_w_schatten2: reports
            .iter()
            .map(|(_, r)| r.w_schatten2)
            .fold(0.0, f64::max),
        norms,
        failures,
        satisfied: failures == 0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ShrinkReport {
    /// `Σ_v ‖Pf(v)‖₂²`.
    pub lhs: f64,
    /// `Σ_v ‖f(v)‖₂²`.
    pub base: f64,
    pub ratio: f64,
    pub lambda: f64,
    /// `ratio ≤ λ`, the asserted form.
    pub holds: bool,
    /// `ratio ≤ λ²`; informational.
    pub within_lambda_sq: bool,
}

pub fn verify_shrink(g: &ExpanderGraph, f: &MatrixFn) -> Result<ShrinkReport> {
    let pf = apply_p(g, f)?;
    let sq = |h: &MatrixFn| h.f_norm().powi(2);
    let lhs = sq(&pf);
    let base = sq(f);
    let lambda = g.lambda();
    let ratio = if base > 0.0 { lhs / base } else { 0.0 };
    Ok(ShrinkReport {
        lhs,
        base,
        ratio,
        lambda,
        holds: lhs <= lambda * base + 1e-12 * base.max(1.0),
        within_lambda_sq: lhs <= lambda * lambda * base + 1e-12 * base.max(1.0),
    })
}

/// Monte-Carlo look at the operator-norm corollary: the decomposition at
/// `ε/2` splits `P[‖(1/k)Σf‖ > ε]` into a martingale tail and a remainder
/// that never exceeds `ε/2`. The fitted constant `c` solves
/// `p = 2d exp(-c x)` with `x = kε²(1-λ)²/ln²(nd)`; it is reported, not checked.
#[derive(Debug, Clone, Serialize)]
pub struct CorollaryReport {
    pub k: usize,
    pub epsilon: f64,
    pub trials: u64,
    pub depth: usize,
    pub p_direct: f64,
    pub p_martingale: f64,
    pub ci_martingale: (f64, f64),
    pub max_w_spectral: f64,
    pub x: f64,
    pub fitted_c: Option<f64>,
}

pub fn corollary_experiment(
    g: &ExpanderGraph,
    f: &MatrixFn,
    k: usize,
    epsilon: f64,
    trials: u64,
    rng_seed: u64,
) -> Result<CorollaryReport> {
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let dec = Decomposer::new(g, f, k, epsilon / 2.0)?;
    let inv_k = 1.0 / k as f64;
    let (direct, mart, w_max) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut walk = vec![0; k];
            g.fill_walk(&mut stream_rng(rng_seed, i), &mut walk);
            let d = dec.decompose(&walk).expect("walk has length k");
            let mean = HermitianMatrix::sum(walk.iter().map(|&v| f.get(v))).scaled(inv_k);
            let zbar = HermitianMatrix::sum(&d.z).scaled(inv_k);
            (
                (mean.spectral_norm() > epsilon) as u64,
                (zbar.spectral_norm() > epsilon / 2.0) as u64,
                d.w.spectral_norm(),
            )
        })
        .reduce(|| (0, 0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2.max(b.2)));
    let lambda = dec.lambda();
    let nd = (g.n() * f.d()) as f64;
    let x = k as f64 * epsilon * epsilon * (1.0 - lambda).powi(2) / nd.ln().powi(2);
    let p_martingale = mart as f64 / trials as f64;
    let fitted_c =
        (p_martingale > 0.0 && x > 0.0).then(|| -(p_martingale / (2.0 * f.d() as f64)).ln() / x);
    Ok(CorollaryReport {
        k,
        epsilon,
        trials,
        depth: dec.depth(),
        p_direct: direct as f64 / trials as f64,
        p_martingale,
        ci_martingale: wilson_interval(mart, trials, WILSON_Z95),
        max_w_spectral: w_max,
        x,
        fitted_c,
    })
}
