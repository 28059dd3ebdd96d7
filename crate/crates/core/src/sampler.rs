//! Matrix-valued functions on vertices and tail probabilities of their walk
//! averages.
//!
//! For a mean-zero `f: V → H_d` with `‖f(v)‖ ≤ 1` the quantity of interest is
//! `P[λ_max((1/k) Σ_j f(v_j)) ≥ ε]` over a stationary walk. It is estimated by
//! Monte Carlo ([`tail_mc`]) or computed exactly ([`tail_exact`]) from the walk
//! law, and compared with `d^{2-π/4} exp(-ε²(1-λ)k/80)` ([`bound_main`]).

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::expander::{ExpanderGraph, Walk};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};
use crate::rng::{random_hermitian, seeded_rng, stream_rng};

/// Exceedance is `λ_max ≥ ε - EXCEED_TOL`, so exact ties count.
pub const EXCEED_TOL: f64 = 1e-12;

/// Default cap on enumeration work for [`tail_exact`].
pub const DEFAULT_ENUM_BUDGET: u128 = 100_000_000;

/// Two-sided 97.5% standard normal quantile.
pub const WILSON_Z95: f64 = 1.959_963_984_540_054;

const MEAN_ZERO_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;

/// A function `f: [n] → H_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFnJson", into = "MatrixFnJson")]
pub struct MatrixFn {
    n: usize,
    d: usize,
    table: Vec<HermitianMatrix>,
}

#[derive(Serialize, Deserialize)]
struct MatrixFnJson {
    n: usize,
    d: usize,
    matrices: Vec<HermitianMatrix>,
}

impl TryFrom<MatrixFnJson> for MatrixFn {
    type Error = Error;

    fn try_from(j: MatrixFnJson) -> Result<Self> {
        if j.matrices.len() != j.n {
            return Err(invalid(format!(
                "declared n = {} but {} matrices",
                j.n,
                j.matrices.len()
            )));
        }
        if j.matrices.iter().any(|m| m.dim() != j.d) {
            return Err(invalid(format!("every matrix must be {0}x{0}", j.d)));
        }
        MatrixFn::new(j.matrices)
    }
}

impl From<MatrixFn> for MatrixFnJson {
    fn from(f: MatrixFn) -> Self {
        Self {
            n: f.n,
            d: f.d,
            matrices: f.table,
        }
    }
}

impl MatrixFn {
    /// Checks `‖Σ_v f(v)‖_max ≤ 1e-10·n` and `max_v ‖f(v)‖ ≤ 1 + 1e-10`.
    pub fn new(table: Vec<HermitianMatrix>) -> Result<Self> {
        let f = Self::new_unchecked(table)?;
        let drift = f.sum().as_matrix().max_abs();
        if drift > MEAN_ZERO_TOL * f.n as f64 {
            return Err(invalid(format!(
                "f is not mean-zero (max entry of the sum is {drift:e})"
            )));
        }
        let m = f.m_max();
        if m > 1.0 + NORM_TOL {
            return Err(invalid(format!("max_v ||f(v)|| = {m} exceeds 1")));
        }
        Ok(f)
    }

    /// Only shape checks; used for functions that are not mean-zero.
    pub fn new_unchecked(table: Vec<HermitianMatrix>) -> Result<Self> {
        let d = table
            .first()
            .ok_or_else(|| invalid("f needs at least one vertex"))?
            .dim();
        if table.iter().any(|m| m.dim() != d) {
            return Err(invalid("all values of f must share one dimension"));
        }
        Ok(Self {
            n: table.len(),
            d,
            table,
        })
    }

    /// Scalar function (`d = 1`).
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&x| HermitianMatrix::from_real_diag(&[x]))
                .collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, v: usize) -> &HermitianMatrix {
        &self.table[v]
    }

    pub fn table(&self) -> &[HermitianMatrix] {
        &self.table
    }

    pub fn sum(&self) -> HermitianMatrix {
        HermitianMatrix::sum(&self.table)
    }

    /// `F = √(Σ_v ‖f(v)‖₂²)` (Frobenius norms).
    pub fn f_norm(&self) -> f64 {
        self.table
            .iter()
            .map(|m| m.as_matrix().frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `max_v ‖f(v)‖` (operator norm).
    pub fn m_max(&self) -> f64 {
        self.table
            .iter()
            .map(HermitianMatrix::spectral_norm)
            .fold(0.0, f64::max)
    }

    /// `-f`, for lower-tail questions.
    pub fn negated(&self) -> Self {
        Self {
            n: self.n,
            d: self.d,
            table: self.table.iter().map(|m| -m).collect(),
        }
    }

    pub fn check_graph(&self, g: &ExpanderGraph) -> Result<()> {
        if g.n() != self.n {
            return Err(invalid(format!(
                "f is defined on {} vertices but the graph has {}",
                self.n,
                g.n()
            )));
        }
        Ok(())
    }
}

/// Random mean-zero `f` with `max_v ‖f(v)‖ = 1`: Gaussian Hermitian draws,
/// centered, then divided by the largest operator norm. The last value is
/// set to minus the sum of the others, so `Σ_v f(v) = 0` holds exactly.
pub fn gen_mean_zero_fn(rng_seed: u64, n: usize, d: usize) -> Result<MatrixFn> {
    if n < 2 || d < 1 {
        return Err(invalid(format!(
            "need n >= 2 and d >= 1, got n = {n}, d = {d}"
        )));
    }
    let mut rng = seeded_rng(rng_seed);
    let raw: Vec<HermitianMatrix> = (0..n).map(|_| random_hermitian(&mut rng, d)).collect();
    let mean = HermitianMatrix::sum(&raw).scaled(1.0 / n as f64);
    let centered: Vec<HermitianMatrix> = raw.iter().map(|m| m - &mean).collect();
    let scale = centered
        .iter()
        .map(HermitianMatrix::spectral_norm)
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return MatrixFn::new(centered);
    }
    let mut scaled: Vec<HermitianMatrix> = centered.iter().map(|m| m.scaled(1.0 / scale)).collect();
    // Rebuild the last value from the others so the sum is exactly zero.
    let head = HermitianMatrix::sum(&scaled[..n - 1]);
    scaled[n - 1] = -&head;
    MatrixFn::new(scaled)
}

/// `(1/k) Σ_j f(v_j)`.
pub fn empirical_mean(f: &MatrixFn, walk: &Walk) -> Result<HermitianMatrix> {
    if walk.is_empty() {
        return Err(invalid("empty walk"));
    }
    if let Some(&v) = walk.vertices.iter().find(|&&v| v >= f.n()) {
        return Err(invalid(format!(
            "walk visits vertex {v} but f has n = {}",
            f.n()
        )));
    }
    let mut acc = vec![C64::new(0.0, 0.0); f.d() * f.d()];
    for &v in &walk.vertices {
        add_into(&mut acc, f.get(v), 1.0);
    }
    Ok(finish_mean(acc, f.d(), walk.len()))
}

fn add_into(acc: &mut [C64], m: &HermitianMatrix, c: f64) {
    for (a, x) in acc.iter_mut().zip(m.as_matrix().data()) {
        *a += x * c;
    }
}

fn finish_mean(mut acc: Vec<C64>, d: usize, k: usize) -> HermitianMatrix {
    let inv = 1.0 / k as f64;
    acc.iter_mut().for_each(|z| *z *= inv);
    HermitianMatrix::from_exact(ComplexMatrix::new(d, acc).expect("finite sum of finite matrices"))
}

fn lambda_max_of(acc: &[C64], d: usize, k: usize) -> f64 {
    if d == 1 {
        return acc[0].re / k as f64;
    }
    finish_mean(acc.to_vec(), d, k).lambda_max()
}

/// Which form of the expander Chernoff bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// `d^{2-π/4} exp(-ε²(1-λ)k/80)`.
    Main,
    /// `d^{2-π/4} exp(-ε²(1-λ)k/72)`, the last line of the proof chain.
    Chain72,
}

impl BoundVariant {
    fn constant(self) -> f64 {
        match self {
            Self::Main => 80.0,
            Self::Chain72 => 72.0,
        }
    }
}

fn check_bound_args(d: usize, lambda: f64, k: usize, epsilon: f64) -> Result<()> {
    if d == 0 {
        return Err(invalid("d must be at least 1"));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(invalid(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(invalid(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    Ok(())
}

fn bound_formula(d: usize, lambda: f64, k: usize, epsilon: f64, variant: BoundVariant) -> f64 {
    let prefactor = (d as f64).powf(2.0 - PI / 4.0);
    prefactor * (-epsilon * epsilon * (1.0 - lambda) * k as f64 / variant.constant()).exp()
}

/// `d^{2-π/4} exp(-ε²(1-λ)k/80)`.
pub fn bound_main(d: usize, lambda: f64, k: usize, epsilon: f64) -> Result<f64> {
    bound_variant(d, lambda, k, epsilon, BoundVariant::Main)
}

pub fn bound_variant(
    d: usize,
    lambda: f64,
    k: usize,
    epsilon: f64,
    variant: BoundVariant,
) -> Result<f64> {
    check_bound_args(d, lambda, k, epsilon)?;
    Ok(bound_formula(d, lambda, k, epsilon, variant))
}

/// The proof chain before simplification: with `t = (1-λ)ε/36`,
/// `d^{2-π/4} exp((4/π)² k t² · 9/(1-λ) - k t ε)`.
pub fn bound_chain_exact(d: usize, lambda: f64, k: usize, epsilon: f64) -> Result<f64> {
    check_bound_args(d, lambda, k, epsilon)?;
    if lambda >= 1.0 {
        return Ok((d as f64).powf(2.0 - PI / 4.0));
    }
    let t = (1.0 - lambda) * epsilon / 36.0;
    let kf = k as f64;
    let c = 4.0 / PI;
    let exponent = c * c * kf * t * t * 9.0 / (1.0 - lambda) - kf * t * epsilon;
    Ok((d as f64).powf(2.0 - PI / 4.0) * exponent.exp())
}

/// Independent-sample matrix Hoeffding bound `d exp(-kε²/8)` for averages of
/// i.i.d. mean-zero `f(v)` with `‖f(v)‖ ≤ 1`.
pub fn bound_iid_hoeffding(d: usize, k: usize, epsilon: f64) -> Result<f64> {
    check_bound_args(d, 0.0, k, epsilon)?;
    Ok(d as f64 * (-(k as f64) * epsilon * epsilon / 8.0).exp())
}

/// Wilson score interval at `z`, clamped to `[0, 1]`.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// Which extreme eigenvalue is tested.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// `λ_max(mean) ≥ ε`.
    #[default]
    Upper,
    /// `λ_min(mean) ≤ -ε`, evaluated as the upper tail of `-f`.
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub k: usize,
    pub epsilon: f64,
    /// Number of Monte-Carlo trials; 0 for an exact computation.
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
    pub lambda: f64,
    pub d: usize,
    pub n: usize,
    pub tail: Tail,
    pub satisfied: bool,
}

fn report_bound(d: usize, lambda: f64, k: usize, epsilon: f64) -> f64 {
    bound_formula(d, lambda, k, epsilon.max(0.0), BoundVariant::Main)
}

fn check_tail_args(g: &ExpanderGraph, f: &MatrixFn, k: usize, epsilon: f64) -> Result<()> {
    f.check_graph(g)?;
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

fn oriented(f: &MatrixFn, tail: Tail) -> std::borrow::Cow<'_, MatrixFn> {
    match tail {
        Tail::Upper => std::borrow::Cow::Borrowed(f),
        Tail::Lower => std::borrow::Cow::Owned(f.negated()),
    }
}

/// Monte-Carlo tail estimate; trial `i` draws its walk from
/// `stream_rng(rng_seed, i)`.
pub fn tail_mc(
    g: &ExpanderGraph,
    f: &MatrixFn,
    k: usize,
    epsilon: f64,
    trials: u64,
    rng_seed: u64,
) -> Result<TailReport> {
    tail_mc_sided(g, f, k, epsilon, trials, rng_seed, Tail::Upper)
}

pub fn tail_mc_sided(
    g: &ExpanderGraph,
    f: &MatrixFn,
    k: usize,
    epsilon: f64,
    trials: u64,
    rng_seed: u64,
    tail: Tail,
) -> Result<TailReport> {
    check_tail_args(g, f, k, epsilon)?;
    if trials < 100 {
        return Err(invalid(format!(
            "Monte Carlo needs at least 100 trials, got {trials}"
        )));
    }
    let f = oriented(f, tail);
    let d = f.d();
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map_init(
            || (vec![0usize; k], vec![C64::new(0.0, 0.0); d * d]),
            |(walk, acc), trial| {
                g.fill_walk(&mut stream_rng(rng_seed, trial), walk);
                acc.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                for &v in walk.iter() {
                    add_into(acc, f.get(v), 1.0);
                }
                u64::from(lambda_max_of(acc, d, k) >= epsilon - EXCEED_TOL)
            },
        )
        .sum();
    let (ci_low, ci_high) = wilson_interval(hits, trials, WILSON_Z95);
    let lambda = g.lambda();
    let bound = report_bound(d, lambda, k, epsilon);
    Ok(TailReport {
        k,
        epsilon,
        trials,
        hits,
        p_hat: hits as f64 / trials as f64,
        ci_low,
        ci_high,
        bound,
        lambda,
        d,
        n: g.n(),
        tail,
        satisfied: ci_low <= bound,
    })
}

/// Law of the visit-count vector `(#{j : v_j = v})_v` of a stationary
/// `k`-step walk, as integer walk counts out of `n·D^{k-1}`.
///
/// The walk average depends on the walk only through this vector, so one law
/// serves every `f`, `ε` and tail on the same `(G, k)`.
#[derive(Debug, Clone)]
pub struct WalkLaw {
    n: usize,
    k: usize,
    total: u64,
    width: u32,
    keys: Vec<u128>,
    weights: Vec<u64>,
}

/// How [`WalkLaw::compute`] enumerated the walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawMethod {
    /// Dynamic programming over (current vertex, visit counts).
    CountDp,
    /// Depth-first enumeration of every walk.
    Dfs,
}

impl WalkLaw {
    /// Picks the cheaper of the two exact methods and fails with
    /// `BudgetExceeded` if both exceed `budget` units of work.
    pub fn compute(g: &ExpanderGraph, k: usize, budget: u128) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        let walks = walk_count(g, k);
        let width = count_width(k);
        let packable = g.n() as u32 * width <= 128;
        let states = if packable {
            dp_state_bound(g.n(), k)
        } else {
            u128::MAX
        };
        let total = u64::try_from(walks).map_err(|_| Error::BudgetExceeded {
            needed: walks,
            budget: u64::MAX as u128,
        })?;
        if packable && states <= budget && states < walks {
            Ok(Self::by_dp(g, k, total))
        } else if walks <= budget && packable {
            Ok(Self::by_dfs(g, k, total))
        } else {
            Err(Error::BudgetExceeded {
                needed: walks.min(states),
                budget,
            })
        }
    }

    /// Forces one method; used to cross-check the two.
    pub fn compute_with(g: &ExpanderGraph, k: usize, method: LawMethod) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if g.n() as u32 * count_width(k) > 128 {
            return Err(Error::UnsupportedGraph(
                "visit counts do not fit in 128 bits".into(),
            ));
        }
        let walks = walk_count(g, k);
        let total = u64::try_from(walks).map_err(|_| Error::BudgetExceeded {
            needed: walks,
            budget: u64::MAX as u128,
        })?;
        Ok(match method {
            LawMethod::CountDp => Self::by_dp(g, k, total),
            LawMethod::Dfs => Self::by_dfs(g, k, total),
        })
    }

    fn by_dp(g: &ExpanderGraph, k: usize, total: u64) -> Self {
        let width = count_width(k);
        let unit = |v: usize| 1u128 << (v as u32 * width);
        let mut level: HashMap<(u32, u128), u64> =
            (0..g.n()).map(|v| ((v as u32, unit(v)), 1)).collect();
        for _ in 1..k.saturating_sub(1) {
            let mut next: HashMap<(u32, u128), u64> = HashMap::with_capacity(level.len() * 2);
            for (&(v, key), &w) in &level {
                for &u in g.neighbors(v as usize) {
                    *next.entry((u as u32, key + unit(u))).or_default() += w;
                }
            }
            level = next;
        }
        let mut law: HashMap<u128, u64> = HashMap::with_capacity(level.len());
        if k == 1 {
            for ((_, key), w) in level {
                *law.entry(key).or_default() += w;
            }
        } else {
            for (&(v, key), &w) in &level {
                for &u in g.neighbors(v as usize) {
                    *law.entry(key + unit(u)).or_default() += w;
                }
            }
        }
        Self::from_map(g.n(), k, total, width, law)
    }

    fn by_dfs(g: &ExpanderGraph, k: usize, total: u64) -> Self {
        let width = count_width(k);
        let mut law: HashMap<u128, u64> = HashMap::new();
        for_each_walk(g, k, |walk| {
            let key = walk
                .iter()
                .map(|&v| 1u128 << (v as u32 * width))
                .sum::<u128>();
            *law.entry(key).or_default() += 1;
        });
        Self::from_map(g.n(), k, total, width, law)
    }

    fn from_map(n: usize, k: usize, total: u64, width: u32, law: HashMap<u128, u64>) -> Self {
        let mut entries: Vec<(u128, u64)> = law.into_iter().collect();
        entries.sort_unstable();
        let (keys, weights) = entries.into_iter().unzip();
        Self {
            n,
            k,
            total,
            width,
            keys,
            weights,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `n·D^{k-1}`.
    pub fn total_walks(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// `(visit counts, number of walks)` pairs in key order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, u64)> + '_ {
        self.keys
            .iter()
            .zip(&self.weights)
            .map(|(&key, &w)| (self.decode(key), w))
    }

    fn decode(&self, key: u128) -> Vec<usize> {
        let mask = (1u128 << self.width) - 1;
        (0..self.n)
            .map(|v| ((key >> (v as u32 * self.width)) & mask) as usize)
            .collect()
    }

    /// Number of walks whose average has `λ_max ≥ ε - EXCEED_TOL`, for each ε.
    pub fn exceed_counts(&self, f: &MatrixFn, epsilons: &[f64]) -> Result<Vec<u64>> {
        if f.n() != self.n {
            return Err(invalid("f and walk law live on different vertex sets"));
        }
        let d = f.d();
        let mask = (1u128 << self.width) - 1;
        let counts = self
            .keys
            .par_iter()
            .zip(&self.weights)
            .fold(
                || (vec![0u64; epsilons.len()], vec![C64::new(0.0, 0.0); d * d]),
                |(mut hits, mut acc), (&key, &w)| {
                    acc.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                    let mut rest = key;
                    let mut v = 0;
                    while rest != 0 {
                        let c = (rest & mask) as f64;
                        if c != 0.0 {
                            add_into(&mut acc, f.get(v), c);
                        }
                        rest >>= self.width;
                        v += 1;
                    }
                    let top = lambda_max_of(&acc, d, self.k);
                    for (h, &eps) in hits.iter_mut().zip(epsilons) {
                        if top >= eps - EXCEED_TOL {
                            *h += w;
                        }
                    }
                    (hits, acc)
                },
            )
            .map(|(hits, _)| hits)
            .reduce(
                || vec![0u64; epsilons.len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        Ok(counts)
    }
}

fn count_width(k: usize) -> u32 {
    usize::BITS - k.leading_zeros()
}

/// `n·D^{k-1}`, saturating.
pub fn walk_count(g: &ExpanderGraph, k: usize) -> u128 {
    let mut total = g.n() as u128;
    for _ in 1..k {
        total = total.saturating_mul(g.degree() as u128);
    }
    total
}

/// Upper bound on the DP state count: `n · C(n+k-2, k-1)`.
fn dp_state_bound(n: usize, k: usize) -> u128 {
    let j = k.saturating_sub(1) as u128;
    let mut c: u128 = 1;
    for i in 1..=j {
        c = c.saturating_mul(n as u128 + i - 1) / i;
    }
    (n as u128).saturating_mul(c)
}

/// Calls `visit` on every walk of length `k` in depth-first order over
/// adjacency slots; each walk has probability `1/(n·D^{k-1})`.
pub fn for_each_walk(g: &ExpanderGraph, k: usize, mut visit: impl FnMut(&[usize])) {
    if k == 0 {
        return;
    }
    let deg = g.degree();
    let mut walk = vec![0usize; k];
    let mut slot = vec![0usize; k];
    for start in 0..g.n() {
        walk[0] = start;
        if k == 1 {
            visit(&walk);
            continue;
        }
        let mut depth = 1;
        slot[1] = 0;
        loop {
            if slot[depth] == deg {
                depth -= 1;
                if depth == 0 {
                    break;
                }
                slot[depth] += 1;
                continue;
            }
            walk[depth] = g.neighbors(walk[depth - 1])[slot[depth]];
            if depth + 1 == k {
                visit(&walk);
                slot[depth] += 1;
            } else {
                depth += 1;
                slot[depth] = 0;
            }
        }
    }
}

/// Exact tail probability from the walk law.
pub fn tail_exact(g: &ExpanderGraph, f: &MatrixFn, k: usize, epsilon: f64) -> Result<TailReport> {
    let law = WalkLaw::compute(g, k, DEFAULT_ENUM_BUDGET)?;
    Ok(tail_exact_from_law(g, &law, f, &[epsilon], Tail::Upper)?.remove(0))
}

/// Exact tail probabilities for several thresholds over a precomputed law.
pub fn tail_exact_from_law(
    g: &ExpanderGraph,
    law: &WalkLaw,
    f: &MatrixFn,
    epsilons: &[f64],
    tail: Tail,
) -> Result<Vec<TailReport>> {
    if law.n() != g.n() {
        return Err(invalid("walk law was computed for a different graph"));
    }
    for &eps in epsilons {
        check_tail_args(g, f, law.k(), eps)?;
    }
    let f = oriented(f, tail);
    let hits = law.exceed_counts(&f, epsilons)?;
    let lambda = g.lambda();
    Ok(epsilons
        .iter()
        .zip(hits)
        .map(|(&epsilon, hits)| {
            let p_hat = hits as f64 / law.total_walks() as f64;
            let bound = report_bound(f.d(), lambda, law.k(), epsilon);
            TailReport {
                k: law.k(),
                epsilon,
                trials: 0,
                hits,
                p_hat,
                ci_low: p_hat,
                ci_high: p_hat,
                bound,
                lambda,
                d: f.d(),
                n: g.n(),
                tail,
                satisfied: p_hat <= bound,
            }
        })
        .collect())
}

/// Exact tail probability by plain depth-first enumeration of walks, with
/// prefix sums kept per depth. Independent of [`WalkLaw`].
pub fn tail_exact_dfs(
    g: &ExpanderGraph,
    f: &MatrixFn,
    k: usize,
    epsilon: f64,
    budget: u128,
) -> Result<f64> {
    check_tail_args(g, f, k, epsilon)?;
    let walks = walk_count(g, k);
    if walks > budget {
        return Err(Error::BudgetExceeded {
            needed: walks,
            budget,
        });
    }
    let d = f.d();
    let mut hits: u64 = 0;
    for_each_walk(g, k, |walk| {
        let mut acc = vec![C64::new(0.0, 0.0); d * d];
        for &v in walk {
            add_into(&mut acc, f.get(v), 1.0);
        }
        if lambda_max_of(&acc, d, k) >= epsilon - EXCEED_TOL {
            hits += 1;
        }
    });
    Ok(hits as f64 / walks as f64)
}
