//! Regular multigraphs, explicit expander families and walks on them.
//!
//! A graph is stored as `n` ordered adjacency lists of length `D`; multi-edges
//! and self-loops are allowed and each occupies one slot. The walk operator is
//! `P = A/D`, and `λ` is the largest absolute eigenvalue of `P` on the
//! complement of the all-ones vector.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::HermitianMatrix;
use crate::rng::{seeded_rng, uniform_below};

/// Graphs up to this size get a full eigendecomposition; larger ones use
/// power iteration.
pub const DENSE_SPECTRUM_LIMIT: usize = 256;

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 200_000;

#[derive(Debug)]
pub struct ExpanderGraph {
    n: usize,
    degree: usize,
    adj: Vec<usize>,
    name: String,
    lambda: OnceLock<f64>,
}

impl Clone for ExpanderGraph {
    fn clone(&self) -> Self {
        let lambda = OnceLock::new();
        if let Some(&l) = self.lambda.get() {
            let _ = lambda.set(l);
        }
        Self {
            n: self.n,
            degree: self.degree,
            adj: self.adj.clone(),
            name: self.name.clone(),
            lambda,
        }
    }
}

impl PartialEq for ExpanderGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.degree == other.degree && self.adj == other.adj
    }
}

impl ExpanderGraph {
    /// Validates regularity, index range and symmetry of the multigraph.
    pub fn from_adjacency(adj: Vec<Vec<usize>>) -> Result<Self> {
        let n = adj.len();
        if n == 0 {
            return Err(invalid("graph needs at least one vertex"));
        }
        let degree = adj[0].len();
        if degree == 0 {
            return Err(invalid("graph degree must be positive"));
        }
        for (u, list) in adj.iter().enumerate() {
            if list.len() != degree {
                return Err(invalid(format!(
                    "vertex {u} has {} neighbors, expected {degree}",
                    list.len()
                )));
            }
            if let Some(&v) = list.iter().find(|&&v| v >= n) {
                return Err(invalid(format!("vertex {u} lists neighbor {v} >= n = {n}")));
            }
        }
        let mut forward: Vec<(usize, usize)> = adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&v| (u, v)))
            .collect();
        let mut backward: Vec<(usize, usize)> = forward.iter().map(|&(u, v)| (v, u)).collect();
        forward.sort_unstable();
        backward.sort_unstable();
        if forward != backward {
            return Err(invalid("adjacency lists are not symmetric"));
        }
        Ok(Self {
            n,
            degree,
            adj: adj.into_iter().flatten().collect(),
            name: format!("custom:{n}x{degree}"),
            lambda: OnceLock::new(),
        })
    }

    fn named(mut self, name: String) -> Self {
        self.name = name;
        self
    }

    /// `K_n` with a self-loop at every vertex: `P = J/n`, `λ = 0`.
    pub fn complete_with_loops(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("complete graph needs n >= 1"));
        }
        let adj = vec![(0..n).collect(); n];
        let g = Self::from_adjacency(adj)?.named(format!("complete:{n}"));
        let _ = g.lambda.set(0.0);
        Ok(g)
    }

    /// The `n`-cycle, neighbors sorted ascending.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid(format!("cycle needs n >= 3, got {n}")));
        }
        let adj = (0..n)
            .map(|v| {
                let mut nb = vec![(v + n - 1) % n, (v + 1) % n];
                nb.sort_unstable();
                nb
            })
            .collect();
        Ok(Self::from_adjacency(adj)?.named(format!("cycle:{n}")))
    }

    /// Margulis-Gabber-Galil graph on `Z_m × Z_m`, vertex `(x, y)` at index
    /// `x·m + y`, degree 8 with neighbors in the order
    /// `(x+y, y), (x-y, y), (x+y+1, y), (x-y-1, y), (x, y+x), (x, y-x), (x, y+x+1), (x, y-x-1)`.
    pub fn margulis(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(invalid(format!("Margulis graph needs m >= 2, got {m}")));
        }
        let md = |a: isize| a.rem_euclid(m as isize) as usize;
        let mut adj = Vec::with_capacity(m * m);
        for x in 0..m as isize {
            for y in 0..m as isize {
                let id = |a: isize, b: isize| md(a) * m + md(b);
                adj.push(vec![
                    id(x + y, y),
                    id(x - y, y),
                    id(x + y + 1, y),
                    id(x - y - 1, y),
                    id(x, y + x),
                    id(x, y - x),
                    id(x, y + x + 1),
                    id(x, y - x - 1),
                ]);
            }
        }
        Ok(Self::from_adjacency(adj)?.named(format!("margulis:{m}")))
    }

    /// `complete:N`, `cycle:N`, `margulis:M`, or a path to a graph file.
    pub fn from_spec(spec: &str) -> Result<Self> {
        if let Some((family, arg)) = spec.split_once(':') {
            let size = || {
                arg.parse::<usize>()
                    .map_err(|_| invalid(format!("bad size in graph spec {spec:?}")))
            };
            match family {
                "complete" => return Self::complete_with_loops(size()?),
                "cycle" => return Self::cycle(size()?),
                "margulis" => return Self::margulis(size()?),
                _ => {}
            }
        }
        let path = Path::new(spec);
        if path.exists() {
            return Self::from_file(path);
        }
        Err(invalid(format!(
            "unknown graph {spec:?}: expected complete:N, cycle:N, margulis:M or a file path"
        )))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(text.parse::<Self>()?.named(path.display().to_string()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v * self.degree..(v + 1) * self.degree]
    }

    /// Row-major `P = A/D`.
    pub fn transition_matrix(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.n * self.n];
        let inv = 1.0 / self.degree as f64;
        for u in 0..self.n {
            for &v in self.neighbors(u) {
                p[u * self.n + v] += inv;
            }
        }
        p
    }

    /// `(P x)_u = (1/D) Σ_{v ~ u} x_v`.
    pub fn apply_transition(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must equal n");
        let inv = 1.0 / self.degree as f64;
        (0..self.n)
            .map(|u| self.neighbors(u).iter().map(|&v| x[v]).sum::<f64>() * inv)
            .collect()
    }

    /// Eigenvalues of `P` in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        let p = self.transition_matrix();
        let rows: Vec<Vec<f64>> = p.chunks(self.n).map(<[f64]>::to_vec).collect();
        HermitianMatrix::from_real_rows(&rows)
            .expect("transition matrix of a symmetric multigraph is symmetric")
            .eigenvalues()
    }

    /// `λ = max_{x ⊥ 1} ‖Px‖/‖x‖`, computed once and cached.
    pub fn lambda(&self) -> f64 {
        *self.lambda.get_or_init(|| {
            let l = if self.n <= DENSE_SPECTRUM_LIMIT {
                lambda_from_spectrum(&self.spectrum())
            } else {
                self.lambda_by_power_iteration()
            };
            l.clamp(0.0, 1.0)
        })
    }

    /// Second-largest eigenvalue of `P` with its sign, which differs from
    /// [`lambda`](Self::lambda) when the most negative eigenvalue dominates
    /// (for bipartite graphs `λ = 1` while this can be well below 1).
    pub fn second_largest_eigenvalue(&self) -> f64 {
        let spec = self.spectrum();
        if spec.len() < 2 {
            return 0.0;
        }
        spec[spec.len() - 2]
    }

    /// Power iteration for `‖P‖` on `1^⊥`, using the Rayleigh quotient of `P²`.
    fn lambda_by_power_iteration(&self) -> f64 {
        let n = self.n;
        // Deterministic start with components in every eigendirection.
        let mut x: Vec<f64> = (0..n)
            .map(|i| ((i as f64 + 1.0) * 0.618_033_988_75).fract() - 0.5)
            .collect();
        let mut estimate = 0.0;
        for _ in 0..POWER_MAX_ITERS {
            project_out_mean(&mut x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|v| *v /= norm);
            let y = self.apply_transition(&x);
            let next = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let converged = (next - estimate).abs() <= POWER_TOL * next.max(1e-300);
            estimate = next;
            x = self.apply_transition(&y);
            if converged {
                break;
            }
        }
        estimate
    }

    /// Bits in a seed for a `k`-step walk: `⌈log₂ n⌉ + (k-1)⌈log₂ D⌉`.
    pub fn seed_length(&self, k: usize) -> usize {
        ceil_log2(self.n) + k.saturating_sub(1) * ceil_log2(self.degree)
    }

    /// Walk determined bit-for-bit by `seed`: the first `log₂ n` bits
    /// (big-endian) pick `v₁`, each following group of `log₂ D` bits picks a
    /// slot in the current adjacency list.
    pub fn seeded_walk(&self, seed: &WalkSeed, k: usize) -> Result<Walk> {
        if k == 0 {
            return Err(invalid("walk length must be at least 1"));
        }
        if !self.n.is_power_of_two() || !self.degree.is_power_of_two() {
            return Err(Error::UnsupportedGraph(format!(
                "seeded walks need n and D to be powers of two (n = {}, D = {}); use random_walk",
                self.n, self.degree
            )));
        }
        let r = self.seed_length(k);
        if seed.len() != r {
            return Err(invalid(format!(
                "seed has {} bits, expected {r}",
                seed.len()
            )));
        }
        let vb = ceil_log2(self.n);
        let db = ceil_log2(self.degree);
        let mut vertices = Vec::with_capacity(k);
        let mut v = seed.read(0, vb);
        vertices.push(v);
        for step in 1..k {
            let slot = seed.read(vb + (step - 1) * db, db);
            v = self.neighbors(v)[slot];
            vertices.push(v);
        }
        Ok(Walk { vertices })
    }

    /// Stationary walk of length `k` from the generator seeded with `rng_seed`.
    pub fn random_walk(&self, rng_seed: u64, k: usize) -> Result<Walk> {
        if k == 0 {
            return Err(invalid("walk length must be at least 1"));
        }
        let mut vertices = vec![0; k];
        self.fill_walk(&mut seeded_rng(rng_seed), &mut vertices);
        Ok(Walk { vertices })
    }

    /// Overwrites `out` with a stationary walk of length `out.len()`.
    pub fn fill_walk(&self, rng: &mut impl RngCore, out: &mut [usize]) {
        let Some((first, rest)) = out.split_first_mut() else {
            return;
        };
        let mut v = uniform_below(rng, self.n as u64) as usize;
        *first = v;
        for slot in rest {
            v = self.neighbors(v)[uniform_below(rng, self.degree as u64) as usize];
            *slot = v;
        }
    }

    /// Text form: `"n D"` then one line of `D` neighbors per vertex.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.degree);
        for v in 0..self.n {
            let line: Vec<String> = self.neighbors(v).iter().map(usize::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

impl FromStr for ExpanderGraph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| invalid("empty graph file"))?;
        let nums = parse_usizes(header)?;
        let [n, degree] = nums[..] else {
            return Err(invalid(format!(
                "graph header must be \"n D\", got {header:?}"
            )));
        };
        let adj: Vec<Vec<usize>> = lines.map(parse_usizes).collect::<Result<_>>()?;
        if adj.len() != n {
            return Err(invalid(format!(
                "graph file declares n = {n} but has {} rows",
                adj.len()
            )));
        }
        if adj.iter().any(|row| row.len() != degree) {
            return Err(invalid(format!(
                "every row must list D = {degree} neighbors"
            )));
        }
        ExpanderGraph::from_adjacency(adj)
    }
}

fn parse_usizes(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| invalid(format!("not a vertex index: {t:?}")))
        })
        .collect()
}

fn project_out_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// Drops the top eigenvalue (the all-ones direction) and returns the largest
/// remaining modulus.
fn lambda_from_spectrum(ascending: &[f64]) -> f64 {
    match ascending.split_last() {
        Some((_, rest)) => rest.iter().fold(0.0, |m: f64, &l| m.max(l.abs())),
        None => 0.0,
    }
}

pub fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

/// Fixed-length bit string driving [`ExpanderGraph::seeded_walk`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WalkSeed {
    bits: Vec<bool>,
}

impl WalkSeed {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// The `len`-bit big-endian representation of `value`.
    pub fn from_value(value: u128, len: usize) -> Result<Self> {
        if len < 128 && value >> len != 0 {
            return Err(invalid(format!("{value} does not fit in {len} bits")));
        }
        let bits = (0..len)
            .map(|i| {
                let shift = len - 1 - i;
                shift < 128 && (value >> shift) & 1 == 1
            })
            .collect();
        Ok(Self { bits })
    }

    pub fn random(rng: &mut impl RngCore, len: usize) -> Self {
        let mut bits = Vec::with_capacity(len);
        while bits.len() < len {
            let word = rng.next_u64();
            bits.extend(
                (0..64)
                    .rev()
                    .map(|i| (word >> i) & 1 == 1)
                    .take(len - bits.len()),
            );
        }
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    fn read(&self, start: usize, width: usize) -> usize {
        self.bits[start..start + width]
            .iter()
            .fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }
}

impl FromStr for WalkSeed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(invalid(format!("seed must be a bit string, found {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

impl fmt::Display for WalkSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.bits
            .iter()
            .try_for_each(|&b| f.write_str(if b { "1" } else { "0" }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Walk {
    pub vertices: Vec<usize>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_valid_in(&self, g: &ExpanderGraph) -> bool {
        self.vertices.iter().all(|&v| v < g.n())
            && self
                .vertices
                .windows(2)
                .all(|w| g.neighbors(w[0]).contains(&w[1]))
    }
}

#[cfg(test)]
mod tests;
