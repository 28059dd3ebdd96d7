//! Experiment configuration: a JSON file merged with command-line flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, usage, CliResult};

/// Largest grid a sweep will run.
pub const MAX_GRID_CELLS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GtVerify,
    Tail,
    TailExact,
    Healy,
    Mgf,
    Martingale,
    GraphInfo,
    Sample,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::GtVerify => "gt-verify",
            Self::Tail => "tail",
            Self::TailExact => "tail-exact",
            Self::Healy => "healy",
            Self::Mgf => "mgf",
            Self::Martingale => "martingale",
            Self::GraphInfo => "graph-info",
            Self::Sample => "sample",
        }
    }
}

/// `seed:n:d` for [`xlab_core::sampler::gen_mean_zero_fn`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub seed: u64,
    pub n: usize,
    pub d: usize,
}

impl std::str::FromStr for GenSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [seed, n, d] = parts[..] else {
            return Err(format!("expected seed:n:d, got {s:?}"));
        };
        let bad = |what: &str| format!("bad {what} in {s:?}");
        Ok(Self {
            seed: seed.trim().parse().map_err(|_| bad("seed"))?,
            n: n.trim().parse().map_err(|_| bad("n"))?,
            d: d.trim().parse().map_err(|_| bad("d"))?,
        })
    }
}

impl std::fmt::Display for GenSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.seed, self.n, self.d)
    }
}

impl Serialize for GenSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GenSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Value lists for a sweep. Cells are the Cartesian product in field
/// order, last field fastest; a missing list keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Vec<u64>>,
}

impl Grid {
    fn len_of<T>(v: &Option<Vec<T>>) -> usize {
        v.as_ref().map_or(1, Vec::len)
    }

    /// Number of cells, saturating.
    pub fn cells(&self) -> usize {
        [
            Self::len_of(&self.k),
            Self::len_of(&self.epsilon),
            Self::len_of(&self.t),
            Self::len_of(&self.gamma),
            Self::len_of(&self.b),
            Self::len_of(&self.seed),
        ]
        .into_iter()
        .fold(1usize, usize::saturating_mul)
    }

    /// The configurations of every cell, in grid order.
    pub fn expand(&self, base: &ExperimentConfig) -> CliResult<Vec<ExperimentConfig>> {
        let cells = self.cells();
        if cells > MAX_GRID_CELLS {
            return Err(usage(format!(
                "grid has {cells} cells, the limit is {MAX_GRID_CELLS}"
            )));
        }
        let mut out = vec![ExperimentConfig {
            grid: None,
            ..base.clone()
        }];
        fn extend<T: Copy>(
            out: Vec<ExperimentConfig>,
            values: &Option<Vec<T>>,
            set: impl Fn(&mut ExperimentConfig, T),
        ) -> Vec<ExperimentConfig> {
            let Some(values) = values else { return out };
            out.into_iter()
                .flat_map(|c| {
                    values
                        .iter()
                        .map(|&v| {
                            let mut c = c.clone();
                            set(&mut c, v);
                            c
                        })
                        .collect::<Vec<_>>()
                })
                .collect()
        }
        out = extend(out, &self.k, |c, v| c.k = Some(v));
        out = extend(out, &self.epsilon, |c, v| c.epsilon = Some(v));
        out = extend(out, &self.t, |c, v| c.t = Some(v));
        out = extend(out, &self.gamma, |c, v| c.gamma = Some(v));
        out = extend(out, &self.b, |c, v| c.b = Some(v));
        out = extend(out, &self.seed, |c, v| c.seed = Some(v));
        Ok(out)
    }
}

/// One experiment. Every field is optional so that a file and flags can be
/// layered; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// `complete:N`, `cycle:N`, `margulis:M` or a graph file path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    /// JSON file holding `{"n", "d", "matrices"}` (or only `"matrices"` for gt-verify).
    #[serde(default, rename = "fn", skip_serializing_if = "Option::is_none")]
    pub fn_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gen: Option<GenSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output prefix; `<out>.csv` and `<out>.json` are written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: ExperimentConfig) -> Self {
        Self {
            command: top.command.or(self.command),
            graph: top.graph.or(self.graph),
            fn_path: top.fn_path.or(self.fn_path),
            gen: top.gen.or(self.gen),
            k: top.k.or(self.k),
            epsilon: top.epsilon.or(self.epsilon),
            t: top.t.or(self.t),
            gamma: top.gamma.or(self.gamma),
            b: top.b.or(self.b),
            trials: top.trials.or(self.trials),
            nodes: top.nodes.or(self.nodes),
            seed: top.seed.or(self.seed),
            out: top.out.or(self.out),
            grid: top.grid.or(self.grid),
        }
    }

    pub fn require_k(&self) -> CliResult<usize> {
        self.k.ok_or_else(|| usage("--k is required"))
    }

    pub fn require_epsilon(&self) -> CliResult<f64> {
        self.epsilon.ok_or_else(|| usage("--eps is required"))
    }

    pub fn require_t(&self) -> CliResult<f64> {
        self.t.ok_or_else(|| usage("--t is required"))
    }

    pub fn gamma_or_default(&self) -> f64 {
        self.gamma.unwrap_or(1.0)
    }

    pub fn b_or_default(&self) -> f64 {
        self.b.unwrap_or(0.0)
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
