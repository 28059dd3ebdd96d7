//! One experiment per command: load inputs, run the check, produce a row.

use serde::Deserialize;
use serde_json::{json, Value};

use xlab_core::conformal::{build_mu, GtProblem, DEFAULT_NODES};
use xlab_core::expander::{ExpanderGraph, WalkSeed, DENSE_SPECTRUM_LIMIT};
use xlab_core::healy::{check_healy_lemma, check_mgf_bound, TransferOperator};
use xlab_core::linalg::HermitianMatrix;
use xlab_core::martingale::{
    bounds_campaign, verify_martingale_property, verify_shrink, MatrixNorm,
};
use xlab_core::sampler::{empirical_mean, gen_mean_zero_fn, tail_exact, tail_mc, MatrixFn};
use xlab_core::Error as CoreError;

use crate::config::{Command, ExperimentConfig};
use crate::error::{io_err, usage, CliResult};
use crate::table::Row;

/// Pass threshold on the Golden-Thompson margin.
pub const GT_MARGIN_TOL: f64 = 1e-6;
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_HEALY_VECTORS: u64 = 1_000;
pub const DEFAULT_WALKS: u64 = 1_000;
/// Conditional means checked per martingale run.
pub const MARTINGALE_PAIRS: usize = 10_000;

pub fn columns(cmd: Command) -> &'static [&'static str] {
    match cmd {
        Command::GtVerify => &[
            "k",
            "d",
            "nodes",
            "lhs",
            "rhs",
            "margin",
            "integrand_min",
            "passed",
        ],
        Command::Tail | Command::TailExact => &[
            "k", "epsilon", "p_hat", "ci_low", "ci_high", "bound", "lambda", "d", "n", "trials",
            "hits", "passed",
        ],
        Command::Healy => &[
            "n", "d", "t", "gamma", "b", "lambda", "ell", "vectors", "slack1", "slack2", "slack3",
            "slack4", "passed",
        ],
        Command::Mgf => &[
            "n",
            "d",
            "k",
            "t",
            "gamma",
            "b",
            "lambda",
            "value",
            "chain_bound",
            "bound",
            "passed",
        ],
        Command::Martingale => &[
            "n",
            "d",
            "k",
            "epsilon",
            "walks",
            "T",
            "lambda",
            "f_norm",
            "max_residual",
            "max_conditional_mean",
            "max_w",
            "z_spectral",
            "z_schatten2",
            "z_schatten1",
            "z_entry_max",
            "above_tm",
            "shrink_ratio",
            "passed",
        ],
        Command::GraphInfo => &[
            "graph",
            "n",
            "degree",
            "lambda",
            "second_eigenvalue",
            "passed",
        ],
        Command::Sample => &[
            "graph",
            "k",
            "seed",
            "mode",
            "seed_bits",
            "walk",
            "lambda_max_mean",
            "lambda_min_mean",
            "passed",
        ],
    }
}

/// Result of one experiment.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub row: Row,
    pub detail: Value,
    pub passed: bool,
}

/// Graph and function, loaded once and shared by every cell of a sweep.
#[derive(Debug, Clone, Default)]
pub struct Inputs {
    pub graph: Option<ExpanderGraph>,
    pub f: Option<MatrixFn>,
    pub matrices: Option<Vec<HermitianMatrix>>,
}

#[derive(Deserialize)]
struct MatrixList {
    matrices: Vec<HermitianMatrix>,
}

fn needs_graph(cmd: Command) -> bool {
    cmd != Command::GtVerify
}

fn needs_fn(cmd: Command) -> bool {
    matches!(
        cmd,
        Command::Tail | Command::TailExact | Command::Healy | Command::Mgf | Command::Martingale
    )
}

pub fn load_inputs(cmd: Command, cfg: &ExperimentConfig) -> CliResult<Inputs> {
    let mut inputs = Inputs::default();
    if needs_graph(cmd) {
        let spec = cfg
            .graph
            .as_deref()
            .ok_or_else(|| usage("--graph is required"))?;
        inputs.graph = Some(ExpanderGraph::from_spec(spec)?);
    }
    if cfg.fn_path.is_some() && cfg.gen.is_some() {
        return Err(usage("give either --fn or --gen, not both"));
    }
    if cmd == Command::GtVerify {
        let hs = if let Some(path) = &cfg.fn_path {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            serde_json::from_str::<MatrixList>(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?
                .matrices
        } else if let Some(g) = cfg.gen {
            gen_mean_zero_fn(g.seed, g.n, g.d)?.table().to_vec()
        } else {
            return Err(usage("gt-verify needs --fn or --gen"));
        };
        if hs.is_empty() {
            return Err(usage("gt-verify needs at least one matrix"));
        }
        inputs.matrices = Some(hs);
        return Ok(inputs);
    }
    let f = if let Some(path) = &cfg.fn_path {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Some(MatrixFn::from_json(&text)?)
    } else if let Some(g) = cfg.gen {
        Some(gen_mean_zero_fn(g.seed, g.n, g.d)?)
    } else {
        None
    };
    if let (Some(f), Some(g)) = (&f, &inputs.graph) {
        f.check_graph(g)?;
    }
    if needs_fn(cmd) && f.is_none() {
        return Err(usage(format!("{} needs --fn or --gen", cmd.name())));
    }
    inputs.f = f;
    Ok(inputs)
}

pub fn execute(cmd: Command, cfg: &ExperimentConfig, inputs: &Inputs) -> CliResult<Outcome> {
    let graph = || inputs.graph.as_ref().expect("graph loaded");
    let func = || inputs.f.as_ref().expect("function loaded");
    match cmd {
        Command::GtVerify => gt_verify(cfg, inputs.matrices.as_deref().expect("matrices loaded")),
        Command::Tail => tail(cfg, graph(), func(), false),
        Command::TailExact => tail(cfg, graph(), func(), true),
        Command::Healy => healy(cfg, graph(), func()),
        Command::Mgf => mgf(cfg, graph(), func()),
        Command::Martingale => martingale(cfg, graph(), func()),
        Command::GraphInfo => Ok(graph_info(graph())),
        Command::Sample => sample(cfg, graph(), inputs.f.as_ref()),
    }
}

fn gt_verify(cfg: &ExperimentConfig, hs: &[HermitianMatrix]) -> CliResult<Outcome> {
    let nodes = cfg.nodes.unwrap_or(DEFAULT_NODES);
    let r = GtProblem::new(hs)?.verify(&build_mu(nodes)?)?;
    let passed = r.margin >= -GT_MARGIN_TOL;
    let mut row = Row::default();
    row.push("k", hs.len())
        .push("d", hs[0].dim())
        .push("nodes", nodes)
        .push("lhs", r.lhs)
        .push("rhs", r.rhs)
        .push("margin", r.margin)
        .push("integrand_min", r.integrand_min)
        .push("passed", passed);
    let detail = json!({ "report": r, "witness": if passed { Value::Null } else { json!(hs) } });
    Ok(Outcome {
        row,
        detail,
        passed,
    })
}

fn tail(
    cfg: &ExperimentConfig,
    g: &ExpanderGraph,
    f: &MatrixFn,
    exact: bool,
) -> CliResult<Outcome> {
    let k = cfg.require_k()?;
    let eps = cfg.require_epsilon()?;
    let r = if exact {
        tail_exact(g, f, k, eps)?
    } else {
        tail_mc(
            g,
            f,
            k,
            eps,
            cfg.trials.unwrap_or(DEFAULT_TRIALS),
            cfg.seed_or_default(),
        )?
    };
    let mut row = Row::default();
    row.push("k", r.k)
        .push("epsilon", r.epsilon)
        .push("p_hat", r.p_hat)
        .push("ci_low", r.ci_low)
        .push("ci_high", r.ci_high)
        .push("bound", r.bound)
        .push("lambda", r.lambda)
        .push("d", r.d)
        .push("n", r.n)
        .push("trials", r.trials)
        .push("hits", r.hits)
        .push("passed", r.satisfied);
    Ok(Outcome {
        row,
        passed: r.satisfied,
        detail: json!({ "report": r, "graph": g.name() }),
    })
}

fn healy(cfg: &ExperimentConfig, g: &ExpanderGraph, f: &MatrixFn) -> CliResult<Outcome> {
    let t = cfg.require_t()?;
    let op = TransferOperator::new(g, f, t, cfg.gamma_or_default(), cfg.b_or_default())?;
    let vectors = cfg.trials.unwrap_or(DEFAULT_HEALY_VECTORS) as usize;
    let r = check_healy_lemma(&op, vectors, cfg.seed_or_default())?;
    let mut row = Row::default();
    row.push("n", r.n)
        .push("d", r.d)
        .push("t", r.t)
        .push("gamma", r.gamma)
        .push("b", r.b)
        .push("lambda", r.lambda)
        .push("ell", r.ell)
        .push("vectors", r.vectors)
        .push("slack1", r.max_slack[0])
        .push("slack2", r.max_slack[1])
        .push("slack3", r.max_slack[2])
        .push("slack4", r.max_slack[3])
        .push("passed", r.passed);
    Ok(Outcome {
        row,
        passed: r.passed,
        detail: json!({ "report": r, "graph": g.name() }),
    })
}

fn mgf(cfg: &ExperimentConfig, g: &ExpanderGraph, f: &MatrixFn) -> CliResult<Outcome> {
    let k = cfg.require_k()?;
    let t = cfg.require_t()?;
    let r = check_mgf_bound(g, f, k, t, cfg.gamma_or_default(), cfg.b_or_default())?;
    let mut row = Row::default();
    row.push("n", g.n())
        .push("d", r.d)
        .push("k", r.k)
        .push("t", r.t)
        .push("gamma", r.gamma)
        .push("b", r.b)
        .push("lambda", r.lambda)
        .push("value", r.value)
        .push("chain_bound", r.chain_bound)
        .push("bound", r.bound)
        .push("passed", r.satisfied);
    Ok(Outcome {
        row,
        passed: r.satisfied,
        detail: json!({ "report": r, "graph": g.name() }),
    })
}

fn martingale(cfg: &ExperimentConfig, g: &ExpanderGraph, f: &MatrixFn) -> CliResult<Outcome> {
    let k = cfg.require_k()?;
    let eps = cfg.require_epsilon()?;
    let seed = cfg.seed_or_default();
    let walks = cfg.trials.unwrap_or(DEFAULT_WALKS) as usize;
    let campaign = bounds_campaign(g, f, k, eps, walks, seed)?;
    let cond = verify_martingale_property(g, f, eps, k, MARTINGALE_PAIRS, seed)?;
    let shrink = verify_shrink(g, f)?;
    let passed = campaign.satisfied && cond.satisfied && shrink.holds;
    let z = |norm: MatrixNorm| {
        campaign
            .norms
            .iter()
            .find(|r| r.norm == norm)
            .map_or(f64::NAN, |r| r.max_z)
    };
    let mut row = Row::default();
    row.push("n", g.n())
        .push("d", f.d())
        .push("k", k)
        .push("epsilon", eps)
        .push("walks", walks)
        .push("T", campaign.depth)
        .push("lambda", g.lambda())
        .push("f_norm", f.f_norm())
        .push("max_residual", campaign.max_residual)
        .push(
            "max_conditional_mean",
            cond.max_conditional_mean.max(cond.first_mean),
        )
        .push("max_w", campaign.max_w_schatten2)
        .push("z_spectral", z(MatrixNorm::Spectral))
        .push("z_schatten2", z(MatrixNorm::Schatten2))
        .push("z_schatten1", z(MatrixNorm::Schatten1))
        .push("z_entry_max", z(MatrixNorm::EntryMax))
        .push(
            "above_tm",
            campaign.norms.iter().map(|r| r.above_tm).sum::<usize>(),
        )
        .push("shrink_ratio", shrink.ratio)
        .push("passed", passed);
    Ok(Outcome {
        row,
        passed,
        detail: json!({ "campaign": campaign, "conditional": cond, "shrink": shrink, "graph": g.name() }),
    })
}

fn graph_info(g: &ExpanderGraph) -> Outcome {
    let lambda = g.lambda();
    let second = (g.n() <= DENSE_SPECTRUM_LIMIT).then(|| g.second_largest_eigenvalue());
    let mut row = Row::default();
    row.push("graph", g.name())
        .push("n", g.n())
        .push("degree", g.degree())
        .push("lambda", lambda);
    if let Some(s) = second {
        row.push("second_eigenvalue", s);
    }
    row.push("passed", true);
    Outcome {
        row,
        passed: true,
        detail: json!({ "graph": g.name(), "n": g.n(), "degree": g.degree(), "lambda": lambda, "second_eigenvalue": second }),
    }
}

fn sample(cfg: &ExperimentConfig, g: &ExpanderGraph, f: Option<&MatrixFn>) -> CliResult<Outcome> {
    let k = cfg.require_k()?;
    let seed = cfg.seed_or_default();
    let bits = g.seed_length(k);
    let seeded = (bits <= 64)
        .then(|| {
            let value = if bits == 64 {
                seed
            } else {
                seed & ((1u64 << bits) - 1)
            };
            WalkSeed::from_value(value as u128, bits).and_then(|s| g.seeded_walk(&s, k))
        })
        .transpose();
    let (walk, mode) = match seeded {
        Ok(Some(w)) => (w, "seeded"),
        Ok(None) | Err(CoreError::UnsupportedGraph(_)) => (g.random_walk(seed, k)?, "prng"),
        Err(e) => return Err(e.into()),
    };
    let mut row = Row::default();
    let text: Vec<String> = walk.vertices.iter().map(usize::to_string).collect();
    row.push("graph", g.name())
        .push("k", k)
        .push("seed", seed)
        .push("mode", mode)
        .push("seed_bits", bits)
        .push("walk", text.join(" "));
    let mut detail = json!({ "graph": g.name(), "walk": walk.vertices, "mode": mode });
    if let Some(f) = f {
        let mean = empirical_mean(f, &walk)?;
        row.push("lambda_max_mean", mean.lambda_max())
            .push("lambda_min_mean", mean.lambda_min());
        detail["mean"] = json!(mean);
    }
    row.push("passed", true);
    Ok(Outcome {
        row,
        passed: true,
        detail,
    })
}
