use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use ctvm_core::oracle::{mc_estimate_with, DEFAULT_MC_CAP};
use ctvm_core::sampler::{derive_seed, Executor};
use ctvm_core::texact::{build_saa, solve_saa, SaaConfig, SaaMode};
use ctvm_core::tiptop::{run_tiptop, CoverMethod, SolveConfig};
use ctvm_core::{Graph, Model, NodeId, SolverLimits};
use serde::Serialize;

use crate::error::{config, CliError, CliResult};

/// Accuracy of the estimator used to score every returned seed set.
pub const ESTIMATE_EPS: f64 = 0.02;

/// Stream tag that keeps the scoring estimator independent of the solver.
const ESTIMATE_TAG: u64 = 0x5eed_e571;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    TipTop,
    Greedy,
    TExact,
}

impl FromStr for Algo {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Algo> {
        match s.to_ascii_lowercase().as_str() {
            "tiptop" => Ok(Algo::TipTop),
            "greedy" => Ok(Algo::Greedy),
            "texact" | "t-exact" => Ok(Algo::TExact),
            other => config(format!(
                "unknown algorithm '{other}' (expected tiptop, greedy or texact)"
            )),
        }
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algo::TipTop => "tiptop",
            Algo::Greedy => "greedy",
            Algo::TExact => "texact",
        })
    }
}

/// `auto` resolves to `1/n` once the graph is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaArg {
    Auto,
    Fixed(f64),
}

impl FromStr for DeltaArg {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<DeltaArg> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(DeltaArg::Auto);
        }
        match s.parse::<f64>() {
            Ok(d) if d > 0.0 && d < 1.0 => Ok(DeltaArg::Fixed(d)),
            _ => config(format!("--delta must be 'auto' or a number in (0, 1), got '{s}'")),
        }
    }
}

impl DeltaArg {
    pub fn resolve(self, n: usize) -> CliResult<f64> {
        match self {
            DeltaArg::Fixed(d) => Ok(d),
            DeltaArg::Auto if n >= 2 => Ok(1.0 / n as f64),
            DeltaArg::Auto => config("--delta auto needs a graph with at least 2 nodes"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub graph: Option<PathBuf>,
    pub attrs: Option<PathBuf>,
    pub model: Model,
    pub algo: Algo,
    pub budget: f64,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub workers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<SaaMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub algorithm: Algo,
    pub seed_set: Vec<NodeId>,
    pub total_cost: f64,
    /// Independent stopping-rule estimate of the expected benefit.
    pub benefit: f64,
    /// The solver's own objective: pool estimate for tiptop and greedy,
    /// scenario average for texact.
    pub objective: f64,
    pub search_samples: u64,
    pub verify_samples: u64,
    pub estimate_samples: u64,
    pub wall_time_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_reason: Option<String>,
    pub config: RunConfig,
}

pub fn load(graph: &Path, attrs: Option<&Path>, model: Model) -> CliResult<Graph> {
    let hint = (model == Model::LT).then_some(Model::LT);
    Graph::from_paths(graph, attrs, hint).map_err(|e| match e {
        ctvm_core::Error::Io(source) => CliError::Io {
            path: graph.display().to_string(),
            source,
        },
        other => other.into(),
    })
}

pub fn parse_seeds(text: &str, n: usize) -> CliResult<Vec<NodeId>> {
    let mut seeds = Vec::new();
    for tok in text.split(|c: char| c == ',' || c.is_whitespace()) {
        if tok.is_empty() {
            continue;
        }
        let v: NodeId = tok
            .parse()
            .map_err(|_| CliError::Config(format!("malformed seed id '{tok}'")))?;
        if v as usize >= n {
            return config(format!("seed {v} is out of range for a graph with {n} nodes"));
        }
        seeds.push(v);
    }
    seeds.sort_unstable();
    seeds.dedup();
    Ok(seeds)
}

pub struct Estimate {
    pub value: f64,
    pub samples: u64,
}

pub fn estimate(
    g: &Graph,
    seeds: &[NodeId],
    eps: f64,
    delta: f64,
    model: Model,
    seed: u64,
    exec: &Executor,
) -> CliResult<Estimate> {
    let e = mc_estimate_with(g, seeds, eps, delta, model, seed, DEFAULT_MC_CAP, exec)?;
    Ok(Estimate {
        value: e.value,
        samples: e.samples,
    })
}

pub fn solve(g: &Graph, cfg: &RunConfig, limits: SolverLimits) -> CliResult<RunResult> {
    let start = Instant::now();
    let (seed_set, total_cost, objective, search, verify, stop) = match cfg.algo {
        Algo::TipTop | Algo::Greedy => {
            let mut sc = SolveConfig::new(cfg.eps, cfg.delta, cfg.budget, cfg.model, cfg.seed);
            sc.workers = cfg.workers;
            sc.limits = limits;
            if cfg.algo == Algo::Greedy {
                sc.method = CoverMethod::Greedy;
            }
            let sol = run_tiptop(g, &sc)?;
            let stop = serde_json::to_value(sol.stop_reason)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned));
            (
                sol.seed.nodes,
                sol.seed.total_cost,
                sol.est_benefit,
                sol.search_samples,
                sol.verify_samples,
                stop,
            )
        }
        Algo::TExact => {
            let Some(t) = cfg.realizations else {
                return config("texact needs --realizations");
            };
            let mode = cfg.mode.unwrap_or(SaaMode::Sampled);
            let mut sc = SaaConfig::new(cfg.model, t, cfg.budget, cfg.seed, mode);
            sc.workers = cfg.workers;
            sc.limits = limits;
            let m = build_saa(g, &sc)?;
            let scenarios = m.realization_count() as u64;
            let (seed, value) = solve_saa(&m)?;
            (seed.nodes, seed.total_cost, value, scenarios, 0, None)
        }
    };
    let wall = start.elapsed();
    let exec = Executor::new(cfg.workers);
    let est = estimate(
        g,
        &seed_set,
        ESTIMATE_EPS,
        cfg.delta,
        cfg.model,
        derive_seed(cfg.seed, ESTIMATE_TAG),
        &exec,
    )?;
    Ok(RunResult {
        algorithm: cfg.algo,
        seed_set,
        total_cost,
        benefit: est.value,
        objective,
        search_samples: search,
        verify_samples: verify,
        estimate_samples: est.samples,
        wall_time_ms: wall.as_secs_f64() * 1e3,
        stop_reason: stop,
        config: cfg.clone(),
    })
}
