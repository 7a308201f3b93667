use std::io::Write;
use std::path::{Path, PathBuf};

use ctvm_core::graph::{gen_synthetic, SyntheticConfig};
use ctvm_core::sampler::derive_seed;
use ctvm_core::texact::SaaMode;
use ctvm_core::{Graph, Model, SolverLimits};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, CliError, CliResult};
use crate::run::{self, Algo, DeltaArg, RunConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub graphs: Vec<GraphSpec>,
    #[serde(default)]
    pub algorithms: Vec<String>,
    pub budgets: Vec<f64>,
    pub epsilons: Vec<f64>,
    #[serde(default = "one")]
    pub repetitions: u32,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub delta: Option<DeltaSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_usize")]
    pub workers: usize,
    /// T-EXACT only.
    #[serde(default)]
    pub realizations: Option<usize>,
    #[serde(default)]
    pub mode: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DeltaSpec {
    Number(f64),
    Text(String),
}

/// A graph is either read from files or generated.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub name: String,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub attrs: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: Option<SyntheticConfig>,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> u32 {
    1
}

fn one_usize() -> usize {
    1
}

fn default_model() -> String {
    "ic".into()
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub graph: String,
    pub algo: String,
    pub budget: f64,
    pub eps: f64,
    pub rep: u32,
    pub benefit: Option<f64>,
    pub time_ms: Option<f64>,
    pub search_samples: Option<u64>,
    pub verify_samples: Option<u64>,
    pub seed_set: String,
    pub error: String,
}

pub fn read_config(path: &Path) -> CliResult<BenchConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut cfg: BenchConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    for g in &mut cfg.graphs {
        g.path = g.path.take().map(|p| base.join(p));
        g.attrs = g.attrs.take().map(|p| base.join(p));
    }
    Ok(cfg)
}

fn build_graph(spec: &GraphSpec, model: Model) -> CliResult<Graph> {
    match (&spec.path, &spec.synthetic) {
        (Some(path), None) => run::load(path, spec.attrs.as_deref(), model),
        (None, Some(syn)) => Ok(gen_synthetic(syn, spec.seed)?),
        _ => config(format!(
            "graph '{}' needs exactly one of 'path' or 'synthetic'",
            spec.name
        )),
    }
}

struct Job<'a> {
    graph: usize,
    algo: &'a str,
    budget: f64,
    eps: f64,
    rep: u32,
}

/// Runs every configuration and returns one row per cell of the cartesian
/// product. Failed runs become rows with an error message.
pub fn run_bench(cfg: &BenchConfig, parallel: bool, limits: SolverLimits) -> CliResult<Vec<Row>> {
    let model: Model = cfg.model.parse()?;
    let delta = match &cfg.delta {
        None => DeltaArg::Auto,
        Some(DeltaSpec::Number(d)) => DeltaArg::Fixed(*d),
        Some(DeltaSpec::Text(s)) => s.parse()?,
    };
    let mode = cfg.mode.as_deref().map(str::parse::<SaaMode>).transpose()?;
    let graphs: Vec<Result<Graph, String>> = cfg
        .graphs
        .iter()
        .map(|s| build_graph(s, model).map_err(|e| e.to_string()))
        .collect();

    let mut jobs = Vec::new();
    for (gi, _) in cfg.graphs.iter().enumerate() {
        for algo in &cfg.algorithms {
            for &budget in &cfg.budgets {
                for &eps in &cfg.epsilons {
                    for rep in 0..cfg.repetitions {
                        jobs.push(Job {
                            graph: gi,
                            algo,
                            budget,
                            eps,
                            rep,
                        });
                    }
                }
            }
        }
    }

    let exec = |job: &Job| -> Row {
        let mut row = Row {
            graph: cfg.graphs[job.graph].name.clone(),
            algo: job.algo.to_string(),
            budget: job.budget,
            eps: job.eps,
            rep: job.rep,
            benefit: None,
            time_ms: None,
            search_samples: None,
            verify_samples: None,
            seed_set: String::new(),
            error: String::new(),
        };
        let outcome = (|| -> CliResult<run::RunResult> {
            let g = graphs[job.graph].as_ref().map_err(|e| CliError::Config(e.clone()))?;
            let rc = RunConfig {
                graph: cfg.graphs[job.graph].path.clone(),
                attrs: cfg.graphs[job.graph].attrs.clone(),
                model,
                algo: job.algo.parse::<Algo>()?,
                budget: job.budget,
                eps: job.eps,
                delta: delta.resolve(g.node_count())?,
                seed: derive_seed(cfg.seed, job.rep as u64),
                workers: cfg.workers,
                realizations: cfg.realizations,
                mode,
            };
            run::solve(g, &rc, limits)
        })();
        match outcome {
            Ok(r) => {
                row.benefit = Some(r.benefit);
                row.time_ms = Some(r.wall_time_ms);
                row.search_samples = Some(r.search_samples);
                row.verify_samples = Some(r.verify_samples);
                row.seed_set = r
                    .seed_set
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
            }
            Err(e) => row.error = e.to_string(),
        }
        row
    };

    Ok(if parallel {
        jobs.par_iter().map(exec).collect()
    } else {
        jobs.iter().map(exec).collect()
    })
}

pub fn write_csv<W: Write>(rows: &[Row], sink: W) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    // Serializing an empty slice writes nothing, so the header goes first.
    w.write_record([
        "graph",
        "algo",
        "budget",
        "eps",
        "rep",
        "benefit",
        "time_ms",
        "search_samples",
        "verify_samples",
        "seed_set",
        "error",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: "csv output".into(),
        source,
    })
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io {
        path: "csv output".into(),
        source: std::io::Error::other(e),
    }
}
