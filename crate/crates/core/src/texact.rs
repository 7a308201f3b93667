//! T-EXACT: the two-stage stochastic program over sampled (or all)
//! realizations, solved exactly through weighted max coverage.
//!
//! With first-stage choice `S`, each second-stage variable `x_v^l` is 1
//! exactly when `IR(G^l, v)` meets `S`. The program therefore collapses to a
//! coverage instance whose elements are the reachability sets `IR(G^l, v)`
//! weighted by `w_l·b(v)`.

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::graph::{Graph, Model, NodeId};
use crate::lp::{BinaryProgram, Relation, Row, Sense};
use crate::maxcover::{CoverInstance, SeedSet, SolverLimits};
use crate::oracle::{enumerate_realizations, reverse_reach, Realization};
use crate::sampler::{Executor, RngStream};

/// Largest edge count for exhaustive discretization.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 12;
/// Largest total number of stored reachability entries.
pub const MODEL_ENTRY_LIMIT: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SaaMode {
    Sampled,
    Exhaustive,
}

impl std::str::FromStr for SaaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<SaaMode> {
        match s.to_ascii_lowercase().as_str() {
            "sampled" => Ok(SaaMode::Sampled),
            "exhaustive" => Ok(SaaMode::Exhaustive),
            other => domain(format!("unknown mode '{other}' (expected sampled or exhaustive)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaaConfig {
    pub model: Model,
    /// Number of sampled realizations T; ignored in exhaustive mode.
    pub realizations: usize,
    pub budget: f64,
    pub seed: u64,
    pub mode: SaaMode,
    pub workers: usize,
    pub limits: SolverLimits,
}

impl SaaConfig {
    pub fn new(model: Model, realizations: usize, budget: f64, seed: u64, mode: SaaMode) -> SaaConfig {
        SaaConfig {
            model,
            realizations,
            budget,
            seed,
            mode,
            workers: 1,
            limits: SolverLimits::from_env(),
        }
    }
}

/// The discretized program: one scenario per realization.
#[derive(Debug, Clone, PartialEq)]
pub struct MipModel {
    costs: Vec<f64>,
    benefits: Vec<f64>,
    budget: f64,
    weights: Vec<f64>,
    /// `ir[l][v] = IR(G^l, v)`, ascending.
    ir: Vec<Vec<Vec<NodeId>>>,
    limits: SolverLimits,
}

impl MipModel {
    pub fn node_count(&self) -> usize {
        self.costs.len()
    }

    pub fn realization_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn ir_set(&self, l: usize, v: NodeId) -> &[NodeId] {
        &self.ir[l][v as usize]
    }

    /// `n` first-stage plus `n·L` second-stage binaries.
    pub fn binary_count(&self) -> usize {
        self.node_count() * (1 + self.realization_count())
    }

    /// One budget row plus one reachability row per `(v, l)`.
    pub fn constraint_count(&self) -> usize {
        1 + self.node_count() * self.realization_count()
    }

    /// `Σ_l Σ_v |IR(G^l, v)|` plus the `n` budget-row entries.
    pub fn nonzeros(&self) -> usize {
        self.ir
            .iter()
            .flat_map(|per| per.iter().map(Vec::len))
            .sum::<usize>()
            + self.node_count()
    }

    pub fn objective_coefficient(&self, v: NodeId, l: usize) -> f64 {
        self.weights[l] * self.benefits[v as usize]
    }

    /// Objective value of first-stage choice `seeds` with the optimal
    /// second-stage completion.
    pub fn value_of(&self, seeds: &[NodeId]) -> f64 {
        let mut chosen = vec![false; self.node_count()];
        for &s in seeds {
            chosen[s as usize] = true;
        }
        let mut total = 0.0;
        for (l, per) in self.ir.iter().enumerate() {
            for (v, set) in per.iter().enumerate() {
                if set.iter().any(|&u| chosen[u as usize]) {
                    total += self.objective_coefficient(v as NodeId, l);
                }
            }
        }
        total
    }

    pub fn to_program(&self) -> BinaryProgram {
        let n = self.node_count();
        let l_count = self.realization_count();
        let mut objective = Vec::with_capacity(n * l_count);
        let mut rows = Vec::with_capacity(self.constraint_count());
        rows.push(Row {
            name: "budget".into(),
            terms: (0..n).map(|v| (self.costs[v], format!("s_{v}"))).collect(),
            relation: Relation::Le,
            rhs: self.budget,
        });
        for l in 0..l_count {
            for v in 0..n {
                let x = format!("x_{v}_{l}");
                objective.push((self.objective_coefficient(v as NodeId, l), x.clone()));
                let mut terms: Vec<(f64, String)> = self.ir[l][v]
                    .iter()
                    .map(|u| (1.0, format!("s_{u}")))
                    .collect();
                terms.push((-1.0, x));
                rows.push(Row {
                    name: format!("r_{v}_{l}"),
                    terms,
                    relation: Relation::Ge,
                    rhs: 0.0,
                });
            }
        }
        let mut binaries: Vec<String> = (0..n).map(|v| format!("s_{v}")).collect();
        for l in 0..l_count {
            binaries.extend((0..n).map(|v| format!("x_{v}_{l}")));
        }
        BinaryProgram {
            sense: Sense::Maximize,
            objective,
            rows,
            binaries,
        }
    }
}

/// Reachability set `IR(ξ, v)`: the nodes with a live path to `v`.
pub fn ir_set(g: &Graph, r: &Realization, v: NodeId) -> Vec<NodeId> {
    reverse_reach(g, &r.mask(g.edge_count()), v)
}

/// Draws one realization from the live-edge measure of `model`.
pub fn sample_realization<R: Rng + ?Sized>(g: &Graph, model: Model, rng: &mut R) -> Vec<bool> {
    let mut live = vec![false; g.edge_count()];
    match model {
        Model::IC => {
            for (e, edge) in g.edges().iter().enumerate() {
                live[e] = rng.random::<f64>() < edge.p;
            }
        }
        Model::LT => {
            for v in 0..g.node_count() as NodeId {
                let arcs = g.in_arcs(v);
                if arcs.is_empty() {
                    continue;
                }
                let mut x: f64 = rng.random();
                for a in arcs {
                    if x < a.p {
                        live[a.edge as usize] = true;
                        break;
                    }
                    x -= a.p;
                }
            }
        }
    }
    live
}

fn ir_profile(g: &Graph, live: &[bool]) -> Vec<Vec<NodeId>> {
    (0..g.node_count() as NodeId)
        .map(|v| reverse_reach(g, live, v))
        .collect()
}

/// Assembles the program. Sampled mode draws realization `l` from stream
/// `(seed, l)` with weight `1/T`; exhaustive mode uses every realization
/// with its probability.
pub fn build_saa(g: &Graph, cfg: &SaaConfig) -> Result<MipModel> {
    if !(cfg.budget >= 0.0) || !cfg.budget.is_finite() {
        return domain(format!("budget must be a nonnegative number, got {}", cfg.budget));
    }
    if cfg.model == Model::LT {
        g.check_lt()?;
    }
    let (weights, ir) = match cfg.mode {
        SaaMode::Sampled => {
            if cfg.realizations == 0 {
                return domain("sampled mode needs at least one realization");
            }
            let t = cfg.realizations;
            let n = g.node_count();
            if t.saturating_mul(n) > MODEL_ENTRY_LIMIT {
                return Err(Error::TooLarge(format!(
                    "{t} realizations of {n} nodes exceed {MODEL_ENTRY_LIMIT} entries"
                )));
            }
            let exec = Executor::new(cfg.workers);
            let ir = exec.map_range(
                0..t as u64,
                || (),
                |_, l| {
                    let mut rng = RngStream::new(cfg.seed, l);
                    let live = sample_realization(g, cfg.model, &mut rng);
                    ir_profile(g, &live)
                },
            );
            (vec![1.0 / t as f64; t], ir)
        }
        SaaMode::Exhaustive => {
            let m = g.edge_count();
            if m > EXHAUSTIVE_EDGE_LIMIT {
                return Err(Error::TooLarge(format!(
                    "exhaustive mode needs m <= {EXHAUSTIVE_EDGE_LIMIT}, graph has {m} edges"
                )));
            }
            let rs = enumerate_realizations(g, cfg.model)?;
            let weights = rs.iter().map(|r| r.probability).collect();
            let ir = rs.iter().map(|r| ir_profile(g, &r.mask(m))).collect();
            (weights, ir)
        }
    };
    let entries: usize = ir.iter().flat_map(|p: &Vec<Vec<NodeId>>| p.iter().map(Vec::len)).sum();
    if entries > MODEL_ENTRY_LIMIT {
        return Err(Error::TooLarge(format!(
            "model has {entries} reachability entries, limit {MODEL_ENTRY_LIMIT}"
        )));
    }
    Ok(MipModel {
        costs: g.costs().to_vec(),
        benefits: g.benefits().to_vec(),
        budget: cfg.budget,
        weights,
        ir,
        limits: cfg.limits,
    })
}

/// Optimal first-stage seed set and its objective value. Identical
/// reachability sets are merged before the search.
pub fn solve_saa(m: &MipModel) -> Result<(SeedSet, f64)> {
    let mut merged: HashMap<&[NodeId], f64> = HashMap::new();
    for (l, per) in m.ir.iter().enumerate() {
        for (v, set) in per.iter().enumerate() {
            let w = m.objective_coefficient(v as NodeId, l);
            if w > 0.0 {
                *merged.entry(set.as_slice()).or_insert(0.0) += w;
            }
        }
    }
    let mut elements: Vec<(&[NodeId], f64)> = merged.into_iter().collect();
    elements.sort_by(|a, b| a.0.cmp(b.0));
    let inst = CoverInstance::new(
        elements.iter().map(|&(s, w)| (w, s)),
        &m.costs,
        m.budget,
        m.limits,
    )?;
    let sol = inst.solve_exact();
    let value = m.value_of(&sol.seed.nodes);
    Ok((sol.seed, value))
}

/// `⌈n⁴/ε²·(k·ln n − ln α)⌉`, with natural logarithms.
pub fn saa_sample_bound(n: u64, k: u64, eps: f64, alpha: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if !(eps > 0.0) {
        return domain(format!("epsilon must be positive, got {eps}"));
    }
    let nf = n as f64;
    let bound = nf.powi(4) / (eps * eps) * (k as f64 * nf.ln() - alpha.ln());
    Ok(bound.ceil() as u64)
}

pub fn export_lp<W: Write>(m: &MipModel, sink: W) -> Result<()> {
    m.to_program().write_lp(sink)
}
