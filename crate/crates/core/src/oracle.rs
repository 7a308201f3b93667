//! Ground truth for small graphs: exact expected benefit by enumerating
//! realizations, exhaustive OPT, and a stopping-rule Monte-Carlo estimator.

use std::collections::{HashMap, VecDeque};

use crate::error::{domain, Error, Result};
use crate::graph::{within_budget, Graph, Model, NodeId};
use crate::maxcover::{preference, SeedSet};
use crate::sampler::{Executor, Sampler};
use crate::tiptop::lambda2;

/// Largest edge count for IC enumeration (`2^m` realizations).
pub const IC_EDGE_LIMIT: usize = 20;
/// Largest number of LT realizations (product of per-node choice counts).
pub const LT_REALIZATION_LIMIT: u64 = 1_000_000;
/// Largest node count for [`exact_opt`].
pub const OPT_NODE_LIMIT: usize = 12;
pub const DEFAULT_MC_CAP: u64 = 20_000_000;

/// Probabilities at or below this are treated as zero during enumeration.
const ZERO_PROB: f64 = 1e-12;

/// One deterministic graph drawn from the live-edge measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// Indices into `g.edges()`, ascending.
    pub live: Vec<u32>,
    pub probability: f64,
}

impl Realization {
    pub fn mask(&self, m: usize) -> Vec<bool> {
        let mut mask = vec![false; m];
        for &e in &self.live {
            mask[e as usize] = true;
        }
        mask
    }
}

/// Calls `f(live_mask, probability)` for every realization with positive
/// probability.
pub fn visit_realizations<F>(g: &Graph, model: Model, mut f: F) -> Result<()>
where
    F: FnMut(&[bool], f64),
{
    let m = g.edge_count();
    match model {
        Model::IC => {
            if m > IC_EDGE_LIMIT {
                return Err(Error::TooLarge(format!(
                    "IC enumeration needs m <= {IC_EDGE_LIMIT}, graph has {m} edges"
                )));
            }
            let p: Vec<f64> = g.edges().iter().map(|e| e.p).collect();
            let mut live = vec![false; m];
            for bits in 0u32..(1u32 << m) {
                let mut prob = 1.0;
                for (e, slot) in live.iter_mut().enumerate() {
                    *slot = bits >> e & 1 == 1;
                    prob *= if *slot { p[e] } else { 1.0 - p[e] };
                }
                if prob > ZERO_PROB {
                    f(&live, prob);
                }
            }
        }
        Model::LT => {
            g.check_lt()?;
            // Per node: the admissible (edge, probability) choices; `None`
            // keeps no in-edge.
            let mut choices: Vec<Vec<(Option<u32>, f64)>> = Vec::new();
            let mut total: u64 = 1;
            for v in 0..g.node_count() as NodeId {
                let arcs = g.in_arcs(v);
                if arcs.is_empty() {
                    continue;
                }
                let mut opts: Vec<(Option<u32>, f64)> = arcs
                    .iter()
                    .filter(|a| a.p > ZERO_PROB)
                    .map(|a| (Some(a.edge), a.p))
                    .collect();
                let rest = 1.0 - arcs.iter().map(|a| a.p).sum::<f64>();
                if rest > ZERO_PROB {
                    opts.push((None, rest));
                }
                total = total.saturating_mul(opts.len() as u64);
                if total > LT_REALIZATION_LIMIT {
                    return Err(Error::TooLarge(format!(
                        "LT enumeration exceeds {LT_REALIZATION_LIMIT} realizations"
                    )));
                }
                choices.push(opts);
            }
            let mut digit = vec![0usize; choices.len()];
            let mut live = vec![false; m];
            loop {
                live.iter_mut().for_each(|x| *x = false);
                let mut prob = 1.0;
                for (opts, &d) in choices.iter().zip(&digit) {
                    let (edge, p) = opts[d];
                    if let Some(e) = edge {
                        live[e as usize] = true;
                    }
                    prob *= p;
                }
                f(&live, prob);
                // Mixed-radix increment.
                let mut i = 0;
                loop {
                    if i == digit.len() {
                        return Ok(());
                    }
                    digit[i] += 1;
                    if digit[i] < choices[i].len() {
                        break;
                    }
                    digit[i] = 0;
                    i += 1;
                }
            }
        }
    }
    Ok(())
}

pub fn enumerate_realizations(g: &Graph, model: Model) -> Result<Vec<Realization>> {
    let mut out = Vec::new();
    visit_realizations(g, model, |live, probability| {
        out.push(Realization {
            live: (0..live.len() as u32).filter(|&e| live[e as usize]).collect(),
            probability,
        })
    })?;
    Ok(out)
}

/// Nodes reachable from `seeds` over live edges.
pub fn forward_reach(g: &Graph, live: &[bool], seeds: &[NodeId]) -> Vec<bool> {
    let mut seen = vec![false; g.node_count()];
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    for &s in seeds {
        if !seen[s as usize] {
            seen[s as usize] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for a in g.out_arcs(u) {
            if live[a.edge as usize] && !seen[a.node as usize] {
                seen[a.node as usize] = true;
                queue.push_back(a.node);
            }
        }
    }
    seen
}

/// Nodes that reach `v` over live edges, ascending; always contains `v`.
pub fn reverse_reach(g: &Graph, live: &[bool], v: NodeId) -> Vec<NodeId> {
    let mut seen = vec![false; g.node_count()];
    let mut queue = VecDeque::from([v]);
    seen[v as usize] = true;
    while let Some(u) = queue.pop_front() {
        for a in g.in_arcs(u) {
            if live[a.edge as usize] && !seen[a.node as usize] {
                seen[a.node as usize] = true;
                queue.push_back(a.node);
            }
        }
    }
    (0..g.node_count() as NodeId)
        .filter(|&u| seen[u as usize])
        .collect()
}

fn check_seeds(g: &Graph, seeds: &[NodeId]) -> Result<()> {
    match seeds.iter().find(|&&v| v as usize >= g.node_count()) {
        Some(v) => domain(format!("seed {v} is not a node of the graph")),
        None => Ok(()),
    }
}

/// Expected benefit `B(S)`, summed exactly over realizations.
pub fn exact_benefit(g: &Graph, seeds: &[NodeId], model: Model) -> Result<f64> {
    check_seeds(g, seeds)?;
    let b = g.benefits();
    let mut total = 0.0;
    visit_realizations(g, model, |live, prob| {
        let reached = forward_reach(g, live, seeds);
        let sum: f64 = reached
            .iter()
            .zip(b)
            .filter(|(r, _)| **r)
            .map(|(_, x)| x)
            .sum();
        total += prob * sum;
    })?;
    Ok(total)
}

/// `Pr[RR ∩ S ≠ ∅]` for a benefit-sampled source, computed by enumerating
/// the source and the realization and walking backwards from the source.
pub fn rr_hit_probability(g: &Graph, seeds: &[NodeId], model: Model) -> Result<f64> {
    check_seeds(g, seeds)?;
    let gamma = g.total_benefit();
    let mut in_s = vec![false; g.node_count()];
    for &s in seeds {
        in_s[s as usize] = true;
    }
    let mut total = 0.0;
    visit_realizations(g, model, |live, prob| {
        for v in 0..g.node_count() as NodeId {
            let bv = g.benefit(v);
            if bv == 0.0 {
                continue;
            }
            if reverse_reach(g, live, v).iter().any(|&u| in_s[u as usize]) {
                total += prob * bv / gamma;
            }
        }
    })?;
    Ok(total)
}

/// Best affordable seed set and its exact benefit. Ties go to the smaller
/// set, then the lexicographically smaller one.
pub fn exact_opt(g: &Graph, budget: f64, model: Model) -> Result<(SeedSet, f64)> {
    let n = g.node_count();
    if n > OPT_NODE_LIMIT {
        return Err(Error::TooLarge(format!(
            "exhaustive OPT needs n <= {OPT_NODE_LIMIT}, graph has {n} nodes"
        )));
    }
    // Distinct per-node reach profiles with their total probability.
    let mut profiles: HashMap<Vec<u16>, f64> = HashMap::new();
    visit_realizations(g, model, |live, prob| {
        let key: Vec<u16> = (0..n as NodeId)
            .map(|v| {
                forward_reach(g, live, &[v])
                    .iter()
                    .enumerate()
                    .fold(0u16, |acc, (u, &r)| if r { acc | 1 << u } else { acc })
            })
            .collect();
        *profiles.entry(key).or_insert(0.0) += prob;
    })?;
    let mut profiles: Vec<(Vec<u16>, f64)> = profiles.into_iter().collect();
    profiles.sort_by(|a, b| a.0.cmp(&b.0));

    let b = g.benefits();
    let mask_benefit = |mask: u16| -> f64 {
        (0..n).filter(|&u| mask >> u & 1 == 1).map(|u| b[u]).sum()
    };
    let subsets = 1usize << n;
    let mut cost = vec![0.0; subsets];
    let mut value = vec![0.0; subsets];
    let mut reach = vec![0u16; subsets];
    for (masks, prob) in &profiles {
        for s in 1..subsets {
            let low = s.trailing_zeros() as usize;
            reach[s] = reach[s & (s - 1)] | masks[low];
            value[s] += prob * mask_benefit(reach[s]);
        }
    }
    let mut best: (f64, Vec<NodeId>) = (0.0, Vec::new());
    for s in 1..subsets {
        let low = s.trailing_zeros() as usize;
        cost[s] = cost[s & (s - 1)] + g.cost(low as NodeId);
        if !within_budget(cost[s], budget) {
            continue;
        }
        let nodes: Vec<NodeId> = (0..n as NodeId).filter(|&v| s >> v & 1 == 1).collect();
        if preference((value[s], &nodes), (best.0, &best.1)) == std::cmp::Ordering::Less {
            best = (value[s], nodes);
        }
    }
    let (opt, nodes) = best;
    Ok((SeedSet::new(nodes, g.costs()), opt))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub samples: u64,
    pub covered: u64,
}

/// Stopping-rule estimate of `B(S)`: draw RR sets until `Λ₂(ε′, δ)` of them
/// hit `S`, with `ε′ = ε/(1−ε)`, and return `Γ·cov/T`.
pub fn mc_estimate(
    g: &Graph,
    seeds: &[NodeId],
    eps: f64,
    delta: f64,
    model: Model,
    seed: u64,
) -> Result<f64> {
    let exec = Executor::sequential();
    mc_estimate_with(g, seeds, eps, delta, model, seed, DEFAULT_MC_CAP, &exec).map(|e| e.value)
}

#[allow(clippy::too_many_arguments)]
pub fn mc_estimate_with(
    g: &Graph,
    seeds: &[NodeId],
    eps: f64,
    delta: f64,
    model: Model,
    seed: u64,
    max_samples: u64,
    exec: &Executor,
) -> Result<McEstimate> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return domain(format!("estimator needs eps, delta in (0, 1), got {eps}, {delta}"));
    }
    check_seeds(g, seeds)?;
    let sampler = Sampler::new(g, model)?;
    if seeds.is_empty() {
        return Ok(McEstimate {
            value: 0.0,
            samples: 0,
            covered: 0,
        });
    }
    let eps_prime = eps / (1.0 - eps);
    let threshold = lambda2(eps_prime, delta);
    let mut mask = vec![false; g.node_count()];
    for &v in seeds {
        mask[v as usize] = true;
    }
    let mut covered: u64 = 0;
    let mut samples: u64 = 0;
    let mut stream = sampler.stream(seed, exec);
    while (covered as f64) < threshold {
        if samples >= max_samples {
            return Err(Error::SampleCap { cap: max_samples });
        }
        let set = stream.next().expect("sample stream is unbounded");
        samples += 1;
        if set.hits(&mask) {
            covered += 1;
        }
    }
    Ok(McEstimate {
        value: g.total_benefit() * covered as f64 / samples as f64,
        samples,
        covered,
    })
}
