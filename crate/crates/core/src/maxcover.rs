//! Budgeted maximum coverage over RR sets: an exact branch-and-bound solver
//! and a lazy greedy baseline.
//!
//! Both solvers work on a [`CoverInstance`], a weighted set system where each
//! element is covered once any of its member nodes is chosen. RR collections
//! map onto it with unit weights; the SAA baseline reuses it with realization
//! weights.
//!
//! Ties between equal-valued solutions go to the smaller seed set, then to the
//! lexicographically smallest sorted id list.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;

use crate::coverage::RRCollection;
use crate::error::{Error, Result};
use crate::graph::{within_budget, NodeId, BUDGET_TOL};
use crate::lp::{BinaryProgram, Relation, Row, Sense};

/// Values within this distance are treated as equal.
pub const VALUE_TOL: f64 = 1e-9;

pub const DEFAULT_MAX_WIDTH: usize = 500_000;

/// Environment variable that overrides [`DEFAULT_MAX_WIDTH`].
pub const CAP_ENV: &str = "CTVM_SOLVER_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SolverLimits {
    /// Largest total element width accepted by the exact solver.
    pub max_width: usize,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits {
            max_width: DEFAULT_MAX_WIDTH,
        }
    }
}

impl SolverLimits {
    /// Defaults, with `CTVM_SOLVER_CAP` applied when it parses.
    pub fn from_env() -> SolverLimits {
        let max_width = std::env::var(CAP_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_WIDTH);
        SolverLimits { max_width }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSet {
    /// Ascending, without duplicates.
    pub nodes: Vec<NodeId>,
    pub total_cost: f64,
}

impl SeedSet {
    pub fn empty() -> SeedSet {
        SeedSet {
            nodes: Vec::new(),
            total_cost: 0.0,
        }
    }

    pub fn new(mut nodes: Vec<NodeId>, costs: &[f64]) -> SeedSet {
        nodes.sort_unstable();
        nodes.dedup();
        let total_cost = nodes.iter().map(|&v| costs[v as usize]).sum();
        SeedSet { nodes, total_cost }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverSolution {
    pub seed: SeedSet,
    /// Number of RR sets hit by `seed`.
    pub covered: usize,
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSolution {
    pub seed: SeedSet,
    pub value: f64,
    pub optimal: bool,
}

/// Orders `(value, nodes)` pairs by the solver preference: larger value,
/// then fewer nodes, then smaller ids. `Less` means `a` is preferred.
pub fn preference(a: (f64, &[NodeId]), b: (f64, &[NodeId])) -> Ordering {
    if a.0 > b.0 + VALUE_TOL {
        return Ordering::Less;
    }
    if b.0 > a.0 + VALUE_TOL {
        return Ordering::Greater;
    }
    a.1.len().cmp(&b.1.len()).then_with(|| a.1.cmp(b.1))
}

/// Rows of indices stored back to back.
#[derive(Debug, Clone, Default)]
struct Adjacency {
    start: Vec<usize>,
    flat: Vec<u32>,
}

impl Adjacency {
    fn from_rows(rows: Vec<Vec<u32>>) -> Adjacency {
        let mut start = Vec::with_capacity(rows.len() + 1);
        start.push(0);
        let mut flat = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        for r in rows {
            flat.extend_from_slice(&r);
            start.push(flat.len());
        }
        Adjacency { start, flat }
    }

    fn row(&self, i: usize) -> &[u32] {
        &self.flat[self.start[i]..self.start[i + 1]]
    }

    fn rows(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.start.windows(2).map(|w| &self.flat[w[0]..w[1]])
    }
}

/// Weighted set system restricted to useful, affordable candidate nodes.
#[derive(Debug, Clone)]
pub struct CoverInstance {
    candidates: Vec<NodeId>,
    cand_cost: Vec<f64>,
    elem_weight: Vec<f64>,
    elem_members: Adjacency,
    cand_elems: Adjacency,
    budget: f64,
    node_costs: Vec<f64>,
}

impl CoverInstance {
    /// Builds the instance from `(weight, members)` elements. Nodes that
    /// appear in no positive-weight element, or cost more than the budget on
    /// their own, are dropped.
    pub fn new<'a, I>(
        elements: I,
        costs: &[f64],
        budget: f64,
        limits: SolverLimits,
    ) -> Result<CoverInstance>
    where
        I: IntoIterator<Item = (f64, &'a [NodeId])>,
    {
        let n = costs.len();
        let mut local = vec![u32::MAX; n];
        let mut candidates: Vec<NodeId> = Vec::new();
        let mut raw: Vec<(f64, Vec<NodeId>)> = Vec::new();
        let mut seen: HashMap<Vec<NodeId>, usize> = HashMap::new();
        let mut width = 0usize;
        for (w, members) in elements {
            if !(w > 0.0) {
                continue;
            }
            width += members.len();
            if width > limits.max_width {
                return Err(Error::CapExceeded {
                    width,
                    cap: limits.max_width,
                });
            }
            let mut kept: Vec<NodeId> = members
                .iter()
                .copied()
                .filter(|&v| within_budget(costs[v as usize], budget))
                .collect();
            if kept.is_empty() {
                continue;
            }
            kept.sort_unstable();
            kept.dedup();
            // Elements with the same affordable members behave as one.
            if let Some(&i) = seen.get(&kept) {
                raw[i].0 += w;
                continue;
            }
            for &v in &kept {
                if local[v as usize] == u32::MAX {
                    local[v as usize] = 0;
                    candidates.push(v);
                }
            }
            seen.insert(kept.clone(), raw.len());
            raw.push((w, kept));
        }
        candidates.sort_unstable();
        for (i, &v) in candidates.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let mut elem_weight = Vec::with_capacity(raw.len());
        let mut elem_rows = Vec::with_capacity(raw.len());
        let mut cand_rows = vec![Vec::new(); candidates.len()];
        for (e, (w, members)) in raw.into_iter().enumerate() {
            let mut locals: Vec<u32> = members.iter().map(|&v| local[v as usize]).collect();
            locals.sort_unstable();
            for &c in &locals {
                cand_rows[c as usize].push(e as u32);
            }
            elem_weight.push(w);
            elem_rows.push(locals);
        }
        let elem_members = Adjacency::from_rows(elem_rows);
        let cand_elems = Adjacency::from_rows(cand_rows);
        let cand_cost = candidates.iter().map(|&v| costs[v as usize]).collect();
        Ok(CoverInstance {
            candidates,
            cand_cost,
            elem_weight,
            elem_members,
            cand_elems,
            budget,
            node_costs: costs.to_vec(),
        })
    }

    pub fn from_collection(
        c: &RRCollection,
        costs: &[f64],
        budget: f64,
        limits: SolverLimits,
    ) -> Result<CoverInstance> {
        CoverInstance::new(
            c.sets().iter().map(|s| (1.0, s.members.as_slice())),
            costs,
            budget,
            limits,
        )
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    pub fn element_count(&self) -> usize {
        self.elem_weight.len()
    }

    /// Total weight covered by `nodes` (original ids).
    pub fn value_of(&self, nodes: &[NodeId]) -> f64 {
        let mut hit = vec![false; self.elem_weight.len()];
        for &v in nodes {
            if let Ok(c) = self.candidates.binary_search(&v) {
                for &e in self.cand_elems.row(c) {
                    hit[e as usize] = true;
                }
            }
        }
        hit.iter()
            .zip(&self.elem_weight)
            .filter(|(h, _)| **h)
            .map(|(_, w)| w)
            .sum()
    }

    /// The same instance with the given local candidates removed.
    fn without(&self, locals: &[u32]) -> CoverInstance {
        let mut gone = vec![false; self.candidates.len()];
        for &c in locals {
            gone[c as usize] = true;
        }
        let members: Vec<Vec<NodeId>> = self
            .elem_members
            .rows()
            .map(|m| {
                m.iter()
                    .filter(|&&c| !gone[c as usize])
                    .map(|&c| self.candidates[c as usize])
                    .collect()
            })
            .collect();
        let limits = SolverLimits {
            max_width: usize::MAX,
        };
        CoverInstance::new(
            self.elem_weight.iter().zip(&members).map(|(&w, m)| (w, m.as_slice())),
            &self.node_costs,
            self.budget,
            limits,
        )
        .expect("an uncapped instance always builds")
    }

    fn seed_of(&self, locals: &[u32]) -> SeedSet {
        SeedSet::new(
            locals.iter().map(|&c| self.candidates[c as usize]).collect(),
            &self.node_costs,
        )
    }

    fn uniform_cost(&self) -> Option<f64> {
        let first = *self.cand_cost.first()?;
        (first > 0.0 && self.cand_cost.iter().all(|&c| c == first)).then_some(first)
    }

    /// Exact optimum with the tie-break described in the module docs.
    pub fn solve_exact(&self) -> WeightedSolution {
        if self.candidates.is_empty() {
            return WeightedSolution {
                seed: SeedSet::empty(),
                value: 0.0,
                optimal: true,
            };
        }
        let greedy = self.solve_greedy();
        let mut search = Search::new(self);
        search.tune_multipliers(self.budget, greedy.value, MULTIPLIER_ROUNDS);

        // Candidates that cannot appear in any near-optimal set are removed
        // and the smaller instance is solved from scratch.
        let mut dropped = Vec::new();
        search.probe(self.budget, greedy.value, &mut dropped);
        if dropped.len() * REDUCE_FRACTION >= self.candidates.len() {
            drop(search);
            return self.without(&dropped).solve_exact();
        }
        let mut best_value = greedy.value;
        let mut best: Vec<u32> = greedy
            .seed
            .nodes
            .iter()
            .map(|v| self.candidates.binary_search(v).unwrap() as u32)
            .collect();

        search.maximize(self.budget, &mut best_value, &mut best);
        let seed = self.seed_of(&best);
        let value = self.value_of(&seed.nodes);
        WeightedSolution {
            seed,
            value,
            optimal: true,
        }
    }

    /// Lazy greedy by marginal weight per unit cost, compared against the best
    /// affordable singleton.
    pub fn solve_greedy(&self) -> WeightedSolution {
        let k = self.candidates.len();
        let mut marg: Vec<f64> = self
            .cand_elems
            .rows()
            .map(|es| es.iter().map(|&e| self.elem_weight[e as usize]).sum())
            .collect();
        let mut heap: BinaryHeap<HeapEntry> = (0..k as u32)
            .map(|c| HeapEntry::new(marg[c as usize], self.cand_cost[c as usize], c))
            .collect();
        let mut covered = vec![false; self.elem_weight.len()];
        let mut chosen: Vec<u32> = Vec::new();
        let mut spent = 0.0;
        let mut value = 0.0;
        while let Some(top) = heap.pop() {
            let c = top.cand as usize;
            if !within_budget(spent + self.cand_cost[c], self.budget) {
                continue;
            }
            let fresh: f64 = self.cand_elems.row(c)
                .iter()
                .filter(|&&e| !covered[e as usize])
                .map(|&e| self.elem_weight[e as usize])
                .sum();
            marg[c] = fresh;
            if fresh <= VALUE_TOL {
                continue;
            }
            if fresh < top.gain - VALUE_TOL {
                heap.push(HeapEntry::new(fresh, self.cand_cost[c], top.cand));
                continue;
            }
            chosen.push(top.cand);
            spent += self.cand_cost[c];
            value += fresh;
            for &e in self.cand_elems.row(c) {
                covered[e as usize] = true;
            }
        }

        let mut seed = self.seed_of(&chosen);
        let mut value = if chosen.is_empty() { 0.0 } else { value };
        let single = (0..k)
            .filter(|&c| within_budget(self.cand_cost[c], self.budget))
            .map(|c| {
                let w: f64 = self.cand_elems.row(c)
                    .iter()
                    .map(|&e| self.elem_weight[e as usize])
                    .sum();
                (w, c)
            })
            .min_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        if let Some((w, c)) = single {
            if w > value + VALUE_TOL {
                seed = self.seed_of(&[c as u32]);
                value = w;
            }
        }
        WeightedSolution {
            seed,
            value,
            optimal: false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    ratio: f64,
    gain: f64,
    cand: u32,
}

impl HeapEntry {
    fn new(gain: f64, cost: f64, cand: u32) -> HeapEntry {
        let ratio = if cost > 0.0 { gain / cost } else { f64::INFINITY };
        HeapEntry { ratio, gain, cand }
    }
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ratio
            .total_cmp(&other.ratio)
            .then_with(|| self.gain.total_cmp(&other.gain))
            .then_with(|| other.cand.cmp(&self.cand))
    }
}

/// Sums the best fractional-knapsack fill of `items` (gain, cost, tag) under
/// `budget`, taking at most `picks` whole items when costs are uniform.
/// Records the fill fraction of each used item in `fill` when given.
fn knapsack(
    items: &mut [(f64, f64, u32)],
    budget: f64,
    picks: usize,
    uniform: Option<f64>,
    mut fill: Option<&mut Vec<(u32, f64)>>,
) -> f64 {
    if let Some(f) = fill.as_deref_mut() {
        f.clear();
    }
    if items.is_empty() {
        return 0.0;
    }
    let by_gain = |a: &(f64, f64, u32), b: &(f64, f64, u32)| b.0.total_cmp(&a.0);
    if let Some(unit) = uniform {
        let take = (((budget + BUDGET_TOL) / unit).floor() as usize)
            .min(picks)
            .min(items.len());
        if take < items.len() {
            items.select_nth_unstable_by(take, by_gain);
        }
        let mut total = 0.0;
        for it in &items[..take] {
            total += it.0;
            if let Some(f) = fill.as_deref_mut() {
                f.push((it.2, 1.0));
            }
        }
        return total;
    }

    let by_count = if picks >= items.len() {
        f64::INFINITY
    } else {
        let mut gains: Vec<f64> = items.iter().map(|p| p.0).collect();
        gains.select_nth_unstable_by(picks, |a, b| b.total_cmp(a));
        gains[..picks].iter().sum()
    };
    let ratio = |p: &(f64, f64, u32)| if p.1 > 0.0 { p.0 / p.1 } else { f64::INFINITY };
    items.sort_unstable_by(|a, b| ratio(b).total_cmp(&ratio(a)));
    let mut left = budget + BUDGET_TOL;
    let mut total = 0.0;
    for it in items.iter() {
        let frac = if it.1 <= left { 1.0 } else { left / it.1 };
        total += it.0 * frac;
        left -= it.1 * frac;
        if let Some(f) = fill.as_deref_mut() {
            f.push((it.2, frac));
        }
        if frac < 1.0 {
            break;
        }
    }
    total.min(by_count)
}

/// Mutable branch-and-bound state.
///
/// Two upper bounds are kept up to date. The first is a knapsack over the
/// candidates' uncovered weight. The second relaxes the covering rows with
/// multipliers `μ_e ∈ [0, w_e]`, which charges every element at most once.
/// The multipliers are tuned at the root and again for each subtree hanging
/// off it.
struct Search<'a> {
    inst: &'a CoverInstance,
    mu: Vec<f64>,
    /// Uncovered weight of the elements containing each candidate.
    marg: Vec<f64>,
    /// Same, with multiplier weights.
    mu_marg: Vec<f64>,
    cover_count: Vec<u32>,
    /// Per element, the candidates in it that are not excluded.
    alive: Vec<u32>,
    excluded: Vec<bool>,
    is_chosen: Vec<bool>,
    chosen: Vec<u32>,
    value: f64,
    /// `Σ (w_e − μ_e)` over uncovered elements some open candidate can
    /// still cover.
    slack: f64,
    uniform: Option<f64>,
    integral: bool,
    items: Vec<(f64, f64, u32)>,
}

const MULTIPLIER_ROUNDS: usize = 120;

/// Nodes at depth `1..=RETUNE_DEPTH` re-tune the multipliers for their
/// subtree with this many rounds.
const RETUNE_DEPTH: usize = 1;
const RETUNE_ROUNDS: usize = 30;

/// Rebuild the instance once probing removes at least 1/this of the
/// candidates.
const REDUCE_FRACTION: usize = 10;


impl<'a> Search<'a> {
    fn new(inst: &'a CoverInstance) -> Search<'a> {
        let k = inst.candidates.len();
        let marg: Vec<f64> = inst
            .cand_elems
            .rows()
            .map(|es| es.iter().map(|&e| inst.elem_weight[e as usize]).sum())
            .collect();
        Search {
            inst,
            mu: inst.elem_weight.clone(),
            mu_marg: marg.clone(),
            marg,
            cover_count: vec![0; inst.elem_weight.len()],
            alive: inst.elem_members.rows().map(|m| m.len() as u32).collect(),
            excluded: vec![false; k],
            is_chosen: vec![false; k],
            chosen: Vec::new(),
            value: 0.0,
            slack: 0.0,
            uniform: inst.uniform_cost(),
            integral: inst.elem_weight.iter().all(|w| w.fract() == 0.0),
            items: Vec::with_capacity(k),
        }
    }

    /// Subgradient descent on the multipliers of the uncovered elements
    /// still reachable from the current node, keeping the best bound found.
    /// `lower` is a known achievable value. The root starts from `μ = w`,
    /// deeper nodes from the multipliers in force.
    fn tune_multipliers(&mut self, budget: f64, lower: f64, rounds: usize) {
        let inst = self.inst;
        let active: Vec<u32> = (0..inst.elem_weight.len() as u32)
            .filter(|&e| self.cover_count[e as usize] == 0 && self.alive[e as usize] > 0)
            .collect();
        let mut mu = self.mu.clone();
        if self.chosen.is_empty() {
            mu.clone_from(&inst.elem_weight);
        }
        let mut best_mu = mu.clone();
        let mut best_bound = f64::INFINITY;
        let mut step_scale = 1.0;
        let mut stale = 0;
        let mut fill = Vec::new();
        let mut cover = vec![0.0; mu.len()];
        for _ in 0..rounds {
            self.items.clear();
            for c in 0..inst.candidates.len() {
                let cost = inst.cand_cost[c];
                if !self.is_open(c) || self.marg[c] <= VALUE_TOL || !within_budget(cost, budget) {
                    continue;
                }
                let gain: f64 = inst
                    .cand_elems
                    .row(c)
                    .iter()
                    .filter(|&&e| self.cover_count[e as usize] == 0)
                    .map(|&e| mu[e as usize])
                    .sum();
                if gain > 0.0 {
                    self.items.push((gain, cost, c as u32));
                }
            }
            let relaxed = knapsack(&mut self.items, budget, usize::MAX, self.uniform, Some(&mut fill));
            let bound = self.value
                + relaxed
                + active
                    .iter()
                    .map(|&e| inst.elem_weight[e as usize] - mu[e as usize])
                    .sum::<f64>();
            if best_bound.is_infinite() || bound < best_bound - 1e-12 * best_bound.abs().max(1.0) {
                best_bound = bound;
                best_mu.clone_from(&mu);
                stale = 0;
            } else {
                stale += 1;
                if stale >= 5 {
                    step_scale /= 2.0;
                    stale = 0;
                }
            }
            if best_bound <= lower + VALUE_TOL || step_scale < 1e-4 {
                break;
            }
            // Subgradient g_e = 1 − Σ_{v ∈ e} x_v.
            for &(c, frac) in &fill {
                for &e in inst.cand_elems.row(c as usize) {
                    cover[e as usize] += frac;
                }
            }
            let mut norm = 0.0;
            for &e in &active {
                let e = e as usize;
                let g = 1.0 - cover[e];
                if (g > 0.0 && mu[e] < inst.elem_weight[e]) || (g < 0.0 && mu[e] > 0.0) {
                    norm += g * g;
                }
            }
            if norm == 0.0 {
                break;
            }
            let step = step_scale * (bound - lower).max(VALUE_TOL) / norm;
            for &e in &active {
                let e = e as usize;
                let g = 1.0 - cover[e];
                mu[e] = (mu[e] + step * g).clamp(0.0, inst.elem_weight[e]);
            }
            for &(c, _) in &fill {
                for &e in inst.cand_elems.row(c as usize) {
                    cover[e as usize] = 0.0;
                }
            }
        }
        self.mu = best_mu;
        for c in 0..inst.candidates.len() {
            self.mu_marg[c] = inst
                .cand_elems
                .row(c)
                .iter()
                .filter(|&&e| self.cover_count[e as usize] == 0)
                .map(|&e| self.mu[e as usize])
                .sum();
        }
        self.slack = active
            .iter()
            .map(|&e| inst.elem_weight[e as usize] - self.mu[e as usize])
            .sum();
    }

    fn include(&mut self, c: u32) {
        let inst = self.inst;
        for &e in inst.cand_elems.row(c as usize) {
            let e = e as usize;
            if self.cover_count[e] == 0 {
                let w = inst.elem_weight[e];
                let mu = self.mu[e];
                self.value += w;
                self.slack -= w - mu;
                for &d in inst.elem_members.row(e) {
                    self.marg[d as usize] -= w;
                    self.mu_marg[d as usize] -= mu;
                }
            }
            self.cover_count[e] += 1;
        }
        self.is_chosen[c as usize] = true;
        self.chosen.push(c);
    }

    fn undo_include(&mut self) {
        let inst = self.inst;
        let c = self.chosen.pop().expect("nothing to undo");
        self.is_chosen[c as usize] = false;
        for &e in inst.cand_elems.row(c as usize) {
            let e = e as usize;
            self.cover_count[e] -= 1;
            if self.cover_count[e] == 0 {
                let w = inst.elem_weight[e];
                let mu = self.mu[e];
                self.value -= w;
                self.slack += w - mu;
                for &d in inst.elem_members.row(e) {
                    self.marg[d as usize] += w;
                    self.mu_marg[d as usize] += mu;
                }
            }
        }
    }

    fn exclude(&mut self, c: u32) {
        let inst = self.inst;
        self.excluded[c as usize] = true;
        for &e in inst.cand_elems.row(c as usize) {
            let e = e as usize;
            self.alive[e] -= 1;
            if self.alive[e] == 0 && self.cover_count[e] == 0 {
                self.slack -= inst.elem_weight[e] - self.mu[e];
            }
        }
    }

    fn undo_exclude(&mut self, c: u32) {
        let inst = self.inst;
        for &e in inst.cand_elems.row(c as usize) {
            let e = e as usize;
            if self.alive[e] == 0 && self.cover_count[e] == 0 {
                self.slack += inst.elem_weight[e] - self.mu[e];
            }
            self.alive[e] += 1;
        }
        self.excluded[c as usize] = false;
    }

    fn is_open(&self, c: usize) -> bool {
        !self.excluded[c] && !self.is_chosen[c]
    }

    /// Upper bound on the value reachable from the current node with `budget`
    /// left and at most `picks` more nodes.
    fn bound(&mut self, budget: f64, picks: usize) -> f64 {
        let inst = self.inst;
        self.items.clear();
        for c in 0..inst.candidates.len() {
            if self.is_open(c) && self.marg[c] > VALUE_TOL && within_budget(inst.cand_cost[c], budget) {
                self.items.push((self.marg[c], inst.cand_cost[c], c as u32));
            }
        }
        let plain = knapsack(&mut self.items, budget, picks, self.uniform, None);
        for it in self.items.iter_mut() {
            it.0 = self.mu_marg[it.2 as usize];
        }
        let relaxed = self.slack.max(0.0) + knapsack(&mut self.items, budget, picks, self.uniform, None);
        let extra = plain.min(relaxed);
        let total = self.value + extra + 1e-9 * (1.0 + extra.abs());
        if self.integral {
            (total + 1e-6).floor()
        } else {
            total
        }
    }

    /// Open affordable candidate with the best gain per unit cost, ties to
    /// the larger gain and then the smaller index.
    fn pick(&self, budget: f64) -> Option<u32> {
        let inst = self.inst;
        let mut best: Option<(f64, f64, u32)> = None;
        for c in 0..inst.candidates.len() {
            let gain = self.marg[c];
            let cost = inst.cand_cost[c];
            if !self.is_open(c) || gain <= VALUE_TOL || !within_budget(cost, budget) {
                continue;
            }
            let ratio = if cost > 0.0 { gain / cost } else { f64::INFINITY };
            let better = match best {
                None => true,
                Some((r, g, _)) => ratio > r || (ratio == r && gain > g),
            };
            if better {
                best = Some((ratio, gain, c as u32));
            }
        }
        best.map(|b| b.2)
    }

    /// Depth-first search from the current node. Branches that can only
    /// match the incumbent stay open while they could still yield a smaller
    /// seed set, and equal-valued sets are compared by [`preference`].
    fn maximize(&mut self, budget: f64, best_value: &mut f64, best: &mut Vec<u32>) {
        let mut excluded_here = Vec::new();
        let depth = self.chosen.len();
        let saved = (depth > 0 && depth <= RETUNE_DEPTH).then(|| {
            let saved = (self.mu.clone(), self.mu_marg.clone(), self.slack);
            self.tune_multipliers(budget, *best_value, RETUNE_ROUNDS);
            saved
        });
        loop {
            if self.value > *best_value + VALUE_TOL {
                *best_value = self.value;
                best.clone_from(&self.chosen);
                best.sort_unstable();
            } else if self.value >= *best_value - VALUE_TOL {
                let mut mine = self.chosen.clone();
                mine.sort_unstable();
                if (mine.len(), &mine) < (best.len(), &*best) {
                    *best_value = best_value.max(self.value);
                    *best = mine;
                }
            }
            let Some(c) = self.pick(budget) else { break };
            let bound = self.bound(budget, usize::MAX);
            // Every set below this node has more than `depth` members.
            let can_tie = depth < best.len();
            if bound < *best_value - VALUE_TOL || (!can_tie && bound <= *best_value + VALUE_TOL) {
                break;
            }
            let cost = self.inst.cand_cost[c as usize];
            self.include(c);
            self.maximize(budget - cost, best_value, best);
            self.undo_include();
            self.exclude(c);
            excluded_here.push(c);
        }
        for &c in excluded_here.iter().rev() {
            self.undo_exclude(c);
        }
        if let Some((mu, mu_marg, slack)) = saved {
            self.mu = mu;
            self.mu_marg = mu_marg;
            self.slack = slack;
        }
    }

    /// Excludes every open candidate whose forced inclusion stays below
    /// `lower` by more than the tie tolerance, repeating until nothing
    /// changes.
    fn probe(&mut self, budget: f64, lower: f64, excluded: &mut Vec<u32>) {
        loop {
            let mut changed = false;
            for c in 0..self.inst.candidates.len() {
                let cost = self.inst.cand_cost[c];
                if !self.is_open(c) || self.marg[c] <= VALUE_TOL || !within_budget(cost, budget) {
                    continue;
                }
                self.include(c as u32);
                let bound = self.bound(budget - cost, usize::MAX);
                self.undo_include();
                if bound < lower - VALUE_TOL {
                    self.exclude(c as u32);
                    excluded.push(c as u32);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
}

fn to_cover(sol: WeightedSolution) -> CoverSolution {
    CoverSolution {
        covered: sol.value.round() as usize,
        seed: sol.seed,
        optimal: sol.optimal,
    }
}

/// Exact ILP_MC over `c`: the affordable seed set covering the most RR sets.
pub fn solve_exact(
    c: &RRCollection,
    costs: &[f64],
    budget: f64,
    limits: SolverLimits,
) -> Result<CoverSolution> {
    let inst = CoverInstance::from_collection(c, costs, budget, limits)?;
    let sol = to_cover(inst.solve_exact());
    debug_assert_eq!(sol.covered, c.cov(&sol.seed.nodes));
    Ok(sol)
}

pub fn solve_greedy(c: &RRCollection, costs: &[f64], budget: f64) -> CoverSolution {
    let limits = SolverLimits {
        max_width: usize::MAX,
    };
    let inst = CoverInstance::from_collection(c, costs, budget, limits)
        .expect("unbounded width cannot be exceeded");
    to_cover(inst.solve_greedy())
}

/// ILP_MC as a binary program: `min sum y_j` subject to the budget row and
/// one covering row `sum_{v in R_j} s_v + y_j >= 1` per RR set.
pub fn ilp_mc_program(c: &RRCollection, costs: &[f64], budget: f64) -> BinaryProgram {
    let n = c.node_count();
    let mut rows = Vec::with_capacity(c.len() + 1);
    rows.push(Row {
        name: "budget".into(),
        terms: (0..n).map(|v| (costs[v], format!("s_{v}"))).collect(),
        relation: Relation::Le,
        rhs: budget,
    });
    for (j, set) in c.sets().iter().enumerate() {
        let mut members = set.members.clone();
        members.sort_unstable();
        let mut terms: Vec<(f64, String)> =
            members.iter().map(|v| (1.0, format!("s_{v}"))).collect();
        terms.push((1.0, format!("y_{j}")));
        rows.push(Row {
            name: format!("rr_{j}"),
            terms,
            relation: Relation::Ge,
            rhs: 1.0,
        });
    }
    let mut binaries: Vec<String> = (0..n).map(|v| format!("s_{v}")).collect();
    binaries.extend((0..c.len()).map(|j| format!("y_{j}")));
    BinaryProgram {
        sense: Sense::Minimize,
        objective: (0..c.len()).map(|j| (1.0, format!("y_{j}"))).collect(),
        rows,
        binaries,
    }
}
