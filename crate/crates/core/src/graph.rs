//! Probabilistic influence graph with per-node cost and benefit.
//!
//! Node ids are dense `u32` values in `0..n`. The graph is immutable once
//! built; both reverse (incoming) and forward (outgoing) adjacency are stored
//! in compressed form so samplers and oracles can walk either direction.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub type NodeId = u32;

/// Slack allowed when comparing a seed-set cost against the budget.
pub const BUDGET_TOL: f64 = 1e-9;

/// Slack allowed on the per-node incoming weight sum under LT.
pub const LT_TOL: f64 = 1e-9;

#[inline]
pub fn within_budget(cost: f64, budget: f64) -> bool {
    cost <= budget + BUDGET_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    IC,
    LT,
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ic" => Ok(Model::IC),
            "lt" => Ok(Model::LT),
            other => domain(format!("unknown diffusion model '{other}'")),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::IC => f.write_str("ic"),
            Model::LT => f.write_str("lt"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub p: f64,
}

/// An adjacency entry. `node` is the other endpoint; `edge` indexes
/// [`Graph::edges`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub node: NodeId,
    pub p: f64,
    pub edge: u32,
}

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    in_offsets: Vec<usize>,
    in_arcs: Vec<Link>,
    out_offsets: Vec<usize>,
    out_arcs: Vec<Link>,
    cost: Vec<f64>,
    benefit: Vec<f64>,
    gamma: f64,
    model_hint: Option<Model>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.edges == other.edges
            && self.cost == other.cost
            && self.benefit == other.benefit
    }
}

fn compress(n: usize, edges: &[Edge], reverse: bool) -> (Vec<usize>, Vec<Link>) {
    let key = |e: &Edge| if reverse { e.dst } else { e.src } as usize;
    let mut offsets = vec![0usize; n + 1];
    for e in edges {
        offsets[key(e) + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut arcs = vec![
        Link {
            node: 0,
            p: 0.0,
            edge: 0
        };
        edges.len()
    ];
    for (i, e) in edges.iter().enumerate() {
        let slot = &mut fill[key(e)];
        arcs[*slot] = Link {
            node: if reverse { e.src } else { e.dst },
            p: e.p,
            edge: i as u32,
        };
        *slot += 1;
    }
    (offsets, arcs)
}

impl Graph {
    /// Builds a graph and checks every structural invariant.
    ///
    /// LT in-weight sums are only enforced when `model_hint` is `Some(LT)`;
    /// use [`Graph::check_lt`] to test them on demand.
    pub fn new(
        n: usize,
        edges: Vec<Edge>,
        cost: Vec<f64>,
        benefit: Vec<f64>,
        model_hint: Option<Model>,
    ) -> Result<Graph> {
        if n > u32::MAX as usize {
            return Err(Error::InvalidGraph(format!("{n} nodes exceeds the id range")));
        }
        if cost.len() != n || benefit.len() != n {
            return Err(Error::InvalidGraph(format!(
                "attribute vectors have lengths {}/{} for {n} nodes",
                cost.len(),
                benefit.len()
            )));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.src as usize >= n || e.dst as usize >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has an endpoint outside [0, {n})",
                    e.src, e.dst
                )));
            }
            if e.src == e.dst {
                return Err(Error::InvalidGraph(format!("self-loop on node {}", e.src)));
            }
            if !(e.p > 0.0 && e.p <= 1.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}): probability out of range: {}",
                    e.src, e.dst, e.p
                )));
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.src, e.dst
                )));
            }
        }
        for (v, (&c, &b)) in cost.iter().zip(&benefit).enumerate() {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::InvalidGraph(format!("node {v}: negative cost {c}")));
            }
            if !(b >= 0.0) || !b.is_finite() {
                return Err(Error::InvalidGraph(format!("node {v}: negative benefit {b}")));
            }
        }
        let gamma: f64 = benefit.iter().sum();
        if !(gamma > 0.0) {
            return Err(Error::InvalidGraph("total benefit is zero".into()));
        }

        let (in_offsets, in_arcs) = compress(n, &edges, true);
        let (out_offsets, out_arcs) = compress(n, &edges, false);
        let g = Graph {
            n,
            edges,
            in_offsets,
            in_arcs,
            out_offsets,
            out_arcs,
            cost,
            benefit,
            gamma,
            model_hint,
        };
        if model_hint == Some(Model::LT) {
            g.check_lt()?;
        }
        Ok(g)
    }

    /// Graph with unit cost and unit benefit on every node.
    pub fn with_unit_attrs(n: usize, edges: Vec<Edge>) -> Result<Graph> {
        Graph::new(n, edges, vec![1.0; n], vec![1.0; n], None)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn in_arcs(&self, v: NodeId) -> &[Link] {
        let v = v as usize;
        &self.in_arcs[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn out_arcs(&self, v: NodeId) -> &[Link] {
        let v = v as usize;
        &self.out_arcs[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_arcs(v).len()
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_arcs(v).len()
    }

    pub fn costs(&self) -> &[f64] {
        &self.cost
    }

    pub fn benefits(&self) -> &[f64] {
        &self.benefit
    }

    pub fn cost(&self, v: NodeId) -> f64 {
        self.cost[v as usize]
    }

    pub fn benefit(&self, v: NodeId) -> f64 {
        self.benefit[v as usize]
    }

    pub fn model_hint(&self) -> Option<Model> {
        self.model_hint
    }

    /// Γ, the sum of all node benefits.
    pub fn total_benefit(&self) -> f64 {
        self.gamma
    }

    /// Fails if some node's incoming weights sum above one.
    pub fn check_lt(&self) -> Result<()> {
        for v in 0..self.n as NodeId {
            let total: f64 = self.in_arcs(v).iter().map(|a| a.p).sum();
            if total > 1.0 + LT_TOL {
                return Err(Error::InvalidGraph(format!(
                    "LT in-weight sum of node {v} is {total} > 1"
                )));
            }
        }
        Ok(())
    }

    /// Largest `q` such that the `q` cheapest nodes fit in `budget`.
    pub fn max_seed_size(&self, budget: f64) -> usize {
        let mut sorted = self.cost.clone();
        sorted.sort_by(f64::total_cmp);
        let mut spent = 0.0;
        let mut count = 0;
        for c in sorted {
            spent += c;
            if !within_budget(spent, budget) {
                break;
            }
            count += 1;
        }
        count
    }

    pub fn write_edges<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.edges {
            writeln!(w, "{} {} {}", e.src, e.dst, e.p)?;
        }
        Ok(())
    }

    /// Writes one attribute line per node, so `n` survives a round trip.
    pub fn write_attrs<W: Write>(&self, mut w: W) -> Result<()> {
        for v in 0..self.n {
            writeln!(w, "{} {} {}", v, self.cost[v], self.benefit[v])?;
        }
        Ok(())
    }

    pub fn from_paths(
        edges: &Path,
        attrs: Option<&Path>,
        model_hint: Option<Model>,
    ) -> Result<Graph> {
        let edge_reader = BufReader::new(File::open(edges)?);
        match attrs {
            Some(path) => {
                let attr_reader = BufReader::new(File::open(path)?);
                load_graph(edge_reader, Some(attr_reader), model_hint)
            }
            None => load_graph(edge_reader, None::<&[u8]>, model_hint),
        }
    }
}

fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(Error::Io(e))),
            Ok(line) => {
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    None
                } else {
                    Some(Ok((i + 1, trimmed.to_string())))
                }
            }
        })
}

fn field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("malformed {what} '{tok}'"),
    })
}

/// Parses an edge list (`src dst p` per line) and an optional attribute list
/// (`node cost benefit` per line). Unlisted nodes get cost 1 and benefit 1.
/// The node count is one more than the largest id in either source.
pub fn load_graph<E: BufRead, A: BufRead>(
    edge_source: E,
    attr_source: Option<A>,
    model_hint: Option<Model>,
) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let mut max_id: Option<NodeId> = None;
    for item in data_lines(edge_source) {
        let (line, text) = item?;
        let mut toks = text.split_whitespace();
        let src: NodeId = field(toks.next(), line, "source node")?;
        let dst: NodeId = field(toks.next(), line, "target node")?;
        let p: f64 = field(toks.next(), line, "probability")?;
        if toks.next().is_some() {
            return Err(Error::Parse {
                line,
                message: "expected exactly 'src dst p'".into(),
            });
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Parse {
                line,
                message: format!("probability out of range: {p}"),
            });
        }
        if src == dst {
            return Err(Error::Parse {
                line,
                message: format!("self-loop on node {src}"),
            });
        }
        if !seen.insert((src, dst)) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate edge ({src}, {dst})"),
            });
        }
        max_id = max_id.max(Some(src.max(dst)));
        edges.push(Edge { src, dst, p });
    }

    let mut attrs = Vec::new();
    if let Some(reader) = attr_source {
        let mut listed = HashSet::new();
        for item in data_lines(reader) {
            let (line, text) = item?;
            let mut toks = text.split_whitespace();
            let node: NodeId = field(toks.next(), line, "node")?;
            let cost: f64 = field(toks.next(), line, "cost")?;
            let benefit: f64 = field(toks.next(), line, "benefit")?;
            if toks.next().is_some() {
                return Err(Error::Parse {
                    line,
                    message: "expected exactly 'node cost benefit'".into(),
                });
            }
            if !(cost >= 0.0) || !cost.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("negative cost {cost}"),
                });
            }
            if !(benefit >= 0.0) || !benefit.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("negative benefit {benefit}"),
                });
            }
            if !listed.insert(node) {
                return Err(Error::Parse {
                    line,
                    message: format!("node {node} listed twice"),
                });
            }
            max_id = max_id.max(Some(node));
            attrs.push((node, cost, benefit));
        }
    }

    let n = max_id.map_or(0, |m| m as usize + 1);
    let mut cost = vec![1.0; n];
    let mut benefit = vec![1.0; n];
    for (v, c, b) in attrs {
        cost[v as usize] = c;
        benefit[v as usize] = b;
    }
    Graph::new(n, edges, cost, benefit, model_hint)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum WeightRule {
    /// `p(u, v) = scale / d_in(v)`; with `scale <= 1` the graph is LT-valid.
    InDegreeReciprocal { scale: f64 },
    Constant { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CostRule {
    Uniform,
    /// Uniform on `[0, 1)`.
    Random01,
    /// `c(u) = n / m * d_out(u)`.
    OutDegreeLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BenefitRule {
    Uniform,
    /// A random `fraction` of nodes get a benefit uniform on `[lo, hi)`, the
    /// rest get zero.
    Targeted { fraction: f64, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub avg_degree: f64,
    pub weight_rule: WeightRule,
    pub cost_rule: CostRule,
    pub benefit_rule: BenefitRule,
}

/// Directed Erdős–Rényi graph where each ordered pair is an edge with
/// probability `avg_degree / (n - 1)`, enumerated by geometric skipping.
///
/// Edges, costs and benefits each draw from their own ChaCha stream, so the
/// edge list does not depend on the attribute rules.
pub fn gen_synthetic(cfg: &SyntheticConfig, seed: u64) -> Result<Graph> {
    let n = cfg.n;
    if n < 2 {
        return domain(format!("synthetic graphs need n >= 2, got {n}"));
    }
    if !(cfg.avg_degree >= 0.0) || cfg.avg_degree > (n - 1) as f64 {
        return domain(format!(
            "avg_degree must lie in [0, {}], got {}",
            n - 1,
            cfg.avg_degree
        ));
    }
    match cfg.weight_rule {
        WeightRule::InDegreeReciprocal { scale } if !(scale > 0.0 && scale <= 1.0) => {
            return domain(format!("weight scale must lie in (0, 1], got {scale}"));
        }
        WeightRule::Constant { p } if !(p > 0.0 && p <= 1.0) => {
            return domain(format!("constant weight must lie in (0, 1], got {p}"));
        }
        _ => {}
    }
    if let BenefitRule::Targeted { fraction, lo, hi } = cfg.benefit_rule {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return domain(format!("targeted fraction must lie in (0, 1], got {fraction}"));
        }
        if !(lo >= 0.0 && hi > lo) {
            return domain(format!("targeted benefit range [{lo}, {hi}) is empty"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let q = cfg.avg_degree / (n - 1) as f64;
    let pairs = (n * (n - 1)) as u64;
    let mut raw: Vec<(NodeId, NodeId)> = Vec::new();
    if q >= 1.0 {
        raw.extend((0..pairs).map(|i| pair_at(i, n)));
    } else if q > 0.0 {
        let log_q = (1.0 - q).ln();
        let mut idx: u64 = 0;
        loop {
            let r: f64 = rng.random();
            let skip = ((1.0 - r).ln() / log_q).floor();
            if !skip.is_finite() || skip >= (pairs - idx) as f64 {
                break;
            }
            idx += skip as u64;
            raw.push(pair_at(idx, n));
            idx += 1;
            if idx >= pairs {
                break;
            }
        }
    }

    let mut in_deg = vec![0usize; n];
    let mut out_deg = vec![0usize; n];
    for &(u, v) in &raw {
        out_deg[u as usize] += 1;
        in_deg[v as usize] += 1;
    }
    let edges: Vec<Edge> = raw
        .into_iter()
        .map(|(src, dst)| {
            let p = match cfg.weight_rule {
                WeightRule::InDegreeReciprocal { scale } => scale / in_deg[dst as usize] as f64,
                WeightRule::Constant { p } => p,
            };
            Edge { src, dst, p }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let m = edges.len();
    let cost: Vec<f64> = match cfg.cost_rule {
        CostRule::Uniform => vec![1.0; n],
        CostRule::Random01 => (0..n).map(|_| rng.random::<f64>()).collect(),
        CostRule::OutDegreeLinear if m == 0 => vec![1.0; n],
        CostRule::OutDegreeLinear => out_deg
            .iter()
            .map(|&d| n as f64 / m as f64 * d as f64)
            .collect(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let benefit: Vec<f64> = match cfg.benefit_rule {
        BenefitRule::Uniform => vec![1.0; n],
        BenefitRule::Targeted { fraction, lo, hi } => {
            let count = ((fraction * n as f64).round() as usize).clamp(1, n);
            let mut b = vec![0.0; n];
            let mut chosen = index::sample(&mut rng, n, count).into_vec();
            chosen.sort_unstable();
            for v in chosen {
                b[v] = lo + (hi - lo) * rng.random::<f64>();
            }
            b
        }
    };

    Graph::new(n, edges, cost, benefit, None)
}

/// Maps an index in `0..n(n-1)` to an ordered pair without self-loops.
fn pair_at(idx: u64, n: usize) -> (NodeId, NodeId) {
    let row = (idx / (n as u64 - 1)) as NodeId;
    let col = (idx % (n as u64 - 1)) as NodeId;
    (row, if col < row { col } else { col + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(edges: &str, attrs: Option<&str>) -> Result<Graph> {
        load_graph(edges.as_bytes(), attrs.map(str::as_bytes), None)
    }

    #[test]
    fn default_attributes() {
        let g = load("0 1 0.5\n", None).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.costs(), &[1.0, 1.0]);
        assert_eq!(g.total_benefit(), 2.0);
    }

    #[test]
    fn listed_benefits_override_defaults() {
        let g = load("0 1 0.5\n1 2 0.5\n", Some("2 1 0\n")).unwrap();
        assert_eq!(g.benefits(), &[1.0, 1.0, 0.0]);
        assert_eq!(g.total_benefit(), 2.0);
    }

    #[test]
    fn rejects_bad_probability() {
        let err = load("0 1 1.5\n", None).unwrap_err();
        assert!(err.to_string().contains("probability out of range"), "{err}");
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(load("0 1 0\n", None).is_err());
    }

    #[test]
    fn reports_line_numbers() {
        let err = load("# header\n0 1 0.5\n1 x 0.5\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = load("0 1 0.5 9\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn rejects_structural_violations() {
        assert!(load("0 0 0.5\n", None).is_err());
        assert!(load("0 1 0.5\n0 1 0.2\n", None).is_err());
        assert!(load("0 1 0.5\n", Some("1 -1 1\n")).is_err());
        assert!(load("0 1 0.5\n", Some("1 1 -2\n")).is_err());
        assert!(load("0 1 0.5\n", Some("0 1 0\n1 1 0\n")).is_err());
    }

    #[test]
    fn lt_in_weight_check() {
        let text = "0 2 0.6\n1 2 0.6\n";
        assert!(load_graph(text.as_bytes(), None::<&[u8]>, Some(Model::IC)).is_ok());
        let err = load_graph(text.as_bytes(), None::<&[u8]>, Some(Model::LT)).unwrap_err();
        assert!(err.to_string().contains("LT"));
    }

    #[test]
    fn attribute_file_extends_node_range() {
        let g = load("0 1 0.5\n", Some("4 2 3\n")).unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.benefit(4), 3.0);
        assert_eq!(g.in_degree(4), 0);
    }

    #[test]
    fn total_benefit_examples() {
        let g = Graph::new(4, vec![], vec![1.0; 4], vec![0.0, 0.0, 0.0, 2.0], None).unwrap();
        assert_eq!(g.total_benefit(), 2.0);
        let g = Graph::with_unit_attrs(3, vec![]).unwrap();
        assert_eq!(g.total_benefit(), 3.0);
        assert!(Graph::new(2, vec![], vec![1.0; 2], vec![0.0; 2], None).is_err());
    }

    #[test]
    fn max_seed_size_examples() {
        let g = Graph::with_unit_attrs(3, vec![]).unwrap();
        assert_eq!(g.max_seed_size(2.0), 2);
        assert_eq!(g.max_seed_size(0.0), 0);
        let g = Graph::new(3, vec![], vec![3.0, 1.0, 2.0], vec![1.0; 3], None).unwrap();
        assert_eq!(g.max_seed_size(3.5), 2);
        assert_eq!(g.max_seed_size(0.5), 0);
        assert_eq!(g.max_seed_size(100.0), 3);
    }

    #[test]
    fn adjacency_is_consistent() {
        let g = load("0 1 0.5\n2 1 0.25\n1 2 1\n", None).unwrap();
        let ins: Vec<_> = g.in_arcs(1).iter().map(|a| (a.node, a.p)).collect();
        assert_eq!(ins, vec![(0, 0.5), (2, 0.25)]);
        let outs: Vec<_> = g.out_arcs(1).iter().map(|a| (a.node, a.edge)).collect();
        assert_eq!(outs, vec![(2, 2)]);
    }

    fn cfg(n: usize, avg_degree: f64) -> SyntheticConfig {
        SyntheticConfig {
            n,
            avg_degree,
            weight_rule: WeightRule::InDegreeReciprocal { scale: 1.0 },
            cost_rule: CostRule::Uniform,
            benefit_rule: BenefitRule::Uniform,
        }
    }

    #[test]
    fn synthetic_without_edges() {
        let g = gen_synthetic(&cfg(10, 0.0), 7).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let mut c = cfg(60, 3.0);
        c.cost_rule = CostRule::Random01;
        c.benefit_rule = BenefitRule::Targeted {
            fraction: 0.05,
            lo: 0.1,
            hi: 1.0,
        };
        let a = gen_synthetic(&c, 11).unwrap();
        let b = gen_synthetic(&c, 11).unwrap();
        let mut wa = Vec::new();
        let mut wb = Vec::new();
        a.write_edges(&mut wa).unwrap();
        b.write_edges(&mut wb).unwrap();
        assert_eq!(wa, wb);
        assert_eq!(a, b);
        let targeted = a.benefits().iter().filter(|&&x| x > 0.0).count();
        assert_eq!(targeted, 3);
        assert!(a.benefits().iter().all(|&x| x == 0.0 || (0.1..1.0).contains(&x)));
    }

    #[test]
    fn synthetic_edge_count_concentrates() {
        let g = gen_synthetic(&cfg(100, 4.0), 1).unwrap();
        let m = g.edge_count();
        // Observed with this generator: 393 edges.
        assert!((300..=500).contains(&m), "m = {m}");
        assert_eq!(m, 393);
        g.check_lt().unwrap();
    }

    #[test]
    fn synthetic_out_degree_costs() {
        let mut c = cfg(50, 2.0);
        c.cost_rule = CostRule::OutDegreeLinear;
        let g = gen_synthetic(&c, 3).unwrap();
        let scale = 50.0 / g.edge_count() as f64;
        for v in 0..50 {
            assert!((g.cost(v) - scale * g.out_degree(v) as f64).abs() < 1e-12);
        }
        // Mean cost is one by construction.
        let mean: f64 = g.costs().iter().sum::<f64>() / 50.0;
        assert!((mean - 1.0).abs() < 1e-9);
    }

    #[test]
    fn synthetic_rejects_bad_parameters() {
        assert!(gen_synthetic(&cfg(1, 0.0), 0).is_err());
        assert!(gen_synthetic(&cfg(10, -1.0), 0).is_err());
        assert!(gen_synthetic(&cfg(10, 20.0), 0).is_err());
        let mut c = cfg(10, 2.0);
        c.weight_rule = WeightRule::InDegreeReciprocal { scale: 1.5 };
        assert!(gen_synthetic(&c, 0).is_err());
    }

    #[test]
    fn complete_graph_when_degree_is_maximal() {
        let g = gen_synthetic(&cfg(5, 4.0), 0).unwrap();
        assert_eq!(g.edge_count(), 20);
    }
}
