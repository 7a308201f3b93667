//! Indexed pool of RR sets.

use std::io::Write;

use crate::error::{domain, Result};
use crate::graph::{Graph, Model, NodeId};
use crate::sampler::{Executor, RRSet, Sampler};

#[derive(Debug, Clone, PartialEq)]
pub struct RRCollection {
    n: usize,
    sets: Vec<RRSet>,
    /// node -> indices of the sets containing it, ascending.
    inverted: Vec<Vec<u32>>,
    total_width: usize,
}

impl RRCollection {
    pub fn new(n: usize) -> RRCollection {
        RRCollection {
            n,
            sets: Vec::new(),
            inverted: vec![Vec::new(); n],
            total_width: 0,
        }
    }

    pub fn from_sets(n: usize, sets: impl IntoIterator<Item = RRSet>) -> RRCollection {
        let mut c = RRCollection::new(n);
        c.extend(sets);
        c
    }

    /// Builds a collection from bare member lists; the first member of each
    /// list is taken as its source.
    pub fn from_member_lists(n: usize, lists: &[Vec<NodeId>]) -> RRCollection {
        RRCollection::from_sets(
            n,
            lists.iter().map(|m| RRSet {
                source: m[0],
                members: m.clone(),
            }),
        )
    }

    pub fn push(&mut self, set: RRSet) {
        let idx = self.sets.len() as u32;
        for &v in &set.members {
            debug_assert!((v as usize) < self.n);
            self.inverted[v as usize].push(idx);
        }
        self.total_width += set.members.len();
        self.sets.push(set);
    }

    pub fn extend(&mut self, sets: impl IntoIterator<Item = RRSet>) {
        for s in sets {
            self.push(s);
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of sets, T.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn total_width(&self) -> usize {
        self.total_width
    }

    pub fn sets(&self) -> &[RRSet] {
        &self.sets
    }

    /// Indices of the sets that contain `v`.
    pub fn sets_containing(&self, v: NodeId) -> &[u32] {
        &self.inverted[v as usize]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.inverted[v as usize].len()
    }

    /// Number of sets hit by `seeds`.
    pub fn cov(&self, seeds: &[NodeId]) -> usize {
        let mut covered = vec![false; self.sets.len()];
        self.cov_with(seeds, &mut covered)
    }

    /// Like [`cov`](Self::cov) but reuses `covered` as the marking bitmap.
    /// The bitmap is left cleared on return.
    pub fn cov_with(&self, seeds: &[NodeId], covered: &mut Vec<bool>) -> usize {
        covered.clear();
        covered.resize(self.sets.len(), false);
        let mut count = 0;
        for &v in seeds {
            for &j in &self.inverted[v as usize] {
                let slot = &mut covered[j as usize];
                if !*slot {
                    *slot = true;
                    count += 1;
                }
            }
        }
        covered.iter_mut().for_each(|c| *c = false);
        count
    }

    /// `Γ · cov(seeds) / T`.
    pub fn benefit_estimate(&self, seeds: &[NodeId], gamma: f64) -> Result<f64> {
        benefit_estimate(self.cov(seeds), self.len(), gamma)
    }

    /// One line per set: `source: m1 m2 ...` listing every member.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        for s in &self.sets {
            write!(w, "{}:", s.source)?;
            for m in &s.members {
                write!(w, " {m}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn benefit_estimate(cov: usize, t: usize, gamma: f64) -> Result<f64> {
    if t == 0 {
        return domain("benefit estimate over an empty collection");
    }
    Ok(gamma * cov as f64 / t as f64)
}

/// Draws `count` RR sets; set `i` comes from stream `(seed, i)`, so the result
/// does not depend on `workers`.
pub fn generate_batch(
    g: &Graph,
    model: Model,
    count: usize,
    seed: u64,
    workers: usize,
) -> Result<RRCollection> {
    let sampler = Sampler::new(g, model)?;
    let exec = Executor::new(workers);
    let sets = sampler.batch(seed, 0..count as u64, &exec);
    Ok(RRCollection::from_sets(g.node_count(), sets))
}
