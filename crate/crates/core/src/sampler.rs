//! Benefit-aware reverse-reachable sampling.
//!
//! A source node is drawn with probability `b(u) / Γ`; the RR set is then
//! grown backwards from it, either as a live-edge walk (LT) or as a reverse
//! BFS with lazily flipped edges (IC). Sample `i` of a batch always draws
//! from `RngStream::new(seed, i)`, so batches do not depend on scheduling.

use std::collections::VecDeque;
use std::ops::Range;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, Model, NodeId};

/// A reproducible random stream keyed by `(seed, stream)`.
#[derive(Debug, Clone)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> RngStream {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream(rng)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// SplitMix64 finalizer; derives independent sub-seeds from a run seed.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One reverse-reachable set. `members[0]` is the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RRSet {
    pub source: NodeId,
    pub members: Vec<NodeId>,
}

impl RRSet {
    pub fn contains(&self, v: NodeId) -> bool {
        self.members.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// True if any member is marked in `seed_mask`.
    pub fn hits(&self, seed_mask: &[bool]) -> bool {
        self.members.iter().any(|&v| seed_mask[v as usize])
    }
}

/// Per-thread scratch: a visited mask that is cleared after each sample.
#[derive(Debug, Clone)]
pub struct Scratch {
    mark: Vec<bool>,
    queue: VecDeque<NodeId>,
}

impl Scratch {
    pub fn new(n: usize) -> Scratch {
        Scratch {
            mark: vec![false; n],
            queue: VecDeque::new(),
        }
    }
}

/// Runs batch work either inline or on a dedicated rayon pool.
pub struct Executor {
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub fn new(workers: usize) -> Executor {
        let pool = if workers > 1 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .ok()
        } else {
            None
        };
        Executor { pool }
    }

    pub fn sequential() -> Executor {
        Executor { pool: None }
    }

    pub fn workers(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    /// Maps `f` over `range` keeping index order in the output.
    pub fn map_range<T, S, I, F>(&self, range: Range<u64>, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, u64) -> T + Sync + Send,
    {
        match &self.pool {
            None => {
                let mut state = init();
                range.map(|i| f(&mut state, i)).collect()
            }
            Some(pool) => pool.install(|| range.into_par_iter().map_init(&init, &f).collect()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sampler<'g> {
    graph: &'g Graph,
    model: Model,
    sources: WeightedIndex<f64>,
}

impl<'g> Sampler<'g> {
    pub fn new(graph: &'g Graph, model: Model) -> Result<Sampler<'g>> {
        if model == Model::LT {
            graph.check_lt()?;
        }
        let sources = WeightedIndex::new(graph.benefits().iter().copied())
            .map_err(|e| Error::InvalidGraph(format!("benefit distribution: {e}")))?;
        Ok(Sampler {
            graph,
            model,
            sources,
        })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn scratch(&self) -> Scratch {
        Scratch::new(self.graph.node_count())
    }

    /// Draws a node with probability `b(v) / Γ`.
    pub fn sample_source<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        self.sources.sample(rng) as NodeId
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut Scratch) -> RRSet {
        let source = self.sample_source(rng);
        self.sample_from(source, rng, scratch)
    }

    pub fn sample_from<R: Rng + ?Sized>(
        &self,
        source: NodeId,
        rng: &mut R,
        scratch: &mut Scratch,
    ) -> RRSet {
        match self.model {
            Model::LT => self.bsa_lt(source, rng, scratch),
            Model::IC => self.bsa_ic(source, rng, scratch),
        }
    }

    /// Live-edge reverse walk: at each node pick one incoming edge with
    /// probability equal to its weight (or none with the residual mass).
    /// Stops when no edge is picked or the walk revisits a node.
    pub fn bsa_lt<R: Rng + ?Sized>(
        &self,
        source: NodeId,
        rng: &mut R,
        scratch: &mut Scratch,
    ) -> RRSet {
        let mut members = vec![source];
        scratch.mark[source as usize] = true;
        let mut cur = source;
        loop {
            let r: f64 = rng.random();
            let mut acc = 0.0;
            let mut next = None;
            for link in self.graph.in_arcs(cur) {
                acc += link.p;
                if r < acc {
                    next = Some(link.node);
                    break;
                }
            }
            match next {
                Some(v) if !scratch.mark[v as usize] => {
                    scratch.mark[v as usize] = true;
                    members.push(v);
                    cur = v;
                }
                _ => break,
            }
        }
        for &v in &members {
            scratch.mark[v as usize] = false;
        }
        RRSet { source, members }
    }

    /// Reverse BFS where each incoming edge of a dequeued node is flipped
    /// live with probability `p` the first time it is examined. Edges whose
    /// tail is already in the set are skipped without a flip.
    pub fn bsa_ic<R: Rng + ?Sized>(
        &self,
        source: NodeId,
        rng: &mut R,
        scratch: &mut Scratch,
    ) -> RRSet {
        let mut members = vec![source];
        scratch.mark[source as usize] = true;
        scratch.queue.clear();
        scratch.queue.push_back(source);
        while let Some(cur) = scratch.queue.pop_front() {
            for link in self.graph.in_arcs(cur) {
                let u = link.node as usize;
                if scratch.mark[u] {
                    continue;
                }
                if rng.random::<f64>() < link.p {
                    scratch.mark[u] = true;
                    members.push(link.node);
                    scratch.queue.push_back(link.node);
                }
            }
        }
        for &v in &members {
            scratch.mark[v as usize] = false;
        }
        RRSet { source, members }
    }

    /// Sample with index `i` of the stream family `seed`.
    pub fn sample_indexed(&self, seed: u64, i: u64, scratch: &mut Scratch) -> RRSet {
        let mut rng = RngStream::new(seed, i);
        self.sample(&mut rng, scratch)
    }

    /// Samples with indices in `range`, in index order.
    pub fn batch(&self, seed: u64, range: Range<u64>, exec: &Executor) -> Vec<RRSet> {
        exec.map_range(range, || self.scratch(), |s, i| self.sample_indexed(seed, i, s))
    }

    /// An unbounded sequence of samples generated in parallel chunks but
    /// consumed one at a time.
    pub fn stream<'s>(&'s self, seed: u64, exec: &'s Executor) -> SampleStream<'s, 'g> {
        SampleStream {
            sampler: self,
            exec,
            seed,
            next: 0,
            chunk: 64,
            buffer: VecDeque::new(),
        }
    }
}

const MAX_CHUNK: u64 = 8192;

pub struct SampleStream<'s, 'g> {
    sampler: &'s Sampler<'g>,
    exec: &'s Executor,
    seed: u64,
    next: u64,
    chunk: u64,
    buffer: VecDeque<RRSet>,
}

impl SampleStream<'_, '_> {
    /// Number of samples handed out so far.
    pub fn consumed(&self) -> u64 {
        self.next - self.buffer.len() as u64
    }
}

impl Iterator for SampleStream<'_, '_> {
    type Item = RRSet;

    fn next(&mut self) -> Option<RRSet> {
        if self.buffer.is_empty() {
            let range = self.next..self.next + self.chunk;
            self.next = range.end;
            self.chunk = (self.chunk * 2).min(MAX_CHUNK);
            self.buffer = self.sampler.batch(self.seed, range, self.exec).into();
        }
        self.buffer.pop_front()
    }
}
