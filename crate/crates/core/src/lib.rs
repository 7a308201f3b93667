//! Cost-aware targeted viral marketing: benefit-aware reverse-reachable
//! sampling, the TipTop search/verify loop with an exact max-coverage core,
//! a sample-average-approximation baseline, and brute-force oracles.

pub mod coverage;
pub mod error;
pub mod graph;
pub mod lp;
pub mod maxcover;
pub mod oracle;
pub mod sampler;
pub mod texact;
pub mod tiptop;

pub use coverage::RRCollection;
pub use error::{Error, Result};
pub use graph::{Edge, Graph, Model, NodeId};
pub use maxcover::{CoverSolution, SeedSet, SolverLimits};
pub use sampler::{RRSet, RngStream};
