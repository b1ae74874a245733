//! NIL-aware entity linking.
//!
//! Mentions and knowledge-base entities are connected by a sparse top-k
//! affinity graph. Mentions are grouped by greedy nearest-neighbour
//! clustering, and clusters holding more than one candidate entity are split
//! by assigning each mention to the entity with the highest transitive
//! (maximum path product) affinity. Mentions without a strong enough path to
//! any entity form NIL clusters, each standing for an entity missing from the
//! knowledge base.
//!
//! The crate also ships the comparison linkers (exact match, majority
//! clustering, constrained bottom-up clustering), an evaluation suite with
//! optimal one-to-one NIL cluster mapping, corpus I/O with a synthetic
//! generator, and the `nil-linker` command-line tool.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod cluster;
pub mod error;
pub mod eval;
pub mod exec;
pub mod graph;
pub mod io;
pub mod knn;
pub mod model;
pub mod pipeline;

pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::{AffinityEdge, AffinityGraph, Node, NodeRef, Target};
pub use model::{
    Cluster, Clustering, Corpus, Entity, EntityId, EntityIdx, GoldLabel, Mention, MentionId,
    MentionIdx, NilId, Prediction, Thresholds,
};
