//! Top-down NIL-aware clustering.
//!
//! Two stages: [`init_clusters`] groups mentions into connected components
//! of the thresholded mention graph and collects each group's candidate
//! entities; [`resolve_conflicts`] splits every group by transitive
//! affinity so that each final cluster holds at most one entity, leaving the
//! remaining mentions in NIL clusters.

mod init;
mod resolve;
mod transitive;
pub(crate) mod union_find;

pub use init::{
    best_entity, components_within, init_clusters, threshold_components, CandidateCluster,
    InitialClustering,
};
pub use resolve::{resolve_cluster, resolve_conflicts, Resolution, ResolutionTrace, TraceRecord};
pub use transitive::{ClusterGraph, Reach, TransitiveAffinity};

use crate::error::Result;
use crate::exec::Execution;
use crate::graph::AffinityGraph;
use crate::model::{Clustering, Thresholds};

#[derive(Clone, Debug, PartialEq)]
pub struct LinkResult {
    pub clustering: Clustering,
    pub trace: ResolutionTrace,
}

/// Runs initialization and conflict resolution with the default execution.
pub fn run_linker(graph: &AffinityGraph, thresholds: &Thresholds) -> Result<LinkResult> {
    run_linker_with(graph, thresholds, Execution::default())
}

pub fn run_linker_with(
    graph: &AffinityGraph,
    thresholds: &Thresholds,
    execution: Execution,
) -> Result<LinkResult> {
    thresholds.validate()?;
    let initial = init_clusters(graph, thresholds);
    let (clustering, trace) = resolve_conflicts(&initial, graph, thresholds, execution)?;
    Ok(LinkResult { clustering, trace })
}
