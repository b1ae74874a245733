//! Greedy nearest-neighbour cluster initialization.

use super::union_find::DisjointSet;
use crate::graph::AffinityGraph;
use crate::model::{EntityIdx, MentionIdx, Thresholds};

/// A mention cluster with its (possibly conflicting) candidate entities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateCluster {
    /// Ascending, non-empty.
    pub mentions: Vec<MentionIdx>,
    /// Ascending; may hold several entities before conflict resolution.
    pub candidates: Vec<EntityIdx>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct InitialClustering {
    pub clusters: Vec<CandidateCluster>,
}

/// The entity a mention points at most strongly, if that affinity exceeds
/// `tau_e`. Equal affinities go to the lower entity index.
pub fn best_entity(graph: &AffinityGraph, m: MentionIdx, tau_e: f64) -> Option<(EntityIdx, f64)> {
    // Candidate lists are ordered best first with ties by lower index.
    graph
        .entity_candidates(m)
        .first()
        .copied()
        .filter(|&(_, score)| score > tau_e)
}

/// Connected components of the mention graph restricted to edges with
/// affinity above `tau_m`.
pub fn threshold_components(graph: &AffinityGraph, tau_m: f64) -> Vec<Vec<MentionIdx>> {
    let mut sets = DisjointSet::new(graph.mention_count());
    for (a, b, score) in graph.mention_edges() {
        if score > tau_m {
            sets.union(a.index(), b.index());
        }
    }
    sets.groups()
        .into_iter()
        .map(|g| g.into_iter().map(MentionIdx::new).collect())
        .collect()
}

/// Components of the `tau_m`-thresholded mention graph induced on `members`
/// (ascending). Groups are ascending and ordered by smallest member.
pub fn components_within(
    graph: &AffinityGraph,
    members: &[MentionIdx],
    tau_m: f64,
) -> Vec<Vec<MentionIdx>> {
    let mut sets = DisjointSet::new(members.len());
    for (i, &m) in members.iter().enumerate() {
        for &(n, score) in graph.neighbors(m) {
            if n <= m || score <= tau_m {
                continue;
            }
            if let Ok(j) = members.binary_search(&n) {
                sets.union(i, j);
            }
        }
    }
    sets.groups()
        .into_iter()
        .map(|g| g.into_iter().map(|i| members[i]).collect())
        .collect()
}

/// Groups mentions connected through affinities above `tau_m` and attaches to
/// each group the union of its members' best entities above `tau_e`.
pub fn init_clusters(graph: &AffinityGraph, thresholds: &Thresholds) -> InitialClustering {
    let clusters = threshold_components(graph, thresholds.tau_m)
        .into_iter()
        .map(|mentions| {
            let mut candidates: Vec<EntityIdx> = mentions
                .iter()
                .filter_map(|&m| best_entity(graph, m, thresholds.tau_e).map(|c| c.0))
                .collect();
            candidates.sort_unstable();
            candidates.dedup();
            CandidateCluster {
                mentions,
                candidates,
            }
        })
        .collect();
    InitialClustering { clusters }
}
