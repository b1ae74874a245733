//! Conflict resolution: splitting initial clusters so that each holds at
//! most one entity.

use serde::Serialize;

use super::init::{components_within, CandidateCluster, InitialClustering};
use super::transitive::ClusterGraph;
use crate::error::Result;
use crate::exec::Execution;
use crate::graph::{AffinityGraph, Node};
use crate::model::{Cluster, Clustering, EntityIdx, MentionIdx, Thresholds};

/// Outcome for one mention.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub mention: MentionIdx,
    /// Entity the mention joined; `None` for NIL mentions.
    pub entity: Option<EntityIdx>,
    /// Best transitive affinity over the cluster's candidates. For NIL
    /// mentions this is the value that failed to exceed `tau_a`.
    pub phi_star: f64,
    /// Witness path for `phi_star`, `[mention, ..., entity]`.
    pub path: Vec<Node>,
}

/// One [`Resolution`] per mention, by ascending mention index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResolutionTrace {
    pub entries: Vec<Resolution>,
}

impl ResolutionTrace {
    pub fn get(&self, m: MentionIdx) -> Option<&Resolution> {
        self.entries
            .binary_search_by(|r| r.mention.cmp(&m))
            .ok()
            .map(|i| &self.entries[i])
    }
}

/// Serializable form of a trace entry, by external identifiers.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct TraceRecord {
    pub mention: String,
    pub entity: Option<String>,
    pub phi_star: f64,
    pub path: Vec<String>,
}

impl Resolution {
    pub fn to_record(&self, graph: &AffinityGraph) -> TraceRecord {
        TraceRecord {
            mention: graph.mention_id(self.mention).0.clone(),
            entity: self.entity.map(|e| graph.entity_id(e).0.clone()),
            phi_star: self.phi_star,
            path: self
                .path
                .iter()
                .map(|n| match *n {
                    Node::Mention(m) => graph.mention_id(m).0.clone(),
                    Node::Entity(e) => graph.entity_id(e).0.clone(),
                })
                .collect(),
        }
    }
}

/// Resolves one initial cluster into entity sub-clusters (ascending by
/// entity) followed by NIL sub-clusters (ascending by smallest member).
pub fn resolve_cluster(
    graph: &AffinityGraph,
    cluster: &CandidateCluster,
    thresholds: &Thresholds,
) -> (Vec<Cluster>, Vec<Resolution>) {
    let mentions = &cluster.mentions;
    if cluster.candidates.is_empty() {
        let nil = components_within(graph, mentions, thresholds.tau_m)
            .into_iter()
            .map(|mentions| Cluster {
                mentions,
                entity: None,
            })
            .collect();
        let trace = mentions
            .iter()
            .map(|&m| Resolution {
                mention: m,
                entity: None,
                phi_star: 0.0,
                path: Vec::new(),
            })
            .collect();
        return (nil, trace);
    }

    let cg = ClusterGraph::new(graph, mentions, &cluster.candidates, thresholds.tau_a);
    let reaches: Vec<_> = (0..cluster.candidates.len())
        .map(|j| cg.reach_from(j))
        .collect();

    let mut members: Vec<Vec<MentionIdx>> = vec![Vec::new(); cluster.candidates.len()];
    let mut nil_mentions = Vec::new();
    let mut trace = Vec::with_capacity(mentions.len());
    for (i, &m) in mentions.iter().enumerate() {
        // Strict comparison keeps the lowest entity on equal values.
        let mut best: Option<(usize, f64)> = None;
        for (j, reach) in reaches.iter().enumerate() {
            let value = reach.value(i);
            if value > best.map_or(0.0, |b| b.1) {
                best = Some((j, value));
            }
        }
        let (entity, phi_star, path) = match best {
            Some((j, value)) => {
                let path = cg.path(&reaches[j], i);
                if value > thresholds.tau_a {
                    members[j].push(m);
                    (Some(cluster.candidates[j]), value, path)
                } else {
                    nil_mentions.push(m);
                    (None, value, path)
                }
            }
            None => {
                nil_mentions.push(m);
                (None, 0.0, Vec::new())
            }
        };
        trace.push(Resolution {
            mention: m,
            entity,
            phi_star,
            path,
        });
    }

    let mut out: Vec<Cluster> = members
        .into_iter()
        .zip(&cluster.candidates)
        .filter(|(ms, _)| !ms.is_empty())
        .map(|(mentions, &e)| Cluster {
            mentions,
            entity: Some(e),
        })
        .collect();
    out.extend(
        components_within(graph, &nil_mentions, thresholds.tau_m)
            .into_iter()
            .map(|mentions| Cluster {
                mentions,
                entity: None,
            }),
    );
    (out, trace)
}

/// Resolves every initial cluster. Clusters are processed independently (in
/// parallel under [`Execution::Parallel`]) and reassembled in input order.
pub fn resolve_conflicts(
    initial: &InitialClustering,
    graph: &AffinityGraph,
    thresholds: &Thresholds,
    execution: Execution,
) -> Result<(Clustering, ResolutionTrace)> {
    let parts = execution.map(&initial.clusters, |c| resolve_cluster(graph, c, thresholds));
    let mut clusters = Vec::new();
    let mut entries = Vec::with_capacity(graph.mention_count());
    for (cs, rs) in parts {
        clusters.extend(cs);
        entries.extend(rs);
    }
    entries.sort_by_key(|r| r.mention);
    let clustering = Clustering::new(graph.mention_count(), clusters)?;
    Ok((clustering, ResolutionTrace { entries }))
}
