//! Comparison linkers sharing the [`Clustering`] output contract.
//!
//! - [`exact_match`]: normalized string equality between mention surface and
//!   entity label, no NIL handling.
//! - [`majority_clustering`]: thresholded components, each labelled with an
//!   entity only if enough of its mentions agree on it.
//! - [`bottom_up_clustering`]: Kruskal-style greedy merging over all edges,
//!   refusing merges that would put two entities in one component.

use std::collections::HashMap;

use crate::cluster::union_find::DisjointSet;
use crate::cluster::{best_entity, threshold_components};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::{AffinityGraph, Node};
use crate::model::{check_unit, Cluster, Clustering, Corpus, EntityIdx, MentionIdx};

/// Lower-cases, turns every non-alphanumeric character into a separator and
/// collapses runs of separators.
pub fn normalize_surface(text: &str) -> String {
    let spaced: String = text
        .chars()
        .flat_map(|c| {
            let keep = c.is_alphanumeric();
            c.to_lowercase()
                .map(move |l| if keep { l } else { ' ' })
        })
        .collect();
    spaced.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Links each mention to the entity whose normalized label equals its
/// normalized surface, preferring higher popularity, then the lower id.
/// Unmatched mentions stay unlinked in singleton clusters.
pub fn exact_match(corpus: &Corpus) -> Result<Clustering> {
    let mut by_label: HashMap<String, EntityIdx> = HashMap::new();
    for (i, entity) in corpus.entities().iter().enumerate() {
        let idx = EntityIdx::new(i);
        let key = normalize_surface(&entity.label);
        by_label
            .entry(key)
            .and_modify(|cur| {
                if entity.popularity > corpus.entity(*cur).popularity {
                    *cur = idx;
                }
            })
            .or_insert(idx);
    }

    let matches = Execution::default().map(corpus.mentions(), |m| {
        by_label.get(&normalize_surface(&m.surface)).copied()
    });

    let mut entity_slot: HashMap<EntityIdx, usize> = HashMap::new();
    let mut clusters: Vec<Cluster> = Vec::new();
    for (i, matched) in matches.into_iter().enumerate() {
        let m = MentionIdx::new(i);
        match matched {
            Some(e) => {
                let slot = *entity_slot.entry(e).or_insert_with(|| {
                    clusters.push(Cluster {
                        mentions: Vec::new(),
                        entity: Some(e),
                    });
                    clusters.len() - 1
                });
                clusters[slot].mentions.push(m);
            }
            None => clusters.push(Cluster {
                mentions: vec![m],
                entity: None,
            }),
        }
    }
    Clustering::without_nil(corpus.mentions().len(), clusters)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MajorityConfig {
    pub tau_m: f64,
    pub tau_e: f64,
    /// Share of a cluster's mentions that must agree on one entity.
    pub majority_threshold: f64,
}

impl Default for MajorityConfig {
    fn default() -> Self {
        Self {
            tau_m: 0.85,
            tau_e: 0.8,
            majority_threshold: 0.7,
        }
    }
}

impl MajorityConfig {
    pub fn validate(&self) -> Result<()> {
        check_unit("tau_m", self.tau_m)?;
        check_unit("tau_e", self.tau_e)?;
        if self.majority_threshold > 0.0 && self.majority_threshold <= 1.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "majority threshold must lie in (0, 1], got {}",
                self.majority_threshold
            )))
        }
    }
}

/// Greedy components over `tau_m`; a component takes the entity most of its
/// mentions point to (each mention's best entity above `tau_e`) when that
/// entity's share of *all* members reaches the majority threshold.
pub fn majority_clustering(graph: &AffinityGraph, config: &MajorityConfig) -> Result<Clustering> {
    config.validate()?;
    let components = threshold_components(graph, config.tau_m);
    let clusters = Execution::default().map(&components, |mentions| {
        let mut votes: HashMap<EntityIdx, usize> = HashMap::new();
        for &m in mentions {
            if let Some((e, _)) = best_entity(graph, m, config.tau_e) {
                *votes.entry(e).or_default() += 1;
            }
        }
        let winner = votes
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
        let entity = winner.and_then(|(e, count)| {
            let share = count as f64 / mentions.len() as f64;
            (share >= config.majority_threshold).then_some(e)
        });
        Cluster {
            mentions: mentions.clone(),
            entity,
        }
    });
    Clustering::new(graph.mention_count(), clusters)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BottomUpConfig {
    /// Minimum affinity (exclusive) for any edge to be considered.
    pub tau: f64,
}

impl Default for BottomUpConfig {
    fn default() -> Self {
        Self { tau: 0.85 }
    }
}

/// Adds edges with affinity above `tau` in descending order (ties by
/// endpoint ids), skipping any edge whose endpoints sit in two different
/// components that each already hold an entity.
pub fn bottom_up_clustering(graph: &AffinityGraph, config: &BottomUpConfig) -> Result<Clustering> {
    check_unit("tau", config.tau)?;
    let n = graph.mention_count();
    let node_slot = |node: Node| match node {
        Node::Mention(m) => m.index(),
        Node::Entity(e) => n + e.index(),
    };

    let mut edges: Vec<(Node, Node, f64)> = graph
        .mention_edges()
        .filter(|e| e.2 > config.tau)
        .map(|(a, b, s)| (Node::Mention(a), Node::Mention(b), s))
        .collect();
    for i in 0..n {
        let m = MentionIdx::new(i);
        for &(e, s) in graph.entity_candidates(m) {
            if s > config.tau {
                edges.push((Node::Mention(m), Node::Entity(e), s));
            }
        }
    }
    edges.sort_by(|x, y| y.2.total_cmp(&x.2).then((x.0, x.1).cmp(&(y.0, y.1))));

    let mut sets = DisjointSet::new(n + graph.entity_count());
    let mut entity_of: Vec<Option<EntityIdx>> = (0..n)
        .map(|_| None)
        .chain((0..graph.entity_count()).map(|e| Some(EntityIdx::new(e))))
        .collect();
    for (a, b, _) in edges {
        let ra = sets.find(node_slot(a));
        let rb = sets.find(node_slot(b));
        if ra == rb || (entity_of[ra].is_some() && entity_of[rb].is_some()) {
            continue;
        }
        let merged = entity_of[ra].or(entity_of[rb]);
        let root = sets.union(ra, rb);
        entity_of[root] = merged;
    }

    let mut slot_of_root: HashMap<usize, usize> = HashMap::new();
    let mut clusters: Vec<Cluster> = Vec::new();
    for i in 0..n {
        let root = sets.find(i);
        let slot = *slot_of_root.entry(root).or_insert_with(|| {
            clusters.push(Cluster {
                mentions: Vec::new(),
                entity: entity_of[root],
            });
            clusters.len() - 1
        });
        clusters[slot].mentions.push(MentionIdx::new(i));
    }
    Clustering::new(n, clusters)
}
