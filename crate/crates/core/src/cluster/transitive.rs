//! Transitive mention-entity affinity.
//!
//! The transitive affinity of mention `m` to entity `e` is the largest
//! product of edge affinities over paths `m ~ e` in the cluster graph. Since
//! every affinity lies in (0, 1], maximizing the product is a shortest-path
//! problem under edge weight `-ln(phi)`, solved with Dijkstra from each
//! entity. Entities only appear as path endpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{AffinityGraph, Node};
use crate::model::{EntityIdx, MentionIdx};

/// A transitive affinity value with its witness path `[m, ..., e]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitiveAffinity {
    /// Maximum path product, 0 if `e` is unreachable.
    pub value: f64,
    /// Empty if unreachable.
    pub path: Vec<Node>,
}

/// The subgraph of one cluster: its mentions and candidate entities, joined
/// by the edges whose affinity exceeds `tau_a`.
#[derive(Clone, Debug)]
pub struct ClusterGraph {
    mentions: Vec<MentionIdx>,
    entities: Vec<EntityIdx>,
    /// Local ids: mentions first, then entities.
    adjacency: Vec<Vec<(u32, f64)>>,
}

/// Single-source result from one entity.
#[derive(Clone, Debug)]
pub struct Reach {
    source: u32,
    product: Vec<f64>,
    pred: Vec<u32>,
}

#[derive(Clone, Copy, PartialEq)]
struct State {
    cost: f64,
    node: u32,
}

impl Eq for State {}

impl Ord for State {
    // Reversed for a min-heap; equal costs pop lower node first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NO_PRED: u32 = u32::MAX;

#[inline]
fn weight(phi: f64) -> f64 {
    if phi >= 1.0 {
        0.0
    } else {
        -phi.ln()
    }
}

impl ClusterGraph {
    /// `mentions` and `entities` must be ascending.
    pub fn new(
        graph: &AffinityGraph,
        mentions: &[MentionIdx],
        entities: &[EntityIdx],
        tau_a: f64,
    ) -> Self {
        let nm = mentions.len();
        let mut adjacency = vec![Vec::new(); nm + entities.len()];
        for (i, &m) in mentions.iter().enumerate() {
            for &(n, score) in graph.neighbors(m) {
                if n <= m || score <= tau_a {
                    continue;
                }
                if let Ok(j) = mentions.binary_search(&n) {
                    adjacency[i].push((j as u32, score));
                    adjacency[j].push((i as u32, score));
                }
            }
            for &(e, score) in graph.entity_candidates(m) {
                if score <= tau_a {
                    continue;
                }
                if let Ok(j) = entities.binary_search(&e) {
                    let j = nm + j;
                    adjacency[i].push((j as u32, score));
                    adjacency[j].push((i as u32, score));
                }
            }
        }
        Self {
            mentions: mentions.to_vec(),
            entities: entities.to_vec(),
            adjacency,
        }
    }

    /// Builds a cluster graph directly from local edges: mentions
    /// `0..mention_count` and entities `0..entity_count`, with edges given as
    /// `(mention, mention, phi)` and `(mention, entity, phi)`.
    pub fn from_edges(
        mention_count: usize,
        entity_count: usize,
        mention_edges: &[(usize, usize, f64)],
        entity_edges: &[(usize, usize, f64)],
        tau_a: f64,
    ) -> Result<Self> {
        let nm = mention_count;
        let mut adjacency = vec![Vec::new(); nm + entity_count];
        let check = |phi: f64| {
            if phi.is_finite() && phi > 0.0 && phi <= 1.0 {
                Ok(())
            } else {
                Err(Error::Contract(format!("affinity {phi} outside (0, 1]")))
            }
        };
        for &(a, b, phi) in mention_edges {
            check(phi)?;
            if a == b || a >= nm || b >= nm {
                return Err(Error::Contract(format!("bad mention edge ({a}, {b})")));
            }
            if phi > tau_a {
                adjacency[a].push((b as u32, phi));
                adjacency[b].push((a as u32, phi));
            }
        }
        for &(m, e, phi) in entity_edges {
            check(phi)?;
            if m >= nm || e >= entity_count {
                return Err(Error::Contract(format!("bad entity edge ({m}, {e})")));
            }
            if phi > tau_a {
                adjacency[m].push(((nm + e) as u32, phi));
                adjacency[nm + e].push((m as u32, phi));
            }
        }
        Ok(Self {
            mentions: (0..nm).map(MentionIdx::new).collect(),
            entities: (0..entity_count).map(EntityIdx::new).collect(),
            adjacency,
        })
    }

    pub fn mentions(&self) -> &[MentionIdx] {
        &self.mentions
    }

    pub fn entities(&self) -> &[EntityIdx] {
        &self.entities
    }

    /// Dijkstra from the `j`-th entity of the cluster.
    pub fn reach_from(&self, j: usize) -> Reach {
        let nm = self.mentions.len();
        let source = (nm + j) as u32;
        let n = self.adjacency.len();
        let mut cost = vec![f64::INFINITY; n];
        let mut product = vec![0.0; n];
        let mut pred = vec![NO_PRED; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        cost[source as usize] = 0.0;
        product[source as usize] = 1.0;
        heap.push(State {
            cost: 0.0,
            node: source,
        });

        while let Some(State { cost: c, node }) = heap.pop() {
            let u = node as usize;
            if done[u] {
                continue;
            }
            done[u] = true;
            for &(v, phi) in &self.adjacency[u] {
                let vi = v as usize;
                // Other entities are never traversed.
                if vi >= nm || done[vi] {
                    continue;
                }
                let next = c + weight(phi);
                if next < cost[vi] {
                    cost[vi] = next;
                    product[vi] = product[u] * phi;
                    pred[vi] = node;
                    heap.push(State {
                        cost: next,
                        node: v,
                    });
                }
            }
        }
        Reach {
            source,
            product,
            pred,
        }
    }

    /// Transitive affinity of mention `m` to entity `e`, both in this cluster.
    pub fn transitive_affinity(&self, m: MentionIdx, e: EntityIdx) -> Result<TransitiveAffinity> {
        let i = self
            .mentions
            .binary_search(&m)
            .map_err(|_| Error::Contract(format!("mention {} not in cluster", m.index())))?;
        let j = self
            .entities
            .binary_search(&e)
            .map_err(|_| Error::Contract(format!("entity {} not in cluster", e.index())))?;
        let reach = self.reach_from(j);
        Ok(TransitiveAffinity {
            value: reach.value(i),
            path: self.path(&reach, i),
        })
    }

    /// Witness path from the `i`-th mention to the reach's source entity.
    pub fn path(&self, reach: &Reach, i: usize) -> Vec<Node> {
        if reach.product[i] == 0.0 {
            return Vec::new();
        }
        let nm = self.mentions.len();
        let mut path = Vec::new();
        let mut at = i as u32;
        loop {
            let a = at as usize;
            if a < nm {
                path.push(Node::Mention(self.mentions[a]));
            } else {
                path.push(Node::Entity(self.entities[a - nm]));
            }
            if at == reach.source {
                break;
            }
            at = reach.pred[a];
        }
        path
    }
}

impl Reach {
    /// Transitive affinity of the `i`-th cluster mention to the source.
    pub fn value(&self, i: usize) -> f64 {
        self.product[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_through_mention_beats_direct_edge() {
        // mentions: 0 = m6, 1 = m7; entities: 0 = e_b, 1 = e_c
        let g = ClusterGraph::from_edges(2, 2, &[(0, 1, 0.9)], &[(0, 0, 0.9), (1, 1, 0.8)], 0.75)
            .unwrap();
        let to_b = g.transitive_affinity(MentionIdx(1), EntityIdx(0)).unwrap();
        let to_c = g.transitive_affinity(MentionIdx(1), EntityIdx(1)).unwrap();
        assert!((to_b.value - 0.81).abs() < 1e-12);
        assert!((to_c.value - 0.8).abs() < 1e-12);
        assert_eq!(
            to_b.path,
            vec![
                Node::Mention(MentionIdx(1)),
                Node::Mention(MentionIdx(0)),
                Node::Entity(EntityIdx(0))
            ]
        );
    }

    #[test]
    fn unit_edge_gives_unit_affinity() {
        let g = ClusterGraph::from_edges(1, 1, &[], &[(0, 0, 1.0)], 0.75).unwrap();
        let t = g.transitive_affinity(MentionIdx(0), EntityIdx(0)).unwrap();
        assert_eq!(t.value, 1.0);
        assert_eq!(
            t.path,
            vec![Node::Mention(MentionIdx(0)), Node::Entity(EntityIdx(0))]
        );
    }

    #[test]
    fn unreachable_is_zero_with_empty_path() {
        let g = ClusterGraph::from_edges(2, 1, &[], &[(0, 0, 0.9)], 0.75).unwrap();
        let t = g.transitive_affinity(MentionIdx(1), EntityIdx(0)).unwrap();
        assert_eq!(t.value, 0.0);
        assert!(t.path.is_empty());
    }

    #[test]
    fn edges_at_or_below_tau_a_are_dropped() {
        let g = ClusterGraph::from_edges(1, 1, &[], &[(0, 0, 0.75)], 0.75).unwrap();
        assert_eq!(
            g.transitive_affinity(MentionIdx(0), EntityIdx(0)).unwrap().value,
            0.0
        );
    }

    #[test]
    fn entities_are_not_intermediate_nodes() {
        // m0 - e0 - m1 would be 0.9 * 0.9; no mention path exists.
        let g = ClusterGraph::from_edges(2, 2, &[], &[(0, 0, 0.9), (1, 0, 0.9), (1, 1, 0.8)], 0.5)
            .unwrap();
        let t = g.transitive_affinity(MentionIdx(0), EntityIdx(1)).unwrap();
        assert_eq!(t.value, 0.0);
    }

    #[test]
    fn foreign_nodes_are_contract_errors() {
        let g = ClusterGraph::from_edges(1, 1, &[], &[(0, 0, 0.9)], 0.5).unwrap();
        assert!(g.transitive_affinity(MentionIdx(3), EntityIdx(0)).is_err());
        assert!(g.transitive_affinity(MentionIdx(0), EntityIdx(2)).is_err());
    }
}
