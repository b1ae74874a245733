//! Top-k affinity graph construction.
//!
//! Affinity between two embedded records is cosine similarity mapped from
//! `[-1, 1]` onto `[0, 1]` by `(s + 1) / 2`. Candidates are ordered by score,
//! ties going to the lower index. Pairs scoring exactly 0 (antipodal
//! vectors) are never materialized.

mod exact;
mod hnsw;

use std::collections::{BTreeSet, HashMap};

pub use hnsw::HnswParams;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::{AffinityEdge, AffinityGraph, EntityList, MentionList, Target};
use crate::model::{Corpus, EntityId, EntityIdx, MentionId, MentionIdx};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Backend {
    /// Exhaustive scan; the reference backend.
    #[default]
    Exact,
    /// Hierarchical navigable small-world index; approximate.
    Hnsw(HnswParams),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndexConfig {
    pub k: usize,
    pub backend: Backend,
    pub execution: Execution,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self {
            k: 4,
            backend: Backend::Exact,
            execution: Execution::default(),
        }
    }
}

impl IndexConfig {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }
}

/// Row-major matrix of unit-normalized vectors.
#[derive(Clone, Debug)]
pub(crate) struct UnitVectors {
    dim: usize,
    data: Vec<f64>,
}

impl UnitVectors {
    fn from_rows<'a>(dim: usize, rows: impl Iterator<Item = &'a [f32]>) -> Self {
        let mut data = Vec::new();
        for row in rows {
            debug_assert_eq!(row.len(), dim);
            let norm = row
                .iter()
                .map(|&x| f64::from(x) * f64::from(x))
                .sum::<f64>()
                .sqrt();
            data.extend(row.iter().map(|&x| f64::from(x) / norm));
        }
        Self { dim, data }
    }

    #[inline]
    pub(crate) fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

#[inline]
pub(crate) fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0)
}

#[inline]
pub(crate) fn score_of(cosine: f64) -> f64 {
    (cosine + 1.0) / 2.0
}

/// Builds the top-k graph from the embeddings carried by `corpus`.
///
/// Every mention receives its `min(k, |mentions| - 1)` most similar other
/// mentions and `min(k, |entities|)` most similar entities (minus any that
/// score exactly 0).
pub fn build_graph(corpus: &Corpus, config: &IndexConfig) -> Result<AffinityGraph> {
    if config.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let dim = corpus.dimension().unwrap_or(0);
    let mut mention_rows = Vec::with_capacity(corpus.mentions().len());
    for m in corpus.mentions() {
        let v = m.embedding.as_deref().ok_or_else(|| Error::Record {
            id: m.id.0.clone(),
            message: "mention has no embedding".into(),
        })?;
        mention_rows.push(v);
    }
    let mut entity_rows = Vec::with_capacity(corpus.entities().len());
    for e in corpus.entities() {
        let v = e.embedding.as_deref().ok_or_else(|| Error::Record {
            id: e.id.0.clone(),
            message: "entity has no embedding".into(),
        })?;
        entity_rows.push(v);
    }
    let mentions = UnitVectors::from_rows(dim, mention_rows.into_iter());
    let entities = UnitVectors::from_rows(dim, entity_rows.into_iter());

    let (mention_candidates, entity_candidates) = match config.backend {
        Backend::Exact => exact::search_all(&mentions, &entities, config.k, config.execution),
        Backend::Hnsw(params) => {
            hnsw::search_all(&mentions, &entities, config.k, params, config.execution)
        }
    };

    AffinityGraph::from_candidates(
        corpus.mention_ids(),
        corpus.entity_ids(),
        config.k,
        mention_candidates,
        entity_candidates,
    )
}

/// Builds a graph from externally computed edges, inferring the mention and
/// entity sets from the edge endpoints.
pub fn load_graph_from_edges(edges: &[AffinityEdge], k: usize) -> Result<AffinityGraph> {
    let mut mentions = BTreeSet::new();
    let mut entities = BTreeSet::new();
    for edge in edges {
        mentions.insert(edge.source.clone());
        match &edge.target {
            Target::Mention(m) => {
                mentions.insert(m.clone());
            }
            Target::Entity(e) => {
                entities.insert(e.clone());
            }
        }
    }
    load_graph_with_ids(
        mentions.into_iter().collect(),
        entities.into_iter().collect(),
        edges,
        k,
    )
}

/// Builds a graph over the corpus records from externally computed edges.
pub fn load_graph_for_corpus(
    corpus: &Corpus,
    edges: &[AffinityEdge],
    k: usize,
) -> Result<AffinityGraph> {
    load_graph_with_ids(corpus.mention_ids(), corpus.entity_ids(), edges, k)
}

/// Keeps, per mention, the `k` best mention edges and the `k` best entity
/// edges (ties to the lower target id). A repeated `(source, target)` pair is
/// accepted only if it repeats the same score.
pub fn load_graph_with_ids(
    mention_ids: Vec<MentionId>,
    entity_ids: Vec<EntityId>,
    edges: &[AffinityEdge],
    k: usize,
) -> Result<AffinityGraph> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let mention_lookup: HashMap<&MentionId, MentionIdx> = mention_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id, MentionIdx::new(i)))
        .collect();
    let entity_lookup: HashMap<&EntityId, EntityIdx> = entity_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id, EntityIdx::new(i)))
        .collect();
    let mention_idx = |id: &MentionId| {
        mention_lookup.get(id).copied().ok_or_else(|| Error::UnknownId {
            kind: "mention",
            id: id.0.clone(),
        })
    };

    let n = mention_ids.len();
    let mut mention_lists: Vec<MentionList> = vec![Vec::new(); n];
    let mut entity_lists: Vec<EntityList> = vec![Vec::new(); n];
    let mut seen: HashMap<(MentionIdx, bool, u32), f64> = HashMap::with_capacity(edges.len());

    for edge in edges {
        let src = mention_idx(&edge.source)?;
        let (is_entity, target) = match &edge.target {
            Target::Mention(m) => {
                let t = mention_idx(m)?;
                if t == src {
                    return Err(Error::SelfLoop(m.0.clone()));
                }
                (false, t.0)
            }
            Target::Entity(e) => {
                let t = entity_lookup.get(e).copied().ok_or_else(|| Error::UnknownId {
                    kind: "entity",
                    id: e.0.clone(),
                })?;
                (true, t.0)
            }
        };
        if let Some(&previous) = seen.get(&(src, is_entity, target)) {
            if previous.to_bits() != edge.score.to_bits() {
                return Err(Error::DuplicateEdge {
                    source_id: edge.source.0.clone(),
                    target: edge.target.to_string(),
                    first: previous,
                    second: edge.score,
                });
            }
            continue;
        }
        seen.insert((src, is_entity, target), edge.score);
        if is_entity {
            entity_lists[src.index()].push((EntityIdx(target), edge.score));
        } else {
            mention_lists[src.index()].push((MentionIdx(target), edge.score));
        }
    }

    for list in &mut mention_lists {
        truncate_best(list, k);
    }
    for list in &mut entity_lists {
        truncate_best(list, k);
    }

    AffinityGraph::from_candidates(mention_ids, entity_ids, k, mention_lists, entity_lists)
}

fn truncate_best<T: Ord + Copy>(list: &mut Vec<(T, f64)>, k: usize) {
    list.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    list.truncate(k);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Entity, Mention};

    fn mention(id: &str, v: &[f32]) -> Mention {
        Mention {
            id: id.into(),
            surface: id.into(),
            context: None,
            embedding: Some(v.to_vec()),
            gold: None,
        }
    }

    fn entity(id: &str, v: &[f32]) -> Entity {
        Entity {
            id: id.into(),
            label: id.into(),
            description: None,
            embedding: Some(v.to_vec()),
            popularity: 0,
        }
    }

    #[test]
    fn identical_vectors_score_one() {
        let corpus = Corpus::new(
            vec![mention("m1", &[0.3, 0.4]), mention("m2", &[1.0, 0.0])],
            vec![entity("e1", &[0.3, 0.4])],
        )
        .unwrap();
        let g = build_graph(&corpus, &IndexConfig::with_k(4)).unwrap();
        let (e, s) = g.entity_candidates(MentionIdx(0))[0];
        assert_eq!(e, EntityIdx(0));
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_vectors_score_half() {
        let corpus = Corpus::new(
            vec![mention("m1", &[1.0, 0.0]), mention("m2", &[0.0, 2.0])],
            vec![],
        )
        .unwrap();
        let g = build_graph(&corpus, &IndexConfig::with_k(4)).unwrap();
        assert_eq!(g.mention_affinity(MentionIdx(0), MentionIdx(1)), 0.5);
    }

    #[test]
    fn antipodal_pairs_not_materialized() {
        let corpus = Corpus::new(
            vec![mention("m1", &[1.0, 0.0]), mention("m2", &[-1.0, 0.0])],
            vec![],
        )
        .unwrap();
        let g = build_graph(&corpus, &IndexConfig::with_k(4)).unwrap();
        assert!(g.mention_candidates(MentionIdx(0)).is_empty());
    }

    #[test]
    fn missing_embedding_names_record() {
        let mut m = mention("m1", &[1.0]);
        m.embedding = None;
        let corpus = Corpus::new(vec![m, mention("m2", &[1.0])], vec![]).unwrap();
        let err = build_graph(&corpus, &IndexConfig::default()).unwrap_err();
        assert!(err.to_string().contains("m1"));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = Corpus::new(
            vec![mention("m1", &[1.0, 0.0]), mention("m2", &[1.0])],
            vec![],
        );
        assert!(err.is_err());
    }

    #[test]
    fn truncates_to_k_best_entities() {
        let edges: Vec<_> = (0..6)
            .map(|i| AffinityEdge::entity("m", &format!("e{i}"), 0.5 + 0.05 * f64::from(i)))
            .collect();
        let g = load_graph_from_edges(&edges, 4).unwrap();
        let kept: Vec<_> = g
            .entity_candidates(MentionIdx(0))
            .iter()
            .map(|&(e, _)| g.entity_id(e).as_str().to_owned())
            .collect();
        assert_eq!(kept, ["e5", "e4", "e3", "e2"]);
    }

    #[test]
    fn boundary_tie_keeps_lower_id() {
        let edges = vec![
            AffinityEdge::mention("a", "d", 0.9),
            AffinityEdge::mention("a", "c", 0.5),
            AffinityEdge::mention("a", "b", 0.5),
        ];
        let g = load_graph_from_edges(&edges, 2).unwrap();
        let a = g.mention_index(&"a".into()).unwrap();
        let b = g.mention_index(&"b".into()).unwrap();
        let kept: Vec<_> = g.mention_candidates(a).iter().map(|c| c.0).collect();
        assert_eq!(kept.len(), 2);
        assert!(kept.contains(&b));
    }

    #[test]
    fn conflicting_duplicate_rejected() {
        let edges = vec![
            AffinityEdge::entity("a", "x", 0.9),
            AffinityEdge::entity("a", "x", 0.8),
        ];
        assert!(matches!(
            load_graph_from_edges(&edges, 4),
            Err(Error::DuplicateEdge { .. })
        ));
        let repeated = vec![
            AffinityEdge::entity("a", "x", 0.9),
            AffinityEdge::entity("a", "x", 0.9),
        ];
        assert!(load_graph_from_edges(&repeated, 4).is_ok());
    }

    #[test]
    fn unknown_corpus_id_rejected() {
        let corpus = Corpus::new(vec![mention("m1", &[1.0])], vec![]).unwrap();
        let err = load_graph_for_corpus(&corpus, &[AffinityEdge::mention("m1", "zz", 0.5)], 4)
            .unwrap_err();
        assert!(err.to_string().contains("zz"));
    }
}
