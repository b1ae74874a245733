//! The sparse mention/entity affinity graph.
//!
//! Each mention keeps its top-k mention candidates and top-k entity
//! candidates. Mention-mention affinities are looked up through the
//! symmetric closure of the candidate lists: if either direction was
//! retrieved, both directions answer with the larger of the two scores.
//! Pairs that were never retrieved have affinity 0.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{EntityId, EntityIdx, MentionId, MentionIdx};

/// Endpoint of an edge, by external identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Mention(MentionId),
    Entity(EntityId),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Mention(m) => write!(f, "mention:{m}"),
            Target::Entity(e) => write!(f, "entity:{e}"),
        }
    }
}

/// Borrowed lookup key for [`AffinityGraph::affinity`].
#[derive(Clone, Copy, Debug)]
pub enum NodeRef<'a> {
    Mention(&'a MentionId),
    Entity(&'a EntityId),
}

/// Graph node by dense index. Mentions order before entities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Mention(MentionIdx),
    Entity(EntityIdx),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffinityEdge {
    pub source: MentionId,
    pub target: Target,
    pub score: f64,
}

impl AffinityEdge {
    pub fn mention(source: &str, target: &str, score: f64) -> Self {
        Self {
            source: source.into(),
            target: Target::Mention(target.into()),
            score,
        }
    }

    pub fn entity(source: &str, target: &str, score: f64) -> Self {
        Self {
            source: source.into(),
            target: Target::Entity(target.into()),
            score,
        }
    }
}

pub type MentionList = Vec<(MentionIdx, f64)>;
pub type EntityList = Vec<(EntityIdx, f64)>;

/// Immutable after construction; safe to share across worker threads.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityGraph {
    k: usize,
    mention_ids: Vec<MentionId>,
    entity_ids: Vec<EntityId>,
    mention_lookup: HashMap<MentionId, MentionIdx>,
    entity_lookup: HashMap<EntityId, EntityIdx>,
    /// Retrieved candidates per mention, best first.
    mention_candidates: Vec<MentionList>,
    entity_candidates: Vec<EntityList>,
    /// Symmetric closure of `mention_candidates`, sorted by neighbour index.
    adjacency: Vec<MentionList>,
}

fn order_candidates<T: Ord + Copy>(list: &mut [(T, f64)]) {
    list.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

fn check_score(score: f64, source: &MentionId, target: impl FnOnce() -> String) -> Result<()> {
    if score.is_finite() && score > 0.0 && score <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidEdge {
            source_id: source.0.clone(),
            target: target(),
            message: format!("score {score} outside (0, 1]"),
        })
    }
}

impl AffinityGraph {
    /// Assembles a graph from per-mention candidate lists.
    ///
    /// `mention_ids` and `entity_ids` must be strictly increasing. Candidate
    /// lists are reordered best-first; each may hold at most `k` entries with
    /// distinct targets and scores in (0, 1].
    pub fn from_candidates(
        mention_ids: Vec<MentionId>,
        entity_ids: Vec<EntityId>,
        k: usize,
        mut mention_candidates: Vec<MentionList>,
        mut entity_candidates: Vec<EntityList>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if mention_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract("mention ids must be sorted and unique".into()));
        }
        if entity_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract("entity ids must be sorted and unique".into()));
        }
        let n = mention_ids.len();
        if mention_candidates.len() != n || entity_candidates.len() != n {
            return Err(Error::Contract(
                "one candidate list per mention is required".into(),
            ));
        }

        for (i, list) in mention_candidates.iter_mut().enumerate() {
            let source = &mention_ids[i];
            for &(j, score) in list.iter() {
                let target = || {
                    mention_ids
                        .get(j.index())
                        .map_or_else(|| format!("#{}", j.index()), |t| t.0.clone())
                };
                if j.index() >= n {
                    return Err(Error::Contract(format!(
                        "mention candidate index {} out of range",
                        j.index()
                    )));
                }
                if j.index() == i {
                    return Err(Error::SelfLoop(source.0.clone()));
                }
                check_score(score, source, target)?;
            }
            order_candidates(list);
            check_list(source, list, k)?;
        }
        for (i, list) in entity_candidates.iter_mut().enumerate() {
            let source = &mention_ids[i];
            for &(e, score) in list.iter() {
                if e.index() >= entity_ids.len() {
                    return Err(Error::Contract(format!(
                        "entity candidate index {} out of range",
                        e.index()
                    )));
                }
                check_score(score, source, || entity_ids[e.index()].0.clone())?;
            }
            order_candidates(list);
            check_list(source, list, k)?;
        }

        let mut adjacency: Vec<MentionList> = vec![Vec::new(); n];
        for (i, list) in mention_candidates.iter().enumerate() {
            for &(j, score) in list {
                adjacency[i].push((j, score));
                adjacency[j.index()].push((MentionIdx::new(i), score));
            }
        }
        for list in &mut adjacency {
            list.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
            list.dedup_by_key(|x| x.0);
        }

        let mention_lookup = mention_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), MentionIdx::new(i)))
            .collect();
        let entity_lookup = entity_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), EntityIdx::new(i)))
            .collect();

        Ok(Self {
            k,
            mention_ids,
            entity_ids,
            mention_lookup,
            entity_lookup,
            mention_candidates,
            entity_candidates,
            adjacency,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mention_count(&self) -> usize {
        self.mention_ids.len()
    }

    pub fn entity_count(&self) -> usize {
        self.entity_ids.len()
    }

    pub fn mention_ids(&self) -> &[MentionId] {
        &self.mention_ids
    }

    pub fn entity_ids(&self) -> &[EntityId] {
        &self.entity_ids
    }

    pub fn mention_id(&self, m: MentionIdx) -> &MentionId {
        &self.mention_ids[m.index()]
    }

    pub fn entity_id(&self, e: EntityIdx) -> &EntityId {
        &self.entity_ids[e.index()]
    }

    pub fn mention_index(&self, id: &MentionId) -> Result<MentionIdx> {
        self.mention_lookup
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownId {
                kind: "mention",
                id: id.0.clone(),
            })
    }

    pub fn entity_index(&self, id: &EntityId) -> Result<EntityIdx> {
        self.entity_lookup
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownId {
                kind: "entity",
                id: id.0.clone(),
            })
    }

    /// Affinity between mention `a` and a mention or entity `b`; 0 when no
    /// edge was retrieved.
    pub fn affinity(&self, a: &MentionId, b: NodeRef<'_>) -> Result<f64> {
        let a = self.mention_index(a)?;
        match b {
            NodeRef::Mention(b_id) => {
                let b = self.mention_index(b_id)?;
                if a == b {
                    return Err(Error::SelfLoop(b_id.0.clone()));
                }
                Ok(self.mention_affinity(a, b))
            }
            NodeRef::Entity(e) => Ok(self.entity_affinity(a, self.entity_index(e)?)),
        }
    }

    pub fn mention_affinity(&self, a: MentionIdx, b: MentionIdx) -> f64 {
        let list = &self.adjacency[a.index()];
        list.binary_search_by(|probe| probe.0.cmp(&b))
            .map_or(0.0, |pos| list[pos].1)
    }

    pub fn entity_affinity(&self, m: MentionIdx, e: EntityIdx) -> f64 {
        self.entity_candidates[m.index()]
            .iter()
            .find(|c| c.0 == e)
            .map_or(0.0, |c| c.1)
    }

    /// Undirected mention neighbours of `m`, by ascending index.
    pub fn neighbors(&self, m: MentionIdx) -> &[(MentionIdx, f64)] {
        &self.adjacency[m.index()]
    }

    /// Retrieved mention candidates of `m`, best first.
    pub fn mention_candidates(&self, m: MentionIdx) -> &[(MentionIdx, f64)] {
        &self.mention_candidates[m.index()]
    }

    /// Retrieved entity candidates of `m`, best first (ties by lower index).
    pub fn entity_candidates(&self, m: MentionIdx) -> &[(EntityIdx, f64)] {
        &self.entity_candidates[m.index()]
    }

    /// Each undirected mention-mention edge once, as `(a, b, score)` with `a < b`.
    pub fn mention_edges(&self) -> impl Iterator<Item = (MentionIdx, MentionIdx, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, list)| {
            let a = MentionIdx::new(i);
            list.iter()
                .filter(move |(b, _)| a < *b)
                .map(move |&(b, s)| (a, b, s))
        })
    }

    /// Every retrieved edge, mention by mention, mention candidates first.
    pub fn edges(&self) -> Vec<AffinityEdge> {
        let mut out = Vec::new();
        for (i, source) in self.mention_ids.iter().enumerate() {
            for &(j, score) in &self.mention_candidates[i] {
                out.push(AffinityEdge {
                    source: source.clone(),
                    target: Target::Mention(self.mention_ids[j.index()].clone()),
                    score,
                });
            }
            for &(e, score) in &self.entity_candidates[i] {
                out.push(AffinityEdge {
                    source: source.clone(),
                    target: Target::Entity(self.entity_ids[e.index()].clone()),
                    score,
                });
            }
        }
        out
    }
}

fn check_list<T: PartialEq + Copy + fmt::Debug>(
    source: &MentionId,
    list: &[(T, f64)],
    k: usize,
) -> Result<()> {
    if list.len() > k {
        return Err(Error::Contract(format!(
            "mention `{source}` has {} candidates, more than k = {k}",
            list.len()
        )));
    }
    for (i, a) in list.iter().enumerate() {
        if list[i + 1..].iter().any(|b| b.0 == a.0) {
            return Err(Error::Contract(format!(
                "mention `{source}` lists candidate {:?} twice",
                a.0
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids<T: From<&'static str>>(names: &[&'static str]) -> Vec<T> {
        names.iter().map(|&n| T::from(n)).collect()
    }

    fn small() -> AffinityGraph {
        AffinityGraph::from_candidates(
            ids(&["a", "b", "c"]),
            ids(&["x"]),
            2,
            vec![
                vec![(MentionIdx(1), 0.6)],
                vec![(MentionIdx(0), 0.8), (MentionIdx(2), 0.3)],
                vec![],
            ],
            vec![vec![(EntityIdx(0), 0.9)], vec![], vec![]],
        )
        .unwrap()
    }

    #[test]
    fn symmetric_lookup_takes_max() {
        let g = small();
        let a = MentionId::from("a");
        let b = MentionId::from("b");
        assert_eq!(g.affinity(&a, NodeRef::Mention(&b)).unwrap(), 0.8);
        assert_eq!(g.affinity(&b, NodeRef::Mention(&a)).unwrap(), 0.8);
        let c = MentionId::from("c");
        assert_eq!(g.affinity(&c, NodeRef::Mention(&b)).unwrap(), 0.3);
    }

    #[test]
    fn absent_pair_is_zero() {
        let g = small();
        let a = MentionId::from("a");
        let c = MentionId::from("c");
        assert_eq!(g.affinity(&a, NodeRef::Mention(&c)).unwrap(), 0.0);
        assert_eq!(
            g.affinity(&c, NodeRef::Entity(&EntityId::from("x"))).unwrap(),
            0.0
        );
    }

    #[test]
    fn self_loop_query_rejected() {
        let g = small();
        let a = MentionId::from("a");
        assert!(matches!(
            g.affinity(&a, NodeRef::Mention(&a)),
            Err(Error::SelfLoop(_))
        ));
    }

    #[test]
    fn unknown_id_named_in_error() {
        let g = small();
        let err = g
            .affinity(&"zz".into(), NodeRef::Entity(&"x".into()))
            .unwrap_err();
        assert!(err.to_string().contains("zz"));
    }

    #[test]
    fn rejects_bad_scores_and_self_loops() {
        let bad_score = AffinityGraph::from_candidates(
            ids(&["a", "b"]),
            vec![],
            2,
            vec![vec![(MentionIdx(1), 0.0)], vec![]],
            vec![vec![], vec![]],
        );
        assert!(bad_score.is_err());
        let self_loop = AffinityGraph::from_candidates(
            ids(&["a", "b"]),
            vec![],
            2,
            vec![vec![(MentionIdx(0), 0.5)], vec![]],
            vec![vec![], vec![]],
        );
        assert!(matches!(self_loop, Err(Error::SelfLoop(_))));
    }

    #[test]
    fn canonical_edges_listed_once() {
        let g = small();
        let edges: Vec<_> = g.mention_edges().collect();
        assert_eq!(
            edges,
            vec![
                (MentionIdx(0), MentionIdx(1), 0.8),
                (MentionIdx(1), MentionIdx(2), 0.3)
            ]
        );
    }
}
