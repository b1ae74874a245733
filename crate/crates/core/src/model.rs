//! Domain types: identifiers, mentions, entities, thresholds and clusterings.
//!
//! Records are addressed two ways. External identifiers ([`MentionId`],
//! [`EntityId`]) are the opaque strings found in input files. Dense indices
//! ([`MentionIdx`], [`EntityIdx`]) are positions in a [`Corpus`] or
//! [`AffinityGraph`](crate::AffinityGraph), whose records are kept sorted by
//! identifier, so "lowest index" and "lowest id" always agree.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Identifier of a textual mention.
    MentionId
);
string_id!(
    /// Identifier of a known knowledge-base entity.
    EntityId
);
string_id!(
    /// Identifier of a gold NIL entity (one absent from the knowledge base).
    NilId
);

macro_rules! dense_idx {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn new(index: usize) -> Self {
                Self(u32::try_from(index).expect("index exceeds u32 range"))
            }

            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

dense_idx!(
    /// Position of a mention in its corpus or graph.
    MentionIdx
);
dense_idx!(
    /// Position of a known entity in its corpus or graph.
    EntityIdx
);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoldLabel {
    Known(EntityId),
    Nil(NilId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mention {
    pub id: MentionId,
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<GoldLabel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: EntityId,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f32>>,
    /// In- plus out-link count in the knowledge base.
    #[serde(default)]
    pub popularity: u64,
}

/// Validated mentions and known entities, each sorted by identifier.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    mentions: Vec<Mention>,
    entities: Vec<Entity>,
    mention_lookup: HashMap<MentionId, MentionIdx>,
    entity_lookup: HashMap<EntityId, EntityIdx>,
    dimension: Option<usize>,
}

impl Corpus {
    /// Sorts and validates the records.
    ///
    /// Checks identifier uniqueness, non-empty surfaces and labels, a single
    /// embedding dimension across both record kinds, and that every
    /// `Known` gold label names an entity of the catalog.
    pub fn new(mut mentions: Vec<Mention>, mut entities: Vec<Entity>) -> Result<Self> {
        mentions.sort_by(|a, b| a.id.cmp(&b.id));
        entities.sort_by(|a, b| a.id.cmp(&b.id));

        let mut dimension = None;
        let mut check_dim = |id: &str, emb: &Option<Vec<f32>>| -> Result<()> {
            if let Some(v) = emb {
                check_embedding(id, v)?;
                match dimension {
                    None => dimension = Some(v.len()),
                    Some(d) if d != v.len() => {
                        return Err(Error::Record {
                            id: id.to_owned(),
                            message: format!("embedding dimension {} differs from {d}", v.len()),
                        })
                    }
                    Some(_) => {}
                }
            }
            Ok(())
        };

        let mut mention_lookup = HashMap::with_capacity(mentions.len());
        for (i, m) in mentions.iter().enumerate() {
            if m.surface.is_empty() {
                return Err(Error::Record {
                    id: m.id.0.clone(),
                    message: "empty surface".into(),
                });
            }
            check_dim(m.id.as_str(), &m.embedding)?;
            if mention_lookup.insert(m.id.clone(), MentionIdx::new(i)).is_some() {
                return Err(Error::Record {
                    id: m.id.0.clone(),
                    message: "duplicate mention id".into(),
                });
            }
        }
        let mut entity_lookup = HashMap::with_capacity(entities.len());
        for (i, e) in entities.iter().enumerate() {
            if e.label.is_empty() {
                return Err(Error::Record {
                    id: e.id.0.clone(),
                    message: "empty label".into(),
                });
            }
            check_dim(e.id.as_str(), &e.embedding)?;
            if entity_lookup.insert(e.id.clone(), EntityIdx::new(i)).is_some() {
                return Err(Error::Record {
                    id: e.id.0.clone(),
                    message: "duplicate entity id".into(),
                });
            }
        }
        for m in &mentions {
            if let Some(GoldLabel::Known(e)) = &m.gold {
                if !entity_lookup.contains_key(e) {
                    return Err(Error::Integrity {
                        mention: m.id.0.clone(),
                        entity: e.0.clone(),
                    });
                }
            }
        }

        Ok(Self {
            mentions,
            entities,
            mention_lookup,
            entity_lookup,
            dimension,
        })
    }

    pub fn mentions(&self) -> &[Mention] {
        &self.mentions
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn mention(&self, idx: MentionIdx) -> &Mention {
        &self.mentions[idx.index()]
    }

    pub fn entity(&self, idx: EntityIdx) -> &Entity {
        &self.entities[idx.index()]
    }

    pub fn mention_index(&self, id: &MentionId) -> Option<MentionIdx> {
        self.mention_lookup.get(id).copied()
    }

    pub fn entity_index(&self, id: &EntityId) -> Option<EntityIdx> {
        self.entity_lookup.get(id).copied()
    }

    pub fn mention_ids(&self) -> Vec<MentionId> {
        self.mentions.iter().map(|m| m.id.clone()).collect()
    }

    pub fn entity_ids(&self) -> Vec<EntityId> {
        self.entities.iter().map(|e| e.id.clone()).collect()
    }

    /// Shared embedding dimension, if any record carries an embedding.
    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    /// Returns the sub-corpus holding only the given mentions (all entities kept).
    pub fn with_mentions(&self, keep: &[MentionIdx]) -> Result<Self> {
        let mentions = keep.iter().map(|&m| self.mention(m).clone()).collect();
        Corpus::new(mentions, self.entities.clone())
    }
}

pub(crate) fn check_embedding(id: &str, v: &[f32]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Record {
            id: id.to_owned(),
            message: "empty embedding".into(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Record {
            id: id.to_owned(),
            message: "non-finite embedding component".into(),
        });
    }
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::Record {
            id: id.to_owned(),
            message: "zero-norm embedding".into(),
        });
    }
    Ok(())
}

/// Affinity thresholds. Every comparison against them is strict (`>`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Minimum mention-mention affinity for two mentions to share a cluster.
    pub tau_m: f64,
    /// Minimum mention-entity affinity for an entity to become a candidate.
    pub tau_e: f64,
    /// Minimum transitive affinity for a mention to join an entity.
    pub tau_a: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            tau_m: 0.85,
            tau_e: 0.9,
            tau_a: 0.75,
        }
    }
}

impl Thresholds {
    pub fn new(tau_m: f64, tau_e: f64, tau_a: f64) -> Result<Self> {
        let t = Self { tau_m, tau_e, tau_a };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("tau_m", self.tau_m)?;
        check_unit("tau_e", self.tau_e)?;
        check_unit("tau_a", self.tau_a)
    }
}

pub(crate) fn check_unit(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in [0, 1], got {value}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    /// Members in ascending index order; never empty.
    pub mentions: Vec<MentionIdx>,
    pub entity: Option<EntityIdx>,
}

/// What a clustering predicts for one mention.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prediction {
    Entity(EntityIdx),
    /// Member of the NIL cluster with this index.
    NilCluster(usize),
    /// No prediction (linkers that are not NIL-aware leave unmatched
    /// mentions unlinked).
    Abstain,
}

/// A partition of the mentions into clusters, each with at most one entity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clustering {
    clusters: Vec<Cluster>,
    assignment: Vec<u32>,
    nil_aware: bool,
}

impl Clustering {
    /// Builds a NIL-aware clustering over `mention_count` mentions.
    pub fn new(mention_count: usize, clusters: Vec<Cluster>) -> Result<Self> {
        Self::build(mention_count, clusters, true)
    }

    /// Builds a clustering whose entity-less clusters are abstentions rather
    /// than NIL predictions.
    pub fn without_nil(mention_count: usize, clusters: Vec<Cluster>) -> Result<Self> {
        Self::build(mention_count, clusters, false)
    }

    fn build(mention_count: usize, mut clusters: Vec<Cluster>, nil_aware: bool) -> Result<Self> {
        const UNSET: u32 = u32::MAX;
        let mut assignment = vec![UNSET; mention_count];
        for (c, cluster) in clusters.iter_mut().enumerate() {
            if cluster.mentions.is_empty() {
                return Err(Error::Contract(format!("cluster {c} has no mentions")));
            }
            cluster.mentions.sort_unstable();
            for &m in &cluster.mentions {
                let slot = assignment.get_mut(m.index()).ok_or_else(|| {
                    Error::Contract(format!("mention index {} out of range", m.index()))
                })?;
                if *slot != UNSET {
                    return Err(Error::Contract(format!(
                        "mention index {} appears in two clusters",
                        m.index()
                    )));
                }
                *slot = c as u32;
            }
        }
        if let Some(m) = assignment.iter().position(|&c| c == UNSET) {
            return Err(Error::Contract(format!(
                "mention index {m} is not covered by any cluster"
            )));
        }
        Ok(Self {
            clusters,
            assignment,
            nil_aware,
        })
    }

    pub fn empty() -> Self {
        Self {
            clusters: Vec::new(),
            assignment: Vec::new(),
            nil_aware: true,
        }
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn mention_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn nil_aware(&self) -> bool {
        self.nil_aware
    }

    pub fn cluster_of(&self, m: MentionIdx) -> usize {
        self.assignment[m.index()] as usize
    }

    pub fn prediction(&self, m: MentionIdx) -> Prediction {
        let c = self.cluster_of(m);
        match self.clusters[c].entity {
            Some(e) => Prediction::Entity(e),
            None if self.nil_aware => Prediction::NilCluster(c),
            None => Prediction::Abstain,
        }
    }

    /// Number of distinct entities attached to clusters.
    pub fn linked_entity_count(&self) -> usize {
        self.clusters
            .iter()
            .filter_map(|c| c.entity)
            .collect::<HashSet<_>>()
            .len()
    }
}
