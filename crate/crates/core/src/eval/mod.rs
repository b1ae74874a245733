//! Linking quality: precision, recall and F1 per segment, plus NMI and ARI.
//!
//! Predicted NIL clusters carry no identity of their own, so they are matched
//! one-to-one to gold NIL entities by maximum member overlap before scoring.
//! A NIL mention counts as correct when its cluster is matched to its gold
//! NIL entity.

pub mod assignment;
pub mod partition;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Clustering, Corpus, EntityIdx, GoldLabel, MentionIdx, NilId, Prediction};

pub use assignment::{max_weight_assignment, sparse_max_assignment};
pub use partition::{ari, nmi};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Every mention carries a gold label, NIL entities included.
    #[default]
    Full,
    /// Only links to known entities are annotated. NIL predictions are
    /// treated as abstentions and NIL scores are not reported.
    Pca,
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Full => "full",
            EvalMode::Pca => "pca",
        })
    }
}

/// Gold class of a mention in dense form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GoldClass {
    Known(EntityIdx),
    /// Index into [`GoldStandard::nil_ids`].
    Nil(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldStandard {
    classes: Vec<GoldClass>,
    nil_ids: Vec<NilId>,
    entity_count: usize,
}

impl GoldStandard {
    /// Reads the gold labels of `corpus`.
    ///
    /// In full mode every mention must be labelled. In partial mode a
    /// missing label means the mention is not linked to a known entity; such
    /// mentions, and NIL-labelled ones, each form their own gold class.
    pub fn from_corpus(corpus: &Corpus, mode: EvalMode) -> Result<Self> {
        let entity_count = corpus.entities().len();
        let mut nil_lookup: BTreeMap<&NilId, u32> = BTreeMap::new();
        if mode == EvalMode::Full {
            for m in corpus.mentions() {
                if let Some(GoldLabel::Nil(n)) = &m.gold {
                    nil_lookup.insert(n, 0);
                }
            }
            for (i, v) in nil_lookup.values_mut().enumerate() {
                *v = i as u32;
            }
        }
        let mut nil_ids: Vec<NilId> = nil_lookup.keys().map(|&n| n.clone()).collect();

        let mut classes = Vec::with_capacity(corpus.mentions().len());
        for m in corpus.mentions() {
            let class = match (&m.gold, mode) {
                (Some(GoldLabel::Known(e)), _) => {
                    let idx = corpus.entity_index(e).ok_or_else(|| Error::Integrity {
                        mention: m.id.to_string(),
                        entity: e.to_string(),
                    })?;
                    GoldClass::Known(idx)
                }
                (Some(GoldLabel::Nil(n)), EvalMode::Full) => GoldClass::Nil(nil_lookup[n]),
                (None, EvalMode::Full) => {
                    return Err(Error::Evaluation(format!(
                        "mention `{}` has no gold label",
                        m.id
                    )))
                }
                (_, EvalMode::Pca) => {
                    nil_ids.push(NilId::from(format!("unlabelled:{}", m.id)));
                    GoldClass::Nil(nil_ids.len() as u32 - 1)
                }
            };
            classes.push(class);
        }
        Ok(Self {
            classes,
            nil_ids,
            entity_count,
        })
    }

    pub fn new(classes: Vec<GoldClass>, nil_ids: Vec<NilId>, entity_count: usize) -> Self {
        Self {
            classes,
            nil_ids,
            entity_count,
        }
    }

    pub fn classes(&self) -> &[GoldClass] {
        &self.classes
    }

    pub fn nil_ids(&self) -> &[NilId] {
        &self.nil_ids
    }

    pub fn class(&self, m: MentionIdx) -> GoldClass {
        self.classes[m.index()]
    }

    fn label(&self, class: GoldClass) -> usize {
        match class {
            GoldClass::Known(e) => e.index(),
            GoldClass::Nil(n) => self.entity_count + n as usize,
        }
    }
}

/// One-to-one matching of predicted NIL clusters to gold NIL classes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NilMapping {
    /// `(cluster index, gold NIL class)` pairs with positive overlap.
    pub pairs: Vec<(usize, u32)>,
    /// Mentions in matched clusters whose gold class is the matched one.
    pub overlap: usize,
}

impl NilMapping {
    pub fn lookup(&self) -> HashMap<usize, u32> {
        self.pairs.iter().copied().collect()
    }
}

/// Maximum-overlap matching between the NIL clusters of `clustering` and the
/// gold NIL classes.
pub fn optimal_nil_mapping(clustering: &Clustering, gold: &GoldStandard) -> NilMapping {
    let mut counts: BTreeMap<(usize, u32), u64> = BTreeMap::new();
    for i in 0..clustering.mention_count() {
        let m = MentionIdx::new(i);
        if let (Prediction::NilCluster(c), GoldClass::Nil(g)) =
            (clustering.prediction(m), gold.class(m))
        {
            *counts.entry((c, g)).or_default() += 1;
        }
    }
    let entries: Vec<(usize, usize, u64)> = counts
        .iter()
        .map(|(&(c, g), &w)| (c, g as usize, w))
        .collect();
    let pairs: Vec<(usize, u32)> = sparse_max_assignment(&entries)
        .into_iter()
        .map(|(c, g)| (c, g as u32))
        .collect();
    let overlap = pairs.iter().map(|&(c, g)| counts[&(c, g)] as usize).sum();
    NilMapping { pairs, overlap }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub nmi: f64,
    pub ari: f64,
    pub predicted: usize,
    pub gold: usize,
    pub correct: usize,
    /// Neither predictions nor gold items; scores are reported as 1.0.
    pub empty: bool,
}

/// Precision, recall and F1 from raw counts.
pub fn prf(correct: usize, predicted: usize, gold: usize) -> (f64, f64, f64, bool) {
    if predicted == 0 && gold == 0 {
        return (1.0, 1.0, 1.0, true);
    }
    let p = if predicted == 0 {
        0.0
    } else {
        correct as f64 / predicted as f64
    };
    let r = if gold == 0 {
        0.0
    } else {
        correct as f64 / gold as f64
    };
    let f1 = if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    };
    (p, r, f1, false)
}

#[derive(Default)]
struct Counts {
    correct: usize,
    predicted: usize,
    gold: usize,
}

impl Counts {
    fn finish(&self, members: &[usize], clustering: &Clustering, gold: &GoldStandard) -> SegmentScores {
        let (precision, recall, f1, empty) = prf(self.correct, self.predicted, self.gold);
        let pred_labels: Vec<usize> = members
            .iter()
            .map(|&i| clustering.cluster_of(MentionIdx::new(i)))
            .collect();
        let gold_labels: Vec<usize> = members
            .iter()
            .map(|&i| gold.label(gold.classes[i]))
            .collect();
        SegmentScores {
            precision,
            recall,
            f1,
            nmi: nmi(&pred_labels, &gold_labels),
            ari: ari(&pred_labels, &gold_labels),
            predicted: self.predicted,
            gold: self.gold,
            correct: self.correct,
            empty,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: EvalMode,
    pub known: SegmentScores,
    /// Absent in partial mode.
    pub nil: Option<SegmentScores>,
    pub micro: SegmentScores,
    pub clusters: usize,
    /// Matched `(cluster index, gold NIL id)` pairs.
    pub nil_mapping: Vec<(usize, NilId)>,
}

/// Scores `clustering` against the gold labels carried by `corpus`.
pub fn evaluate(corpus: &Corpus, clustering: &Clustering, mode: EvalMode) -> Result<EvalReport> {
    let gold = GoldStandard::from_corpus(corpus, mode)?;
    evaluate_against(&gold, clustering, mode)
}

pub fn evaluate_against(
    gold: &GoldStandard,
    clustering: &Clustering,
    mode: EvalMode,
) -> Result<EvalReport> {
    let n = gold.classes.len();
    if clustering.mention_count() != n {
        return Err(Error::Evaluation(format!(
            "clustering covers {} mentions but the gold standard has {n}",
            clustering.mention_count()
        )));
    }
    let mapping = match mode {
        EvalMode::Full => optimal_nil_mapping(clustering, gold),
        EvalMode::Pca => NilMapping::default(),
    };
    let lookup = mapping.lookup();

    let mut known = Counts::default();
    let mut nil = Counts::default();
    let mut known_members = Vec::new();
    let mut nil_members = Vec::new();
    for i in 0..n {
        let m = MentionIdx::new(i);
        let class = gold.classes[i];
        let pred = clustering.prediction(m);
        match class {
            GoldClass::Known(_) => {
                known.gold += 1;
                known_members.push(i);
            }
            GoldClass::Nil(_) => {
                nil.gold += 1;
                nil_members.push(i);
            }
        }
        match pred {
            Prediction::Entity(e) => {
                known.predicted += 1;
                if class == GoldClass::Known(e) {
                    known.correct += 1;
                }
            }
            Prediction::NilCluster(c) => {
                nil.predicted += 1;
                if let GoldClass::Nil(g) = class {
                    if lookup.get(&c) == Some(&g) {
                        nil.correct += 1;
                    }
                }
            }
            Prediction::Abstain => {}
        }
    }

    let all: Vec<usize> = (0..n).collect();
    let known_scores = known.finish(&known_members, clustering, gold);
    let (nil_scores, micro_counts) = match mode {
        EvalMode::Full => {
            let micro = Counts {
                correct: known.correct + nil.correct,
                predicted: known.predicted + nil.predicted,
                gold: known.gold + nil.gold,
            };
            (Some(nil.finish(&nil_members, clustering, gold)), micro)
        }
        EvalMode::Pca => (None, known),
    };
    let micro = micro_counts.finish(&all, clustering, gold);

    let nil_mapping = mapping
        .pairs
        .iter()
        .map(|&(c, g)| (c, gold.nil_ids[g as usize].clone()))
        .collect();
    Ok(EvalReport {
        mode,
        known: known_scores,
        nil: nil_scores,
        micro,
        clusters: clustering.len(),
        nil_mapping,
    })
}

/// Distinct gold NIL ids present in `corpus`.
pub fn gold_nil_ids(corpus: &Corpus) -> BTreeSet<NilId> {
    corpus
        .mentions()
        .iter()
        .filter_map(|m| match &m.gold {
            Some(GoldLabel::Nil(n)) => Some(n.clone()),
            _ => None,
        })
        .collect()
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: {}   clusters: {}", self.mode, self.clusters)?;
        writeln!(
            f,
            "{:<8}{:>8}{:>8}{:>8}{:>8}{:>8}",
            "segment", "P", "R", "F1", "NMI", "ARI"
        )?;
        let mut row = |name: &str, s: &SegmentScores| {
            writeln!(
                f,
                "{:<8}{:>8.4}{:>8.4}{:>8.4}{:>8.4}{:>8.4}",
                name, s.precision, s.recall, s.f1, s.nmi, s.ari
            )
        };
        row("known", &self.known)?;
        if let Some(nil) = &self.nil {
            row("nil", nil)?;
        }
        row("micro", &self.micro)
    }
}
