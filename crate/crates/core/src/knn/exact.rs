//! Exhaustive nearest-neighbour scan.

use super::{cosine, score_of, UnitVectors};
use crate::exec::Execution;
use crate::graph::{EntityList, MentionList};
use crate::model::{EntityIdx, MentionIdx};

/// Bounded best-first buffer. Higher score wins; equal scores keep the
/// lower index, which a left-to-right scan gets for free.
pub(super) struct TopK {
    k: usize,
    items: Vec<(usize, f64)>,
}

impl TopK {
    pub(super) fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    #[inline]
    fn beats(a: (usize, f64), b: (usize, f64)) -> bool {
        a.1 > b.1 || (a.1 == b.1 && a.0 < b.0)
    }

    #[inline]
    pub(super) fn push(&mut self, idx: usize, score: f64) {
        if self.items.len() == self.k {
            match self.items.last() {
                Some(&last) if Self::beats((idx, score), last) => {
                    self.items.pop();
                }
                _ => return,
            }
        }
        let pos = self
            .items
            .iter()
            .position(|&other| Self::beats((idx, score), other))
            .unwrap_or(self.items.len());
        self.items.insert(pos, (idx, score));
    }

    pub(super) fn into_vec(self) -> Vec<(usize, f64)> {
        self.items
    }
}

pub(super) fn scan(
    query: &[f64],
    base: &UnitVectors,
    k: usize,
    exclude: Option<usize>,
) -> Vec<(usize, f64)> {
    let mut top = TopK::new(k);
    for j in 0..base.len() {
        if Some(j) == exclude {
            continue;
        }
        let score = score_of(cosine(query, base.row(j)));
        if score > 0.0 {
            top.push(j, score);
        }
    }
    top.into_vec()
}

pub(super) fn search_all(
    mentions: &UnitVectors,
    entities: &UnitVectors,
    k: usize,
    execution: Execution,
) -> (Vec<MentionList>, Vec<EntityList>) {
    let lists = execution.map_range(mentions.len(), |i| {
        let q = mentions.row(i);
        let mm = scan(q, mentions, k, Some(i))
            .into_iter()
            .map(|(j, s)| (MentionIdx::new(j), s))
            .collect::<MentionList>();
        let me = scan(q, entities, k, None)
            .into_iter()
            .map(|(j, s)| (EntityIdx::new(j), s))
            .collect::<EntityList>();
        (mm, me)
    });
    lists.into_iter().unzip()
}
