//! Hierarchical navigable small-world (HNSW) graph for approximate top-k
//! search under cosine similarity.
//!
//! Construction inserts points in index order with levels drawn from a
//! seeded RNG, so a given input always yields the same index and the same
//! query answers.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{cosine, score_of, UnitVectors};
use crate::exec::Execution;
use crate::graph::{EntityList, MentionList};
use crate::model::{EntityIdx, MentionIdx};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HnswParams {
    /// Links per node on upper levels; level 0 keeps twice as many.
    pub m: usize,
    pub ef_construction: usize,
    pub ef_search: usize,
    pub seed: u64,
}

impl Default for HnswParams {
    fn default() -> Self {
        Self {
            m: 16,
            ef_construction: 100,
            ef_search: 64,
            seed: 0x5eed_1e55,
        }
    }
}

/// Similarity with a total order: higher similarity first, then lower index.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Scored {
    sim: f64,
    idx: u32,
}

impl Eq for Scored {}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sim
            .total_cmp(&other.sim)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(super) struct Hnsw<'a> {
    vectors: &'a UnitVectors,
    links: Vec<Vec<Vec<u32>>>,
    entry: Option<u32>,
    top_level: usize,
    params: HnswParams,
}

impl<'a> Hnsw<'a> {
    pub(super) fn build(vectors: &'a UnitVectors, params: HnswParams) -> Self {
        let m = params.m.max(2);
        let params = HnswParams { m, ..params };
        let mut index = Self {
            vectors,
            links: Vec::with_capacity(vectors.len()),
            entry: None,
            top_level: 0,
            params,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let level_mult = 1.0 / (m as f64).ln();
        for i in 0..vectors.len() {
            let u: f64 = 1.0 - rng.random::<f64>();
            let level = (-u.ln() * level_mult).floor() as usize;
            index.insert(i as u32, level);
        }
        index
    }

    #[inline]
    fn sim(&self, q: &[f64], i: u32) -> f64 {
        cosine(q, self.vectors.row(i as usize))
    }

    fn search_layer(&self, q: &[f64], entry: &[Scored], ef: usize, level: usize) -> Vec<Scored> {
        let mut visited: HashSet<u32> = entry.iter().map(|s| s.idx).collect();
        let mut candidates: BinaryHeap<Scored> = entry.iter().copied().collect();
        let mut results: BinaryHeap<Reverse<Scored>> = entry.iter().map(|&s| Reverse(s)).collect();
        while results.len() > ef {
            results.pop();
        }

        while let Some(best) = candidates.pop() {
            let worst = results.peek().map(|r| r.0);
            if let Some(worst) = worst {
                if results.len() >= ef && best < worst {
                    break;
                }
            }
            for &n in &self.links[best.idx as usize][level] {
                if !visited.insert(n) {
                    continue;
                }
                let s = Scored {
                    sim: self.sim(q, n),
                    idx: n,
                };
                let admit = results.len() < ef || results.peek().is_some_and(|w| s > w.0);
                if admit {
                    candidates.push(s);
                    results.push(Reverse(s));
                    if results.len() > ef {
                        results.pop();
                    }
                }
            }
        }

        let mut out: Vec<Scored> = results.into_iter().map(|r| r.0).collect();
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    /// Diversity heuristic: keep a candidate only if it is closer to the base
    /// point than to every neighbour already kept, then top up with the
    /// discarded ones.
    fn select(&self, candidates: &[Scored], m: usize) -> Vec<u32> {
        let mut kept: Vec<Scored> = Vec::with_capacity(m);
        let mut pruned = Vec::new();
        for &c in candidates {
            if kept.len() >= m {
                break;
            }
            let row = self.vectors.row(c.idx as usize);
            if kept.iter().all(|k| self.sim(row, k.idx) < c.sim) {
                kept.push(c);
            } else {
                pruned.push(c);
            }
        }
        for c in pruned {
            if kept.len() >= m {
                break;
            }
            kept.push(c);
        }
        kept.into_iter().map(|s| s.idx).collect()
    }

    fn insert(&mut self, i: u32, level: usize) {
        self.links.push(vec![Vec::new(); level + 1]);
        let Some(entry) = self.entry else {
            self.entry = Some(i);
            self.top_level = level;
            return;
        };
        let q = self.vectors.row(i as usize);
        let mut ep = vec![Scored {
            sim: self.sim(q, entry),
            idx: entry,
        }];
        for lc in (level + 1..=self.top_level).rev() {
            ep = self.search_layer(q, &ep, 1, lc);
            ep.truncate(1);
        }
        for lc in (0..=level.min(self.top_level)).rev() {
            let found = self.search_layer(q, &ep, self.params.ef_construction, lc);
            let max_links = if lc == 0 {
                2 * self.params.m
            } else {
                self.params.m
            };
            let neighbours = self.select(&found, self.params.m);
            for &n in &neighbours {
                self.links[n as usize][lc].push(i);
                if self.links[n as usize][lc].len() > max_links {
                    let base = self.vectors.row(n as usize);
                    let mut scored: Vec<Scored> = self.links[n as usize][lc]
                        .iter()
                        .map(|&x| Scored {
                            sim: self.sim(base, x),
                            idx: x,
                        })
                        .collect();
                    scored.sort_unstable_by(|a, b| b.cmp(a));
                    self.links[n as usize][lc] = self.select(&scored, max_links);
                }
            }
            self.links[i as usize][lc] = neighbours;
            ep = found;
        }
        if level > self.top_level {
            self.entry = Some(i);
            self.top_level = level;
        }
    }

    /// Approximate top-k as `(index, normalized score)`, best first.
    pub(super) fn query(&self, q: &[f64], k: usize, exclude: Option<usize>) -> Vec<(usize, f64)> {
        let Some(entry) = self.entry else {
            return Vec::new();
        };
        let mut ep = vec![Scored {
            sim: self.sim(q, entry),
            idx: entry,
        }];
        for lc in (1..=self.top_level).rev() {
            ep = self.search_layer(q, &ep, 1, lc);
            ep.truncate(1);
        }
        let ef = self.params.ef_search.max(k + 1);
        let mut out: Vec<(usize, f64)> = self
            .search_layer(q, &ep, ef, 0)
            .into_iter()
            .filter(|s| Some(s.idx as usize) != exclude)
            .map(|s| (s.idx as usize, score_of(s.sim)))
            .filter(|&(_, score)| score > 0.0)
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out.truncate(k);
        out
    }
}

pub(super) fn search_all(
    mentions: &UnitVectors,
    entities: &UnitVectors,
    k: usize,
    params: HnswParams,
    execution: Execution,
) -> (Vec<MentionList>, Vec<EntityList>) {
    let mention_index = Hnsw::build(mentions, params);
    let entity_index = Hnsw::build(entities, params);
    let lists = execution.map_range(mentions.len(), |i| {
        let q = mentions.row(i);
        let mm = mention_index
            .query(q, k, Some(i))
            .into_iter()
            .map(|(j, s)| (MentionIdx::new(j), s))
            .collect::<MentionList>();
        let me = entity_index
            .query(q, k, None)
            .into_iter()
            .map(|(j, s)| (EntityIdx::new(j), s))
            .collect::<EntityList>();
        (mm, me)
    });
    lists.into_iter().unzip()
}
