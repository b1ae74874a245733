//! Synthetic corpora with recoverable ground truth.
//!
//! Entity prototypes are uniform on the unit sphere. Each entity spawns
//! `1 + Geometric(1 / mean)` mentions, each the prototype plus isotropic
//! Gaussian noise, renormalized. A fixed share of entities is withheld from
//! the catalog and their mentions are labelled NIL.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::corpus::write_jsonl;
use crate::error::{Error, Result};
use crate::model::{Corpus, Entity, EntityId, GoldLabel, Mention, MentionId, NilId};

const FIRST_NAMES: &[&str] = &[
    "Ada", "Boris", "Clara", "Dmitri", "Elena", "Farid", "Greta", "Hugo", "Ines", "James",
    "Kira", "Lars", "Mina", "Nils", "Olga", "Pavel", "Quinn", "Rosa", "Sven", "Tara",
];
const LAST_NAMES: &[&str] = &[
    "Adler", "Brandt", "Costa", "Dahl", "Evans", "Fischer", "Garcia", "Holm", "Ivanov",
    "Jansen", "Keller", "Lake", "Moreau", "Novak", "Olsen", "Petrov", "Quist", "Rossi",
    "Santos", "Tanaka",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_entities: usize,
    /// Share of entities withheld from the catalog.
    pub nil_fraction: f64,
    /// Mean number of mentions per entity; at least 1.
    pub mean_mentions: f64,
    pub dim: usize,
    /// Per-component standard deviation of the mention noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_entities: 1000,
            nil_fraction: 0.3,
            mean_mentions: 2.0,
            dim: 64,
            noise_sigma: 0.02,
            seed: 42,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_entities == 0 {
            return Err(Error::Config("n_entities must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.nil_fraction) {
            return Err(Error::Config(format!(
                "nil_fraction must lie in [0, 1], got {}",
                self.nil_fraction
            )));
        }
        if !(self.mean_mentions.is_finite() && self.mean_mentions >= 1.0) {
            return Err(Error::Config(format!(
                "mean_mentions must be at least 1, got {}",
                self.mean_mentions
            )));
        }
        if self.dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Config(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCorpus {
    /// Mentions with gold labels, sorted by id.
    pub mentions: Vec<Mention>,
    /// Known catalog.
    pub entities: Vec<Entity>,
    /// Withheld entities; their ids are the gold NIL ids.
    pub nil_entities: Vec<Entity>,
}

impl SyntheticCorpus {
    pub fn corpus(&self) -> Result<Corpus> {
        Corpus::new(self.mentions.clone(), self.entities.clone())
    }
}

fn unit(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

fn surface_variant(label: &str, rng: &mut ChaCha8Rng) -> String {
    match rng.random_range(0..6) {
        0 => label.to_lowercase(),
        1 => label.to_uppercase(),
        2 => label.replace(' ', "-"),
        3 => format!("{label}!"),
        _ => label.to_owned(),
    }
}

/// Deterministic in `config.seed`.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_entities;
    let noise = Normal::new(0.0, config.noise_sigma)
        .map_err(|e| Error::Config(format!("noise_sigma: {e}")))?;
    let counts = Geometric::new(1.0 / config.mean_mentions)
        .map_err(|e| Error::Config(format!("mean_mentions: {e}")))?;

    let prototypes: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut v: Vec<f64> = (0..config.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            unit(&mut v);
            v
        })
        .collect();
    let labels: Vec<String> = (0..n)
        .map(|_| {
            let f = FIRST_NAMES[rng.random_range(0..FIRST_NAMES.len())];
            let l = LAST_NAMES[rng.random_range(0..LAST_NAMES.len())];
            format!("{f} {l}")
        })
        .collect();
    let popularity: Vec<u64> = (0..n).map(|_| rng.random_range(1..=1000)).collect();

    let withheld = (n as f64 * config.nil_fraction).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut is_nil = vec![false; n];
    for &i in &order[..withheld] {
        is_nil[i] = true;
    }

    let mut entities = Vec::new();
    let mut nil_entities = Vec::new();
    let mut gold = Vec::with_capacity(n);
    for i in 0..n {
        let record = |id: String| Entity {
            id: EntityId::from(id),
            label: labels[i].clone(),
            description: None,
            embedding: Some(to_f32(&prototypes[i])),
            popularity: popularity[i],
        };
        if is_nil[i] {
            let id = format!("n{:05}", nil_entities.len() + 1);
            gold.push(GoldLabel::Nil(NilId::from(id.as_str())));
            nil_entities.push(record(id));
        } else {
            let id = format!("e{:05}", entities.len() + 1);
            gold.push(GoldLabel::Known(EntityId::from(id.as_str())));
            entities.push(record(id));
        }
    }

    let mut drafts = Vec::new();
    for i in 0..n {
        let count = 1 + counts.sample(&mut rng) as usize;
        for _ in 0..count {
            let mut v: Vec<f64> = prototypes[i]
                .iter()
                .map(|&x| x + noise.sample(&mut rng))
                .collect();
            if config.noise_sigma > 0.0 {
                unit(&mut v);
            }
            let surface = surface_variant(&labels[i], &mut rng);
            drafts.push((i, surface, to_f32(&v)));
        }
    }
    drafts.shuffle(&mut rng);
    let mentions = drafts
        .into_iter()
        .enumerate()
        .map(|(j, (i, surface, embedding))| Mention {
            id: MentionId::from(format!("m{:06}", j + 1)),
            surface,
            context: None,
            embedding: Some(embedding),
            gold: Some(gold[i].clone()),
        })
        .collect();

    Ok(SyntheticCorpus {
        mentions,
        entities,
        nil_entities,
    })
}

/// Writes `mentions.jsonl`, `entities.jsonl` and `nil_entities.jsonl`.
pub fn write_synthetic(dir: &Path, corpus: &SyntheticCorpus) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_jsonl(&dir.join("mentions.jsonl"), &corpus.mentions)?;
    write_jsonl(&dir.join("entities.jsonl"), &corpus.entities)?;
    write_jsonl(&dir.join("nil_entities.jsonl"), &corpus.nil_entities)
}
