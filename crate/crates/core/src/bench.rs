//! Runtime scaling measurements over nested mention samples.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::{generate_synthetic, SyntheticConfig};
use crate::model::{Corpus, MentionIdx};
use crate::pipeline::{link, LinkConfig, StageTimings};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRow {
    pub mentions: usize,
    pub graph_secs: f64,
    pub clustering_secs: f64,
    pub resolution_secs: f64,
    pub total_secs: f64,
}

impl BenchRow {
    fn from_timings(mentions: usize, t: &StageTimings) -> Self {
        Self {
            mentions,
            graph_secs: t.graph.as_secs_f64(),
            clustering_secs: t.clustering.as_secs_f64(),
            resolution_secs: t.resolution.as_secs_f64(),
            total_secs: t.total.as_secs_f64(),
        }
    }

    /// Share of total time spent clustering (initial clustering plus
    /// conflict resolution).
    pub fn clustering_share(&self) -> f64 {
        if self.total_secs > 0.0 {
            (self.clustering_secs + self.resolution_secs) / self.total_secs
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        let sse: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
            .sum();
        1.0 - sse / syy
    } else {
        1.0
    };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Generates a synthetic corpus holding at least `min_mentions` mentions.
pub fn bench_corpus(min_mentions: usize, template: &SyntheticConfig) -> Result<Corpus> {
    let mut n_entities = ((min_mentions as f64 / template.mean_mentions) * 1.05).ceil() as usize + 10;
    loop {
        let cfg = SyntheticConfig {
            n_entities,
            ..template.clone()
        };
        let synthetic = generate_synthetic(&cfg)?;
        if synthetic.mentions.len() >= min_mentions {
            return synthetic.corpus();
        }
        n_entities += n_entities / 10 + 1;
    }
}

/// Nested sub-corpora: each sample is a prefix of one seeded shuffle of the
/// mentions, so smaller samples are contained in larger ones. The entity
/// catalog is kept whole.
pub fn nested_samples(corpus: &Corpus, sizes: &[usize], seed: u64) -> Result<Vec<Corpus>> {
    let total = corpus.mentions().len();
    if let Some(&s) = sizes.iter().find(|&&s| s > total) {
        return Err(Error::Config(format!(
            "sample size {s} exceeds the {total} available mentions"
        )));
    }
    let mut order: Vec<MentionIdx> = (0..total).map(MentionIdx::new).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    sizes
        .iter()
        .map(|&s| {
            let mut keep = order[..s].to_vec();
            keep.sort_unstable();
            corpus.with_mentions(&keep)
        })
        .collect()
}

/// Links every sample `repeats` times and keeps the fastest run of each.
pub fn run_bench(
    corpus: &Corpus,
    sizes: &[usize],
    config: &LinkConfig,
    repeats: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(sizes.len());
    for sample in nested_samples(corpus, sizes, seed)? {
        let mut best: Option<StageTimings> = None;
        for _ in 0..repeats.max(1) {
            let t = link(&sample, config, None)?.timings;
            if best.is_none_or(|b| t.total < b.total) {
                best = Some(t);
            }
        }
        let best = best.expect("at least one repeat");
        rows.push(BenchRow::from_timings(sample.mentions().len(), &best));
    }
    Ok(rows)
}

pub fn format_bench(rows: &[BenchRow]) -> String {
    let mut out = String::from("mentions\tgraph_s\tclustering_s\tresolution_s\ttotal_s\tclustering_share\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.4}",
            r.mentions,
            r.graph_secs,
            r.clustering_secs,
            r.resolution_secs,
            r.total_secs,
            r.clustering_share()
        );
    }
    out
}
