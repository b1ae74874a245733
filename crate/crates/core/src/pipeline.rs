//! End-to-end linking: affinity graph, then one of the four linkers, with
//! wall-clock time per stage.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::baselines::{
    bottom_up_clustering, exact_match, majority_clustering, BottomUpConfig, MajorityConfig,
};
use crate::cluster::{init_clusters, resolve_conflicts, run_linker_with, ResolutionTrace};
use crate::error::{Error, Result};
use crate::eval::{evaluate_against, EvalMode, EvalReport, GoldStandard};
use crate::graph::{AffinityEdge, AffinityGraph};
use crate::knn::{build_graph, load_graph_for_corpus, IndexConfig};
use crate::model::{Clustering, Corpus, Thresholds};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Top-down clustering with transitive-affinity conflict resolution.
    #[default]
    #[value(name = "topdown")]
    #[serde(rename = "topdown")]
    TopDown,
    /// Thresholded components labelled by majority vote.
    Majority,
    /// Greedy merging that never joins two entities.
    #[value(name = "bottomup")]
    #[serde(rename = "bottomup")]
    BottomUp,
    /// Normalized surface equals entity label; needs no embeddings.
    #[value(name = "exactmatch")]
    #[serde(rename = "exactmatch")]
    ExactMatch,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::TopDown,
        Algorithm::Majority,
        Algorithm::BottomUp,
        Algorithm::ExactMatch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::TopDown => "topdown",
            Algorithm::Majority => "majority",
            Algorithm::BottomUp => "bottomup",
            Algorithm::ExactMatch => "exactmatch",
        }
    }

    pub fn needs_graph(self) -> bool {
        self != Algorithm::ExactMatch
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LinkConfig {
    pub algorithm: Algorithm,
    pub thresholds: Thresholds,
    pub majority: MajorityConfig,
    pub bottom_up: BottomUpConfig,
    pub index: IndexConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub graph: Duration,
    /// Initial clustering (the whole linker for the baselines).
    pub clustering: Duration,
    /// Conflict resolution; zero for the baselines.
    pub resolution: Duration,
    pub total: Duration,
}

#[derive(Clone, Debug)]
pub struct LinkOutput {
    pub clustering: Clustering,
    /// Present for the top-down linker only.
    pub trace: Option<ResolutionTrace>,
    pub graph: Option<AffinityGraph>,
    pub timings: StageTimings,
}

/// Links `corpus`. The affinity graph comes from `edges` when given and from
/// the corpus embeddings otherwise.
pub fn link(corpus: &Corpus, config: &LinkConfig, edges: Option<&[AffinityEdge]>) -> Result<LinkOutput> {
    let start = Instant::now();
    let mut timings = StageTimings::default();

    let graph = if config.algorithm.needs_graph() {
        let t = Instant::now();
        let graph = match edges {
            Some(edges) => load_graph_for_corpus(corpus, edges, config.index.k)?,
            None => {
                check_embeddings(corpus)?;
                build_graph(corpus, &config.index)?
            }
        };
        timings.graph = t.elapsed();
        Some(graph)
    } else {
        None
    };

    let t = Instant::now();
    let (clustering, trace) = if config.algorithm == Algorithm::TopDown {
        let g = graph.as_ref().expect("graph built above");
        config.thresholds.validate()?;
        let initial = init_clusters(g, &config.thresholds);
        timings.clustering = t.elapsed();
        let t = Instant::now();
        let (clustering, trace) =
            resolve_conflicts(&initial, g, &config.thresholds, config.index.execution)?;
        timings.resolution = t.elapsed();
        (clustering, Some(trace))
    } else {
        let out = run_algorithm(corpus, graph.as_ref(), config)?;
        timings.clustering = t.elapsed();
        out
    };
    timings.total = start.elapsed();

    Ok(LinkOutput {
        clustering,
        trace,
        graph,
        timings,
    })
}

/// Runs the configured linker on a prebuilt graph (ignored by exact match).
pub fn run_algorithm(
    corpus: &Corpus,
    graph: Option<&AffinityGraph>,
    config: &LinkConfig,
) -> Result<(Clustering, Option<ResolutionTrace>)> {
    let need = || {
        graph.ok_or_else(|| Error::Config(format!("{} needs an affinity graph", config.algorithm.name())))
    };
    Ok(match config.algorithm {
        Algorithm::TopDown => {
            let out = run_linker_with(need()?, &config.thresholds, config.index.execution)?;
            (out.clustering, Some(out.trace))
        }
        Algorithm::Majority => (majority_clustering(need()?, &config.majority)?, None),
        Algorithm::BottomUp => (bottom_up_clustering(need()?, &config.bottom_up)?, None),
        Algorithm::ExactMatch => (exact_match(corpus)?, None),
    })
}

/// A tunable threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    TauM,
    TauE,
    TauA,
    Tau,
    MajorityThreshold,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::TauM => "tau_m",
            SweepParam::TauE => "tau_e",
            SweepParam::TauA => "tau_a",
            SweepParam::Tau => "tau",
            SweepParam::MajorityThreshold => "majority_threshold",
        }
    }

    /// Parameters that affect `algorithm`.
    pub fn for_algorithm(algorithm: Algorithm) -> &'static [SweepParam] {
        match algorithm {
            Algorithm::TopDown => &[SweepParam::TauM, SweepParam::TauE, SweepParam::TauA],
            Algorithm::Majority => &[
                SweepParam::TauM,
                SweepParam::TauE,
                SweepParam::MajorityThreshold,
            ],
            Algorithm::BottomUp => &[SweepParam::Tau],
            Algorithm::ExactMatch => &[],
        }
    }

    fn apply(self, config: &mut LinkConfig, value: f64) {
        match (self, config.algorithm) {
            (SweepParam::TauM, Algorithm::Majority) => config.majority.tau_m = value,
            (SweepParam::TauE, Algorithm::Majority) => config.majority.tau_e = value,
            (SweepParam::TauM, _) => config.thresholds.tau_m = value,
            (SweepParam::TauE, _) => config.thresholds.tau_e = value,
            (SweepParam::TauA, _) => config.thresholds.tau_a = value,
            (SweepParam::Tau, _) => config.bottom_up.tau = value,
            (SweepParam::MajorityThreshold, _) => config.majority.majority_threshold = value,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub values: Vec<(SweepParam, f64)>,
    pub report: EvalReport,
}

/// Evaluates every point of the Cartesian product of `grid`, in
/// lexicographic order of the axes. An empty grid yields one row for `base`.
pub fn sweep(
    corpus: &Corpus,
    graph: Option<&AffinityGraph>,
    base: &LinkConfig,
    grid: &[(SweepParam, Vec<f64>)],
    mode: EvalMode,
) -> Result<Vec<SweepRow>> {
    if let Some((p, _)) = grid.iter().find(|(_, values)| values.is_empty()) {
        return Err(Error::Config(format!("no values given for {}", p.name())));
    }
    let gold = GoldStandard::from_corpus(corpus, mode)?;
    let total: usize = grid.iter().map(|(_, v)| v.len()).product();
    let mut rows = Vec::with_capacity(total);
    for point in 0..total {
        let mut config = *base;
        let mut values = Vec::with_capacity(grid.len());
        let mut rest = point;
        for (param, axis) in grid.iter().rev() {
            let v = axis[rest % axis.len()];
            rest /= axis.len();
            param.apply(&mut config, v);
            values.push((*param, v));
        }
        values.reverse();
        let (clustering, _) = run_algorithm(corpus, graph, &config)?;
        let report = evaluate_against(&gold, &clustering, mode)?;
        rows.push(SweepRow { values, report });
    }
    Ok(rows)
}

/// Index of the row with the highest micro F1; ties keep the earliest.
pub fn best_row(rows: &[SweepRow]) -> Option<usize> {
    (0..rows.len()).reduce(|best, i| {
        if rows[i].report.micro.f1 > rows[best].report.micro.f1 {
            i
        } else {
            best
        }
    })
}

fn check_embeddings(corpus: &Corpus) -> Result<()> {
    let missing = corpus
        .mentions()
        .iter()
        .find(|m| m.embedding.is_none())
        .map(|m| m.id.to_string())
        .or_else(|| {
            corpus
                .entities()
                .iter()
                .find(|e| e.embedding.is_none())
                .map(|e| e.id.to_string())
        });
    match missing {
        Some(id) => Err(Error::Config(format!(
            "record `{id}` has no embedding; supply an edge file instead"
        ))),
        None => Ok(()),
    }
}
