//! Clustering-stage growth on nested samples.

use nil_linker::bench::{bench_corpus, run_bench};
use nil_linker::io::SyntheticConfig;
use nil_linker::knn::{Backend, HnswParams, IndexConfig};
use nil_linker::pipeline::LinkConfig;

#[test]
fn doubling_sample_size_grows_clustering_time_under_two_and_a_half_times() {
    let template = SyntheticConfig { noise_sigma: 0.05, ..SyntheticConfig::default() };
    let corpus = bench_corpus(12_000, &template).unwrap();
    let config = LinkConfig {
        index: IndexConfig { backend: Backend::Hnsw(HnswParams::default()), ..IndexConfig::default() },
        ..LinkConfig::default()
    };
    let rows = run_bench(&corpus, &[6_000, 12_000], &config, 3, 1).unwrap();
    let clustering = |i: usize| rows[i].clustering_secs + rows[i].resolution_secs;
    let ratio = clustering(1) / clustering(0);
    assert!(ratio < 2.5, "clustering time grew {ratio:.2}x on doubling: {rows:?}");
}
