//! Fixtures, random instance generators and brute-force reference
//! implementations shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rand_chacha::ChaCha8Rng;

use nil_linker::cluster::{init_clusters, run_linker_with, ClusterGraph, LinkResult};
use nil_linker::eval::{GoldClass, GoldStandard};
use nil_linker::knn::load_graph_with_ids;
use nil_linker::{
    AffinityEdge, AffinityGraph, Cluster, Clustering, Corpus, Entity, EntityIdx, Execution,
    GoldLabel, Mention, MentionIdx, NilId, Prediction, Thresholds,
};

// ---------------------------------------------------------------------------
// Worked example: ten mentions, four entities.

pub const WORKED_EXAMPLE_TAU: f64 = 0.75;

pub fn worked_example_thresholds() -> Thresholds {
    Thresholds::new(WORKED_EXAMPLE_TAU, WORKED_EXAMPLE_TAU, WORKED_EXAMPLE_TAU).unwrap()
}

pub fn worked_example_edges() -> Vec<AffinityEdge> {
    vec![
        // first group
        AffinityEdge::mention("m1", "m2", 0.9),
        AffinityEdge::mention("m1", "m3", 0.8),
        AffinityEdge::mention("m3", "m4", 0.9),
        AffinityEdge::entity("m1", "e_a", 0.9),
        AffinityEdge::entity("m2", "e_a", 0.85),
        AffinityEdge::entity("m3", "e_d", 0.6),
        // second group
        AffinityEdge::mention("m5", "m6", 0.8),
        AffinityEdge::mention("m6", "m7", 0.9),
        AffinityEdge::entity("m6", "e_b", 0.9),
        AffinityEdge::entity("m7", "e_c", 0.8),
        AffinityEdge::entity("m5", "e_c", 0.95),
        // third group
        AffinityEdge::mention("m8", "m9", 0.9),
        AffinityEdge::mention("m9", "m10", 0.88),
        AffinityEdge::entity("m8", "e_d", 0.7),
        // weak links between groups
        AffinityEdge::mention("m4", "m8", 0.6),
        AffinityEdge::mention("m7", "m8", 0.5),
    ]
}

/// Gold labels differ from the linker output in two places: `m7` truly
/// refers to `e_c`, and `m10` is a NIL entity of its own.
pub fn worked_example_corpus() -> Corpus {
    let gold = |m: &str| -> GoldLabel {
        match m {
            "m1" | "m2" => GoldLabel::Known("e_a".into()),
            "m5" | "m7" => GoldLabel::Known("e_c".into()),
            "m6" => GoldLabel::Known("e_b".into()),
            "m3" | "m4" => GoldLabel::Nil("n1".into()),
            "m8" | "m9" => GoldLabel::Nil("n2".into()),
            _ => GoldLabel::Nil("n3".into()),
        }
    };
    let mentions = (1..=10)
        .map(|i| {
            let id = format!("m{i}");
            Mention {
                gold: Some(gold(&id)),
                id: id.as_str().into(),
                surface: format!("surface {i}"),
                context: None,
                embedding: None,
            }
        })
        .collect();
    let entities = ["e_a", "e_b", "e_c", "e_d"]
        .iter()
        .enumerate()
        .map(|(i, id)| Entity {
            id: (*id).into(),
            label: format!("label {i}"),
            description: None,
            embedding: None,
            popularity: 1,
        })
        .collect();
    Corpus::new(mentions, entities).unwrap()
}

pub fn worked_example_graph() -> AffinityGraph {
    let corpus = worked_example_corpus();
    nil_linker::knn::load_graph_for_corpus(&corpus, &worked_example_edges(), 4).unwrap()
}

/// Expected partition by mention id, each group with its entity.
pub fn worked_example_expected() -> Vec<(Vec<&'static str>, Option<&'static str>)> {
    vec![
        (vec!["m1", "m2"], Some("e_a")),
        (vec!["m3", "m4"], None),
        (vec!["m6", "m7"], Some("e_b")),
        (vec!["m5"], Some("e_c")),
        (vec!["m10", "m8", "m9"], None),
    ]
}

/// The clustering as a set of `(sorted member ids, entity id)` pairs.
pub fn partition_by_id(
    clustering: &Clustering,
    graph: &AffinityGraph,
) -> BTreeSet<(Vec<String>, Option<String>)> {
    clustering
        .clusters()
        .iter()
        .map(|c| {
            let mut ids: Vec<String> = c
                .mentions
                .iter()
                .map(|&m| graph.mention_id(m).to_string())
                .collect();
            ids.sort();
            (ids, c.entity.map(|e| graph.entity_id(e).to_string()))
        })
        .collect()
}

pub fn expected_partition() -> BTreeSet<(Vec<String>, Option<String>)> {
    worked_example_expected()
        .into_iter()
        .map(|(ms, e)| {
            let mut ms: Vec<String> = ms.into_iter().map(String::from).collect();
            ms.sort();
            (ms, e.map(String::from))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Transitive affinity by exhaustive path enumeration.

/// Largest product over simple paths `m ~ e` whose interior nodes are
/// mentions, found by exhaustive search over (visited set, endpoint) states.
/// Edges are undirected; 0 if no path exists. Exponential in the mention
/// count, so only for small graphs.
pub fn brute_force_transitive(
    mention_count: usize,
    mention_edges: &[(usize, usize, f64)],
    entity_edges: &[(usize, usize, f64)],
    m: usize,
    e: usize,
) -> f64 {
    let n = mention_count;
    assert!(n <= 16, "exhaustive search is limited to 16 mentions");
    let mut w = vec![vec![0.0f64; n]; n];
    for &(a, b, x) in mention_edges {
        w[a][b] = w[a][b].max(x);
        w[b][a] = w[b][a].max(x);
    }
    let mut to_entity = vec![0.0f64; n];
    for &(x, f, s) in entity_edges {
        if f == e {
            to_entity[x] = to_entity[x].max(s);
        }
    }
    // best[set][v]: largest product of a simple path from m that visits
    // exactly `set` and ends at v.
    let mut best = vec![vec![0.0f64; n]; 1 << n];
    best[1 << m][m] = 1.0;
    let mut answer = 0.0f64;
    for set in 0..(1usize << n) {
        for v in 0..n {
            let p = best[set][v];
            if p == 0.0 {
                continue;
            }
            answer = answer.max(p * to_entity[v]);
            for u in 0..n {
                if set & (1 << u) == 0 && w[v][u] > 0.0 {
                    let next = &mut best[set | (1 << u)][u];
                    *next = next.max(p * w[v][u]);
                }
            }
        }
    }
    answer
}

/// All-pairs maximum path product among mentions by Floyd-Warshall, then
/// one final hop to each entity. Since weights are at most 1, the best walk
/// is always a simple path.
pub struct ProductClosure {
    best: Vec<Vec<f64>>,
    to_entity: Vec<Vec<f64>>,
}

impl ProductClosure {
    pub fn new(
        mentions: usize,
        entities: usize,
        mention_edges: &[(usize, usize, f64)],
        entity_edges: &[(usize, usize, f64)],
    ) -> Self {
        let mut best = vec![vec![0.0f64; mentions]; mentions];
        for (i, row) in best.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for &(a, b, w) in mention_edges {
            best[a][b] = best[a][b].max(w);
            best[b][a] = best[b][a].max(w);
        }
        for k in 0..mentions {
            for i in 0..mentions {
                for j in 0..mentions {
                    let via = best[i][k] * best[k][j];
                    if via > best[i][j] {
                        best[i][j] = via;
                    }
                }
            }
        }
        let mut to_entity = vec![vec![0.0f64; entities]; mentions];
        for &(m, e, w) in entity_edges {
            to_entity[m][e] = to_entity[m][e].max(w);
        }
        Self { best, to_entity }
    }

    pub fn value(&self, m: usize, e: usize) -> f64 {
        (0..self.best.len())
            .map(|x| self.best[m][x] * self.to_entity[x][e])
            .fold(0.0, f64::max)
    }
}

pub struct SmallGraph {
    pub mentions: usize,
    pub entities: usize,
    pub mention_edges: Vec<(usize, usize, f64)>,
    pub entity_edges: Vec<(usize, usize, f64)>,
}

/// At most 12 nodes, random weights in (0, 1], no parallel edges.
pub fn random_small_graph(rng: &mut ChaCha8Rng) -> SmallGraph {
    let total = rng.random_range(2..=12);
    let entities = rng.random_range(1..total);
    let mentions = total - entities;
    let density: f64 = rng.random_range(0.2..0.9);
    let weight = |rng: &mut ChaCha8Rng| 1.0 - rng.random::<f64>();
    let mut mention_edges = Vec::new();
    for a in 0..mentions {
        for b in a + 1..mentions {
            if rng.random_bool(density) {
                mention_edges.push((a, b, weight(rng)));
            }
        }
    }
    let mut entity_edges = Vec::new();
    for m in 0..mentions {
        for e in 0..entities {
            if rng.random_bool(density) {
                entity_edges.push((m, e, weight(rng)));
            }
        }
    }
    SmallGraph {
        mentions,
        entities,
        mention_edges,
        entity_edges,
    }
}

/// Largest gap between Dijkstra and exhaustive enumeration on one graph.
pub fn transitive_discrepancy(g: &SmallGraph) -> f64 {
    let cg = ClusterGraph::from_edges(g.mentions, g.entities, &g.mention_edges, &g.entity_edges, 0.0)
        .unwrap();
    let mut worst = 0.0f64;
    for e in 0..g.entities {
        let reach = cg.reach_from(e);
        for m in 0..g.mentions {
            let expected = brute_force_transitive(g.mentions, &g.mention_edges, &g.entity_edges, m, e);
            worst = worst.max((reach.value(m) - expected).abs());
            let via_api = cg
                .transitive_affinity(MentionIdx::new(m), EntityIdx::new(e))
                .unwrap();
            worst = worst.max((via_api.value - expected).abs());
            // The witness path must realize the value.
            if expected > 0.0 {
                let product = path_product(g, &via_api.path);
                worst = worst.max((product - expected).abs());
            } else if !via_api.path.is_empty() {
                return f64::INFINITY;
            }
        }
    }
    worst
}

fn path_product(g: &SmallGraph, path: &[nil_linker::Node]) -> f64 {
    use nil_linker::Node;
    let mut product = 1.0;
    for pair in path.windows(2) {
        let w = match (pair[0], pair[1]) {
            (Node::Mention(a), Node::Mention(b)) => g
                .mention_edges
                .iter()
                .find(|&&(x, y, _)| (x, y) == (a.index(), b.index()) || (y, x) == (a.index(), b.index()))
                .map(|t| t.2),
            (Node::Mention(a), Node::Entity(e)) => g
                .entity_edges
                .iter()
                .find(|&&(x, f, _)| x == a.index() && f == e.index())
                .map(|t| t.2),
            _ => None,
        };
        match w {
            Some(w) => product *= w,
            None => return f64::NAN,
        }
    }
    product
}

// ---------------------------------------------------------------------------
// Assignment by exhaustive permutation search.

/// Maximum total weight of a one-to-one row/column matching.
pub fn brute_force_assignment(weights: &[Vec<u64>]) -> u64 {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = 0;
    permute(&mut perm, 0, &mut |p| {
        let total: u64 = (0..rows)
            .filter(|&i| p[i] < cols)
            .map(|i| weights[i][p[i]])
            .sum();
        best = best.max(total);
    });
    best
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

pub fn random_overlap_matrix(rng: &mut ChaCha8Rng) -> Vec<Vec<u64>> {
    let rows = rng.random_range(1..=7);
    let cols = rng.random_range(1..=7);
    let sparsity: f64 = rng.random_range(0.2..1.0);
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.random_bool(sparsity) { rng.random_range(1..=6) } else { 0 })
                .collect()
        })
        .collect()
}

/// A clustering and gold standard whose NIL overlap matrix is `weights`:
/// cluster `i` holds `weights[i][j]` mentions of gold NIL class `j`, plus
/// one known-gold mention so that no cluster is empty.
pub fn overlap_instance(weights: &[Vec<u64>]) -> (Clustering, GoldStandard) {
    let cols = weights[0].len();
    let mut clusters = Vec::new();
    let mut classes = Vec::new();
    for row in weights {
        let mut members = Vec::new();
        for (j, &w) in row.iter().enumerate() {
            for _ in 0..w {
                members.push(MentionIdx::new(classes.len()));
                classes.push(GoldClass::Nil(j as u32));
            }
        }
        members.push(MentionIdx::new(classes.len()));
        classes.push(GoldClass::Known(EntityIdx::new(0)));
        clusters.push(Cluster {
            mentions: members,
            entity: None,
        });
    }
    let nil_ids = (0..cols).map(|j| NilId::from(format!("n{j}"))).collect();
    let n = classes.len();
    (
        Clustering::new(n, clusters).unwrap(),
        GoldStandard::new(classes, nil_ids, 1),
    )
}

// ---------------------------------------------------------------------------
// Random affinity graphs and linker invariants.

pub struct RandomInstance {
    pub graph: AffinityGraph,
    pub thresholds: Thresholds,
}

/// Random graph with scores concentrated near the thresholds so that
/// clusters, conflicts and NIL groups all occur.
pub fn random_instance(rng: &mut ChaCha8Rng) -> RandomInstance {
    let nm = rng.random_range(1..=30);
    let ne = rng.random_range(0..=6);
    let k = rng.random_range(1..=6);
    let mids: Vec<_> = (0..nm).map(|i| format!("m{i:02}").into()).collect();
    let eids: Vec<_> = (0..ne).map(|i| format!("e{i}").into()).collect();
    let score = |rng: &mut ChaCha8Rng| -> f64 {
        // Quantized so that ties occur.
        (rng.random_range(1..=40) as f64) / 40.0
    };
    let mut edges = Vec::new();
    for a in 0..nm {
        let mut targets: Vec<usize> = (0..nm).filter(|&b| b != a).collect();
        targets.shuffle(rng);
        for &b in targets.iter().take(k) {
            edges.push(AffinityEdge::mention(&format!("m{a:02}"), &format!("m{b:02}"), score(rng)));
        }
        let mut ents: Vec<usize> = (0..ne).collect();
        ents.shuffle(rng);
        for &e in ents.iter().take(rng.random_range(0..=k)) {
            edges.push(AffinityEdge::entity(&format!("m{a:02}"), &format!("e{e}"), score(rng)));
        }
    }
    let graph = load_graph_with_ids(mids, eids, &edges, k).unwrap();
    let mut t = || rng.random_range(0.4..0.95);
    let thresholds = Thresholds::new(t(), t(), t()).unwrap();
    RandomInstance { graph, thresholds }
}

/// Connected components of the thresholded mention graph, by breadth-first
/// search over an explicit edge scan.
pub fn bfs_components(graph: &AffinityGraph, tau: f64) -> Vec<BTreeSet<usize>> {
    let n = graph.mention_count();
    let mut adj = vec![Vec::new(); n];
    for (a, list) in adj.iter_mut().enumerate() {
        for b in 0..n {
            if a != b && graph.mention_affinity(MentionIdx::new(a), MentionIdx::new(b)) > tau {
                list.push(b);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(u) = queue.pop_front() {
            comp.insert(u);
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Components of the thresholded mention graph induced on `members`, by
/// repeated flooding.
pub fn components_among(graph: &AffinityGraph, members: &[usize], tau: f64) -> Vec<BTreeSet<usize>> {
    let mut left: BTreeSet<usize> = members.iter().copied().collect();
    let mut out = Vec::new();
    while let Some(&s) = left.iter().next() {
        let mut comp = BTreeSet::from([s]);
        left.remove(&s);
        let mut grew = true;
        while grew {
            grew = false;
            let joined: Vec<usize> = left
                .iter()
                .copied()
                .filter(|&x| {
                    comp.iter().any(|&y| {
                        graph.mention_affinity(MentionIdx::new(x), MentionIdx::new(y)) > tau
                    })
                })
                .collect();
            for x in joined {
                left.remove(&x);
                comp.insert(x);
                grew = true;
            }
        }
        out.push(comp);
    }
    out
}

/// Checks every structural guarantee of the top-down linker on one instance.
pub fn check_linker_invariants(inst: &RandomInstance) -> Result<(), String> {
    let g = &inst.graph;
    let t = &inst.thresholds;
    let seq = run_linker_with(g, t, Execution::Sequential).map_err(|e| e.to_string())?;
    let par = run_linker_with(g, t, Execution::Parallel).map_err(|e| e.to_string())?;
    let again = run_linker_with(g, t, Execution::Parallel).map_err(|e| e.to_string())?;
    if seq != par || par != again {
        return Err("linker output depends on execution".into());
    }
    let LinkResult { clustering, trace } = seq;

    // Initial groups equal the BFS components.
    let initial = init_clusters(g, t);
    let groups: BTreeSet<BTreeSet<usize>> = initial
        .clusters
        .iter()
        .map(|c| c.mentions.iter().map(|m| m.index()).collect())
        .collect();
    let oracle: BTreeSet<BTreeSet<usize>> = bfs_components(g, t.tau_m).into_iter().collect();
    if groups != oracle {
        return Err("initial clusters differ from BFS components".into());
    }
    let group_of: HashMap<usize, usize> = initial
        .clusters
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.mentions.iter().map(move |m| (m.index(), i)))
        .collect();

    // Refinement: every final cluster lies inside one initial group.
    for c in clustering.clusters() {
        let owner = group_of[&c.mentions[0].index()];
        if c.mentions.iter().any(|m| group_of[&m.index()] != owner) {
            return Err("final cluster spans two initial groups".into());
        }
        if let Some(e) = c.entity {
            if !initial.clusters[owner].candidates.contains(&e) {
                return Err("cluster entity is not a candidate of its group".into());
            }
        }
    }

    // Soundness of every assignment against exhaustive path search.
    for group in &initial.clusters {
        let local: HashMap<usize, usize> = group
            .mentions
            .iter()
            .enumerate()
            .map(|(i, m)| (m.index(), i))
            .collect();
        let mut medges = Vec::new();
        let mut eedges = Vec::new();
        for (i, &m) in group.mentions.iter().enumerate() {
            for (j, &n) in group.mentions.iter().enumerate().skip(i + 1) {
                let s = g.mention_affinity(m, n);
                if s > t.tau_a {
                    medges.push((i, j, s));
                }
            }
            for (j, &e) in group.candidates.iter().enumerate() {
                let s = g.entity_affinity(m, e);
                if s > t.tau_a {
                    eedges.push((i, j, s));
                }
            }
        }
        let closure = ProductClosure::new(group.mentions.len(), group.candidates.len(), &medges, &eedges);
        for &m in &group.mentions {
            let i = local[&m.index()];
            let values: Vec<f64> = (0..group.candidates.len())
                .map(|j| closure.value(i, j))
                .collect();
            let best = values.iter().copied().fold(0.0, f64::max);
            let r = trace.get(m).ok_or("mention missing from trace")?;
            match clustering.prediction(m) {
                Prediction::Entity(e) => {
                    let j = group.candidates.binary_search(&e).map_err(|_| "not a candidate")?;
                    if values[j] <= t.tau_a {
                        return Err(format!("linked mention has affinity {} <= tau_a", values[j]));
                    }
                    if (values[j] - best).abs() > 1e-9 {
                        return Err("mention not linked to its best entity".into());
                    }
                    if (r.phi_star - best).abs() > 1e-9 || r.entity != Some(e) {
                        return Err("trace disagrees with assignment".into());
                    }
                }
                Prediction::NilCluster(_) => {
                    if best > t.tau_a {
                        return Err(format!("NIL mention has affinity {best} > tau_a"));
                    }
                    if r.entity.is_some() {
                        return Err("trace links a NIL mention".into());
                    }
                }
                Prediction::Abstain => return Err("top-down linker abstained".into()),
            }
        }
    }

    // NIL clusters are exactly the tau_m components among each group's NIL
    // mentions.
    let nil_clusters: BTreeSet<BTreeSet<usize>> = clustering
        .clusters()
        .iter()
        .filter(|c| c.entity.is_none())
        .map(|c| c.mentions.iter().map(|m| m.index()).collect())
        .collect();
    let mut expected = BTreeSet::new();
    for group in &initial.clusters {
        let nil: Vec<usize> = group
            .mentions
            .iter()
            .filter(|&&m| matches!(clustering.prediction(m), Prediction::NilCluster(_)))
            .map(|m| m.index())
            .collect();
        expected.extend(components_among(g, &nil, t.tau_m));
    }
    if nil_clusters != expected {
        return Err("NIL clusters differ from components of the NIL mentions".into());
    }
    Ok(())
}

/// A random clustering and gold standard over the same mentions.
pub fn random_labelled_clustering(rng: &mut ChaCha8Rng) -> (Clustering, GoldStandard) {
    let n = rng.random_range(1..=40);
    let entities = rng.random_range(1..=5);
    let nil_classes = rng.random_range(1..=5);
    let classes: Vec<GoldClass> = (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                GoldClass::Known(EntityIdx::new(rng.random_range(0..entities)))
            } else {
                GoldClass::Nil(rng.random_range(0..nil_classes) as u32)
            }
        })
        .collect();
    let cluster_count = rng.random_range(1..=n);
    let mut members = vec![Vec::new(); cluster_count];
    for i in 0..n {
        let c = if i < cluster_count { i } else { rng.random_range(0..cluster_count) };
        members[c].push(MentionIdx::new(i));
    }
    let clusters = members
        .into_iter()
        .map(|mentions| Cluster {
            mentions,
            entity: rng
                .random_bool(0.5)
                .then(|| EntityIdx::new(rng.random_range(0..entities))),
        })
        .collect();
    let nil_aware = rng.random_bool(0.8);
    let clustering = if nil_aware {
        Clustering::new(n, clusters).unwrap()
    } else {
        Clustering::without_nil(n, clusters).unwrap()
    };
    let nil_ids = (0..nil_classes).map(|j| NilId::from(format!("n{j}"))).collect();
    (clustering, GoldStandard::new(classes, nil_ids, entities))
}

pub fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

// ---------------------------------------------------------------------------
// Embedded corpora and the all-pairs neighbour oracle.

/// Standard normal embeddings for every mention and entity.
pub fn random_corpus(rng: &mut ChaCha8Rng, mentions: usize, entities: usize, dim: usize) -> Corpus {
    let mut vector = || -> Vec<f32> { (0..dim).map(|_| StandardNormal.sample(rng)).collect() };
    let ms = (0..mentions)
        .map(|i| Mention {
            id: format!("m{i:05}").into(),
            surface: "s".into(),
            context: None,
            embedding: Some(vector()),
            gold: None,
        })
        .collect();
    let es = (0..entities)
        .map(|i| Entity {
            id: format!("e{i:05}").into(),
            label: "l".into(),
            description: None,
            embedding: Some(vector()),
            popularity: 0,
        })
        .collect();
    Corpus::new(ms, es).unwrap()
}

/// All-pairs top-k with scores computed from the raw vectors.
pub fn all_pairs_top_k(
    query: &[f32],
    base: &[Option<Vec<f32>>],
    k: usize,
    exclude: Option<usize>,
) -> Vec<(usize, f64)> {
    let norm = |v: &[f32]| v.iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt();
    let q = norm(query);
    let mut scored: Vec<(usize, f64)> = base
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != exclude)
        .map(|(i, v)| {
            let v = v.as_ref().unwrap();
            let dot: f64 = query.iter().zip(v).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum();
            (i, (dot / (q * norm(v)) + 1.0) / 2.0)
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}
