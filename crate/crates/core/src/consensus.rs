//! Ensemble aggregation.
//!
//! `r` fast detector runs, each with its own derived seed, are folded into a
//! sparse co-assignment matrix `M`: for every node pair that shares at least
//! one community in a run, the Jaccard similarity of the two nodes'
//! community-label sets is added to `M[x][y]`. After all runs `M` is divided
//! by `r`. Thresholding `M` at `tau` gives the consensus graph, on which a
//! single thorough detection produces the consensus communities.
//!
//! Runs may execute on several threads, but per-run scores are always added
//! in ascending run order, so `M` is bitwise identical for any worker count.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::basedetect::{filter_singletons, CommunitySet, Detector, DetectorConfig, LabelPropagation};
use crate::corpus::{create, read_lines};
use crate::error::{Error, Result};
use crate::graph::{parse_weighted_pair, WeightedGraph};
use crate::seed::mix;

/// Upper bound on rounds when `iterate` is set.
const MAX_CONSENSUS_ROUNDS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub runs: usize,
    pub tau: f64,
    pub master_seed: u64,
    pub fast: DetectorConfig,
    pub thorough: DetectorConfig,
    /// Worker threads for the base runs; 0 means rayon's default.
    pub workers: usize,
    /// Repeat the ensemble on the consensus graph until the consensus
    /// communities stop changing.
    pub iterate: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            runs: 100,
            tau: 0.2,
            master_seed: 0,
            fast: DetectorConfig::fast(0),
            thorough: DetectorConfig::thorough(0),
            workers: 1,
            iterate: false,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Validation("ensemble needs at least one run".into()));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Validation(format!("tau must lie in [0, 1], got {}", self.tau)));
        }
        self.fast.validate()?;
        self.thorough.validate()
    }

    /// Seed of base run `run`.
    pub fn run_seed(&self, run: usize) -> u64 {
        mix(self.master_seed, run as u64)
    }

    /// Seed of the final thorough pass.
    pub fn consensus_seed(&self) -> u64 {
        mix(self.master_seed, u64::MAX)
    }
}

/// Jaccard similarity of two sorted label sets; 0 when both are empty.
pub fn label_jaccard(x: &[u32], y: &[u32]) -> f64 {
    let (mut i, mut j, mut shared) = (0, 0, 0usize);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = x.len() + y.len() - shared;
    if union == 0 {
        0.0
    } else {
        shared as f64 / union as f64
    }
}

/// Nonzero Jaccard co-assignment scores of one base cover.
fn run_scores(base: &CommunitySet, node_count: usize) -> HashMap<(u32, u32), f64> {
    let labels = base.labels_by_node(node_count);
    let mut scores: HashMap<(u32, u32), f64> = HashMap::new();
    for community in base.iter() {
        for (i, &x) in community.iter().enumerate() {
            for &y in &community[i + 1..] {
                scores
                    .entry((x, y))
                    .or_insert_with(|| label_jaccard(&labels[x as usize], &labels[y as usize]));
            }
        }
    }
    scores
}

/// Running, unnormalized sum of per-run co-assignment scores.
#[derive(Debug, Clone)]
pub struct ConsensusAccumulator {
    order: Vec<String>,
    sums: HashMap<(u32, u32), f64>,
    runs: usize,
}

impl ConsensusAccumulator {
    pub fn new(order: Vec<String>) -> Self {
        Self {
            order,
            sums: HashMap::new(),
            runs: 0,
        }
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    /// Sum of scores so far for a pair of node indices.
    pub fn sum(&self, x: u32, y: u32) -> f64 {
        self.sums.get(&(x.min(y), x.max(y))).copied().unwrap_or(0.0)
    }

    /// Add one singleton-filtered base cover.
    pub fn accumulate(&mut self, base: &CommunitySet) -> Result<()> {
        if let Some(max) = base.max_node() {
            if max as usize >= self.order.len() {
                return Err(Error::Domain(format!(
                    "base community references node {max} outside {} nodes",
                    self.order.len()
                )));
            }
        }
        let scores = run_scores(base, self.order.len());
        self.add_scores(scores);
        Ok(())
    }

    fn add_scores(&mut self, scores: HashMap<(u32, u32), f64>) {
        // Per-key additions happen once per run, so key iteration order
        // does not affect the sums.
        for (pair, score) in scores {
            if score > 0.0 {
                *self.sums.entry(pair).or_insert(0.0) += score;
            }
        }
        self.runs += 1;
    }

    /// Divide by the number of runs.
    pub fn finish(self) -> ConsensusMatrix {
        let runs = self.runs.max(1);
        let entries = self.sums.into_iter().map(|(pair, s)| (pair, s / runs as f64));
        ConsensusMatrix::from_entries(self.order, entries, self.runs)
    }
}

/// Sparse symmetric co-assignment matrix over the graph's nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusMatrix {
    order: Vec<String>,
    runs: usize,
    /// Per node, `(other, score)` sorted by `other`; each pair appears in
    /// both rows.
    rows: Vec<Vec<(u32, f64)>>,
    nnz: usize,
}

impl ConsensusMatrix {
    /// Entries outside `(0, 1]` are dropped when zero and clamped otherwise.
    pub fn from_entries(order: Vec<String>, entries: impl IntoIterator<Item = ((u32, u32), f64)>, runs: usize) -> Self {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); order.len()];
        for ((x, y), score) in entries {
            if x == y || score <= 0.0 {
                continue;
            }
            let score = score.min(1.0);
            rows[x as usize].push((y, score));
            rows[y as usize].push((x, score));
        }
        let mut nnz = 0;
        for row in &mut rows {
            row.sort_by_key(|&(o, _)| o);
            row.dedup_by_key(|&mut (o, _)| o);
            nnz += row.len();
        }
        Self {
            order,
            runs,
            rows,
            nnz: nnz / 2,
        }
    }

    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn node_count(&self) -> usize {
        self.order.len()
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    /// Number of stored unordered pairs.
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        let row = &self.rows[x as usize];
        row.binary_search_by_key(&y, |&(o, _)| o).map_or(0.0, |i| row[i].1)
    }

    pub fn row(&self, x: u32) -> &[(u32, f64)] {
        &self.rows[x as usize]
    }

    /// Stored entries `(x, y, score)` with `x < y`, in increasing order.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(x, row)| {
            let x = x as u32;
            row.iter().filter(move |&&(y, _)| y > x).map(move |&(y, s)| (x, y, s))
        })
    }

    /// Graph of entries `>= tau`, over all nodes.
    pub fn threshold_graph(&self, tau: f64) -> WeightedGraph {
        let edges: Vec<(u32, u32, f64)> = self.entries().filter(|&(_, _, s)| s >= tau).collect();
        WeightedGraph::from_indexed(self.order.clone(), edges).expect("matrix entries form a valid graph")
    }

    /// `#r=<runs>` header, then `a<TAB>b<TAB>score` with 6 decimals.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut out = create(path)?;
        let io = |e| Error::io(path, e);
        writeln!(out, "#r={}", self.runs).map_err(io)?;
        for (x, y, s) in self.entries() {
            writeln!(out, "{}\t{}\t{:.6}", self.order[x as usize], self.order[y as usize], s).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    /// Read a matrix written by [`ConsensusMatrix::write_tsv`]; `order` is
    /// the graph's full node list (isolated nodes included).
    pub fn read_tsv(path: &Path, mut order: Vec<String>) -> Result<Self> {
        order.sort();
        order.dedup();
        let index: HashMap<&str, u32> = order.iter().enumerate().map(|(i, n)| (n.as_str(), i as u32)).collect();
        let mut runs = None;
        let mut entries = Vec::new();
        for (line_no, line) in read_lines(path)? {
            if let Some(header) = line.strip_prefix("#r=") {
                let r = header
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(path, line_no, format!("invalid run count `{header}`")))?;
                runs = Some(r);
                continue;
            }
            let (a, b, s) = parse_weighted_pair(path, line_no, &line)?;
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::Validation(format!("{}: unknown node `{id}`", path.display())))
            };
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::parse(path, line_no, format!("score {s} outside [0, 1]")));
            }
            entries.push(((lookup(a)?, lookup(b)?), s));
        }
        let runs = runs.ok_or_else(|| Error::parse(path, 1, "missing `#r=` header"))?;
        Ok(Self::from_entries(order, entries, runs))
    }
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(job),
        Err(_) => job(),
    }
}

/// The `r` base covers, singleton-filtered, in run order.
pub fn base_community_sets(detector: &dyn Detector, graph: &WeightedGraph, config: &EnsembleConfig) -> Result<Vec<CommunitySet>> {
    config.validate()?;
    Ok(with_pool(config.workers, || {
        (0..config.runs)
            .into_par_iter()
            .map(|run| filter_singletons(&detector.detect(graph, &config.fast.with_seed(config.run_seed(run)))))
            .collect()
    }))
}

/// Run the ensemble with a custom detector.
pub fn run_ensemble_with(detector: &dyn Detector, graph: &WeightedGraph, config: &EnsembleConfig) -> Result<ConsensusMatrix> {
    config.validate()?;
    let node_count = graph.node_count();
    let mut acc = ConsensusAccumulator::new(graph.nodes().to_vec());
    let chunk = if config.workers == 0 { rayon::current_num_threads() } else { config.workers }.max(1);
    with_pool(config.workers, || {
        let mut start = 0;
        while start < config.runs {
            let end = (start + chunk).min(config.runs);
            let per_run: Vec<HashMap<(u32, u32), f64>> = (start..end)
                .into_par_iter()
                .map(|run| {
                    let cover = filter_singletons(&detector.detect(graph, &config.fast.with_seed(config.run_seed(run))));
                    run_scores(&cover, node_count)
                })
                .collect();
            for scores in per_run {
                acc.add_scores(scores);
            }
            start = end;
        }
    });
    Ok(acc.finish())
}

/// Run `r` fast detections with the default detector and aggregate them.
pub fn run_ensemble(graph: &WeightedGraph, config: &EnsembleConfig) -> Result<ConsensusMatrix> {
    run_ensemble_with(&LabelPropagation, graph, config)
}

/// Consensus communities with a custom detector.
pub fn consensus_communities_with(
    detector: &dyn Detector,
    matrix: &ConsensusMatrix,
    config: &EnsembleConfig,
) -> Result<CommunitySet> {
    config.validate()?;
    let thorough = config.thorough.with_seed(config.consensus_seed());
    let mut graph = matrix.threshold_graph(config.tau);
    let mut communities = filter_singletons(&detector.detect(&graph, &thorough));
    if config.iterate {
        for _ in 1..MAX_CONSENSUS_ROUNDS {
            let next_matrix = run_ensemble_with(detector, &graph, config)?;
            graph = next_matrix.threshold_graph(config.tau);
            let next = filter_singletons(&detector.detect(&graph, &thorough));
            if next == communities {
                break;
            }
            communities = next;
        }
    }
    Ok(communities)
}

/// Threshold `matrix` at `tau` and run a thorough detection on the result.
pub fn consensus_communities(matrix: &ConsensusMatrix, config: &EnsembleConfig) -> Result<CommunitySet> {
    consensus_communities_with(&LabelPropagation, matrix, config)
}

/// Symmetric best-match Jaccard agreement between two covers, in `[0, 1]`.
/// Both empty counts as full agreement; one empty as none.
pub fn cover_agreement(a: &CommunitySet, b: &CommunitySet) -> f64 {
    fn one_way(from: &CommunitySet, to: &CommunitySet) -> f64 {
        let total: f64 = from
            .iter()
            .map(|c| to.iter().map(|d| label_jaccard(c, d)).fold(0.0, f64::max))
            .sum();
        total / from.len() as f64
    }
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => 0.5 * (one_way(a, b) + one_way(b, a)),
    }
}
