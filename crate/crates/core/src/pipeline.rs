//! End-to-end orchestration.
//!
//! Every stage reads its inputs from the artifacts of earlier stages in the
//! output directory and writes its own, so any stage can be rerun or
//! resumed on its own and the full pipeline produces exactly what a
//! stage-by-stage run would.
//!
//! | stage         | reads                                   | writes               |
//! |---------------|-----------------------------------------|----------------------|
//! | `build-graph` | corpus                                  | `graph.tsv`, `nodes.txt` |
//! | `ensemble`    | `graph.tsv`, `nodes.txt`                | `consensus.tsv`      |
//! | `consensus`   | `nodes.txt`, `consensus.tsv`            | `communities.json`   |
//! | `stability`   | `nodes.txt`, `consensus.tsv`, `communities.json` | `stability.tsv` |
//! | `label`       | corpus, `communities.json`              | `labels.json`        |
//! | `members`     | corpus, `communities.json`, `stability.tsv`, `labels.json` | `users.json` |
//! | `evaluate`    | `users.json`, ground truth              | `eval.tsv`           |

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::basedetect::{CommunitySet, DetectorConfig};
use crate::consensus::{consensus_communities, run_ensemble, ConsensusMatrix, EnsembleConfig};
use crate::corpus::{create, filter_lists, load_corpus, load_ground_truth, load_id_set, MembershipCorpus};
use crate::error::{Error, Result};
use crate::graph::{read_node_list, WeightedGraph};
use crate::labeling::{CommunityLabels, LabelingConfig, TermSpace};
use crate::listgraph::{build_list_graph, GraphBuildConfig};
use crate::membership::{derive_members, evaluate, evaluate_unique, EvalRow, UserCommunityReport};
use crate::stability::{rank_communities, read_ranking, write_ranking, StabilityRow};

pub mod artifacts {
    pub const GRAPH: &str = "graph.tsv";
    pub const NODES: &str = "nodes.txt";
    pub const CONSENSUS: &str = "consensus.tsv";
    pub const COMMUNITIES: &str = "communities.json";
    pub const STABILITY: &str = "stability.tsv";
    pub const LABELS: &str = "labels.json";
    pub const USERS: &str = "users.json";
    pub const EVAL: &str = "eval.tsv";
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub rho: f64,
    pub runs: usize,
    pub tau: f64,
    pub mu: f64,
    pub master_seed: u64,
    /// Ensemble worker threads; 0 uses every core.
    pub workers: usize,
    pub top_k: usize,
    pub draws: usize,
    pub fast_iterations: usize,
    pub thorough_iterations: usize,
    pub overlap_threshold: f64,
    pub iterate: bool,
    pub unique_match: bool,
    pub min_list_size: usize,
    pub min_core_members: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            rho: 6.0,
            runs: 100,
            tau: 0.2,
            mu: 0.1,
            master_seed: 0,
            workers: 0,
            top_k: 3,
            draws: crate::stability::DEFAULT_DRAWS,
            fast_iterations: DetectorConfig::FAST_ITERATIONS,
            thorough_iterations: DetectorConfig::THOROUGH_ITERATIONS,
            overlap_threshold: DetectorConfig::OVERLAP_THRESHOLD,
            iterate: false,
            unique_match: false,
            min_list_size: 1,
            min_core_members: 0,
        }
    }
}

/// Optional per-key values, as given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub rho: Option<f64>,
    pub runs: Option<usize>,
    pub tau: Option<f64>,
    pub mu: Option<f64>,
    pub master_seed: Option<u64>,
    pub workers: Option<usize>,
    pub top_k: Option<usize>,
    pub draws: Option<usize>,
    pub fast_iterations: Option<usize>,
    pub thorough_iterations: Option<usize>,
    pub overlap_threshold: Option<f64>,
    pub iterate: Option<bool>,
    pub unique_match: Option<bool>,
    pub min_list_size: Option<usize>,
    pub min_core_members: Option<usize>,
}

macro_rules! overlay {
    ($cfg:expr, $ov:expr, $($field:ident),*) => {
        $( if let Some(v) = $ov.$field { $cfg.$field = v; } )*
    };
}

impl PipelineConfig {
    /// Defaults, then the config file, then command-line overrides.
    pub fn resolve(file: Option<&Path>, flags: &ConfigOverrides) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg.apply_file(&text, path)?;
        }
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &ConfigOverrides) {
        overlay!(
            self,
            o,
            rho,
            runs,
            tau,
            mu,
            master_seed,
            workers,
            top_k,
            draws,
            fast_iterations,
            thorough_iterations,
            overlap_threshold,
            iterate,
            unique_match,
            min_list_size,
            min_core_members
        );
    }

    /// Apply flat `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str, path: &Path) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(path, idx + 1, "expected `key = value`"));
            };
            self.set(key.trim(), value.trim())
                .map_err(|message| Error::parse(path, idx + 1, message))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value.parse().map_err(|_| format!("invalid value `{value}` for `{key}`"))
        }
        match key {
            "rho" => self.rho = num(key, value)?,
            "runs" => self.runs = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "mu" => self.mu = num(key, value)?,
            "seed" | "master_seed" => self.master_seed = num(key, value)?,
            "workers" => self.workers = num(key, value)?,
            "top_k" => self.top_k = num(key, value)?,
            "draws" => self.draws = num(key, value)?,
            "fast_iterations" => self.fast_iterations = num(key, value)?,
            "thorough_iterations" => self.thorough_iterations = num(key, value)?,
            "overlap_threshold" => self.overlap_threshold = num(key, value)?,
            "iterate" => self.iterate = num(key, value)?,
            "unique_match" => self.unique_match = num(key, value)?,
            "min_list_size" => self.min_list_size = num(key, value)?,
            "min_core_members" => self.min_core_members = num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.is_nan() || self.rho < 0.0 {
            return Err(Error::Validation(format!("rho must be >= 0, got {}", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::Validation(format!("mu must lie in [0, 1], got {}", self.mu)));
        }
        if self.top_k == 0 {
            return Err(Error::Validation("top_k must be >= 1".into()));
        }
        if self.draws == 0 {
            return Err(Error::Validation("draws must be >= 1".into()));
        }
        if self.min_list_size == 0 {
            return Err(Error::Validation("min_list_size must be >= 1".into()));
        }
        self.ensemble().validate()
    }

    pub fn graph(&self) -> GraphBuildConfig {
        GraphBuildConfig { rho: self.rho }
    }

    pub fn ensemble(&self) -> EnsembleConfig {
        EnsembleConfig {
            runs: self.runs,
            tau: self.tau,
            master_seed: self.master_seed,
            fast: DetectorConfig {
                iterations: self.fast_iterations,
                overlap_threshold: self.overlap_threshold,
                ..DetectorConfig::fast(0)
            },
            thorough: DetectorConfig {
                iterations: self.thorough_iterations,
                overlap_threshold: self.overlap_threshold,
                ..DetectorConfig::thorough(0)
            },
            workers: self.workers,
            iterate: self.iterate,
        }
    }
}

/// Corpus-side inputs.
#[derive(Debug, Clone, Default)]
pub struct CorpusInputs {
    pub memberships: PathBuf,
    pub lists: PathBuf,
    /// Core users, one per line: list filter input and evaluation universe.
    pub core: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
}

impl CorpusInputs {
    pub fn new(memberships: impl Into<PathBuf>, lists: impl Into<PathBuf>) -> Self {
        Self {
            memberships: memberships.into(),
            lists: lists.into(),
            ..Self::default()
        }
    }

    fn core(&self) -> Result<Option<BTreeSet<String>>> {
        self.core.as_deref().map(load_id_set).transpose()
    }

    /// Load the corpus and apply the list filter.
    pub fn load(&self, config: &PipelineConfig) -> Result<MembershipCorpus> {
        let corpus = load_corpus(&self.memberships, &self.lists)?;
        if config.min_list_size <= 1 && config.min_core_members == 0 {
            return Ok(corpus);
        }
        let core = self.core()?.unwrap_or_default();
        Ok(filter_lists(&corpus, config.min_list_size, config.min_core_members, &core))
    }
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::io(path, e.into()))?;
    writeln!(out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

fn ensure_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn read_communities(out: &Path, nodes: &[String]) -> Result<CommunitySet> {
    let path = out.join(artifacts::COMMUNITIES);
    let ids: Vec<Vec<String>> = read_json(&path)?;
    CommunitySet::from_ids(&ids, nodes)
}

fn read_matrix(out: &Path) -> Result<ConsensusMatrix> {
    let nodes = read_node_list(&out.join(artifacts::NODES))?;
    ConsensusMatrix::read_tsv(&out.join(artifacts::CONSENSUS), nodes)
}

pub fn build_graph_stage(config: &PipelineConfig, inputs: &CorpusInputs, out: &Path) -> Result<WeightedGraph> {
    ensure_dir(out)?;
    let corpus = inputs.load(config)?;
    let graph = build_list_graph(&corpus, &config.graph())?;
    graph.write_tsv(&out.join(artifacts::GRAPH), &out.join(artifacts::NODES))?;
    Ok(graph)
}

pub fn ensemble_stage(config: &PipelineConfig, out: &Path) -> Result<ConsensusMatrix> {
    let graph = WeightedGraph::read_tsv(&out.join(artifacts::GRAPH), &out.join(artifacts::NODES))?;
    let matrix = run_ensemble(&graph, &config.ensemble())?;
    matrix.write_tsv(&out.join(artifacts::CONSENSUS))?;
    Ok(matrix)
}

pub fn consensus_stage(config: &PipelineConfig, out: &Path) -> Result<CommunitySet> {
    let matrix = read_matrix(out)?;
    let communities = consensus_communities(&matrix, &config.ensemble())?;
    write_json(&communities.to_ids(matrix.order()), &out.join(artifacts::COMMUNITIES))?;
    Ok(communities)
}

pub fn stability_stage(config: &PipelineConfig, out: &Path) -> Result<Vec<StabilityRow>> {
    let matrix = read_matrix(out)?;
    let communities = read_communities(out, matrix.order())?;
    let ranked = rank_communities(&communities, &matrix, config.draws, config.master_seed)?;
    let path = out.join(artifacts::STABILITY);
    write_ranking(&ranked, &path)?;
    read_ranking(&path)
}

pub fn label_stage(config: &PipelineConfig, inputs: &CorpusInputs, out: &Path) -> Result<Vec<CommunityLabels>> {
    let corpus = inputs.load(config)?;
    let mut labeling = LabelingConfig {
        top_k: config.top_k,
        ..LabelingConfig::default()
    };
    if let Some(path) = &inputs.stopwords {
        labeling = labeling.with_stopword_file(path)?;
    }
    let nodes = read_node_list(&out.join(artifacts::NODES))?;
    let communities = read_communities(out, &nodes)?;
    let space = TermSpace::from_corpus(&corpus, &labeling);
    let labels = communities
        .to_ids(&nodes)
        .iter()
        .enumerate()
        .map(|(community_id, lists)| {
            let ranked = space.label(lists, labeling.top_k)?;
            Ok(CommunityLabels {
                community_id,
                labels: ranked.iter().map(|(t, _)| t.clone()).collect(),
                scores: ranked.iter().map(|(_, s)| *s).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_json(&labels, &out.join(artifacts::LABELS))?;
    Ok(labels)
}

pub fn members_stage(config: &PipelineConfig, inputs: &CorpusInputs, out: &Path) -> Result<Vec<UserCommunityReport>> {
    let corpus = inputs.load(config)?;
    let nodes = read_node_list(&out.join(artifacts::NODES))?;
    let communities = read_communities(out, &nodes)?.to_ids(&nodes);
    let ranking = read_ranking(&out.join(artifacts::STABILITY))?;
    let labels: Vec<CommunityLabels> = read_json(&out.join(artifacts::LABELS))?;
    let labels: BTreeMap<usize, Vec<String>> = labels.into_iter().map(|l| (l.community_id, l.labels)).collect();

    let reports = ranking
        .iter()
        .map(|row| {
            let lists = communities.get(row.community_id).ok_or_else(|| {
                Error::Validation(format!("stability ranking names unknown community {}", row.community_id))
            })?;
            let users = derive_members(row.community_id, lists, &corpus, config.mu);
            let labels = labels.get(&row.community_id).cloned().unwrap_or_default();
            Ok(UserCommunityReport::new(&users, row.corrected, labels))
        })
        .collect::<Result<Vec<_>>>()?;
    write_json(&reports, &out.join(artifacts::USERS))?;
    Ok(reports)
}

pub fn evaluate_stage(config: &PipelineConfig, inputs: &CorpusInputs, out: &Path) -> Result<Vec<EvalRow>> {
    let truth_path = inputs
        .ground_truth
        .as_deref()
        .ok_or_else(|| Error::Validation("evaluation needs a ground-truth file".into()))?;
    let truth = load_ground_truth(truth_path)?;
    let core = inputs.core()?;
    let reports: Vec<UserCommunityReport> = read_json(&out.join(artifacts::USERS))?;
    let communities: Vec<_> = reports.iter().map(UserCommunityReport::to_user_community).collect();
    let rows = if config.unique_match {
        evaluate_unique(&communities, &truth, core.as_ref())
    } else {
        evaluate(&communities, &truth, core.as_ref())
    };
    write_eval(&rows, &out.join(artifacts::EVAL))?;
    Ok(rows)
}

pub fn write_eval(rows: &[EvalRow], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "category\tcategory_size\tprecision\trecall\tf1\tcommunity_id").map_err(io)?;
    for r in rows {
        let community = r.matched_community.map_or_else(|| "-".to_string(), |c| c.to_string());
        writeln!(
            out,
            "{}\t{}\t{:.2}\t{:.2}\t{:.2}\t{}",
            r.category, r.category_size, r.precision, r.recall, r.f1, community
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Summary of a full pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub lists: usize,
    pub edges: usize,
    pub consensus_entries: usize,
    pub communities: usize,
    pub ranking: Vec<StabilityRow>,
    pub users: Vec<UserCommunityReport>,
    pub evaluation: Option<Vec<EvalRow>>,
}

/// Run every stage in order; evaluation runs when ground truth is given.
pub fn run_pipeline(config: &PipelineConfig, inputs: &CorpusInputs, out: &Path) -> Result<PipelineReport> {
    config.validate()?;
    let graph = build_graph_stage(config, inputs, out).map_err(|e| e.in_stage("build-graph"))?;
    log::info!("list graph: {} nodes, {} edges", graph.node_count(), graph.edge_count());
    let matrix = ensemble_stage(config, out).map_err(|e| e.in_stage("ensemble"))?;
    log::info!("consensus matrix: {} entries over {} runs", matrix.nnz(), matrix.runs());
    let communities = consensus_stage(config, out).map_err(|e| e.in_stage("consensus"))?;
    log::info!("{} consensus communities", communities.len());
    let ranking = stability_stage(config, out).map_err(|e| e.in_stage("stability"))?;
    label_stage(config, inputs, out).map_err(|e| e.in_stage("label"))?;
    let users = members_stage(config, inputs, out).map_err(|e| e.in_stage("members"))?;
    let evaluation = match inputs.ground_truth {
        Some(_) => Some(evaluate_stage(config, inputs, out).map_err(|e| e.in_stage("evaluate"))?),
        None => None,
    };
    Ok(PipelineReport {
        lists: graph.node_count(),
        edges: graph.edge_count(),
        consensus_entries: matrix.nnz(),
        communities: communities.len(),
        ranking,
        users,
        evaluation,
    })
}
