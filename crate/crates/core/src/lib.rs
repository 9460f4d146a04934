//! Ensemble overlapping community detection over list co-membership data.
//!
//! Curators group members into named lists. Lists that share members more
//! often than chance predicts are linked in a significance-weighted graph,
//! a stochastic overlapping detector is run many times over that graph, and
//! the runs are folded into a co-assignment matrix whose thresholded graph
//! yields stable consensus communities. Each consensus community is scored
//! for chance-corrected stability, labelled from list names and
//! descriptions, and projected back onto individual members.
//!
//! The stages map onto modules:
//!
//! - [`corpus`]: membership / metadata / ground-truth ingestion
//! - [`listgraph`]: hypergeometric edge significance and the list graph
//! - [`basedetect`]: the pluggable detector and the default label propagation
//! - [`consensus`]: ensemble runs, co-assignment matrix, consensus communities
//! - [`stability`]: chance-corrected community stability and ranking
//! - [`labeling`]: log TF-IDF centroid labels
//! - [`membership`]: member-level communities and evaluation
//! - [`synth`]: planted benchmark generator
//! - [`pipeline`]: stage orchestration and on-disk artifacts
//!
//! Runnable walkthroughs of each stage live in the crate's `examples/`
//! directory.

pub mod basedetect;
pub mod consensus;
pub mod corpus;
mod error;
pub mod graph;
pub mod labeling;
pub mod listgraph;
pub mod membership;
pub mod pipeline;
pub mod seed;
pub mod special;
pub mod stability;
pub mod synth;

pub use basedetect::{detect, filter_singletons, CommunitySet, Detector, DetectorConfig, DetectorMode, LabelPropagation};
pub use consensus::{consensus_communities, label_jaccard, run_ensemble, ConsensusAccumulator, ConsensusMatrix, EnsembleConfig};
pub use corpus::{filter_lists, load_corpus, load_ground_truth, GroundTruth, ListRecord, MembershipCorpus};
pub use error::{Error, Result};
pub use graph::WeightedGraph;
pub use labeling::{label_community, tokenize, build_vectors, LabelingConfig, ListVector, TermSpace};
pub use listgraph::{build_list_graph, overlap_lpv, overlap_pvalue, GraphBuildConfig, ListGraph};
pub use membership::{derive_members, evaluate, f1_score, mean_best_f1, EvalRow, UserCommunity, UserCommunityReport};
pub use pipeline::PipelineConfig;
pub use stability::{corrected_stability, expected_stability, rank_communities, raw_stability, RankedCommunity, StabilityScore};
pub use synth::{synth, PlantedCorpus, PlantedSpec};
