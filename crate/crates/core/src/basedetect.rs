//! Stochastic overlapping community detection.
//!
//! [`Detector`] is the seam where any overlapping detector can be plugged
//! in. The default, [`LabelPropagation`], is a weighted speaker-listener
//! label propagation:
//!
//! - every node starts with a memory holding its own label;
//! - each iteration visits the non-isolated nodes in a seeded random order;
//!   every neighbor "speaks" one label drawn uniformly from its memory (so
//!   proportional to label frequency), the listener adds the edge weight to
//!   that label's tally and appends the heaviest label to its own memory;
//! - afterwards a node joins every community whose label makes up at least
//!   `overlap_threshold` of its memory, and always its most frequent label;
//! - communities contained in another community are dropped.
//!
//! Ties are broken towards the lowest label. Labels are node indices, which
//! follow lexicographic id order, so a run depends only on the graph, the
//! iteration count, the threshold and the seed.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorMode {
    /// Few iterations; used for ensemble members.
    Fast,
    /// Many iterations; used for the final consensus pass.
    Thorough,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub mode: DetectorMode,
    pub iterations: usize,
    pub overlap_threshold: f64,
    pub seed: u64,
}

impl DetectorConfig {
    pub const FAST_ITERATIONS: usize = 5;
    pub const THOROUGH_ITERATIONS: usize = 50;
    pub const OVERLAP_THRESHOLD: f64 = 0.3;

    pub fn fast(seed: u64) -> Self {
        Self {
            mode: DetectorMode::Fast,
            iterations: Self::FAST_ITERATIONS,
            overlap_threshold: Self::OVERLAP_THRESHOLD,
            seed,
        }
    }

    pub fn thorough(seed: u64) -> Self {
        Self {
            mode: DetectorMode::Thorough,
            iterations: Self::THOROUGH_ITERATIONS,
            overlap_threshold: Self::OVERLAP_THRESHOLD,
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Validation("detector iterations must be >= 1".into()));
        }
        if !(self.overlap_threshold > 0.0 && self.overlap_threshold < 1.0) {
            return Err(Error::Validation(format!(
                "overlap threshold must lie in (0, 1), got {}",
                self.overlap_threshold
            )));
        }
        Ok(())
    }
}

/// An overlapping cover of graph nodes, stored as sorted node-index sets.
///
/// Communities are kept in canonical order: size descending, then
/// lexicographically by member sequence. Identical communities collapse.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CommunitySet {
    communities: Vec<Vec<u32>>,
}

impl CommunitySet {
    pub fn new(communities: impl IntoIterator<Item = Vec<u32>>) -> Self {
        let mut communities: Vec<Vec<u32>> = communities
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c.dedup();
                c
            })
            .filter(|c| !c.is_empty())
            .collect();
        communities.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        communities.dedup();
        Self { communities }
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn communities(&self) -> &[Vec<u32>] {
        &self.communities
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.communities.iter().map(Vec::as_slice)
    }

    /// Community indices each node belongs to, indexed by node.
    pub fn labels_by_node(&self, node_count: usize) -> Vec<Vec<u32>> {
        let mut labels = vec![Vec::new(); node_count];
        for (ci, community) in self.communities.iter().enumerate() {
            for &v in community {
                labels[v as usize].push(ci as u32);
            }
        }
        labels
    }

    pub fn max_node(&self) -> Option<u32> {
        self.communities.iter().filter_map(|c| c.last().copied()).max()
    }

    /// Member ids per community, in canonical order.
    pub fn to_ids(&self, nodes: &[String]) -> Vec<Vec<String>> {
        self.communities
            .iter()
            .map(|c| c.iter().map(|&v| nodes[v as usize].clone()).collect())
            .collect()
    }

    pub fn from_ids<S: AsRef<str>>(communities: &[Vec<S>], nodes: &[String]) -> Result<Self> {
        let index: HashMap<&str, u32> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i as u32)).collect();
        let mut out = Vec::with_capacity(communities.len());
        for community in communities {
            let mut members = Vec::with_capacity(community.len());
            for id in community {
                let id = id.as_ref();
                members.push(
                    *index
                        .get(id)
                        .ok_or_else(|| Error::Validation(format!("community member `{id}` is not a graph node")))?,
                );
            }
            out.push(members);
        }
        Ok(Self::new(out))
    }

    /// JSON array of arrays of node ids.
    pub fn to_json(&self, nodes: &[String]) -> String {
        serde_json::to_string_pretty(&self.to_ids(nodes)).expect("string vectors serialize")
    }

    pub fn from_json(text: &str, nodes: &[String]) -> Result<Self> {
        let ids: Vec<Vec<String>> =
            serde_json::from_str(text).map_err(|e| Error::Validation(format!("community set JSON: {e}")))?;
        Self::from_ids(&ids, nodes)
    }
}

/// Drop communities of size one.
pub fn filter_singletons(cs: &CommunitySet) -> CommunitySet {
    CommunitySet::new(cs.communities.iter().filter(|c| c.len() > 1).cloned())
}

/// A stochastic overlapping community detector.
pub trait Detector: Send + Sync {
    fn detect(&self, graph: &WeightedGraph, config: &DetectorConfig) -> CommunitySet;
}

/// Weighted speaker-listener label propagation.
#[derive(Debug, Clone, Copy, Default)]
pub struct LabelPropagation;

impl Detector for LabelPropagation {
    fn detect(&self, graph: &WeightedGraph, config: &DetectorConfig) -> CommunitySet {
        let n = graph.node_count();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut memory: Vec<Vec<u32>> = (0..n as u32)
            .map(|v| {
                let mut m = Vec::with_capacity(config.iterations + 1);
                m.push(v);
                m
            })
            .collect();
        let mut order: Vec<u32> = (0..n as u32).filter(|&v| graph.degree(v) > 0).collect();

        let mut tally = vec![0f64; n];
        let mut heard: Vec<u32> = Vec::new();
        for _ in 0..config.iterations {
            order.shuffle(&mut rng);
            for &listener in &order {
                for (speaker, weight) in graph.neighbors(listener) {
                    let spoken = &memory[speaker as usize];
                    let label = spoken[rng.gen_range(0..spoken.len() as u32) as usize];
                    if tally[label as usize] == 0.0 {
                        heard.push(label);
                    }
                    tally[label as usize] += weight;
                }
                let mut best = heard[0];
                for &label in &heard[1..] {
                    let (w, bw) = (tally[label as usize], tally[best as usize]);
                    if w > bw || (w == bw && label < best) {
                        best = label;
                    }
                }
                for &label in &heard {
                    tally[label as usize] = 0.0;
                }
                heard.clear();
                memory[listener as usize].push(best);
            }
        }

        let mut groups: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for &v in &order {
            counts.clear();
            let mem = &memory[v as usize];
            for &label in mem {
                *counts.entry(label).or_insert(0) += 1;
            }
            let total = mem.len() as f64;
            let mut plurality = (0usize, u32::MAX);
            for (&label, &count) in &counts {
                if count > plurality.0 || (count == plurality.0 && label < plurality.1) {
                    plurality = (count, label);
                }
                if count as f64 / total >= config.overlap_threshold {
                    groups.entry(label).or_default().push(v);
                }
            }
            if (plurality.0 as f64 / total) < config.overlap_threshold {
                groups.entry(plurality.1).or_default().push(v);
            }
        }
        remove_nested(&filter_singletons(&CommunitySet::new(groups.into_values())))
    }
}

fn is_subset(small: &[u32], large: &[u32]) -> bool {
    let mut it = large.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// Drop every community that is a proper subset of another.
pub fn remove_nested(cs: &CommunitySet) -> CommunitySet {
    // Canonical order puts larger communities first.
    let all = cs.communities();
    let kept = all.iter().enumerate().filter(|(i, c)| {
        !all[..*i].iter().any(|bigger| bigger.len() > c.len() && is_subset(c, bigger))
    });
    CommunitySet::new(kept.map(|(_, c)| c.clone()))
}

/// Run the default detector.
pub fn detect(graph: &WeightedGraph, config: &DetectorConfig) -> CommunitySet {
    LabelPropagation.detect(graph, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cliques(bridge: f64) -> WeightedGraph {
        let nodes: Vec<String> = (0..10).map(|i| format!("n{i}")).collect();
        let mut edges = vec![];
        for block in [0u32, 5] {
            for i in block..block + 5 {
                for j in i + 1..block + 5 {
                    edges.push((i, j, 1.0));
                }
            }
        }
        edges.push((4, 5, bridge));
        WeightedGraph::from_indexed(nodes, edges).unwrap()
    }

    #[test]
    fn communities_are_canonical() {
        let cs = CommunitySet::new(vec![vec![3, 1], vec![0, 2, 1], vec![1, 3], vec![5, 4]]);
        assert_eq!(cs.communities(), &[vec![0, 1, 2], vec![1, 3], vec![4, 5]]);
        assert_eq!(cs.labels_by_node(6)[1], vec![0, 1]);
    }

    #[test]
    fn singleton_filtering() {
        let cs = CommunitySet::new(vec![vec![0], vec![1, 2]]);
        assert_eq!(filter_singletons(&cs).communities(), &[vec![1, 2]]);
        assert!(filter_singletons(&CommunitySet::default()).is_empty());
        let dup = CommunitySet::new(vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(filter_singletons(&dup).communities(), &[vec![0, 1]]);
    }

    #[test]
    fn json_round_trip_by_id() {
        let nodes: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let cs = CommunitySet::new(vec![vec![0, 2], vec![1, 2]]);
        let json = cs.to_json(&nodes);
        assert_eq!(CommunitySet::from_json(&json, &nodes).unwrap(), cs);
        assert!(CommunitySet::from_json("[[\"a\",\"zz\"]]", &nodes).is_err());
    }

    #[test]
    fn nested_communities_are_dropped() {
        let cs = CommunitySet::new(vec![vec![0, 1, 2, 3], vec![1, 2], vec![3, 4], vec![2, 3, 5]]);
        assert_eq!(remove_nested(&cs).communities(), &[vec![0, 1, 2, 3], vec![2, 3, 5], vec![3, 4]]);
    }

    #[test]
    fn isolated_node_yields_nothing() {
        let g = WeightedGraph::from_named(["solo"], Vec::<(&str, &str, f64)>::new()).unwrap();
        assert!(detect(&g, &DetectorConfig::fast(1)).is_empty());
    }

    #[test]
    fn recovers_two_weakly_joined_cliques() {
        let g = two_cliques(0.01);
        let expected = vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9]];
        for seed in 0..200 {
            let cs = detect(&g, &DetectorConfig::thorough(seed));
            assert_eq!(cs.communities(), expected.as_slice(), "seed {seed}");
        }
    }

    #[test]
    fn same_seed_same_result() {
        let g = two_cliques(0.5);
        for seed in [0, 7, u64::MAX] {
            let cfg = DetectorConfig::fast(seed);
            assert_eq!(detect(&g, &cfg), detect(&g, &cfg));
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(DetectorConfig { iterations: 0, ..DetectorConfig::fast(0) }.validate().is_err());
        assert!(DetectorConfig { overlap_threshold: 1.0, ..DetectorConfig::fast(0) }.validate().is_err());
        assert!(DetectorConfig::thorough(0).validate().is_ok());
    }
}
