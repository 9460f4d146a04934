//! Chance-corrected community stability.
//!
//! A community's raw stability is the mean co-assignment score over all its
//! unordered pairs. The expected value for a community of the same size is
//! estimated by drawing random node subsets of that size; the corrected
//! score is `(raw - expected) / (1 - expected)`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basedetect::CommunitySet;
use crate::consensus::ConsensusMatrix;
use crate::corpus::{create, read_lines};
use crate::error::{Error, Result};
use crate::seed::mix;

/// Expected stability at or above `1 - SATURATION_EPS` is treated as saturated.
pub const SATURATION_EPS: f64 = 1e-9;

pub const DEFAULT_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityScore {
    pub raw: f64,
    pub expected: f64,
    pub corrected: f64,
    pub randomized_runs: usize,
}

impl StabilityScore {
    pub fn from_parts(raw: f64, expected: f64, randomized_runs: usize) -> Self {
        let corrected = if expected >= 1.0 - SATURATION_EPS {
            if raw <= expected {
                0.0
            } else {
                1.0
            }
        } else {
            (raw - expected) / (1.0 - expected)
        };
        Self {
            raw,
            expected,
            corrected,
            randomized_runs,
        }
    }
}

fn pair_mean(nodes: &[u32], matrix: &ConsensusMatrix) -> f64 {
    let mut total = 0.0;
    for (i, &x) in nodes.iter().enumerate() {
        for &y in &nodes[i + 1..] {
            total += matrix.get(x, y);
        }
    }
    let c = nodes.len() as f64;
    total / (c * (c - 1.0) / 2.0)
}

/// Mean score over all unordered pairs of `community`; absent pairs count
/// as zero.
pub fn raw_stability(community: &[u32], matrix: &ConsensusMatrix) -> Result<f64> {
    if community.len() < 2 {
        return Err(Error::Domain(format!(
            "stability needs at least 2 members, got {}",
            community.len()
        )));
    }
    if let Some(&v) = community.iter().find(|&&v| v as usize >= matrix.node_count()) {
        return Err(Error::Domain(format!("node {v} outside the consensus matrix")));
    }
    Ok(pair_mean(community, matrix))
}

/// Mean raw stability of `draws` uniformly random `size`-subsets of the
/// matrix's nodes.
pub fn expected_stability(size: usize, matrix: &ConsensusMatrix, draws: usize, seed: u64) -> Result<f64> {
    let l = matrix.node_count();
    if size < 2 || size > l {
        return Err(Error::Domain(format!("subset size {size} outside [2, {l}]")));
    }
    if draws == 0 {
        return Err(Error::Domain("expected stability needs at least one draw".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, size as u64));
    let mut subset: Vec<u32> = Vec::with_capacity(size);
    let mut total = 0.0;
    for _ in 0..draws {
        subset.clear();
        subset.extend(rand::seq::index::sample(&mut rng, l, size).into_iter().map(|i| i as u32));
        total += pair_mean(&subset, matrix);
    }
    Ok(total / draws as f64)
}

pub fn corrected_stability(community: &[u32], matrix: &ConsensusMatrix, draws: usize, seed: u64) -> Result<StabilityScore> {
    let raw = raw_stability(community, matrix)?;
    let expected = expected_stability(community.len(), matrix, draws, seed)?;
    Ok(StabilityScore::from_parts(raw, expected, draws))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCommunity {
    /// Position of the community in its [`CommunitySet`].
    pub community_id: usize,
    pub members: Vec<u32>,
    pub score: StabilityScore,
}

/// Score every community and sort by corrected stability, descending; ties
/// go to the larger community, then the lexicographically smaller one.
/// Expected stability is estimated once per distinct community size.
pub fn rank_communities(cs: &CommunitySet, matrix: &ConsensusMatrix, draws: usize, seed: u64) -> Result<Vec<RankedCommunity>> {
    let mut sizes: Vec<usize> = cs.iter().map(<[u32]>::len).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let expected: BTreeMap<usize, f64> = sizes
        .par_iter()
        .map(|&size| expected_stability(size, matrix, draws, seed).map(|e| (size, e)))
        .collect::<Result<_>>()?;

    let mut ranked = cs
        .iter()
        .enumerate()
        .map(|(community_id, members)| {
            let raw = raw_stability(members, matrix)?;
            Ok(RankedCommunity {
                community_id,
                members: members.to_vec(),
                score: StabilityScore::from_parts(raw, expected[&members.len()], draws),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| {
        b.score
            .corrected
            .total_cmp(&a.score.corrected)
            .then_with(|| b.members.len().cmp(&a.members.len()))
            .then_with(|| a.members.cmp(&b.members))
    });
    Ok(ranked)
}

/// One line of `stability.tsv`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub rank: usize,
    pub corrected: f64,
    pub raw: f64,
    pub expected: f64,
    pub size_lists: usize,
    pub community_id: usize,
}

/// `rank<TAB>corrected<TAB>raw<TAB>expected<TAB>size_lists<TAB>community_id`,
/// corrected at 2 decimals, raw and expected at 6.
pub fn write_ranking(ranked: &[RankedCommunity], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    for (i, r) in ranked.iter().enumerate() {
        writeln!(
            out,
            "{}\t{:.2}\t{:.6}\t{:.6}\t{}\t{}",
            i + 1,
            r.score.corrected,
            r.score.raw,
            r.score.expected,
            r.members.len(),
            r.community_id
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_ranking(path: &Path) -> Result<Vec<StabilityRow>> {
    read_lines(path)?
        .into_iter()
        .map(|(line_no, line)| {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 6 {
                return Err(Error::parse(path, line_no, format!("expected 6 columns, found {}", fields.len())));
            }
            let bad = |what: &str| Error::parse(path, line_no, format!("invalid {what}"));
            Ok(StabilityRow {
                rank: fields[0].parse().map_err(|_| bad("rank"))?,
                corrected: fields[1].parse().map_err(|_| bad("corrected score"))?,
                raw: fields[2].parse().map_err(|_| bad("raw score"))?,
                expected: fields[3].parse().map_err(|_| bad("expected score"))?,
                size_lists: fields[4].parse().map_err(|_| bad("size"))?,
                community_id: fields[5].parse().map_err(|_| bad("community id"))?,
            })
        })
        .collect()
}
