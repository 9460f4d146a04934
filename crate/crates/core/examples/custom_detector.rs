//! Plug a different detector into the ensemble. This one assigns each
//! connected component to a community, which never varies between runs, so
//! the consensus matrix is all ones inside components.
//!
//! ```text
//! cargo run --example custom_detector
//! ```

use listcomm::consensus::{consensus_communities_with, run_ensemble_with};
use listcomm::{CommunitySet, Detector, DetectorConfig, EnsembleConfig, WeightedGraph};

struct Components;

impl Detector for Components {
    fn detect(&self, graph: &WeightedGraph, _: &DetectorConfig) -> CommunitySet {
        let n = graph.node_count();
        let mut component = vec![usize::MAX; n];
        let mut groups = Vec::new();
        for start in 0..n as u32 {
            if component[start as usize] != usize::MAX || graph.degree(start) == 0 {
                continue;
            }
            let id = groups.len();
            let mut stack = vec![start];
            let mut members = Vec::new();
            component[start as usize] = id;
            while let Some(v) = stack.pop() {
                members.push(v);
                for (w, _) in graph.neighbors(v) {
                    if component[w as usize] == usize::MAX {
                        component[w as usize] = id;
                        stack.push(w);
                    }
                }
            }
            groups.push(members);
        }
        CommunitySet::new(groups)
    }
}

fn main() -> listcomm::Result<()> {
    let graph = WeightedGraph::from_named(
        ["a", "b", "c", "d", "e", "f", "g"],
        [("a", "b", 1.0), ("b", "c", 2.0), ("d", "e", 1.0), ("e", "f", 0.5)],
    )?;
    let config = EnsembleConfig { runs: 5, ..EnsembleConfig::default() };
    let matrix = run_ensemble_with(&Components, &graph, &config)?;
    for (x, y, w) in matrix.entries() {
        println!("{} {} {w}", matrix.order()[x as usize], matrix.order()[y as usize]);
    }
    let communities = consensus_communities_with(&Components, &matrix, &config)?;
    println!("{}", communities.to_json(matrix.order()));
    Ok(())
}
