//! Rank consensus communities by chance-corrected stability and compare
//! them with random node sets of the same size.
//!
//! ```text
//! cargo run --release --example stability_ranking
//! ```

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use listcomm::{
    build_list_graph, consensus_communities, corrected_stability, rank_communities, run_ensemble, synth, EnsembleConfig,
    GraphBuildConfig, PlantedSpec,
};

fn main() -> listcomm::Result<()> {
    let planted = synth(&PlantedSpec::default(), 7)?;
    let graph = build_list_graph(&planted.corpus, &GraphBuildConfig::default())?;
    let config = EnsembleConfig { runs: 20, master_seed: 7, ..EnsembleConfig::default() };
    let matrix = run_ensemble(&graph, &config)?;
    let communities = consensus_communities(&matrix, &config)?;

    println!("{:>4} {:>5} {:>8} {:>8} {:>9}", "id", "size", "raw", "expected", "corrected");
    for r in rank_communities(&communities, &matrix, 2000, 7)? {
        println!(
            "{:>4} {:>5} {:>8.3} {:>8.3} {:>9.3}",
            r.community_id,
            r.members.len(),
            r.score.raw,
            r.score.expected,
            r.score.corrected
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("\nrandom node sets:");
    for size in [5, 20, 40] {
        let mut nodes: Vec<u32> = sample(&mut rng, matrix.node_count(), size).into_iter().map(|v| v as u32).collect();
        nodes.sort_unstable();
        println!("  size {size:>3}: corrected {:.3}", corrected_stability(&nodes, &matrix, 2000, 7)?.corrected);
    }
    Ok(())
}
