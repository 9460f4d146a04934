//! Individual fast detector runs disagree; their consensus does not.
//!
//! ```text
//! cargo run --release --example ensemble_consensus -- [RUNS]
//! ```

use listcomm::consensus::{base_community_sets, cover_agreement};
use listcomm::{
    build_list_graph, consensus_communities, run_ensemble, synth, EnsembleConfig, GraphBuildConfig, LabelPropagation,
    PlantedSpec,
};

fn main() -> listcomm::Result<()> {
    let runs = std::env::args().nth(1).and_then(|r| r.parse().ok()).unwrap_or(20);
    let planted = synth(&PlantedSpec { noise: 0.25, ..PlantedSpec::default() }, 42)?;
    let graph = build_list_graph(&planted.corpus, &GraphBuildConfig::default())?;
    println!("list graph: {} lists, {} edges", graph.node_count(), graph.edge_count());

    let config = EnsembleConfig { runs, master_seed: 1, ..EnsembleConfig::default() };
    let base = base_community_sets(&LabelPropagation, &graph, &config)?;
    let sizes: Vec<usize> = base.iter().map(|c| c.len()).collect();
    println!("communities per base run: {sizes:?}");
    println!("agreement of base runs 0 and 1: {:.3}", cover_agreement(&base[0], &base[1]));

    let matrix = run_ensemble(&graph, &config)?;
    println!("consensus matrix: {} nonzero entries", matrix.nnz());
    for tau in [0.0, 0.2, 0.5, 0.9] {
        println!("  tau {tau}: {} consensus edges", matrix.threshold_graph(tau).edge_count());
    }

    let first = consensus_communities(&matrix, &config)?;
    let other = EnsembleConfig { master_seed: 2, ..config.clone() };
    let second = consensus_communities(&run_ensemble(&graph, &other)?, &other)?;
    println!(
        "{} consensus communities; agreement across master seeds: {:.3}",
        first.len(),
        cover_agreement(&first, &second)
    );
    Ok(())
}
