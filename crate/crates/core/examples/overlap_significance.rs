//! How surprising is a shared membership? Prints overlap p-values and LPVs
//! for a few list pairs, then builds the list graph of a tiny corpus.
//!
//! ```text
//! cargo run --example overlap_significance
//! ```

use listcomm::{build_list_graph, overlap_lpv, overlap_pvalue, GraphBuildConfig, MembershipCorpus};

fn main() -> listcomm::Result<()> {
    println!("{:>6} {:>4} {:>4} {:>4} {:>12} {:>8}", "n", "|x|", "|y|", "k", "p-value", "LPV");
    for (n, a, b, k) in [(10, 5, 4, 3), (100, 5, 5, 5), (1000, 20, 20, 3), (1000, 20, 20, 8), (100_000, 500, 400, 60)] {
        println!(
            "{n:>6} {a:>4} {b:>4} {k:>4} {:>12.3e} {:>8.3}",
            overlap_pvalue(a, b, k, n)?,
            overlap_lpv(a, b, k, n)?
        );
    }

    let mut rows = Vec::new();
    for (list, users) in [
        ("rowing-fans", "ann bob cat dan eve"),
        ("rowing-clubs", "ann bob cat dan fay"),
        ("judo-news", "gus hal ida jon"),
        ("judo-stars", "gus hal ida kim"),
        ("misc", "ann gus lou max ned oli pam quin ray sue"),
    ] {
        for user in users.split(' ') {
            rows.push((list.to_string(), user.to_string()));
        }
    }
    let corpus = MembershipCorpus::from_parts(vec![], rows)?;
    for rho in [0.0, 2.0, 3.0] {
        let graph = build_list_graph(&corpus, &GraphBuildConfig { rho })?;
        println!("\nrho = {rho}: {} edges", graph.edge_count());
        for &(a, b, w) in graph.edges() {
            println!("  {:<13} {:<13} {w:.3}", graph.node_id(a), graph.node_id(b));
        }
    }
    Ok(())
}
