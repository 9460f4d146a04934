//! Generate a planted benchmark, run the whole pipeline on it and compare
//! the derived user communities with the planted groups.
//!
//! ```text
//! cargo run --release --example planted_pipeline -- [OUT_DIR] [SEED]
//! ```

use std::path::PathBuf;
use std::time::Instant;

use listcomm::membership::mean_best_f1;
use listcomm::pipeline::{run_pipeline, CorpusInputs, PipelineConfig};
use listcomm::{synth, PlantedSpec, UserCommunityReport};

fn main() -> listcomm::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map_or_else(|| std::env::temp_dir().join("listcomm-planted"), PathBuf::from);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);

    let planted = synth(&PlantedSpec::default(), seed)?;
    let data = out.join("data");
    planted.write(&data)?;

    let config = PipelineConfig {
        runs: 20,
        master_seed: seed,
        ..PipelineConfig::default()
    };
    let mut inputs = CorpusInputs::new(data.join("memberships.tsv"), data.join("lists.jsonl"));
    inputs.ground_truth = Some(data.join("groundtruth.tsv"));

    let start = Instant::now();
    let report = run_pipeline(&config, &inputs, &out)?;
    println!(
        "{} lists, {} edges, {} consensus communities in {:.2?}",
        report.lists,
        report.edges,
        report.communities,
        start.elapsed()
    );
    for user in report.users.iter().take(10) {
        println!(
            "  #{:<3} stability {:>5.2}  {:>3} users  {}",
            user.community_id,
            user.stability,
            user.users.len(),
            user.labels.join(", ")
        );
    }
    for row in report.evaluation.iter().flatten() {
        println!("  {}\tP={:.2}\tR={:.2}\tF1={:.2}", row.category, row.precision, row.recall, row.f1);
    }
    let communities: Vec<_> = report.users.iter().map(UserCommunityReport::to_user_community).collect();
    println!("mean best-match F1: {:.3}", mean_best_f1(&communities, &planted.truth, None));
    println!("artifacts in {}", out.display());
    Ok(())
}
