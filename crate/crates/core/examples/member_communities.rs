//! Project list communities onto users and score them against categories.
//!
//! ```text
//! cargo run --example member_communities
//! ```

use listcomm::membership::evaluate_unique;
use listcomm::{derive_members, evaluate, GroundTruth, MembershipCorpus};

fn main() -> listcomm::Result<()> {
    let rows = [
        ("row1", "ann"), ("row1", "bob"), ("row1", "cat"),
        ("row2", "ann"), ("row2", "bob"), ("row2", "dan"),
        ("row3", "ann"), ("row3", "cat"), ("row3", "zed"),
        ("judo1", "gus"), ("judo1", "hal"), ("judo1", "ann"),
        ("judo2", "gus"), ("judo2", "hal"), ("judo2", "ida"),
    ];
    let corpus = MembershipCorpus::from_parts(vec![], rows.iter().copied())?;
    let truth = GroundTruth::from_rows([
        ("rowing", "ann"), ("rowing", "bob"), ("rowing", "cat"), ("rowing", "dan"),
        ("judo", "gus"), ("judo", "hal"), ("judo", "ida"), ("judo", "jon"),
    ]);

    for mu in [0.1, 0.5] {
        println!("mu = {mu}");
        let communities = vec![
            derive_members(0, &["row1", "row2", "row3"], &corpus, mu),
            derive_members(1, &["judo1", "judo2"], &corpus, mu),
        ];
        for c in &communities {
            let ranked: Vec<String> = c.ranked().iter().map(|(u, w)| format!("{u}:{w:.2}")).collect();
            println!("  community {}: {}", c.community_id, ranked.join(" "));
        }
        for row in evaluate(&communities, &truth, None) {
            println!(
                "  {:<7} P={:.2} R={:.2} F1={:.2} (community {:?})",
                row.category, row.precision, row.recall, row.f1, row.matched_community
            );
        }
        let unique = evaluate_unique(&communities, &truth, None);
        println!("  one-to-one matches: {}", unique.iter().filter(|r| r.matched_community.is_some()).count());
    }
    Ok(())
}
