//! Label list communities from their names and descriptions.
//!
//! ```text
//! cargo run --example community_labels
//! ```

use listcomm::{tokenize, LabelingConfig, ListRecord, MembershipCorpus, TermSpace};

fn main() -> listcomm::Result<()> {
    let config = LabelingConfig::default();
    println!("tokens: {:?}", tokenize("BMX Racing", "the best of bmx atlēti", &config));

    let lists = [
        ("b1", "Badminton", "badminton players"),
        ("b2", "badminton players", "shuttlers and badders"),
        ("b3", "London badminton", ""),
        ("r1", "Rowing", "rowers of London"),
        ("r2", "rowing news", "the best rowers"),
        ("n1", "Olympic news", "London 2012"),
    ];
    let records = lists.iter().map(|&(id, name, desc)| ListRecord::new(id, name, desc)).collect();
    let corpus = MembershipCorpus::from_parts(records, Vec::<(String, String)>::new())?;
    let space = TermSpace::from_corpus(&corpus, &config);

    for community in [vec!["b1", "b2", "b3"], vec!["r1", "r2"], vec!["b1", "b2", "b3", "r1", "r2", "n1"]] {
        let labels = space.label(&community, config.top_k)?;
        let shown: Vec<String> = labels.iter().map(|(t, s)| format!("{t} ({s:+.3})")).collect();
        println!("{community:?}: {}", shown.join(", "));
    }
    Ok(())
}
