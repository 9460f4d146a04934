//! Community labels from list names and descriptions.
//!
//! Each list becomes a bag of unigrams and bigrams weighted by log TF-IDF,
//! `(1 + log10 tf) * log10(l / df)`. A community's labels are the terms
//! whose centroid weight most exceeds the mean weight over all lists.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{read_lines, MembershipCorpus};
use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("stopwords.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelingConfig {
    pub top_k: usize,
    pub stopwords: HashSet<String>,
}

impl Default for LabelingConfig {
    fn default() -> Self {
        Self {
            top_k: 3,
            stopwords: parse_stopwords(DEFAULT_STOPWORDS),
        }
    }
}

impl LabelingConfig {
    pub fn with_stopword_file(mut self, path: &Path) -> Result<Self> {
        self.stopwords = read_lines(path)?.into_iter().map(|(_, l)| l.trim().to_lowercase()).collect();
        Ok(self)
    }
}

fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_lowercase).collect()
}

fn field_terms(text: &str, stopwords: &HashSet<String>, out: &mut Vec<String>) {
    let lower = text.to_lowercase();
    let tokens: Vec<&str> = lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).collect();
    let is_stop: Vec<bool> = tokens.iter().map(|t| stopwords.contains(*t)).collect();
    for (token, &stop) in tokens.iter().zip(&is_stop) {
        if !stop {
            out.push(token.to_string());
        }
    }
    for i in 1..tokens.len() {
        if !(is_stop[i - 1] && is_stop[i]) {
            out.push(format!("{} {}", tokens[i - 1], tokens[i]));
        }
    }
}

/// Unigrams and bigrams of a list's name and description. The two fields
/// are tokenized separately, so no bigram spans them.
pub fn tokenize(name: &str, description: &str, config: &LabelingConfig) -> Vec<String> {
    let mut terms = Vec::new();
    field_terms(name, &config.stopwords, &mut terms);
    field_terms(description, &config.stopwords, &mut terms);
    terms
}

/// Sparse term weights of one list; zero weights are never stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ListVector {
    pub weights: BTreeMap<String, f64>,
}

impl ListVector {
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, term: &str) -> f64 {
        self.weights.get(term).copied().unwrap_or(0.0)
    }
}

/// Log TF-IDF vector for every list in the corpus.
pub fn build_vectors(corpus: &MembershipCorpus, config: &LabelingConfig) -> BTreeMap<String, ListVector> {
    let counts: Vec<(&str, BTreeMap<String, usize>)> = corpus
        .lists()
        .map(|record| {
            let mut tf: BTreeMap<String, usize> = BTreeMap::new();
            for term in tokenize(&record.name, &record.description, config) {
                *tf.entry(term).or_insert(0) += 1;
            }
            (record.id.as_str(), tf)
        })
        .collect();

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, tf) in &counts {
        for term in tf.keys() {
            *df.entry(term.as_str()).or_insert(0) += 1;
        }
    }
    let l = counts.len() as f64;

    counts
        .iter()
        .map(|(id, tf)| {
            let weights = tf
                .iter()
                .filter_map(|(term, &count)| {
                    let idf = (l / df[term.as_str()] as f64).log10();
                    let w = (1.0 + (count as f64).log10()) * idf;
                    (w > 0.0).then(|| (term.clone(), w))
                })
                .collect();
            (id.to_string(), ListVector { weights })
        })
        .collect()
}

/// List vectors plus their mean, for labeling many communities.
#[derive(Debug, Clone)]
pub struct TermSpace {
    vectors: BTreeMap<String, ListVector>,
    background: BTreeMap<String, f64>,
}

impl TermSpace {
    pub fn new(vectors: BTreeMap<String, ListVector>) -> Self {
        let mut background: BTreeMap<String, f64> = BTreeMap::new();
        for v in vectors.values() {
            for (term, w) in &v.weights {
                *background.entry(term.clone()).or_insert(0.0) += w;
            }
        }
        let l = vectors.len() as f64;
        for w in background.values_mut() {
            *w /= l;
        }
        Self { vectors, background }
    }

    pub fn from_corpus(corpus: &MembershipCorpus, config: &LabelingConfig) -> Self {
        Self::new(build_vectors(corpus, config))
    }

    pub fn vectors(&self) -> &BTreeMap<String, ListVector> {
        &self.vectors
    }

    /// Top `top_k` terms of `community` by centroid minus background,
    /// ties broken lexicographically.
    pub fn label<S: AsRef<str>>(&self, community: &[S], top_k: usize) -> Result<Vec<(String, f64)>> {
        if community.is_empty() {
            return Err(Error::Domain("cannot label an empty community".into()));
        }
        let members: BTreeSet<&str> = community.iter().map(AsRef::as_ref).collect();
        let mut centroid: BTreeMap<&str, f64> = BTreeMap::new();
        for id in &members {
            let v = self
                .vectors
                .get(*id)
                .ok_or_else(|| Error::Domain(format!("list `{id}` has no term vector")))?;
            for (term, w) in &v.weights {
                *centroid.entry(term.as_str()).or_insert(0.0) += w;
            }
        }
        let c = members.len() as f64;
        let mut scored: Vec<(&str, f64)> = self
            .background
            .iter()
            .map(|(term, bg)| (term.as_str(), centroid.get(term.as_str()).map_or(0.0, |s| s / c) - bg))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(scored.into_iter().take(top_k).map(|(t, s)| (t.to_string(), s)).collect())
    }
}

/// Label one community; see [`TermSpace::label`].
pub fn label_community<S: AsRef<str>>(
    community: &[S],
    vectors: &BTreeMap<String, ListVector>,
    config: &LabelingConfig,
) -> Result<Vec<(String, f64)>> {
    TermSpace::new(vectors.clone()).label(community, config.top_k)
}

/// One entry of `labels.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityLabels {
    pub community_id: usize,
    pub labels: Vec<String>,
    pub scores: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ListRecord;

    fn set(terms: &[&str]) -> BTreeSet<String> {
        terms.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenizes_unigrams_and_bigrams() {
        let cfg = LabelingConfig::default();
        let terms: BTreeSet<String> = tokenize("London 2012", "", &cfg).into_iter().collect();
        assert_eq!(terms, set(&["london", "2012", "london 2012"]));
        assert!(tokenize("the", "", &cfg).is_empty());
        assert!(tokenize("", "", &cfg).is_empty());
    }

    #[test]
    fn keeps_non_ascii_terms() {
        let cfg = LabelingConfig::default();
        let terms: BTreeSet<String> = tokenize("BMX Racing", "bmx atl\u{113}ti", &cfg).into_iter().collect();
        for t in ["bmx", "racing", "atl\u{113}ti", "bmx racing", "bmx atl\u{113}ti"] {
            assert!(terms.contains(t), "missing {t}");
        }
        // No bigram across the name/description boundary.
        assert!(!terms.contains("racing bmx"));
        let terms = tokenize("Wielrennen – ciclismo!", "", &cfg);
        assert!(terms.contains(&"wielrennen ciclismo".to_string()));
    }

    #[test]
    fn bigram_with_one_stopword_survives() {
        let cfg = LabelingConfig::default();
        let terms = tokenize("Best of the Games", "", &cfg);
        assert!(terms.contains(&"best of".to_string()));
        assert!(!terms.contains(&"of the".to_string()));
        assert!(terms.contains(&"the games".to_string()));
        assert!(!terms.contains(&"of".to_string()));
    }

    fn fixture() -> MembershipCorpus {
        let records = vec![
            ListRecord::new("l0", "badminton", "team"),
            ListRecord::new("l1", "badminton players", "team"),
            ListRecord::new("l2", "badminton", "team"),
            ListRecord::new("l3", "rowing", "team"),
            ListRecord::new("l4", "rowing crew", "team"),
            ListRecord::new("l5", "", ""),
        ];
        MembershipCorpus::from_parts(records, Vec::<(String, String)>::new()).unwrap()
    }

    #[test]
    fn tfidf_weights() {
        let cfg = LabelingConfig::default();
        let mut records: Vec<ListRecord> = (0..10).map(|i| ListRecord::new(format!("l{i}"), "common", "")).collect();
        records[0].description = "unique".into();
        let corpus = MembershipCorpus::from_parts(records, Vec::<(String, String)>::new()).unwrap();
        let vectors = build_vectors(&corpus, &cfg);
        assert!((vectors["l0"].get("unique") - 1.0).abs() < 1e-15);
        // In every list: idf zero, dropped.
        assert!(vectors.values().all(|v| !v.weights.contains_key("common")));
        assert!(vectors["l5"].is_empty());
    }

    #[test]
    fn repeated_terms_use_log_tf() {
        let cfg = LabelingConfig::default();
        let records = vec![ListRecord::new("a", "judo judo judo", ""), ListRecord::new("b", "", "")];
        let corpus = MembershipCorpus::from_parts(records, Vec::<(String, String)>::new()).unwrap();
        let w = build_vectors(&corpus, &cfg)["a"].get("judo");
        assert!((w - (1.0 + 3f64.log10()) * 2f64.log10()).abs() < 1e-15);
    }

    #[test]
    fn exclusive_term_ranks_first() {
        let cfg = LabelingConfig::default();
        let space = TermSpace::from_corpus(&fixture(), &cfg);
        let labels = space.label(&["l0", "l1", "l2"], 3).unwrap();
        assert_eq!(labels[0].0, "badminton");
        // badminton: tfidf log10(6/3) in each member; score = w (1 - 3/6)
        let w = 2f64.log10();
        assert!((labels[0].1 - w * 0.5).abs() < 1e-12);
    }

    #[test]
    fn whole_corpus_scores_zero() {
        let cfg = LabelingConfig::default();
        let corpus = fixture();
        let space = TermSpace::from_corpus(&corpus, &cfg);
        let ids: Vec<&str> = corpus.list_ids().collect();
        let labels = space.label(&ids, 3).unwrap();
        assert!(labels.iter().all(|(_, s)| *s == 0.0));
        let names: Vec<&str> = labels.iter().map(|(t, _)| t.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn empty_community_is_rejected() {
        let cfg = LabelingConfig::default();
        let vectors = build_vectors(&fixture(), &cfg);
        assert!(label_community::<&str>(&[], &vectors, &cfg).is_err());
        assert!(label_community(&["l0"], &vectors, &cfg).is_ok());
    }
}
