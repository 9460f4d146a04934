//! Member-level communities and their evaluation against ground truth.
//!
//! A user's weight in a community of `c` lists is the fraction of those
//! lists that contain the user; users below `mu` are dropped.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{GroundTruth, MembershipCorpus};

#[derive(Debug, Clone, PartialEq)]
pub struct UserCommunity {
    pub community_id: usize,
    pub members: BTreeMap<String, f64>,
}

impl UserCommunity {
    /// Members by weight descending, ties by id.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut ranked: Vec<(&str, f64)> = self.members.iter().map(|(u, &w)| (u.as_str(), w)).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked
    }

    pub fn user_set(&self) -> BTreeSet<&str> {
        self.members.keys().map(String::as_str).collect()
    }
}

/// Weight every user appearing in the community's lists and keep those at
/// or above `mu`. Lists unknown to the corpus count as empty.
pub fn derive_members<S: AsRef<str>>(community_id: usize, lists: &[S], corpus: &MembershipCorpus, mu: f64) -> UserCommunity {
    let lists: BTreeSet<&str> = lists.iter().map(AsRef::as_ref).collect();
    let c = lists.len() as f64;
    let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
    for list in &lists {
        for user in corpus.members(list).into_iter().flatten() {
            *votes.entry(user.as_str()).or_insert(0) += 1;
        }
    }
    let members = votes
        .into_iter()
        .map(|(u, count)| (u.to_string(), count as f64 / c))
        .filter(|&(_, w)| w >= mu)
        .collect();
    UserCommunity { community_id, members }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub category: String,
    pub category_size: usize,
    pub matched_community: Option<usize>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

struct Scored {
    community: usize,
    precision: f64,
    recall: f64,
}

fn score_all(communities: &[BTreeSet<&str>], ids: &[usize], category: &BTreeSet<String>) -> Vec<Scored> {
    communities
        .iter()
        .zip(ids)
        .map(|(members, &community)| {
            let shared = members.iter().filter(|u| category.contains(**u)).count() as f64;
            let precision = if members.is_empty() { 0.0 } else { shared / members.len() as f64 };
            Scored {
                community,
                precision,
                recall: shared / category.len() as f64,
            }
        })
        .collect()
}

/// Best match by precision, then recall, then lower community id.
fn better(a: &Scored, b: &Scored) -> bool {
    a.precision > b.precision
        || (a.precision == b.precision && (a.recall > b.recall || (a.recall == b.recall && a.community < b.community)))
}

fn restrict<'a>(communities: &'a [UserCommunity], core: Option<&BTreeSet<String>>) -> Vec<BTreeSet<&'a str>> {
    communities
        .iter()
        .map(|uc| {
            uc.members
                .keys()
                .filter(|u| core.is_none_or(|core| core.contains(*u)))
                .map(String::as_str)
                .collect()
        })
        .collect()
}

fn row(category: &str, size: usize, best: Option<&Scored>) -> EvalRow {
    let (precision, recall) = best.map_or((0.0, 0.0), |s| (s.precision, s.recall));
    EvalRow {
        category: category.to_string(),
        category_size: size,
        matched_community: best.map(|s| s.community),
        precision,
        recall,
        f1: f1_score(precision, recall),
    }
}

fn sort_rows(rows: &mut [EvalRow]) {
    rows.sort_by(|a, b| b.precision.total_cmp(&a.precision).then_with(|| a.category.cmp(&b.category)));
}

/// Match every category to its highest-precision community. Community
/// membership is restricted to `core` when given; a community may match
/// several categories. Rows come back sorted by precision, descending.
pub fn evaluate(communities: &[UserCommunity], truth: &GroundTruth, core: Option<&BTreeSet<String>>) -> Vec<EvalRow> {
    let restricted = restrict(communities, core);
    let ids: Vec<usize> = communities.iter().map(|c| c.community_id).collect();
    let mut rows = Vec::new();
    for (category, users) in &truth.categories {
        if users.is_empty() {
            log::warn!("skipping empty category `{category}`");
            continue;
        }
        let scored = score_all(&restricted, &ids, users);
        let best = scored.iter().fold(None::<&Scored>, |best, s| match best {
            Some(b) if !better(s, b) => Some(b),
            _ => Some(s),
        });
        rows.push(row(category, users.len(), best));
    }
    sort_rows(&mut rows);
    rows
}

/// Greedy one-to-one matching: repeatedly take the best remaining
/// (category, community) pair by the same ordering as [`evaluate`].
pub fn evaluate_unique(communities: &[UserCommunity], truth: &GroundTruth, core: Option<&BTreeSet<String>>) -> Vec<EvalRow> {
    let restricted = restrict(communities, core);
    let ids: Vec<usize> = communities.iter().map(|c| c.community_id).collect();
    let mut candidates: Vec<(String, usize, Scored)> = Vec::new();
    for (category, users) in &truth.categories {
        if users.is_empty() {
            log::warn!("skipping empty category `{category}`");
            continue;
        }
        for s in score_all(&restricted, &ids, users) {
            candidates.push((category.clone(), users.len(), s));
        }
    }
    candidates.sort_by(|a, b| {
        if better(&a.2, &b.2) {
            std::cmp::Ordering::Less
        } else if better(&b.2, &a.2) {
            std::cmp::Ordering::Greater
        } else {
            a.0.cmp(&b.0)
        }
    });
    let mut used_categories = BTreeSet::new();
    let mut used_communities = BTreeSet::new();
    let mut rows = Vec::new();
    for (category, size, s) in &candidates {
        if used_categories.contains(category) || used_communities.contains(&s.community) {
            continue;
        }
        used_categories.insert(category.clone());
        used_communities.insert(s.community);
        rows.push(row(category, *size, Some(s)));
    }
    for (category, users) in &truth.categories {
        if !users.is_empty() && !used_categories.contains(category) {
            rows.push(row(category, users.len(), None));
        }
    }
    sort_rows(&mut rows);
    rows
}

/// Mean over categories of the best F1 any community achieves.
pub fn mean_best_f1(communities: &[UserCommunity], truth: &GroundTruth, core: Option<&BTreeSet<String>>) -> f64 {
    let restricted = restrict(communities, core);
    let ids: Vec<usize> = communities.iter().map(|c| c.community_id).collect();
    let categories: Vec<&BTreeSet<String>> = truth.categories.values().filter(|u| !u.is_empty()).collect();
    if categories.is_empty() {
        return 0.0;
    }
    let total: f64 = categories
        .iter()
        .map(|users| {
            score_all(&restricted, &ids, users)
                .iter()
                .map(|s| f1_score(s.precision, s.recall))
                .fold(0.0, f64::max)
        })
        .sum();
    total / categories.len() as f64
}

/// One user entry of `users.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedUser {
    pub id: String,
    pub weight: f64,
}

/// One community entry of `users.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserCommunityReport {
    pub community_id: usize,
    pub stability: f64,
    pub labels: Vec<String>,
    pub users: Vec<WeightedUser>,
}

impl UserCommunityReport {
    pub fn new(community: &UserCommunity, stability: f64, labels: Vec<String>) -> Self {
        Self {
            community_id: community.community_id,
            stability,
            labels,
            users: community
                .ranked()
                .into_iter()
                .map(|(id, weight)| WeightedUser { id: id.to_string(), weight })
                .collect(),
        }
    }

    pub fn to_user_community(&self) -> UserCommunity {
        UserCommunity {
            community_id: self.community_id,
            members: self.users.iter().map(|u| (u.id.clone(), u.weight)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> MembershipCorpus {
        let rows = [
            ("l1", "u1"),
            ("l1", "u2"),
            ("l2", "u1"),
            ("l3", "u1"),
            ("l4", "u1"),
            ("l4", "u3"),
        ];
        MembershipCorpus::from_parts(vec![], rows).unwrap()
    }

    #[test]
    fn weights_are_list_fractions() {
        let uc = derive_members(0, &["l1", "l2", "l3", "l4"], &corpus(), 0.1);
        assert_eq!(uc.members["u1"], 1.0);
        assert_eq!(uc.members["u2"], 0.25);
        assert_eq!(uc.members["u3"], 0.25);
        assert_eq!(uc.ranked()[0], ("u1", 1.0));

        let strict = derive_members(0, &["l1", "l2", "l3", "l4"], &corpus(), 0.5);
        assert_eq!(strict.members.len(), 1);
    }

    #[test]
    fn f1_values() {
        assert_eq!(f1_score(0.0, 0.0), 0.0);
        assert!((f1_score(1.0, 0.65) - 0.787_878_8).abs() < 1e-6);
        assert_eq!(f1_score(1.0, 1.0), 1.0);
    }

    fn truth(rows: &[(&str, &str)]) -> GroundTruth {
        GroundTruth::from_rows(rows.iter().copied())
    }

    fn community(id: usize, users: &[&str]) -> UserCommunity {
        UserCommunity {
            community_id: id,
            members: users.iter().map(|u| (u.to_string(), 1.0)).collect(),
        }
    }

    #[test]
    fn exact_and_disjoint_matches() {
        let gt = truth(&[("judo", "a"), ("judo", "b")]);
        let rows = evaluate(&[community(0, &["a", "b"])], &gt, None);
        assert_eq!((rows[0].precision, rows[0].recall, rows[0].f1), (1.0, 1.0, 1.0));
        let rows = evaluate(&[community(0, &["x", "y"])], &gt, None);
        assert_eq!((rows[0].precision, rows[0].recall, rows[0].f1), (0.0, 0.0, 0.0));
        let rows = evaluate(&[], &gt, None);
        assert_eq!(rows[0].matched_community, None);
    }

    #[test]
    fn matches_by_precision_then_recall_then_id() {
        let gt = truth(&[("c", "a"), ("c", "b"), ("c", "d")]);
        let cs = [
            community(0, &["a", "b", "x"]),
            community(1, &["a"]),
            community(2, &["a", "b"]),
            community(3, &["b", "d"]),
        ];
        let rows = evaluate(&cs, &gt, None);
        assert_eq!(rows[0].matched_community, Some(2));
        assert_eq!(rows[0].precision, 1.0);
    }

    #[test]
    fn core_restriction_drops_outsiders() {
        let gt = truth(&[("c", "a"), ("c", "b")]);
        let core: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let rows = evaluate(&[community(0, &["a", "b", "x", "y"])], &gt, Some(&core));
        assert_eq!(rows[0].precision, 1.0);
        let rows = evaluate(&[community(0, &["a", "b", "x", "y"])], &gt, None);
        assert_eq!(rows[0].precision, 0.5);
    }

    #[test]
    fn unique_matching_is_one_to_one() {
        let gt = truth(&[("c1", "a"), ("c1", "b"), ("c2", "a"), ("c2", "c")]);
        let cs = [community(0, &["a"]), community(1, &["c", "z"])];
        let shared = evaluate(&cs, &gt, None);
        assert!(shared.iter().all(|r| r.matched_community == Some(0)));
        let unique = evaluate_unique(&cs, &gt, None);
        let matched: BTreeSet<_> = unique.iter().map(|r| r.matched_community).collect();
        assert_eq!(matched.len(), 2);
    }

    #[test]
    fn best_f1_mean() {
        let gt = truth(&[("c1", "a"), ("c1", "b"), ("c2", "c")]);
        let cs = [community(0, &["a", "b"]), community(1, &["c", "d"])];
        let expected = (1.0 + f1_score(0.5, 1.0)) / 2.0;
        assert!((mean_best_f1(&cs, &gt, None) - expected).abs() < 1e-15);
    }
}
