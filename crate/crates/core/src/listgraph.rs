//! The list graph: one node per list, edges weighted by how surprising the
//! member overlap of two lists is.
//!
//! For lists of sizes `a` and `b` sharing `k` members out of a population of
//! `n` listed users, the overlap p-value is the hypergeometric upper tail
//! `P(X >= k)`; the edge weight is `-log10` of it (LPV). Pairs with an LPV
//! below `rho` are dropped.
//!
//! The tail is summed in log space directly over `j = k..=min(a, b)`
//! rather than as one minus the lower tail, so p-values far below
//! `f64::MIN_POSITIVE` still produce finite, accurate LPVs.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::corpus::MembershipCorpus;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::special::{ln_factorial, LnFactorialTable};

pub type ListGraph = WeightedGraph;

/// Terms this far (in natural-log units) below the running maximum are past
/// the mode and no longer move the sum at double precision.
const TAIL_CUTOFF: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphBuildConfig {
    /// Minimum LPV for an edge to be kept.
    pub rho: f64,
}

impl Default for GraphBuildConfig {
    fn default() -> Self {
        Self { rho: 6.0 }
    }
}

fn check_domain(size_x: u64, size_y: u64, intersection: u64, n: u64) -> Result<()> {
    if n == 0 || size_x > n || size_y > n || intersection > size_x.min(size_y) {
        return Err(Error::Domain(format!(
            "infeasible overlap: |x|={size_x}, |y|={size_y}, |x∩y|={intersection}, n={n}"
        )));
    }
    Ok(())
}

/// `ln P(X >= k)` for `X ~ Hypergeometric(n, a, b)`.
fn ln_upper_tail(a: u64, b: u64, k: u64, n: u64, ln_fact: impl Fn(u64) -> f64) -> f64 {
    let (a, b) = (a.min(b), a.max(b));
    let lo = k.max((a + b).saturating_sub(n));
    let hi = a.min(b);
    if lo == (a + b).saturating_sub(n) {
        // Every feasible overlap is >= k.
        return 0.0;
    }
    let ln_choose = |m: u64, r: u64| ln_fact(m) - ln_fact(r) - ln_fact(m - r);
    let ln_denominator = ln_choose(n, b);
    let mode = (a + 1) * (b + 1) / (n + 2);

    let mut max = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity((hi - lo + 1).min(256) as usize);
    for j in lo..=hi {
        let term = ln_choose(a, j) + ln_choose(n - a, b - j) - ln_denominator;
        if j > mode && term < max - TAIL_CUTOFF {
            break;
        }
        max = max.max(term);
        terms.push(term);
    }
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max + sum.ln()).min(0.0)
}

/// Probability of seeing at least `intersection` shared members between
/// lists of sizes `size_x` and `size_y` drawn from `n` users.
pub fn overlap_pvalue(size_x: u64, size_y: u64, intersection: u64, n: u64) -> Result<f64> {
    check_domain(size_x, size_y, intersection, n)?;
    Ok(ln_upper_tail(size_x, size_y, intersection, n, ln_factorial).exp())
}

/// `-log10` of [`overlap_pvalue`], computed without leaving log space.
pub fn overlap_lpv(size_x: u64, size_y: u64, intersection: u64, n: u64) -> Result<f64> {
    check_domain(size_x, size_y, intersection, n)?;
    Ok(lpv_from_ln(ln_upper_tail(size_x, size_y, intersection, n, ln_factorial)))
}

fn lpv_from_ln(ln_p: f64) -> f64 {
    // `+ 0.0` folds -0.0 into 0.0.
    -ln_p / std::f64::consts::LN_10 + 0.0
}

/// Count shared members for every list pair that has any, by walking each
/// user's lists. Cost is the sum of squared user degrees.
fn shared_member_counts(corpus: &MembershipCorpus, index: &HashMap<&str, u32>) -> HashMap<(u32, u32), u32> {
    let mut counts: HashMap<(u32, u32), u32> = HashMap::new();
    let mut lists: Vec<u32> = Vec::new();
    for user_lists in corpus.user_index().values() {
        lists.clear();
        lists.extend(user_lists.iter().map(|l| index[l.as_str()]));
        for (i, &x) in lists.iter().enumerate() {
            for &y in &lists[i + 1..] {
                *counts.entry((x.min(y), x.max(y))).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Build the list graph. Lists whose every edge is pruned stay in the graph
/// as isolated nodes.
pub fn build_list_graph(corpus: &MembershipCorpus, config: &GraphBuildConfig) -> Result<ListGraph> {
    if corpus.is_empty() {
        return Err(Error::Validation("cannot build a list graph from an empty corpus".into()));
    }
    if config.rho.is_nan() || config.rho < 0.0 {
        return Err(Error::Validation(format!("rho must be >= 0, got {}", config.rho)));
    }
    let nodes: Vec<String> = corpus.list_ids().map(str::to_string).collect();
    let index: HashMap<&str, u32> = nodes.iter().enumerate().map(|(i, id)| (id.as_str(), i as u32)).collect();
    let sizes: Vec<u64> = nodes.iter().map(|id| corpus.members(id).map_or(0, |m| m.len() as u64)).collect();
    let n = corpus.n() as u64;
    let table = LnFactorialTable::new(n);

    let counts: Vec<((u32, u32), u32)> = shared_member_counts(corpus, &index).into_iter().collect();
    let edges: Vec<(u32, u32, f64)> = counts
        .into_par_iter()
        .filter_map(|((x, y), k)| {
            let lpv = lpv_from_ln(ln_upper_tail(sizes[x as usize], sizes[y as usize], k as u64, n, |m| table.get(m)));
            (lpv > 0.0 && lpv >= config.rho).then_some((x, y, lpv))
        })
        .collect();
    WeightedGraph::from_indexed(nodes, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_overlap_is_certain() {
        assert_eq!(overlap_pvalue(5, 4, 0, 10).unwrap(), 1.0);
        assert_eq!(overlap_lpv(5, 4, 0, 10).unwrap(), 0.0);
        // Overlap forced by pigeonhole: 7 + 6 out of 10 share at least 3.
        assert_eq!(overlap_pvalue(7, 6, 3, 10).unwrap(), 1.0);
    }

    #[test]
    fn small_rational_cases() {
        // C(5,3)C(5,1) + C(5,4)C(5,0) = 55 over C(10,4) = 210
        let p = overlap_pvalue(5, 4, 3, 10).unwrap();
        assert!((p - 55.0 / 210.0).abs() < 1e-15);
        assert!((overlap_lpv(5, 4, 3, 10).unwrap() - 0.581_856_6).abs() < 1e-6);
        assert!((overlap_pvalue(2, 2, 1, 4).unwrap() - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn identical_lists_in_large_universe() {
        // P = 1 / C(100, 5)
        let lpv = overlap_lpv(5, 5, 5, 100).unwrap();
        assert!((lpv - 75_287_520f64.log10()).abs() < 1e-10);
        assert!(lpv > 6.0);
    }

    #[test]
    fn lpv_stays_finite_beyond_double_underflow() {
        let lpv = overlap_lpv(2000, 2000, 2000, 1_000_000).unwrap();
        assert!(lpv.is_finite() && lpv > 330.0, "lpv = {lpv}");
        assert_eq!(overlap_pvalue(2000, 2000, 2000, 1_000_000).unwrap(), 0.0);
    }

    #[test]
    fn infeasible_inputs_are_domain_errors() {
        assert!(matches!(overlap_pvalue(3, 2, 3, 10), Err(Error::Domain(_))));
        assert!(matches!(overlap_pvalue(11, 2, 1, 10), Err(Error::Domain(_))));
        assert!(matches!(overlap_lpv(0, 0, 0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn lpv_six_means_one_in_a_million() {
        // With a = b = k and n chosen so C(n, k) ~ 1e6 the LPV straddles 6.
        let below = overlap_lpv(2, 2, 2, 1414).unwrap();
        let above = overlap_lpv(2, 2, 2, 1416).unwrap();
        assert!(below < 6.0 && above > 6.0, "{below} {above}");
    }

    fn corpus(rows: &[(&str, &str)]) -> MembershipCorpus {
        MembershipCorpus::from_parts(vec![], rows.iter().copied()).unwrap()
    }

    #[test]
    fn disjoint_lists_get_no_edge() {
        let c = corpus(&[("a", "u1"), ("a", "u2"), ("b", "u3"), ("b", "u4")]);
        for rho in [0.0, 0.5, 6.0] {
            let g = build_list_graph(&c, &GraphBuildConfig { rho }).unwrap();
            assert_eq!(g.node_count(), 2);
            assert_eq!(g.edge_count(), 0);
        }
    }

    #[test]
    fn identical_lists_are_linked_at_rho_six() {
        let mut rows = vec![];
        let users: Vec<String> = (0..100).map(|i| format!("u{i:03}")).collect();
        for u in &users[..5] {
            rows.push(("a", u.as_str()));
            rows.push(("b", u.as_str()));
        }
        // Filler lists make the population 100 users.
        for u in &users[5..] {
            rows.push(("filler", u.as_str()));
        }
        let g = build_list_graph(&corpus(&rows), &GraphBuildConfig { rho: 6.0 }).unwrap();
        let w = g.weight(0, 1).expect("edge a-b");
        assert!((w - 75_287_520f64.log10()).abs() < 1e-9);
        assert_eq!(g.degree(2), 0);
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(build_list_graph(&MembershipCorpus::default(), &GraphBuildConfig::default()).is_err());
    }
}
