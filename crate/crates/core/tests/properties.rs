use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use listcomm::consensus::{base_community_sets, cover_agreement, run_ensemble_with};
use listcomm::*;

fn corpus_strategy() -> impl Strategy<Value = MembershipCorpus> {
    prop::collection::vec((0..10u32, 0..25u32), 1..120).prop_map(|rows| {
        let rows: Vec<(String, String)> = rows.into_iter().map(|(l, u)| (format!("l{l:02}"), format!("u{u:02}"))).collect();
        MembershipCorpus::from_parts(vec![], rows).unwrap()
    })
}

/// Feasible `(n, a, b, k)` with `k` inside `0..=min(a, b)`.
fn overlap_strategy() -> impl Strategy<Value = (u64, u64, u64, u64)> {
    (1..400u64)
        .prop_flat_map(|n| (Just(n), 0..=n, 0..=n))
        .prop_flat_map(|(n, a, b)| (Just(n), Just(a), Just(b), 0..=a.min(b)))
}

fn cover_strategy(nodes: u32) -> impl Strategy<Value = CommunitySet> {
    prop::collection::vec(prop::collection::btree_set(0..nodes, 1..6), 0..6)
        .prop_map(|cs| filter_singletons(&CommunitySet::new(cs.into_iter().map(|c| c.into_iter().collect()))))
}

struct Constant(CommunitySet);

impl Detector for Constant {
    fn detect(&self, _: &WeightedGraph, _: &DetectorConfig) -> CommunitySet {
        self.0.clone()
    }
}

fn path_graph(n: u32) -> WeightedGraph {
    let nodes = (0..n).map(|i| format!("n{i:02}")).collect();
    WeightedGraph::from_indexed(nodes, (1..n).map(|i| (i - 1, i, 1.0))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn pvalue_is_a_probability_and_symmetric((n, a, b, k) in overlap_strategy()) {
        let p = overlap_pvalue(a, b, k, n).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert_eq!(p, overlap_pvalue(b, a, k, n).unwrap());
        let lpv = overlap_lpv(a, b, k, n).unwrap();
        prop_assert!(lpv >= 0.0 && lpv.is_finite());
    }

    #[test]
    fn pvalue_decreases_in_overlap((n, a, b, k) in overlap_strategy()) {
        prop_assume!(k < a.min(b));
        let here = overlap_pvalue(a, b, k, n).unwrap();
        let next = overlap_pvalue(a, b, k + 1, n).unwrap();
        prop_assert!(next <= here * (1.0 + 1e-12), "{next} > {here}");
        prop_assert!(overlap_lpv(a, b, k + 1, n).unwrap() >= overlap_lpv(a, b, k, n).unwrap() - 1e-12);
    }

    #[test]
    fn list_graph_edges_are_positive_and_above_rho(corpus in corpus_strategy(), rho in 0.0..6.0f64) {
        let g = build_list_graph(&corpus, &GraphBuildConfig { rho }).unwrap();
        prop_assert_eq!(g.node_count(), corpus.list_count());
        for &(a, b, w) in g.edges() {
            prop_assert!(a < b && w > 0.0 && w >= rho);
        }
    }

    #[test]
    fn filtering_is_idempotent(corpus in corpus_strategy(), min_size in 0..6usize, min_core in 0..3usize) {
        let core: BTreeSet<String> = (0..25).step_by(3).map(|u| format!("u{u:02}")).collect();
        let once = filter_lists(&corpus, min_size, min_core, &core);
        let twice = filter_lists(&once, min_size, min_core, &core);
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.list_ids().all(|l| corpus.members(l).is_some()));
    }

    #[test]
    fn corpus_files_round_trip(corpus in corpus_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let (m, l) = (dir.path().join("m.tsv"), dir.path().join("l.jsonl"));
        corpus.write(&m, &l).unwrap();
        prop_assert_eq!(load_corpus(&m, &l).unwrap(), corpus);
    }

    #[test]
    fn matrix_entries_lie_in_unit_interval(covers in prop::collection::vec(cover_strategy(12), 1..8)) {
        let order: Vec<String> = (0..12).map(|i| format!("n{i:02}")).collect();
        let mut acc = ConsensusAccumulator::new(order);
        for c in &covers {
            acc.accumulate(c).unwrap();
        }
        let m = acc.finish();
        prop_assert_eq!(m.runs(), covers.len());
        for (x, y, w) in m.entries() {
            prop_assert!(x < y && w > 0.0 && w <= 1.0);
        }
    }

    #[test]
    fn consensus_of_a_constant_is_the_constant(cover in cover_strategy(12), runs in 1..6usize) {
        let graph = path_graph(12);
        let config = EnsembleConfig { runs, ..EnsembleConfig::default() };
        let many = run_ensemble_with(&Constant(cover.clone()), &graph, &config).unwrap();
        let once = run_ensemble_with(&Constant(cover), &graph, &EnsembleConfig { runs: 1, ..config.clone() }).unwrap();
        let a: Vec<_> = many.entries().collect();
        let b: Vec<_> = once.entries().collect();
        prop_assert_eq!(a.len(), b.len());
        for ((x1, y1, w1), (x2, y2, w2)) in a.into_iter().zip(b) {
            prop_assert_eq!((x1, y1), (x2, y2));
            prop_assert!((w1 - w2).abs() < 1e-12);
        }
    }

    #[test]
    fn partitions_score_zero_or_one(assign in prop::collection::vec(0..4u32, 12)) {
        let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (v, g) in assign.iter().enumerate() {
            groups.entry(*g).or_default().push(v as u32);
        }
        let cover = filter_singletons(&CommunitySet::new(groups.into_values()));
        let mut acc = ConsensusAccumulator::new((0..12).map(|i| format!("n{i:02}")).collect());
        acc.accumulate(&cover).unwrap();
        for (x, y, w) in acc.finish().entries() {
            prop_assert_eq!(w, 1.0);
            prop_assert_eq!(assign[x as usize], assign[y as usize]);
        }
    }

    #[test]
    fn raising_mu_never_adds_members(corpus in corpus_strategy(), picks in prop::collection::btree_set(0..10u32, 1..6), mu in 0.0..1.0f64, step in 0.0..0.5f64) {
        let lists: Vec<String> = picks.iter().map(|l| format!("l{l:02}")).collect();
        let low = derive_members(0, &lists, &corpus, mu);
        let high = derive_members(0, &lists, &corpus, mu + step);
        prop_assert!(high.user_set().is_subset(&low.user_set()));
        prop_assert!(low.members.values().all(|&w| w >= mu && w <= 1.0));
    }

    #[test]
    fn f1_lies_between_precision_and_recall(p in 0.0..=1.0f64, r in 0.0..=1.0f64) {
        let f = f1_score(p, r);
        prop_assert!(f >= p.min(r) - 1e-12 && f <= p.max(r) + 1e-12);
    }

    #[test]
    fn agreement_is_symmetric_and_bounded(a in cover_strategy(10), b in cover_strategy(10)) {
        let ab = cover_agreement(&a, &b);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, cover_agreement(&b, &a));
        prop_assert_eq!(cover_agreement(&a, &a), 1.0);
    }

    #[test]
    fn detection_is_deterministic(seed in any::<u64>()) {
        let planted = synth(&PlantedSpec { groups: 3, lists_per_group: 15, ..PlantedSpec::default() }, 5).unwrap();
        let g = build_list_graph(&planted.corpus, &GraphBuildConfig::default()).unwrap();
        prop_assert_eq!(detect(&g, &DetectorConfig::fast(seed)), detect(&g, &DetectorConfig::fast(seed)));
    }

    #[test]
    fn order_preserving_relabel_is_equivariant(seed in any::<u64>(), edges in prop::collection::vec((0..14u32, 0..14u32, 0.1..5.0f64), 1..40)) {
        let edges: Vec<(u32, u32, f64)> = edges.into_iter().filter(|e| e.0 != e.1).collect();
        let named = |prefix: &str| {
            let mut rows: Vec<(String, String, f64)> = edges
                .iter()
                .map(|&(a, b, w)| (format!("{prefix}{a:02}"), format!("{prefix}{b:02}"), w))
                .collect();
            rows.reverse();
            WeightedGraph::from_named((0..14).map(|i| format!("{prefix}{i:02}")), rows).unwrap()
        };
        let (g1, g2) = (named("a"), named("zz"));
        let c1 = detect(&g1, &DetectorConfig::thorough(seed));
        let c2 = detect(&g2, &DetectorConfig::thorough(seed));
        let renamed: Vec<Vec<String>> = c2
            .to_ids(g2.nodes())
            .into_iter()
            .map(|c| c.into_iter().map(|id| format!("a{}", &id[2..])).collect())
            .collect();
        prop_assert_eq!(c1.to_ids(g1.nodes()), renamed);
    }

    #[test]
    fn labels_come_from_the_community_text(picks in prop::collection::btree_set(0..40usize, 2..10)) {
        let planted = synth(&PlantedSpec { groups: 2, ..PlantedSpec::default() }, 11).unwrap();
        let config = LabelingConfig::default();
        let space = TermSpace::from_corpus(&planted.corpus, &config);
        let ids: Vec<String> = planted.corpus.list_ids().map(str::to_string).collect();
        let lists: Vec<String> = picks.iter().map(|&i| ids[i].clone()).collect();
        let text: Vec<String> = lists
            .iter()
            .map(|l| {
                let r = planted.corpus.list(l).unwrap();
                format!("{} {}", r.name, r.description)
            })
            .collect();
        let ranked = space.label(&lists, 3).unwrap();
        prop_assert!(ranked.windows(2).all(|w| w[0].1 >= w[1].1));
        for (term, _) in ranked.iter().filter(|(_, score)| *score > 0.0) {
            prop_assert!(term.split(' ').all(|t| text.iter().any(|s| s.contains(t))), "{term}");
        }
    }

    #[test]
    fn two_way_split_scores_are_antisymmetric(split in prop::collection::vec(any::<bool>(), 40)) {
        prop_assume!(split.iter().any(|&b| b) && split.iter().any(|&b| !b));
        let planted = synth(&PlantedSpec { groups: 2, lists_per_group: 20, ..PlantedSpec::default() }, 13).unwrap();
        let space = TermSpace::from_corpus(&planted.corpus, &LabelingConfig::default());
        let ids: Vec<&str> = planted.corpus.list_ids().collect();
        let (left, right): (Vec<_>, Vec<_>) = ids.iter().zip(&split).partition(|(_, &side)| side);
        let left: Vec<&str> = left.into_iter().map(|(id, _)| *id).collect();
        let right: Vec<&str> = right.into_iter().map(|(id, _)| *id).collect();
        let all = usize::MAX;
        let a: BTreeMap<String, f64> = space.label(&left, all).unwrap().into_iter().collect();
        let b: BTreeMap<String, f64> = space.label(&right, all).unwrap().into_iter().collect();
        for (term, sa) in &a {
            prop_assert!(sa * b[term] <= 1e-12, "{term}: {sa} vs {}", b[term]);
        }
    }
}

#[test]
fn fast_mode_never_crosses_a_light_bridge() {
    let nodes: Vec<String> = (0..10).map(|i| format!("n{i}")).collect();
    let mut edges = vec![(4, 5, 0.01)];
    for block in [0u32, 5] {
        for i in block..block + 5 {
            for j in i + 1..block + 5 {
                edges.push((i, j, 1.0));
            }
        }
    }
    let g = WeightedGraph::from_indexed(nodes, edges).unwrap();
    for seed in 0..200 {
        let cs = detect(&g, &DetectorConfig::fast(seed));
        assert!(cs.iter().all(|c| c.iter().all(|&v| v < 5) || c.iter().all(|&v| v >= 5)), "seed {seed}: {cs:?}");
        assert!(cs.iter().flatten().collect::<BTreeSet<_>>().len() == 10, "seed {seed}: {cs:?}");
    }
}

#[test]
fn base_runs_differ_across_seeds() {
    let planted = synth(&PlantedSpec { noise: 0.25, ..PlantedSpec::default() }, 3).unwrap();
    let g = build_list_graph(&planted.corpus, &GraphBuildConfig::default()).unwrap();
    let runs = base_community_sets(&LabelPropagation, &g, &EnsembleConfig { runs: 10, ..EnsembleConfig::default() }).unwrap();
    let distinct: BTreeSet<_> = runs.iter().map(|c| c.communities().to_vec()).collect();
    assert!(distinct.len() >= 2);
}

#[test]
fn consensus_is_sparse_and_no_larger_than_base_runs() {
    let planted = synth(&PlantedSpec::default(), 42).unwrap();
    let g = build_list_graph(&planted.corpus, &GraphBuildConfig::default()).unwrap();
    let config = EnsembleConfig { runs: 20, master_seed: 42, ..EnsembleConfig::default() };
    let m = run_ensemble(&g, &config).unwrap();
    let l = m.node_count();
    assert!(m.nnz() * 10 < l * (l - 1) / 2, "{} entries for {l} nodes", m.nnz());
    let base = base_community_sets(&LabelPropagation, &g, &config).unwrap();
    let mean_base = base.iter().map(CommunitySet::len).sum::<usize>() as f64 / base.len() as f64;
    let consensus = consensus_communities(&m, &config).unwrap();
    assert!(consensus.len() as f64 <= mean_base, "{} vs {mean_base}", consensus.len());
    assert!(consensus.len() >= 8);
}

#[test]
fn vacuous_tau_gives_no_communities() {
    let m = ConsensusMatrix::from_entries(vec!["a".into(), "b".into(), "c".into()], [((0, 1), 0.5), ((1, 2), 0.9)], 2);
    let config = EnsembleConfig { tau: 1.0, ..EnsembleConfig::default() };
    assert!(consensus_communities(&m, &config).unwrap().is_empty());
    assert_eq!(m.threshold_graph(0.0).edge_count(), 2);
}
