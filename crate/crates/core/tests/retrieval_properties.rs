mod common;

use hierlabel::corpus::{DocTermMatrix, NodeTermStats};
use hierlabel::labeling::{label, LabelConfig, MethodId};
use hierlabel::queryeval::{evaluate_all, retrieve, InvertedIndex, QueryKind};
use proptest::prelude::*;
use rand::Rng;

fn all_labels(m: &DocTermMatrix, h: &hierlabel::corpus::Hierarchy) -> Vec<hierlabel::labeling::LabelAssignment> {
    let stats = NodeTermStats::build(m, h);
    let cfg = LabelConfig { p_cap: 4, ..LabelConfig::default() };
    MethodId::ALL.iter().map(|&k| label(k, &stats, h, &cfg).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn retrieval_matches_document_scan(seed in any::<u64>()) {
        let (m, _) = common::random_instance(seed, 50, 60, 9);
        let index = InvertedIndex::new(&m);
        let mut r = common::rng(seed ^ 0x9e37);
        for _ in 0..20 {
            let q = common::random_query(&mut r, m.n_terms(), 3);
            let got: Vec<u32> = retrieve(&index, &q).ones().map(|d| d as u32).collect();
            prop_assert_eq!(got, common::brute_force_retrieve(&m, &q));
        }
    }

    #[test]
    fn generic_queries_nest(seed in any::<u64>()) {
        let (m, h) = common::random_instance(seed, 50, 60, 15);
        let v = common::nesting_violations(&m, &h, &all_labels(&m, &h));
        prop_assert!(v.is_empty(), "{:?}", v);
    }

    #[test]
    fn metrics_are_consistent(seed in any::<u64>()) {
        let (m, h) = common::random_instance(seed, 50, 60, 15);
        let (_, bad) = common::f_zero_violations(&m, &h, &all_labels(&m, &h));
        prop_assert!(bad.is_empty(), "{:?}", bad);
        let rows = evaluate_all(&InvertedIndex::new(&m), &h, &all_labels(&m, &h));
        prop_assert_eq!(rows.len(), 16 * h.len() * 2);
        for row in &rows {
            let x = row.metrics;
            prop_assert_eq!(x.tp + x.fp + x.fn_ + x.tn, m.n_docs() as u64);
            for v in [x.precision, x.recall, x.f] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(x.f <= x.precision.max(x.recall) + 1e-15);
            prop_assert!(x.f >= x.precision.min(x.recall) - 1e-15 || x.f == 0.0);
        }
    }
}

#[test]
fn root_queries_cover_their_documents() {
    // the root is relevant for every document, so its recall is the fraction
    // of documents containing a label term
    let mut r = common::rng(3);
    for _ in 0..20 {
        let seed = r.gen();
        let (m, h) = common::random_instance(seed, 30, 30, 7);
        let rows = evaluate_all(&InvertedIndex::new(&m), &h, &all_labels(&m, &h));
        for row in rows.iter().filter(|r| r.node == h.root() && r.kind == QueryKind::Specific) {
            if row.metrics.tp > 0 {
                assert_eq!(row.metrics.precision, 1.0);
            }
        }
    }
}
