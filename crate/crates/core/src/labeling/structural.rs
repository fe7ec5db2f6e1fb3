//! Tree-traversal methods built on the χ² independence test across a node's
//! children: Popescul & Ungar (top-down) and RLUM (bottom-up).
//!
//! Both rank the accepted terms of a node by raw node frequency. RLUM's
//! pruning of empty-label nodes is not applied; the hierarchy is never changed.

use super::contingency::{independence_not_rejected, Chi2Critical};
use super::select::{select_topk, Candidate};
use super::{Label, LabelAssignment, LabelConfig, LabelError, MethodId};
use crate::corpus::{Hierarchy, NodeId, NodeTermStats, TermId};

const POPESCUL_MIN_FREQ: u64 = 5;

fn by_frequency(stats: &NodeTermStats, node: NodeId, terms: impl Iterator<Item = TermId>) -> Vec<Candidate> {
    terms
        .map(|t| {
            let f = stats.freq(node, t);
            Candidate {
                term: t,
                score: f as f64,
                freq: f,
            }
        })
        .collect()
}

/// Top-down: a term labels an internal node when no ancestor holds it, every
/// child has it at least 5 times, and independence from the children is not
/// rejected at `alpha`. Leaves (optionally) take the most frequent terms not
/// used on their root path.
pub fn select_popescul_ungar(
    stats: &NodeTermStats,
    hierarchy: &Hierarchy,
    config: &LabelConfig,
) -> Result<LabelAssignment, LabelError> {
    let mut labels: Vec<Vec<Label>> = vec![Vec::new(); hierarchy.len()];
    let mut critical = Chi2Critical::new(config.alpha);

    for &node in hierarchy.preorder() {
        let on_path = |t: TermId, labels: &[Vec<Label>]| {
            hierarchy
                .ancestors(node)
                .any(|a| labels[a].iter().any(|l| l.term == t))
        };
        let children = hierarchy.children(node);
        let mut accepted = Vec::new();
        if children.is_empty() {
            if !config.popescul_leaves {
                continue;
            }
            accepted.extend(stats.support(node).iter().copied().filter(|&t| !on_path(t, &labels)));
        } else {
            for &t in stats.support(node) {
                if on_path(t, &labels) {
                    continue;
                }
                if children.iter().any(|&c| stats.freq(c, t) < POPESCUL_MIN_FREQ) {
                    continue;
                }
                if independence_not_rejected(stats, hierarchy, node, t, config.chi2_shape, &mut critical)? {
                    accepted.push(t);
                }
            }
        }
        labels[node] = select_topk(by_frequency(stats, node, accepted.into_iter()), config.p_cap);
    }
    Ok(LabelAssignment::new(MethodId::PopesculUngar, config.p_cap, labels))
}

/// Bottom-up: leaves start from every term they contain. An internal node
/// takes the terms present in all of its children whose χ² estimate is valid
/// (some child frequency reaches `big_threshold`) and whose independence from
/// the children is not rejected. Once a node's label is fixed, its terms are
/// removed from its children's labels.
pub fn select_rlum(
    stats: &NodeTermStats,
    hierarchy: &Hierarchy,
    config: &LabelConfig,
) -> Result<LabelAssignment, LabelError> {
    let mut labels: Vec<Vec<Label>> = vec![Vec::new(); hierarchy.len()];
    let mut critical = Chi2Critical::new(config.alpha);

    for node in hierarchy.postorder() {
        let children = hierarchy.children(node);
        let accepted: Vec<TermId> = if children.is_empty() {
            stats.support(node).to_vec()
        } else {
            let mut acc = Vec::new();
            for &t in stats.support(node) {
                if stats.child_support(node, t) as usize != children.len() {
                    continue;
                }
                let valid = children.iter().any(|&c| stats.freq(c, t) >= config.big_threshold);
                if valid && independence_not_rejected(stats, hierarchy, node, t, config.chi2_shape, &mut critical)? {
                    acc.push(t);
                }
            }
            acc
        };
        let chosen = select_topk(by_frequency(stats, node, accepted.into_iter()), config.p_cap);
        for &c in children {
            labels[c].retain(|l| !chosen.iter().any(|p| p.term == l.term));
        }
        labels[node] = chosen;
    }
    Ok(LabelAssignment::new(MethodId::Rlum, config.p_cap, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DocTermMatrix, NodeRecord};

    /// Root with two leaves (one doc each). Term 0 is uniform (10/10), term 1
    /// is concentrated in the left leaf (40/5), term 2 appears only on the left,
    /// term 3 is uniform but rare (3/3).
    fn two_leaves() -> (NodeTermStats, Hierarchy) {
        let cells = vec![
            (0, 0, 10),
            (1, 0, 10),
            (0, 1, 40),
            (1, 1, 5),
            (0, 2, 7),
            (0, 3, 3),
            (1, 3, 3),
            (0, 4, 50),
            (1, 4, 92),
        ];
        let m = DocTermMatrix::from_triplets(2, 5, cells).unwrap();
        let recs = vec![
            NodeRecord { id: 0, parent: None, children: vec![1, 2], docs: vec![] },
            NodeRecord { id: 1, parent: Some(0), children: vec![], docs: vec![0] },
            NodeRecord { id: 2, parent: Some(0), children: vec![], docs: vec![1] },
        ];
        let h = Hierarchy::new(recs, 2).unwrap();
        (NodeTermStats::build(&m, &h), h)
    }

    fn terms(a: &LabelAssignment, n: NodeId) -> Vec<TermId> {
        let mut t: Vec<_> = a.terms(n).collect();
        t.sort_unstable();
        t
    }

    #[test]
    fn popescul_assigns_uniform_terms_to_parent() {
        let (s, h) = two_leaves();
        // totals: left 110, right 110; term 0 10/10 is exactly independent.
        assert_eq!(s.total(1), s.total(2));
        let a = select_popescul_ungar(&s, &h, &LabelConfig::default()).unwrap();
        let root = terms(&a, 0);
        assert!(root.contains(&0));
        // term 3 fails the f >= 5 rule, term 2 is missing from a child
        assert!(!root.contains(&3) && !root.contains(&2));
        // term 1 is strongly dependent
        assert!(!root.contains(&1));
        for leaf in [1, 2] {
            assert!(!terms(&a, leaf).contains(&0));
        }
        assert!(terms(&a, 1).contains(&2));
    }

    #[test]
    fn popescul_leaves_can_be_disabled() {
        let (s, h) = two_leaves();
        let cfg = LabelConfig {
            popescul_leaves: false,
            ..LabelConfig::default()
        };
        let a = select_popescul_ungar(&s, &h, &cfg).unwrap();
        assert!(a.labels(1).is_empty() && a.labels(2).is_empty());
    }

    #[test]
    fn rlum_promotes_and_removes() {
        let (s, h) = two_leaves();
        let a = select_rlum(&s, &h, &LabelConfig::default()).unwrap();
        let root = terms(&a, 0);
        assert!(root.contains(&0));
        // term 3 (3/3) never reaches the big threshold of 5
        assert!(!root.contains(&3));
        // term 2 is absent from the right child
        assert!(!root.contains(&2));
        assert!(terms(&a, 1).contains(&2));
        for leaf in [1, 2] {
            for t in &root {
                assert!(!terms(&a, leaf).contains(t));
            }
        }
    }

    #[test]
    fn single_node_hierarchy() {
        let m = DocTermMatrix::from_triplets(1, 2, vec![(0, 0, 3), (0, 1, 1)]).unwrap();
        let h = Hierarchy::single_node(1).unwrap();
        let s = NodeTermStats::build(&m, &h);
        let a = select_popescul_ungar(&s, &h, &LabelConfig::default()).unwrap();
        assert_eq!(terms(&a, 0), vec![0, 1]);
        let a = select_rlum(&s, &h, &LabelConfig::default()).unwrap();
        assert_eq!(a.labels(0)[0].term, 0);
    }
}
