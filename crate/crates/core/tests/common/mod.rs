//! Seeded corpus and hierarchy generators shared by the integration tests.

#![allow(dead_code)]

use hierlabel::corpus::{DocId, DocTermMatrix, Hierarchy, NodeRecord, TermId};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds records from a parent list (`parents[0]` is the root) and leaf
/// document lists.
pub fn hierarchy_from_parents(parents: &[Option<usize>], leaf_docs: &[Vec<DocId>], n_docs: usize) -> Hierarchy {
    let n = parents.len();
    let mut children = vec![Vec::new(); n];
    for (id, p) in parents.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(id);
        }
    }
    let records = (0..n)
        .map(|id| NodeRecord {
            id,
            parent: parents[id],
            children: children[id].clone(),
            docs: leaf_docs[id].clone(),
        })
        .collect();
    Hierarchy::new(records, n_docs).expect("generated hierarchy is valid")
}

/// Random tree of at most `max_nodes` nodes, internal nodes with one to three
/// children, documents spread over the leaves with at least one per leaf.
/// Each leaf prefers its own random topic terms.
pub fn random_instance(seed: u64, max_docs: usize, max_terms: usize, max_nodes: usize) -> (DocTermMatrix, Hierarchy) {
    let mut r = rng(seed);
    let target = r.gen_range(1..=max_nodes);
    let mut parents: Vec<Option<usize>> = vec![None];
    let mut leaves = vec![0usize];
    while parents.len() < target {
        let room = target - parents.len();
        let k = if room >= 2 && r.gen_bool(0.85) { r.gen_range(2..=room.min(3)) } else { 1 };
        let at = r.gen_range(0..leaves.len());
        let node = leaves.swap_remove(at);
        for _ in 0..k {
            leaves.push(parents.len());
            parents.push(Some(node));
        }
    }
    leaves.sort_unstable();

    let n_docs = r.gen_range(leaves.len().max(2)..=max_docs.max(leaves.len()));
    let n_terms = r.gen_range(5..=max_terms.max(5));
    let mut order: Vec<DocId> = (0..n_docs as DocId).collect();
    order.shuffle(&mut r);
    let mut leaf_docs = vec![Vec::new(); parents.len()];
    for (i, &d) in order.iter().enumerate() {
        let leaf = if i < leaves.len() { leaves[i] } else { leaves[r.gen_range(0..leaves.len())] };
        leaf_docs[leaf].push(d);
    }
    let hierarchy = hierarchy_from_parents(&parents, &leaf_docs, n_docs);

    let topics: Vec<Vec<TermId>> = (0..parents.len())
        .map(|_| (0..r.gen_range(1..=4)).map(|_| r.gen_range(0..n_terms as TermId)).collect())
        .collect();
    let mut cells = Vec::new();
    for &leaf in &leaves {
        for &d in &leaf_docs[leaf] {
            let mut terms: Vec<TermId> = (0..r.gen_range(1..=12))
                .map(|_| {
                    if r.gen_bool(0.5) {
                        *topics[leaf].choose(&mut r).unwrap()
                    } else {
                        r.gen_range(0..n_terms as TermId)
                    }
                })
                .collect();
            terms.sort_unstable();
            terms.dedup();
            for t in terms {
                let c = if r.gen_bool(0.2) { r.gen_range(5..=15) } else { r.gen_range(1..=4) };
                cells.push((d, t, c));
            }
        }
    }
    (DocTermMatrix::from_triplets(n_docs, n_terms, cells).unwrap(), hierarchy)
}

/// Balanced binary tree with `depth + 1` levels; leaves get contiguous
/// document blocks.
pub fn balanced_binary(depth: u32, n_docs: usize) -> Hierarchy {
    let n = (1usize << (depth + 1)) - 1;
    let first_leaf = (1usize << depth) - 1;
    let n_leaves = n - first_leaf;
    let parents: Vec<Option<usize>> = (0..n).map(|i| if i == 0 { None } else { Some((i - 1) / 2) }).collect();
    let mut leaf_docs = vec![Vec::new(); n];
    for (k, docs) in leaf_docs[first_leaf..].iter_mut().enumerate() {
        let lo = k * n_docs / n_leaves;
        let hi = (k + 1) * n_docs / n_leaves;
        *docs = (lo as DocId..hi as DocId).collect();
    }
    hierarchy_from_parents(&parents, &leaf_docs, n_docs)
}

/// Topic-tree corpus over a balanced binary hierarchy: every node owns a
/// slice of the vocabulary and a document draws from the slices on its root
/// path plus a Zipf-like background.
pub fn topic_tree_corpus(seed: u64, depth: u32, n_docs: usize, n_terms: usize) -> (DocTermMatrix, Hierarchy) {
    let hierarchy = balanced_binary(depth, n_docs);
    let n_nodes = hierarchy.len();
    let per_node = (n_terms * 4 / 5) / n_nodes;
    assert!(per_node >= 1, "vocabulary too small for the tree");
    let background_start = per_node * n_nodes;
    let background: Vec<TermId> = (background_start as TermId..n_terms as TermId).collect();
    let zipf = WeightedIndex::new((1..=background.len()).map(|k| 1.0 / k as f64)).unwrap();

    let mut r = rng(seed);
    let mut cells = Vec::new();
    for leaf in (0..n_nodes).filter(|&n| hierarchy.is_leaf(n)) {
        let mut path: Vec<usize> = hierarchy.ancestors(leaf).collect();
        path.push(leaf);
        for &d in hierarchy.leaf_docs(leaf) {
            let mut counts = std::collections::BTreeMap::<TermId, u64>::new();
            for _ in 0..r.gen_range(40..=80) {
                let t = if r.gen_bool(0.6) {
                    let node = *path.choose(&mut r).unwrap();
                    (node * per_node + r.gen_range(0..per_node)) as TermId
                } else {
                    background[zipf.sample(&mut r)]
                };
                *counts.entry(t).or_default() += 1;
            }
            cells.extend(counts.into_iter().map(|(t, c)| (d, t, c)));
        }
    }
    (DocTermMatrix::from_triplets(n_docs, n_terms, cells).unwrap(), hierarchy)
}

use hierlabel::corpus::NodeTermStats;
use hierlabel::labeling::{LabelAssignment, MethodId};
use hierlabel::queryeval::{evaluate_all, retrieve, InvertedIndex, NodeQueries, QueryExpr, QueryKind};

/// Violations of the per-method label invariants, as readable strings.
pub fn label_violations(stats: &NodeTermStats, h: &Hierarchy, a: &LabelAssignment, p_cap: usize) -> Vec<String> {
    let m = a.method;
    let mut out = Vec::new();
    for (node, labels) in a.iter() {
        if labels.len() > p_cap {
            out.push(format!("{m} node {node}: {} labels > {p_cap}", labels.len()));
        }
        for l in labels {
            if !(l.score > 0.0 && l.score.is_finite()) {
                out.push(format!("{m} node {node}: term {} has score {}", l.term, l.score));
            }
        }
        for w in labels.windows(2) {
            let key = |l: &hierlabel::labeling::Label| (l.score, stats.freq(node, l.term));
            let (a0, a1) = (key(&w[0]), key(&w[1]));
            let ordered = a0.0 > a1.0 || (a0.0 == a1.0 && (a0.1 > a1.1 || (a0.1 == a1.1 && w[0].term < w[1].term)));
            if !ordered {
                out.push(format!("{m} node {node}: terms {} and {} out of order", w[0].term, w[1].term));
            }
        }
        let mut terms: Vec<TermId> = labels.iter().map(|l| l.term).collect();
        terms.sort_unstable();
        if terms.windows(2).any(|w| w[0] == w[1]) {
            out.push(format!("{m} node {node}: repeated term"));
        }
        let hierarchical = m.is_hier_frequency() || matches!(m, MethodId::HierRclChi2 | MethodId::HierRclJsd);
        if hierarchical && h.is_leaf(node) && !labels.is_empty() {
            out.push(format!("{m} leaf {node}: nonzero hierarchical score"));
        }
        if m == MethodId::Rlum {
            if let Some(p) = h.parent(node) {
                if let Some(t) = a.terms(node).find(|t| a.terms(p).any(|u| u == *t)) {
                    out.push(format!("RLUM node {node}: term {t} shared with parent {p}"));
                }
            }
        }
        if m == MethodId::PopesculUngar {
            for anc in h.ancestors(node) {
                if let Some(t) = a.terms(node).find(|t| a.terms(anc).any(|u| u == *t)) {
                    out.push(format!("PopesculUngar node {node}: term {t} also on ancestor {anc}"));
                }
            }
        }
    }
    out
}

/// Documents of `q` by scanning every document row.
pub fn brute_force_retrieve(matrix: &DocTermMatrix, q: &QueryExpr) -> Vec<DocId> {
    fn hit(matrix: &DocTermMatrix, d: DocId, q: &QueryExpr) -> bool {
        match q {
            QueryExpr::Term(t) => matrix.contains(d, *t),
            QueryExpr::Or(parts) => parts.iter().any(|p| hit(matrix, d, p)),
            QueryExpr::And(parts) => parts.iter().all(|p| hit(matrix, d, p)),
        }
    }
    (0..matrix.n_docs() as DocId).filter(|&d| hit(matrix, d, q)).collect()
}

pub fn random_query(r: &mut impl Rng, n_terms: usize, depth: u32) -> QueryExpr {
    if depth == 0 || r.gen_bool(0.3) {
        return QueryExpr::Term(r.gen_range(0..n_terms as TermId));
    }
    let parts: Vec<QueryExpr> = (0..r.gen_range(1..=4)).map(|_| random_query(r, n_terms, depth - 1)).collect();
    if r.gen_bool(0.5) {
        QueryExpr::Or(parts)
    } else {
        QueryExpr::And(parts)
    }
}

/// Nodes whose generic retrieval is not contained in the parent's.
pub fn nesting_violations(matrix: &DocTermMatrix, h: &Hierarchy, assignments: &[LabelAssignment]) -> Vec<String> {
    let index = InvertedIndex::new(matrix);
    let mut out = Vec::new();
    for a in assignments {
        let q = NodeQueries::derive(h, a);
        for node in 0..h.len() {
            let (Some(p), Some(qn)) = (h.parent(node), q.get(QueryKind::Generic, node)) else { continue };
            let Some(qp) = q.get(QueryKind::Generic, p) else {
                out.push(format!("{} node {node}: generic query without one at parent {p}", a.method));
                continue;
            };
            if !retrieve(&index, qn).is_subset(&retrieve(&index, qp)) {
                out.push(format!("{} node {node}: generic retrieval not within parent {p}", a.method));
            }
        }
    }
    out
}

/// Evaluation rows whose F is not exactly 0 although precision or recall is.
pub fn f_zero_violations(matrix: &DocTermMatrix, h: &Hierarchy, assignments: &[LabelAssignment]) -> (usize, Vec<String>) {
    let rows = evaluate_all(&InvertedIndex::new(matrix), h, assignments);
    let bad = rows
        .iter()
        .filter(|r| (r.metrics.precision == 0.0 || r.metrics.recall == 0.0) && r.metrics.f.to_bits() != 0.0f64.to_bits())
        .map(|r| format!("{} node {} {}: F = {}", r.method, r.node, r.kind, r.metrics.f))
        .collect();
    (rows.len(), bad)
}
