//! Frequency-based term weights: raw frequency, global/local idf, inverse
//! cluster frequency and the path-length-discounted hierarchical weight.
//!
//! Logarithms are natural. Every weight whose ratio would be undefined
//! (zero document frequency, no sibling support) is 0.

use crate::corpus::{Hierarchy, NodeId, NodeTermStats, TermId};

/// `f_i(a_k)`, the cumulated frequency of the term in the node.
pub fn score_mtwl_raw(stats: &NodeTermStats, node: NodeId, term: TermId) -> f64 {
    stats.freq(node, term) as f64
}

/// `ln(|D| / #(a_k, D))`.
pub fn idf_global(stats: &NodeTermStats, term: TermId) -> f64 {
    ln_ratio(stats.n_docs() as f64, stats.global_df(term) as f64)
}

/// `ln(|D_p| / #(a_k, D_p))` where `p` is the parent of `node` (the root is
/// its own parent).
pub fn idf_local(stats: &NodeTermStats, hierarchy: &Hierarchy, node: NodeId, term: TermId) -> f64 {
    let parent = hierarchy.parent_or_self(node);
    ln_ratio(stats.size(parent) as f64, stats.docfreq(parent, term) as f64)
}

/// Inverse cluster frequency of the term for `node`:
/// `exp(#(a_k, D_node) / |D_node|) · ln(#(p) / #(a_k, p) + 1)` with `p` the parent.
pub fn icf(stats: &NodeTermStats, hierarchy: &Hierarchy, node: NodeId, term: TermId) -> f64 {
    let parent = hierarchy.parent_or_self(node);
    let siblings = hierarchy.children(parent).len() as f64;
    let support = stats.child_support(parent, term) as f64;
    if support == 0.0 {
        return 0.0;
    }
    let spread = stats.docfreq(node, term) as f64 / stats.size(node) as f64;
    spread.exp() * (siblings / support + 1.0).ln()
}

fn ln_ratio(total: f64, count: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else {
        (total / count).ln()
    }
}

/// The four flat frequency schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatScheme {
    MtwlRaw,
    MtwlIdf,
    IcwlRaw,
    IcwlIdf,
}

impl FlatScheme {
    /// Multiplier applied to the raw frequency for `node`.
    pub fn weight(self, stats: &NodeTermStats, hierarchy: &Hierarchy, node: NodeId, term: TermId) -> f64 {
        let idf = || idf_global(stats, term) * idf_local(stats, hierarchy, node, term);
        match self {
            FlatScheme::MtwlRaw => 1.0,
            FlatScheme::MtwlIdf => idf(),
            FlatScheme::IcwlRaw => icf(stats, hierarchy, node, term),
            FlatScheme::IcwlIdf => idf() * icf(stats, hierarchy, node, term),
        }
    }
}

pub fn score_flat(
    scheme: FlatScheme,
    stats: &NodeTermStats,
    hierarchy: &Hierarchy,
    node: NodeId,
    term: TermId,
) -> f64 {
    let f = score_mtwl_raw(stats, node, term);
    if f == 0.0 {
        return 0.0;
    }
    scheme.weight(stats, hierarchy, node, term) * f
}

/// Sibling base cluster frequency for a proper descendant `node`: the
/// fraction of the children of `q` containing the term, where `q` is the
/// parent of `node`'s parent (root convention applies).
pub fn sibling_cf(stats: &NodeTermStats, hierarchy: &Hierarchy, node: NodeId, term: TermId) -> f64 {
    let q = hierarchy.parent_or_self(hierarchy.parent_or_self(node));
    let n_children = hierarchy.children(q).len();
    if n_children == 0 {
        return 0.0;
    }
    stats.child_support(q, term) as f64 / n_children as f64
}

/// `Σ (1/e) · cf · v` over `(e, cf, v)` triples.
pub fn path_weighted_sum<I: IntoIterator<Item = (u32, f64, f64)>>(terms: I) -> f64 {
    terms
        .into_iter()
        .map(|(e, cf, v)| cf * v / e as f64)
        .sum()
}

/// Hierarchical weight of `term` at `node`: path-length-discounted sum over
/// every proper descendant `g` of `cf_g · v(g)`. Leaves weigh 0.
pub fn hier_weight<F>(stats: &NodeTermStats, hierarchy: &Hierarchy, node: NodeId, term: TermId, v: F) -> f64
where
    F: Fn(NodeId) -> f64,
{
    path_weighted_sum(
        hierarchy
            .descendants_with_distance(node)
            .into_iter()
            .map(|(g, e)| (e, sibling_cf(stats, hierarchy, g, term), v(g))),
    )
}
