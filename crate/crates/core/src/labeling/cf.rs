//! Clustering F-measure methods. Leaves are scored by the harmonic mean of
//! cluster recall `f_leaf(a)/f(a)` and cluster precision `f_leaf(a)/Σ_t f_leaf(t)`;
//! internal nodes either average their children (CFAverage) or compare
//! themselves with the other clusters at their children's level
//! (CFLeaveOneOut).

use rayon::prelude::*;

use super::select::{select_topk, Candidate};
use super::{Label, LabelAssignment, MethodId};
use crate::corpus::{Hierarchy, NodeId, NodeTermStats, TermId};

fn harmonic(recall: f64, precision: f64) -> f64 {
    if recall <= 0.0 || precision <= 0.0 {
        0.0
    } else {
        2.0 * recall * precision / (recall + precision)
    }
}

pub fn cf_measure_leaf(stats: &NodeTermStats, leaf: NodeId, term: TermId) -> f64 {
    let f = stats.freq(leaf, term) as f64;
    if f == 0.0 {
        return 0.0;
    }
    let recall = f / stats.collection_freq(term) as f64;
    let precision = f / stats.total(leaf) as f64;
    harmonic(recall, precision)
}

fn leaf_scores(stats: &NodeTermStats, leaf: NodeId) -> Vec<(TermId, f64)> {
    stats
        .support(leaf)
        .iter()
        .map(|&t| (t, cf_measure_leaf(stats, leaf, t)))
        .collect()
}

fn top(stats: &NodeTermStats, node: NodeId, scores: &[(TermId, f64)], p_cap: usize) -> Vec<Label> {
    select_topk(
        scores
            .iter()
            .map(|&(term, score)| Candidate {
                term,
                score,
                freq: stats.freq(node, term),
            })
            .collect(),
        p_cap,
    )
}

/// Internal nodes take the mean CF of their direct children, bottom-up.
pub fn select_cf_average(stats: &NodeTermStats, hierarchy: &Hierarchy, p_cap: usize) -> LabelAssignment {
    let mut cf: Vec<Vec<(TermId, f64)>> = vec![Vec::new(); hierarchy.len()];
    let mut sum = vec![0.0f64; stats.n_terms()];
    let mut seen = vec![false; stats.n_terms()];
    for node in hierarchy.postorder() {
        let children = hierarchy.children(node);
        if children.is_empty() {
            cf[node] = leaf_scores(stats, node);
            continue;
        }
        let mut touched = Vec::new();
        for &c in children {
            for &(t, v) in &cf[c] {
                if !std::mem::replace(&mut seen[t as usize], true) {
                    touched.push(t);
                }
                sum[t as usize] += v;
            }
        }
        touched.sort_unstable();
        let n = children.len() as f64;
        cf[node] = touched
            .iter()
            .map(|&t| {
                let i = t as usize;
                let mean = sum[i] / n;
                sum[i] = 0.0;
                seen[i] = false;
                (t, mean)
            })
            .collect();
    }
    let labels = (0..hierarchy.len())
        .map(|n| top(stats, n, &cf[n], p_cap))
        .collect();
    LabelAssignment::new(MethodId::CfAverage, p_cap, labels)
}

/// Sparse per-level term sums `Σ_{v at level} f_v(a)`.
fn level_sums(stats: &NodeTermStats, hierarchy: &Hierarchy) -> Vec<Vec<(TermId, u64)>> {
    (0..=hierarchy.depth())
        .map(|level| {
            let mut acc: Vec<(TermId, u64)> = hierarchy
                .nodes_at_level(level)
                .iter()
                .flat_map(|&n| {
                    let e = stats.node(n);
                    e.support().iter().copied().zip(e.freqs().iter().copied())
                })
                .collect();
            acc.sort_unstable_by_key(|x| x.0);
            let mut merged: Vec<(TermId, u64)> = Vec::with_capacity(acc.len());
            for (t, f) in acc {
                match merged.last_mut() {
                    Some(last) if last.0 == t => last.1 += f,
                    _ => merged.push((t, f)),
                }
            }
            merged
        })
        .collect()
}

fn lookup(sums: &[(TermId, u64)], term: TermId) -> u64 {
    sums.binary_search_by_key(&term, |x| x.0).map_or(0, |i| sums[i].1)
}

/// CF of internal node `node` against the other clusters at its children's
/// level: recall `f_i(a) / (Σ_Z f_v(a) − Σ_j f_ij(a))`, precision
/// `f_i(a) / Σ_t f_i(a_t)`. A non-positive recall denominator scores 0.
fn leave_one_out_scores(stats: &NodeTermStats, hierarchy: &Hierarchy, node: NodeId, level_sum: &[(TermId, u64)]) -> Vec<(TermId, f64)> {
    let children = hierarchy.children(node);
    let total = stats.total(node) as f64;
    stats
        .support(node)
        .iter()
        .map(|&t| {
            let own: u64 = children.iter().map(|&c| stats.freq(c, t)).sum();
            let others = lookup(level_sum, t) as i128 - own as i128;
            if others <= 0 {
                return (t, 0.0);
            }
            let f = stats.freq(node, t) as f64;
            (t, harmonic(f / others as f64, f / total))
        })
        .collect()
}

pub fn select_cf_leave_one_out(stats: &NodeTermStats, hierarchy: &Hierarchy, p_cap: usize) -> LabelAssignment {
    let sums = level_sums(stats, hierarchy);
    let labels = (0..hierarchy.len())
        .into_par_iter()
        .map(|node| {
            let scores = if hierarchy.is_leaf(node) {
                leaf_scores(stats, node)
            } else {
                let child_level = hierarchy.level(node) as usize + 1;
                leave_one_out_scores(stats, hierarchy, node, &sums[child_level])
            };
            top(stats, node, &scores, p_cap)
        })
        .collect();
    LabelAssignment::new(MethodId::CfLeaveOneOut, p_cap, labels)
}
