//! Observed label coherence (OC-NPMI) over a reference corpus whose windows
//! are whole documents.

use std::collections::HashMap;
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{DocTermMatrix, NodeId, TermId, Vocabulary};
use crate::labeling::{LabelAssignment, MethodId};

#[derive(Debug, Error)]
pub enum CoherenceError {
    #[error("reference corpus has no documents")]
    EmptyCorpus,
    #[error("reading reference corpus: {0}")]
    Io(#[from] std::io::Error),
}

/// A reference corpus reduced to the set of vocabulary terms of each document.
#[derive(Debug, Clone, Default)]
pub struct ReferenceDocs {
    docs: Vec<Vec<TermId>>,
    /// Tokens that matched no vocabulary surface.
    pub unknown_tokens: u64,
}

impl ReferenceDocs {
    /// One document per line, whitespace-separated tokens.
    pub fn read_from<R: BufRead>(reader: R, vocab: &Vocabulary) -> Result<Self, CoherenceError> {
        let mut out = ReferenceDocs::default();
        for line in reader.lines() {
            let line = line?;
            let mut doc = Vec::new();
            for tok in line.split_whitespace() {
                match vocab.id(tok) {
                    Some(t) => doc.push(t),
                    None => out.unknown_tokens += 1,
                }
            }
            doc.sort_unstable();
            doc.dedup();
            out.docs.push(doc);
        }
        Ok(out)
    }

    /// Uses the documents of a term matrix as windows.
    pub fn from_matrix(matrix: &DocTermMatrix) -> Self {
        Self {
            docs: (0..matrix.n_docs() as u32).map(|d| matrix.doc_terms(d).to_vec()).collect(),
            unknown_tokens: 0,
        }
    }

    pub fn from_docs(docs: Vec<Vec<TermId>>) -> Self {
        let docs = docs
            .into_iter()
            .map(|mut d| {
                d.sort_unstable();
                d.dedup();
                d
            })
            .collect();
        Self { docs, unknown_tokens: 0 }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn docs(&self) -> &[Vec<TermId>] {
        &self.docs
    }
}

/// Window counts; pairs are stored once with the smaller id first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CooccurrenceCounts {
    pub n_windows: u64,
    unary: HashMap<TermId, u64>,
    pairwise: HashMap<(TermId, TermId), u64>,
}

impl CooccurrenceCounts {
    pub fn unary(&self, a: TermId) -> u64 {
        self.unary.get(&a).copied().unwrap_or(0)
    }

    pub fn pairwise(&self, a: TermId, b: TermId) -> u64 {
        if a == b {
            return self.unary(a);
        }
        let key = if a < b { (a, b) } else { (b, a) };
        self.pairwise.get(&key).copied().unwrap_or(0)
    }

    fn add_window(&mut self, terms: &[TermId]) {
        self.n_windows += 1;
        for (i, &a) in terms.iter().enumerate() {
            *self.unary.entry(a).or_default() += 1;
            for &b in &terms[i + 1..] {
                *self.pairwise.entry((a, b)).or_default() += 1;
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.n_windows += other.n_windows;
        for (k, v) in other.unary {
            *self.unary.entry(k).or_default() += v;
        }
        for (k, v) in other.pairwise {
            *self.pairwise.entry(k).or_default() += v;
        }
        self
    }
}

fn count_filtered(reference: &ReferenceDocs, keep: impl Fn(TermId) -> bool + Sync) -> Result<CooccurrenceCounts, CoherenceError> {
    if reference.is_empty() {
        return Err(CoherenceError::EmptyCorpus);
    }
    Ok(reference
        .docs
        .par_iter()
        .fold(CooccurrenceCounts::default, |mut acc, doc| {
            let terms: Vec<TermId> = doc.iter().copied().filter(|&t| keep(t)).collect();
            acc.add_window(&terms);
            acc
        })
        .reduce(CooccurrenceCounts::default, CooccurrenceCounts::merge))
}

/// Counts every term and term pair over all windows.
pub fn count_cooccurrence(reference: &ReferenceDocs) -> Result<CooccurrenceCounts, CoherenceError> {
    count_filtered(reference, |_| true)
}

/// Counts restricted to `terms`; other terms are ignored, window count unchanged.
pub fn count_cooccurrence_among(reference: &ReferenceDocs, terms: &[TermId]) -> Result<CooccurrenceCounts, CoherenceError> {
    let mut keep: Vec<TermId> = terms.to_vec();
    keep.sort_unstable();
    keep.dedup();
    count_filtered(reference, |t| keep.binary_search(&t).is_ok())
}

/// Normalized PMI. Limits: no joint window → −1, joint probability 1 → 1,
/// a term absent from the reference → 0. `epsilon` is added to the joint
/// probability when positive.
pub fn npmi(counts: &CooccurrenceCounts, a: TermId, b: TermId, epsilon: f64) -> f64 {
    let (ca, cb) = (counts.unary(a), counts.unary(b));
    if ca == 0 || cb == 0 {
        return 0.0;
    }
    let n = counts.n_windows as f64;
    let cab = counts.pairwise(a, b);
    let pab = cab as f64 / n + epsilon;
    if pab <= 0.0 {
        return -1.0;
    }
    if pab >= 1.0 {
        return 1.0;
    }
    let (pa, pb) = (ca as f64 / n, cb as f64 / n);
    let value = (pab.ln() - (pa.ln() + pb.ln())) / -pab.ln();
    value.clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OcAggregate {
    #[default]
    Sum,
    Mean,
}

/// OC over all pairs of the first `min(p_cap, |label|)` terms; 0 for fewer than two.
pub fn oc_npmi(counts: &CooccurrenceCounts, label: &[TermId], p_cap: usize, aggregate: OcAggregate, epsilon: f64) -> f64 {
    let top = &label[..label.len().min(p_cap)];
    if top.len() < 2 {
        return 0.0;
    }
    let mut values = Vec::with_capacity(top.len() * (top.len() - 1) / 2);
    for k1 in 1..top.len() {
        for k2 in 0..k1 {
            values.push(npmi(counts, top[k1], top[k2], epsilon));
        }
    }
    // a fixed summation order keeps the result independent of term order
    values.sort_by(f64::total_cmp);
    let sum: f64 = values.iter().sum();
    match aggregate {
        OcAggregate::Sum => sum,
        OcAggregate::Mean => sum / values.len() as f64,
    }
}

/// Linear interpolation between order statistics (type 7).
pub fn quantile_type7(values: &[f64], prob: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeCoherence {
    pub node: NodeId,
    pub oc: f64,
    /// Label terms never seen in the reference corpus.
    pub absent_terms: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodCoherence {
    pub method: MethodId,
    pub nodes: Vec<NodeCoherence>,
    pub upper_quartile: f64,
    pub maximum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceOptions {
    pub p_cap: usize,
    pub aggregate: OcAggregate,
    pub epsilon: f64,
}

impl Default for CoherenceOptions {
    fn default() -> Self {
        Self {
            p_cap: 10,
            aggregate: OcAggregate::Sum,
            epsilon: 0.0,
        }
    }
}

/// Per-method upper quartile and maximum over every node, zeros included.
pub fn summarize_coherence(method: MethodId, nodes: Vec<NodeCoherence>) -> MethodCoherence {
    let values: Vec<f64> = nodes.iter().map(|n| n.oc).collect();
    MethodCoherence {
        method,
        upper_quartile: quantile_type7(&values, 0.75),
        maximum: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        nodes,
    }
}

/// Scores every node label of every assignment.
pub fn score_assignments(
    counts: &CooccurrenceCounts,
    assignments: &[LabelAssignment],
    options: &CoherenceOptions,
) -> Vec<MethodCoherence> {
    assignments
        .iter()
        .map(|a| {
            let nodes = (0..a.n_nodes())
                .into_par_iter()
                .map(|node| {
                    let terms: Vec<TermId> = a.terms(node).collect();
                    NodeCoherence {
                        node,
                        oc: oc_npmi(counts, &terms, options.p_cap, options.aggregate, options.epsilon),
                        absent_terms: terms.iter().filter(|&&t| counts.unary(t) == 0).count(),
                    }
                })
                .collect();
            summarize_coherence(a.method, nodes)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Builds counts realizing P(a), P(b), P(a,b) over `n` windows.
    fn counts(n: u64, ca: u64, cb: u64, cab: u64) -> CooccurrenceCounts {
        let mut docs = Vec::new();
        for i in 0..n {
            let mut d = Vec::new();
            if i < ca {
                d.push(0);
            }
            if i < cab || (i >= ca && i < ca + cb - cab) {
                d.push(1);
            }
            docs.push(d);
        }
        let c = count_cooccurrence(&ReferenceDocs::from_docs(docs)).unwrap();
        assert_eq!((c.unary(0), c.unary(1), c.pairwise(0, 1)), (ca, cb, cab));
        c
    }

    #[test]
    fn anchors() {
        assert_eq!(npmi(&counts(10, 1, 1, 1), 0, 1, 0.0), 1.0);
        assert!(npmi(&counts(4, 2, 2, 1), 0, 1, 0.0).abs() < 1e-12);
        assert_eq!(npmi(&counts(10, 3, 3, 0), 0, 1, 0.0), -1.0);
        assert_relative_eq!(npmi(&counts(20, 2, 2, 1), 0, 1, 0.0), 0.5372435736804817, max_relative = 1e-12);
        assert_eq!(npmi(&counts(3, 3, 3, 3), 0, 1, 0.0), 1.0);
        // term never seen
        assert_eq!(npmi(&counts(10, 3, 3, 0), 0, 7, 0.0), 0.0);
    }

    #[test]
    fn single_window_counts() {
        let r = ReferenceDocs::read_from("alpha beta zzz alpha\n".as_bytes(), &Vocabulary::new(vec!["alpha".into(), "beta".into()]).unwrap()).unwrap();
        assert_eq!(r.unknown_tokens, 1);
        let c = count_cooccurrence(&r).unwrap();
        assert_eq!((c.n_windows, c.unary(0), c.unary(1), c.pairwise(0, 1)), (1, 1, 1, 1));
        assert!(count_cooccurrence(&ReferenceDocs::default()).is_err());
    }

    #[test]
    fn oc_small_labels() {
        let c = counts(20, 2, 2, 1);
        assert_eq!(oc_npmi(&c, &[0], 10, OcAggregate::Sum, 0.0), 0.0);
        assert_eq!(oc_npmi(&c, &[], 10, OcAggregate::Sum, 0.0), 0.0);
        assert_eq!(oc_npmi(&c, &[0, 1], 10, OcAggregate::Sum, 0.0), npmi(&c, 0, 1, 0.0));
        assert_eq!(oc_npmi(&c, &[0, 1], 1, OcAggregate::Sum, 0.0), 0.0);
    }

    #[test]
    fn quartiles() {
        assert_eq!(quantile_type7(&[0.0; 4], 0.75), 0.0);
        assert_eq!(quantile_type7(&[4.0, 1.0, 3.0, 2.0], 0.75), 3.25);
        assert_eq!(quantile_type7(&[0.3], 0.75), 0.3);
        let s = summarize_coherence(
            MethodId::MtwlRaw,
            (0..4).map(|i| NodeCoherence { node: i, oc: (i + 1) as f64, absent_terms: 0 }).collect(),
        );
        assert_eq!((s.upper_quartile, s.maximum), (3.25, 4.0));
    }

    fn random_docs() -> impl Strategy<Value = Vec<Vec<TermId>>> {
        prop::collection::vec(prop::collection::vec(0u32..8, 0..6), 1..30)
    }

    proptest! {
        #[test]
        fn counts_match_brute_force(docs in random_docs()) {
            let r = ReferenceDocs::from_docs(docs.clone());
            let c = count_cooccurrence(&r).unwrap();
            let restricted = count_cooccurrence_among(&r, &[1, 3, 5]).unwrap();
            for a in 0..8u32 {
                prop_assert_eq!(c.unary(a), docs.iter().filter(|d| d.contains(&a)).count() as u64);
                for b in 0..8u32 {
                    let both = docs.iter().filter(|d| d.contains(&a) && d.contains(&b)).count() as u64;
                    prop_assert_eq!(c.pairwise(a, b), both);
                    if [1, 3, 5].contains(&a) && [1, 3, 5].contains(&b) {
                        prop_assert_eq!(restricted.pairwise(a, b), both);
                    }
                    prop_assert!(c.pairwise(a, b) <= c.unary(a).min(c.unary(b)));
                }
            }
        }

        #[test]
        fn npmi_bounds_symmetry_doubling(docs in random_docs(), a in 0u32..8, b in 0u32..8) {
            let r = ReferenceDocs::from_docs(docs.clone());
            let c = count_cooccurrence(&r).unwrap();
            let v = npmi(&c, a, b, 0.0);
            prop_assert!((-1.0..=1.0).contains(&v));
            prop_assert_eq!(v, npmi(&c, b, a, 0.0));
            let doubled: Vec<_> = docs.iter().chain(docs.iter()).cloned().collect();
            let c2 = count_cooccurrence(&ReferenceDocs::from_docs(doubled)).unwrap();
            prop_assert_eq!(v, npmi(&c2, a, b, 0.0));
        }

        #[test]
        fn oc_is_permutation_invariant(docs in random_docs(), label in prop::sample::subsequence((0u32..8).collect::<Vec<_>>(), 0..8), seed in any::<u64>()) {
            let c = count_cooccurrence(&ReferenceDocs::from_docs(docs)).unwrap();
            let mut shuffled = label.clone();
            let mut s = seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(
                oc_npmi(&c, &label, 10, OcAggregate::Sum, 0.0),
                oc_npmi(&c, &shuffled, 10, OcAggregate::Sum, 0.0)
            );
        }
    }
}
