//! 2×2 and c×2 contingency statistics over cumulated term frequencies.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF};

use super::LabelError;
use crate::corpus::{Hierarchy, NodeId, NodeTermStats, TermId};

/// Cells of a 2×2 table: rows node/rest, columns term/other terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContingencyCells {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    /// Grand total, always `tp + fp + fn + tn`.
    pub s: u64,
}

impl ContingencyCells {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self {
            tp,
            fp,
            fn_,
            tn,
            s: tp + fp + fn_ + tn,
        }
    }

    /// Mass of the comparison population (`fp + tn`).
    pub fn reference_total(&self) -> u64 {
        self.fp + self.tn
    }
}

/// Reading of the reference-collection false-positive cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RclFp {
    /// `f_p(a_k) − f_node(a_k)`: occurrences of the term outside the node.
    #[default]
    Corrected,
    /// `f_p(a_k) − f_node(a_k) − tp`, clamped at 0.
    Literal,
}

impl RclFp {
    fn apply(self, outer: u64, inner: u64) -> Result<u64, ()> {
        let diff = outer.checked_sub(inner).ok_or(())?;
        Ok(match self {
            RclFp::Corrected => diff,
            RclFp::Literal => diff.saturating_sub(inner),
        })
    }
}

/// Shape of the independence test across a node's children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chi2Shape {
    /// Pearson statistic over the full c×2 table.
    #[default]
    FullTable,
    /// One 2×2 statistic per child, each against the c−1 df critical value.
    PerChild2x2,
}

fn inconsistent(node: NodeId, term: TermId) -> LabelError {
    LabelError::InconsistentStats { node, term }
}

/// Child `child` of `parent` against the parent's full mass.
pub fn contingency_popescul(
    stats: &NodeTermStats,
    parent: NodeId,
    child: NodeId,
    term: TermId,
) -> Result<ContingencyCells, LabelError> {
    let s = stats.total(parent);
    let tp = stats.freq(child, term);
    let fn_ = stats.total(child).checked_sub(tp).ok_or_else(|| inconsistent(child, term))?;
    let fp = stats.freq(parent, term).checked_sub(tp).ok_or_else(|| inconsistent(child, term))?;
    let tn = s
        .checked_sub(tp + fn_ + fp)
        .ok_or_else(|| inconsistent(parent, term))?;
    Ok(ContingencyCells::new(tp, fp, fn_, tn))
}

/// `node` against its reference collection: the parent's subtree minus the
/// node's own documents (the root is its own parent).
pub fn contingency_rcl(
    stats: &NodeTermStats,
    hierarchy: &Hierarchy,
    node: NodeId,
    term: TermId,
    mode: RclFp,
) -> Result<ContingencyCells, LabelError> {
    let parent = hierarchy.parent_or_self(node);
    let node_total = stats.total(node);
    let reference = stats
        .total(parent)
        .checked_sub(node_total)
        .ok_or_else(|| inconsistent(node, term))?;
    let tp = stats.freq(node, term);
    let fn_ = node_total - tp;
    let fp = mode
        .apply(stats.freq(parent, term), tp)
        .map_err(|_| inconsistent(node, term))?;
    let tn = reference.checked_sub(fp).ok_or_else(|| inconsistent(node, term))?;
    Ok(ContingencyCells::new(tp, fp, fn_, tn))
}

/// Cells for descendant `g` of the labeled node, compared with its direct
/// parent and scaled to the mass `s` of the labeled node's parent.
pub fn contingency_hier_rcl(
    stats: &NodeTermStats,
    hierarchy: &Hierarchy,
    s: u64,
    g: NodeId,
    term: TermId,
    mode: RclFp,
) -> Result<ContingencyCells, LabelError> {
    let qg = hierarchy.parent_or_self(g);
    let tp = stats.freq(g, term);
    let fn_ = stats.total(g) - tp;
    let fp = mode
        .apply(stats.freq(qg, term), tp)
        .map_err(|_| inconsistent(g, term))?;
    let tn = s.checked_sub(tp + fn_ + fp).ok_or_else(|| inconsistent(g, term))?;
    Ok(ContingencyCells::new(tp, fp, fn_, tn))
}

/// `(tp·tn − fn·fp)² · s / [(tp+fn)(fp+tn)(tp+fp)(fn+tn)]`, 0 when a marginal is 0.
pub fn chi2_2x2(c: &ContingencyCells) -> f64 {
    let (tp, fp, fn_, tn) = (c.tp as f64, c.fp as f64, c.fn_ as f64, c.tn as f64);
    let denom = (tp + fn_) * (fp + tn) * (tp + fp) * (fn_ + tn);
    if denom == 0.0 {
        return 0.0;
    }
    let cross = tp * tn - fn_ * fp;
    cross * cross * c.s as f64 / denom
}

/// Jensen–Shannon style divergence between the node's term rate
/// `p = tp/(tp+fn)` and the overall rate `q = (tp+fp)/s`, base-2 logs:
/// `p·log2 p − p·log2 m + q·log2 q − q·log2 m` with `m = (p+q)/2`.
pub fn jsd_2x2(c: &ContingencyCells) -> f64 {
    if c.tp + c.fn_ == 0 || c.s == 0 {
        return 0.0;
    }
    let p = c.tp as f64 / (c.tp + c.fn_) as f64;
    let q = (c.tp + c.fp) as f64 / c.s as f64;
    let m = 0.5 * (p + q);
    let xlog = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * y.log2() };
    let v = xlog(p, p) - xlog(p, m) + xlog(q, q) - xlog(q, m);
    // rounding can leave a tiny negative value when p ≈ q
    v.max(0.0)
}

/// Pearson χ² of the term across `node`'s children (c×2 table) with `c − 1` df.
pub fn pearson_chi2_children(stats: &NodeTermStats, hierarchy: &Hierarchy, node: NodeId, term: TermId) -> (f64, usize) {
    let children = hierarchy.children(node);
    let df = children.len().saturating_sub(1);
    let total = stats.total(node) as f64;
    let col_term = stats.freq(node, term) as f64;
    if total == 0.0 || col_term == 0.0 {
        return (0.0, df);
    }
    let col_rest = total - col_term;
    let mut stat = 0.0;
    for &c in children {
        let row = stats.total(c) as f64;
        let o_term = stats.freq(c, term) as f64;
        let o_rest = row - o_term;
        for (o, col) in [(o_term, col_term), (o_rest, col_rest)] {
            let e = row * col / total;
            if e > 0.0 {
                stat += (o - e) * (o - e) / e;
            }
        }
    }
    (stat, df)
}

/// Upper-`alpha` χ² critical values, cached by degrees of freedom.
#[derive(Debug)]
pub struct Chi2Critical {
    alpha: f64,
    cache: HashMap<usize, f64>,
}

impl Chi2Critical {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            cache: HashMap::new(),
        }
    }

    pub fn value(&mut self, df: usize) -> f64 {
        let alpha = self.alpha;
        *self.cache.entry(df).or_insert_with(|| {
            if df == 0 {
                0.0
            } else {
                let dist = ChiSquared::new(df as f64).expect("df > 0");
                let target = 1.0 - alpha;
                // statrs' bracketing inverse is coarse; polish with Newton.
                let mut x = dist.inverse_cdf(target);
                for _ in 0..8 {
                    let step = (dist.cdf(x) - target) / dist.pdf(x);
                    if !step.is_finite() {
                        break;
                    }
                    x -= step;
                    if step.abs() <= 1e-15 * x {
                        break;
                    }
                }
                x
            }
        })
    }
}

/// Whether independence of the term from `node`'s children survives the test.
pub fn independence_not_rejected(
    stats: &NodeTermStats,
    hierarchy: &Hierarchy,
    node: NodeId,
    term: TermId,
    shape: Chi2Shape,
    critical: &mut Chi2Critical,
) -> Result<bool, LabelError> {
    let children = hierarchy.children(node);
    if children.is_empty() {
        return Ok(false);
    }
    let limit = critical.value(children.len() - 1);
    match shape {
        Chi2Shape::FullTable => {
            let (stat, _) = pearson_chi2_children(stats, hierarchy, node, term);
            Ok(stat <= limit)
        }
        Chi2Shape::PerChild2x2 => {
            for &c in children {
                if chi2_2x2(&contingency_popescul(stats, node, c, term)?) > limit {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DocTermMatrix, NodeRecord};
    use crate::fixtures::research_fixture;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Textbook Pearson statistic Σ(O−E)²/E over an arbitrary r×c table.
    fn pearson(table: &[Vec<f64>]) -> f64 {
        let total: f64 = table.iter().flatten().sum();
        let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<f64> = (0..table[0].len()).map(|j| table.iter().map(|r| r[j]).sum()).collect();
        let mut x = 0.0;
        for (i, r) in table.iter().enumerate() {
            for (j, &o) in r.iter().enumerate() {
                let e = rows[i] * cols[j] / total;
                if e > 0.0 {
                    x += (o - e).powi(2) / e;
                }
            }
        }
        x
    }

    #[test]
    fn research_cells_for_first_child() {
        let (m, h) = research_fixture();
        let s = NodeTermStats::build(&m, &h);
        let c = contingency_popescul(&s, 0, 1, 0).unwrap();
        assert_eq!((c.tp, c.fn_, c.fp, c.tn, c.s), (3, 12, 7, 23, 45));
        assert_relative_eq!(chi2_2x2(&c), 225.0 * 45.0 / 157500.0, max_relative = 1e-15);
        assert_relative_eq!(chi2_2x2(&c), 0.0642857142857, max_relative = 1e-10);
    }

    #[test]
    fn absent_term_cells_sum_to_total() {
        let m = DocTermMatrix::from_triplets(2, 2, vec![(0, 0, 2), (1, 0, 3)]).unwrap();
        let recs = vec![
            NodeRecord { id: 0, parent: None, children: vec![1, 2], docs: vec![] },
            NodeRecord { id: 1, parent: Some(0), children: vec![], docs: vec![0] },
            NodeRecord { id: 2, parent: Some(0), children: vec![], docs: vec![1] },
        ];
        let h = Hierarchy::new(recs, 2).unwrap();
        let s = NodeTermStats::build(&m, &h);
        let c = contingency_popescul(&s, 0, 1, 1).unwrap();
        assert_eq!((c.tp, c.fp), (0, 0));
        assert_eq!(c.tp + c.fp + c.fn_ + c.tn, c.s);
        assert_eq!(c.s, 5);
    }

    #[test]
    fn rcl_reference_mass_and_fp() {
        let (m, h) = research_fixture();
        let s = NodeTermStats::build(&m, &h);
        let c = contingency_rcl(&s, &h, 1, 0, RclFp::Corrected).unwrap();
        assert_eq!(c.reference_total(), 30);
        assert_eq!((c.tp, c.fn_, c.fp, c.tn), (3, 12, 7, 23));
        // term 1 occurs only in doc 0 (node 1) and doc 1 (node 2)
        let c = contingency_rcl(&s, &h, 3, 1, RclFp::Corrected).unwrap();
        assert_eq!((c.tp, c.fp), (0, 16));
        let c = contingency_rcl(&s, &h, 1, 1, RclFp::Literal).unwrap();
        assert_eq!(c.fp, 10);
        // root compares against itself: empty reference
        let c = contingency_rcl(&s, &h, 0, 0, RclFp::Corrected).unwrap();
        assert_eq!(c.reference_total(), 0);
        assert_eq!(chi2_2x2(&c), 0.0);
    }

    #[test]
    fn rcl_fp_zero_when_term_only_in_node() {
        let m = DocTermMatrix::from_triplets(2, 2, vec![(0, 0, 2), (0, 1, 1), (1, 1, 3)]).unwrap();
        let recs = vec![
            NodeRecord { id: 0, parent: None, children: vec![1, 2], docs: vec![] },
            NodeRecord { id: 1, parent: Some(0), children: vec![], docs: vec![0] },
            NodeRecord { id: 2, parent: Some(0), children: vec![], docs: vec![1] },
        ];
        let h = Hierarchy::new(recs, 2).unwrap();
        let s = NodeTermStats::build(&m, &h);
        assert_eq!(contingency_rcl(&s, &h, 1, 0, RclFp::Corrected).unwrap().fp, 0);
    }

    #[test]
    fn chi2_independent_table_is_zero() {
        assert_eq!(chi2_2x2(&ContingencyCells::new(2, 4, 3, 6)), 0.0);
        assert_eq!(chi2_2x2(&ContingencyCells::new(0, 0, 3, 6)), 0.0);
    }

    #[test]
    fn jsd_examples() {
        let c = ContingencyCells::new(4, 2, 4, 6);
        assert_relative_eq!(jsd_2x2(&c), 0.012925380970029876, max_relative = 1e-12);
        // p = q
        assert_eq!(jsd_2x2(&ContingencyCells::new(2, 2, 2, 2)), 0.0);
        assert_eq!(jsd_2x2(&ContingencyCells::new(0, 0, 0, 5)), 0.0);
    }

    #[test]
    fn research_full_table_chi2() {
        let (m, h) = research_fixture();
        let s = NodeTermStats::build(&m, &h);
        let (stat, df) = pearson_chi2_children(&s, &h, 0, 0);
        assert_eq!(df, 2);
        let oracle = pearson(&[vec![3.0, 12.0], vec![4.0, 13.0], vec![3.0, 10.0]]);
        assert_relative_eq!(stat, oracle, max_relative = 1e-12);
        assert_relative_eq!(stat, 0.06515837104072403, max_relative = 1e-12);
    }

    #[test]
    fn proportional_term_has_zero_statistic() {
        // children totals 10/20/30, term 1/2/3
        let cells = vec![(0, 0, 1), (0, 1, 9), (1, 0, 2), (1, 1, 18), (2, 0, 3), (2, 1, 27)];
        let m = DocTermMatrix::from_triplets(3, 2, cells).unwrap();
        let recs = vec![
            NodeRecord { id: 0, parent: None, children: vec![1, 2, 3], docs: vec![] },
            NodeRecord { id: 1, parent: Some(0), children: vec![], docs: vec![0] },
            NodeRecord { id: 2, parent: Some(0), children: vec![], docs: vec![1] },
            NodeRecord { id: 3, parent: Some(0), children: vec![], docs: vec![2] },
        ];
        let h = Hierarchy::new(recs, 3).unwrap();
        let s = NodeTermStats::build(&m, &h);
        assert!(pearson_chi2_children(&s, &h, 0, 0).0.abs() < 1e-12);
        let mut crit = Chi2Critical::new(0.05);
        assert!(independence_not_rejected(&s, &h, 0, 0, Chi2Shape::FullTable, &mut crit).unwrap());
        assert!(independence_not_rejected(&s, &h, 0, 0, Chi2Shape::PerChild2x2, &mut crit).unwrap());
    }

    #[test]
    fn critical_values() {
        let mut crit = Chi2Critical::new(0.05);
        assert_relative_eq!(crit.value(1), 3.841458820694124, max_relative = 1e-9);
        assert_relative_eq!(crit.value(2), 5.991464547107979, max_relative = 1e-9);
    }

    proptest! {
        #[test]
        fn chi2_matches_pearson(tp in 0u64..200, fp in 0u64..200, fn_ in 0u64..200, tn in 0u64..200) {
            let c = ContingencyCells::new(tp, fp, fn_, tn);
            let oracle = pearson(&[vec![tp as f64, fn_ as f64], vec![fp as f64, tn as f64]]);
            let got = chi2_2x2(&c);
            let margins_ok = (tp + fn_) > 0 && (fp + tn) > 0 && (tp + fp) > 0 && (fn_ + tn) > 0;
            if margins_ok {
                prop_assert!((got - oracle).abs() <= 1e-9 * oracle.abs().max(1e-300));
            } else {
                prop_assert_eq!(got, 0.0);
            }
        }

        #[test]
        fn jsd_nonnegative(tp in 0u64..100, fp in 0u64..100, fn_ in 0u64..100, tn in 0u64..100) {
            prop_assert!(jsd_2x2(&ContingencyCells::new(tp, fp, fn_, tn)) >= 0.0);
        }
    }
}
