use rayon::prelude::*;

use super::contingency::{chi2_2x2, contingency_hier_rcl, contingency_rcl, jsd_2x2, ContingencyCells};
use super::scores::FlatScheme;
use super::select::{select_topk, Candidate};
use super::{LabelAssignment, LabelConfig, LabelError, MethodId};
use crate::corpus::{Hierarchy, NodeId, NodeTermStats, TermId};

fn flat_scheme(method: MethodId) -> Option<FlatScheme> {
    Some(match method {
        MethodId::MtwlRaw | MethodId::HierMtwlRaw => FlatScheme::MtwlRaw,
        MethodId::MtwlIdf | MethodId::HierMtwlIdf => FlatScheme::MtwlIdf,
        MethodId::IcwlRaw | MethodId::HierIcwlRaw => FlatScheme::IcwlRaw,
        MethodId::IcwlIdf | MethodId::HierIcwlIdf => FlatScheme::IcwlIdf,
        _ => return None,
    })
}

/// Scores every candidate term of `node` under a ranking method. Terms not
/// listed score 0.
pub fn node_candidates(
    method: MethodId,
    stats: &NodeTermStats,
    hierarchy: &Hierarchy,
    node: NodeId,
    config: &LabelConfig,
) -> Result<Vec<Candidate>, LabelError> {
    let cand = |term: TermId, score: f64| Candidate {
        term,
        score,
        freq: stats.freq(node, term),
    };
    match method {
        MethodId::MtwlRaw | MethodId::MtwlIdf | MethodId::IcwlRaw | MethodId::IcwlIdf => {
            let scheme = flat_scheme(method).unwrap();
            let entry = stats.node(node);
            Ok(entry
                .support()
                .iter()
                .zip(entry.freqs())
                .map(|(&t, &f)| Candidate {
                    term: t,
                    score: scheme.weight(stats, hierarchy, node, t) * f as f64,
                    freq: f,
                })
                .collect())
        }
        MethodId::HierMtwlRaw | MethodId::HierMtwlIdf | MethodId::HierIcwlRaw | MethodId::HierIcwlIdf => {
            let scheme = flat_scheme(method).unwrap();
            let raw = hier_frequency_sums(stats, hierarchy, node);
            Ok(raw
                .into_iter()
                .map(|(t, w)| cand(t, scheme.weight(stats, hierarchy, node, t) * w))
                .collect())
        }
        MethodId::RclChi2 | MethodId::RclJsd => {
            let stat = statistic(method);
            let parent = hierarchy.parent_or_self(node);
            stats
                .support(parent)
                .iter()
                .map(|&t| Ok(cand(t, stat(&contingency_rcl(stats, hierarchy, node, t, config.rcl_fp)?))))
                .collect()
        }
        MethodId::HierRclChi2 | MethodId::HierRclJsd => {
            let sums = hier_rcl_sums(stats, hierarchy, node, config, statistic(method))?;
            Ok(sums.into_iter().map(|(t, w)| cand(t, w)).collect())
        }
        _ => Err(LabelError::NotARankingMethod { method }),
    }
}

fn statistic(method: MethodId) -> fn(&ContingencyCells) -> f64 {
    match method {
        MethodId::RclJsd | MethodId::HierRclJsd => jsd_2x2,
        _ => chi2_2x2,
    }
}

/// Dense accumulator over term ids that remembers which slots were touched.
struct Accumulator {
    values: Vec<f64>,
    seen: Vec<bool>,
    touched: Vec<TermId>,
}

impl Accumulator {
    fn new(n_terms: usize) -> Self {
        Self {
            values: vec![0.0; n_terms],
            seen: vec![false; n_terms],
            touched: Vec::new(),
        }
    }

    fn add(&mut self, term: TermId, value: f64) {
        let t = term as usize;
        if !self.seen[t] {
            self.seen[t] = true;
            self.touched.push(term);
        }
        self.values[t] += value;
    }

    fn into_sorted(mut self) -> Vec<(TermId, f64)> {
        self.touched.sort_unstable();
        self.touched.iter().map(|&t| (t, self.values[t as usize])).collect()
    }
}

/// `Σ_g (1/e) · cf_g(a) · f_g(a)` for every term of `node`'s descendants.
fn hier_frequency_sums(stats: &NodeTermStats, hierarchy: &Hierarchy, node: NodeId) -> Vec<(TermId, f64)> {
    let mut acc = Accumulator::new(stats.n_terms());
    for (g, e) in hierarchy.descendants_with_distance(node) {
        let q = hierarchy.parent_or_self(hierarchy.parent_or_self(g));
        let siblings = hierarchy.children(q).len() as f64;
        let entry = stats.node(g);
        for (&t, &f) in entry.support().iter().zip(entry.freqs()) {
            let cf = stats.child_support(q, t) as f64 / siblings;
            acc.add(t, cf * f as f64 / e as f64);
        }
    }
    acc.into_sorted()
}

/// `Σ_g (1/e) · cf_g(a) · stat(cells_g(a))` where each descendant `g` is
/// compared with its direct parent, scaled to the mass of `node`'s parent.
fn hier_rcl_sums(
    stats: &NodeTermStats,
    hierarchy: &Hierarchy,
    node: NodeId,
    config: &LabelConfig,
    stat: fn(&ContingencyCells) -> f64,
) -> Result<Vec<(TermId, f64)>, LabelError> {
    let s = stats.total(hierarchy.parent_or_self(node));
    let mut acc = Accumulator::new(stats.n_terms());
    for (g, e) in hierarchy.descendants_with_distance(node) {
        let qg = hierarchy.parent_or_self(g);
        let q = hierarchy.parent_or_self(qg);
        let siblings = hierarchy.children(q).len() as f64;
        for &t in stats.support(qg) {
            let cf = stats.child_support(q, t) as f64 / siblings;
            if cf == 0.0 {
                continue;
            }
            let cells = contingency_hier_rcl(stats, hierarchy, s, g, t, config.rcl_fp)?;
            acc.add(t, cf * stat(&cells) / e as f64);
        }
    }
    Ok(acc.into_sorted())
}

/// Independent per-node top-`P` selection for the twelve ranking methods.
pub fn select_flat_or_hier(
    method: MethodId,
    stats: &NodeTermStats,
    hierarchy: &Hierarchy,
    config: &LabelConfig,
) -> Result<LabelAssignment, LabelError> {
    if !method.is_ranking() {
        return Err(LabelError::NotARankingMethod { method });
    }
    let labels = (0..hierarchy.len())
        .into_par_iter()
        .map(|node| {
            node_candidates(method, stats, hierarchy, node, config).map(|c| select_topk(c, config.p_cap))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LabelAssignment::new(method, config.p_cap, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::research_fixture;
    use crate::labeling::{hier_weight, score_flat};

    #[test]
    fn mtwl_raw_on_research_node() {
        let (m, h) = research_fixture();
        let s = NodeTermStats::build(&m, &h);
        let a = select_flat_or_hier(MethodId::MtwlRaw, &s, &h, &LabelConfig::default()).unwrap();
        let root = a.labels(0);
        // term 2 (19) > term 1 (16) > research (10)
        assert_eq!(root.iter().map(|l| l.term).collect::<Vec<_>>(), vec![2, 1, 0]);
        assert_eq!(root[2].score, 10.0);
    }

    #[test]
    fn hier_frequency_on_leaves_is_empty() {
        let (m, h) = research_fixture();
        let s = NodeTermStats::build(&m, &h);
        for method in [MethodId::HierMtwlRaw, MethodId::HierMtwlIdf, MethodId::HierIcwlRaw, MethodId::HierIcwlIdf] {
            let a = select_flat_or_hier(method, &s, &h, &LabelConfig::default()).unwrap();
            for leaf in 1..=3 {
                assert!(a.labels(leaf).is_empty());
            }
        }
    }

    #[test]
    fn hier_sums_match_single_term_weight() {
        let (m, h) = research_fixture();
        let s = NodeTermStats::build(&m, &h);
        let c = node_candidates(MethodId::HierMtwlRaw, &s, &h, 0, &LabelConfig::default()).unwrap();
        for cand in c {
            let w = hier_weight(&s, &h, 0, cand.term, |g| s.freq(g, cand.term) as f64);
            assert_eq!(cand.score, w);
        }
    }

    #[test]
    fn flat_candidates_match_score_flat() {
        let (m, h) = research_fixture();
        let s = NodeTermStats::build(&m, &h);
        for node in 0..h.len() {
            let c = node_candidates(MethodId::IcwlIdf, &s, &h, node, &LabelConfig::default()).unwrap();
            for cand in c {
                assert_eq!(cand.score, score_flat(FlatScheme::IcwlIdf, &s, &h, node, cand.term));
            }
        }
    }

    #[test]
    fn structural_methods_are_rejected() {
        let (m, h) = research_fixture();
        let s = NodeTermStats::build(&m, &h);
        assert!(matches!(
            select_flat_or_hier(MethodId::Rlum, &s, &h, &LabelConfig::default()),
            Err(LabelError::NotARankingMethod { .. })
        ));
    }
}
