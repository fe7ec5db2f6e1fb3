use std::cmp::Ordering;

use super::Label;
use crate::corpus::TermId;

/// A scored term; `freq` is the node frequency used to break score ties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub term: TermId,
    pub score: f64,
    pub freq: u64,
}

/// Keeps positive scores, orders them by (score desc, freq desc, term asc) and
/// truncates to `p_cap`.
pub fn select_topk(mut candidates: Vec<Candidate>, p_cap: usize) -> Vec<Label> {
    candidates.retain(|c| c.score > 0.0);
    candidates.sort_unstable_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then(b.freq.cmp(&a.freq))
            .then(a.term.cmp(&b.term))
    });
    candidates.truncate(p_cap);
    candidates
        .into_iter()
        .map(|c| Label {
            term: c.term,
            score: c.score,
        })
        .collect()
}
