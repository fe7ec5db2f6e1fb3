//! The sixteen label-selection methods.
//!
//! Ranking methods score every candidate term of a node independently and keep
//! the best `P`. Structural methods (Popescul & Ungar, RLUM) decide label
//! membership by traversing the tree; CF methods propagate a clustering
//! F-measure from the leaves.

mod cf;
mod contingency;
mod ranking;
mod scores;
mod select;
mod structural;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Hierarchy, NodeId, NodeTermStats, TermId};

pub use cf::{cf_measure_leaf, select_cf_average, select_cf_leave_one_out};
pub use contingency::{
    chi2_2x2, contingency_hier_rcl, contingency_popescul, contingency_rcl, independence_not_rejected, jsd_2x2,
    pearson_chi2_children, Chi2Critical, Chi2Shape, ContingencyCells, RclFp,
};
pub use ranking::{node_candidates, select_flat_or_hier};
pub use scores::{
    hier_weight, icf, idf_global, idf_local, path_weighted_sum, score_flat, score_mtwl_raw, sibling_cf, FlatScheme,
};
pub use select::{select_topk, Candidate};
pub use structural::{select_popescul_ungar, select_rlum};

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("negative contingency cell for node {node}, term {term}: statistics are inconsistent")]
    InconsistentStats { node: NodeId, term: TermId },
    #[error("{method} is not a ranking method")]
    NotARankingMethod { method: MethodId },
    #[error("unknown labeling method {0:?}")]
    UnknownMethod(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MethodId {
    MtwlRaw,
    MtwlIdf,
    IcwlRaw,
    IcwlIdf,
    HierMtwlRaw,
    HierMtwlIdf,
    HierIcwlRaw,
    HierIcwlIdf,
    RclChi2,
    RclJsd,
    HierRclChi2,
    HierRclJsd,
    PopesculUngar,
    Rlum,
    CfAverage,
    CfLeaveOneOut,
}

impl MethodId {
    pub const ALL: [MethodId; 16] = [
        MethodId::MtwlRaw,
        MethodId::MtwlIdf,
        MethodId::IcwlRaw,
        MethodId::IcwlIdf,
        MethodId::HierMtwlRaw,
        MethodId::HierMtwlIdf,
        MethodId::HierIcwlRaw,
        MethodId::HierIcwlIdf,
        MethodId::RclChi2,
        MethodId::RclJsd,
        MethodId::HierRclChi2,
        MethodId::HierRclJsd,
        MethodId::PopesculUngar,
        MethodId::Rlum,
        MethodId::CfAverage,
        MethodId::CfLeaveOneOut,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::MtwlRaw => "MTWL_raw",
            MethodId::MtwlIdf => "MTWL_idf",
            MethodId::IcwlRaw => "ICWL_raw",
            MethodId::IcwlIdf => "ICWL_idf",
            MethodId::HierMtwlRaw => "HierMTWL_raw",
            MethodId::HierMtwlIdf => "HierMTWL_idf",
            MethodId::HierIcwlRaw => "HierICWL_raw",
            MethodId::HierIcwlIdf => "HierICWL_idf",
            MethodId::RclChi2 => "RCL_chi2",
            MethodId::RclJsd => "RCL_jsd",
            MethodId::HierRclChi2 => "HierRCL_chi2",
            MethodId::HierRclJsd => "HierRCL_jsd",
            MethodId::PopesculUngar => "PopesculUngar",
            MethodId::Rlum => "RLUM",
            MethodId::CfAverage => "CFAverage",
            MethodId::CfLeaveOneOut => "CFLeaveOneOut",
        }
    }

    /// Methods that score nodes independently of each other.
    pub fn is_ranking(self) -> bool {
        !matches!(
            self,
            MethodId::PopesculUngar | MethodId::Rlum | MethodId::CfAverage | MethodId::CfLeaveOneOut
        )
    }

    /// The four frequency schemes weighted over descendants.
    pub fn is_hier_frequency(self) -> bool {
        matches!(
            self,
            MethodId::HierMtwlRaw | MethodId::HierMtwlIdf | MethodId::HierIcwlRaw | MethodId::HierIcwlIdf
        )
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| LabelError::UnknownMethod(s.to_string()))
    }
}

impl TryFrom<String> for MethodId {
    type Error = LabelError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<MethodId> for String {
    fn from(m: MethodId) -> String {
        m.name().to_string()
    }
}

/// Knobs shared by all methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelConfig {
    /// Maximum label size `P`.
    pub p_cap: usize,
    /// Significance level of the χ² independence tests.
    pub alpha: f64,
    pub chi2_shape: Chi2Shape,
    pub rcl_fp: RclFp,
    /// RLUM: a child frequency at least this large validates the χ² estimate.
    pub big_threshold: u64,
    /// Popescul & Ungar: give leaves the most frequent terms unused on their path.
    pub popescul_leaves: bool,
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self {
            p_cap: 10,
            alpha: 0.05,
            chi2_shape: Chi2Shape::FullTable,
            rcl_fp: RclFp::Corrected,
            big_threshold: 5,
            popescul_leaves: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Label {
    pub term: TermId,
    pub score: f64,
}

/// Ranked labels of every node for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelAssignment {
    pub method: MethodId,
    pub p_cap: usize,
    labels: Vec<Vec<Label>>,
}

impl LabelAssignment {
    pub fn new(method: MethodId, p_cap: usize, labels: Vec<Vec<Label>>) -> Self {
        Self { method, p_cap, labels }
    }

    pub fn labels(&self, node: NodeId) -> &[Label] {
        &self.labels[node]
    }

    pub fn terms(&self, node: NodeId) -> impl Iterator<Item = TermId> + '_ {
        self.labels[node].iter().map(|l| l.term)
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &[Label])> {
        self.labels.iter().enumerate().map(|(n, l)| (n, l.as_slice()))
    }
}

/// Runs one method over the whole hierarchy.
pub fn label(
    method: MethodId,
    stats: &NodeTermStats,
    hierarchy: &Hierarchy,
    config: &LabelConfig,
) -> Result<LabelAssignment, LabelError> {
    match method {
        MethodId::PopesculUngar => select_popescul_ungar(stats, hierarchy, config),
        MethodId::Rlum => select_rlum(stats, hierarchy, config),
        MethodId::CfAverage => Ok(select_cf_average(stats, hierarchy, config.p_cap)),
        MethodId::CfLeaveOneOut => Ok(select_cf_leave_one_out(stats, hierarchy, config.p_cap)),
        _ => select_flat_or_hier(method, stats, hierarchy, config),
    }
}
