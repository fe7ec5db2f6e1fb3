//! Boolean retrieval evaluation of node labels.
//!
//! Each node's label becomes a specific query (and, conjoined with its
//! ancestors', a generic query); the documents it retrieves are scored
//! against the node's own documents.

mod query;

use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::corpus::{DocId, DocTermMatrix, Hierarchy, NodeId};
use crate::labeling::{LabelAssignment, MethodId};

pub use query::{derive_generic_queries, derive_specific_queries, QueryExpr};

/// Term → documents containing it.
#[derive(Debug, Clone)]
pub struct InvertedIndex {
    n_docs: usize,
    postings: Vec<Vec<DocId>>,
}

impl InvertedIndex {
    pub fn new(matrix: &DocTermMatrix) -> Self {
        Self {
            n_docs: matrix.n_docs(),
            postings: matrix.postings(),
        }
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn postings(&self, term: u32) -> &[DocId] {
        &self.postings[term as usize]
    }
}

pub fn retrieve(index: &InvertedIndex, query: &QueryExpr) -> FixedBitSet {
    match query {
        QueryExpr::Term(t) => {
            let mut set = FixedBitSet::with_capacity(index.n_docs);
            for &d in index.postings(*t) {
                set.insert(d as usize);
            }
            set
        }
        QueryExpr::Or(children) => {
            let mut set = FixedBitSet::with_capacity(index.n_docs);
            for c in children {
                set.union_with(&retrieve(index, c));
            }
            set
        }
        QueryExpr::And(children) => {
            let mut iter = children.iter();
            let mut set = match iter.next() {
                Some(first) => retrieve(index, first),
                None => return FixedBitSet::with_capacity(index.n_docs),
            };
            for c in iter {
                set.intersect_with(&retrieve(index, c));
            }
            set
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrievalMetrics {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

impl RetrievalMetrics {
    pub fn from_counts(tp: u64, retrieved: u64, relevant: u64, n_docs: u64) -> Self {
        let fp = retrieved - tp;
        let fn_ = relevant - tp;
        let precision = if retrieved == 0 { 0.0 } else { tp as f64 / retrieved as f64 };
        let recall = if relevant == 0 { 0.0 } else { tp as f64 / relevant as f64 };
        let f = if precision == 0.0 || recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            tp,
            fp,
            fn_,
            tn: n_docs - tp - fp - fn_,
            precision,
            recall,
            f,
        }
    }

    pub fn value(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Precision => self.precision,
            Measure::Recall => self.recall,
            Measure::F => self.f,
        }
    }
}

pub fn evaluate_node(hierarchy: &Hierarchy, node: NodeId, retrieved: &FixedBitSet) -> RetrievalMetrics {
    let gold = hierarchy.docset(node);
    let tp = gold.iter().filter(|&&d| retrieved.contains(d as usize)).count() as u64;
    RetrievalMetrics::from_counts(
        tp,
        retrieved.count_ones(..) as u64,
        gold.len() as u64,
        hierarchy.n_docs() as u64,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryKind {
    Specific,
    Generic,
}

impl QueryKind {
    pub const ALL: [QueryKind; 2] = [QueryKind::Specific, QueryKind::Generic];

    pub fn name(self) -> &'static str {
        match self {
            QueryKind::Specific => "specific",
            QueryKind::Generic => "generic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    Precision,
    Recall,
    F,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Precision, Measure::Recall, Measure::F];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Precision => "precision",
            Measure::Recall => "recall",
            Measure::F => "f",
        }
    }
}

macro_rules! named_enum {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                <$t>::ALL
                    .into_iter()
                    .find(|k| k.name() == s)
                    .ok_or_else(|| format!("unknown {}: {s:?}", stringify!($t)))
            }
        }
    };
}

named_enum!(QueryKind);
named_enum!(Measure);

/// Metrics of one (method, node, query kind).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub method: MethodId,
    pub node: NodeId,
    pub level: u32,
    pub kind: QueryKind,
    pub metrics: RetrievalMetrics,
}

/// Long-form observation: one value per (node, method, kind, measure).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationRow {
    pub node: NodeId,
    pub level: u32,
    pub method: MethodId,
    pub kind: QueryKind,
    pub measure: Measure,
    pub value: f64,
}

pub fn observations(rows: &[MetricsRow]) -> Vec<ObservationRow> {
    rows.iter()
        .flat_map(|r| {
            Measure::ALL.into_iter().map(move |measure| ObservationRow {
                node: r.node,
                level: r.level,
                method: r.method,
                kind: r.kind,
                measure,
                value: r.metrics.value(measure),
            })
        })
        .collect()
}

/// Specific and generic queries of every node for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeQueries {
    pub specific: Vec<Option<QueryExpr>>,
    pub generic: Vec<Option<QueryExpr>>,
}

impl NodeQueries {
    pub fn derive(hierarchy: &Hierarchy, labels: &LabelAssignment) -> Self {
        let specific = derive_specific_queries(hierarchy, labels);
        let generic = derive_generic_queries(hierarchy, &specific);
        Self { specific, generic }
    }

    pub fn get(&self, kind: QueryKind, node: NodeId) -> Option<&QueryExpr> {
        match kind {
            QueryKind::Specific => self.specific[node].as_ref(),
            QueryKind::Generic => self.generic[node].as_ref(),
        }
    }
}

/// Evaluates every node under both query kinds. Nodes without a query get
/// all-zero metrics. Rows are ordered by method (input order), node, kind.
pub fn evaluate_all(index: &InvertedIndex, hierarchy: &Hierarchy, assignments: &[LabelAssignment]) -> Vec<MetricsRow> {
    let empty = FixedBitSet::with_capacity(index.n_docs());
    assignments
        .iter()
        .flat_map(|a| {
            let queries = NodeQueries::derive(hierarchy, a);
            (0..hierarchy.len())
                .into_par_iter()
                .flat_map_iter(|node| {
                    QueryKind::ALL
                        .into_iter()
                        .map(|kind| {
                            let metrics = match queries.get(kind, node) {
                                Some(q) => evaluate_node(hierarchy, node, &retrieve(index, q)),
                                None => evaluate_node(hierarchy, node, &empty),
                            };
                            MetricsRow {
                                method: a.method,
                                node,
                                level: hierarchy.level(node),
                                kind,
                                metrics,
                            }
                        })
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        })
        .collect()
}
