use std::io;
use std::path::PathBuf;

use thiserror::Error;

use super::{DocId, NodeId, TermId};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<CorpusError>,
    },

    #[error("doc-id out of range: {doc} (n_docs = {n_docs})")]
    DocOutOfRange { doc: u64, n_docs: usize },
    #[error("term-id out of range: {term} (n_terms = {n_terms})")]
    TermOutOfRange { term: u64, n_terms: usize },
    #[error("duplicate cell (doc {doc}, term {term})")]
    DuplicateCell { doc: DocId, term: TermId },
    #[error("count must be positive, got {count} at (doc {doc}, term {term})")]
    NonPositiveCount { doc: u64, term: u64, count: i64 },

    #[error("vocabulary term-ids must be contiguous from 0: expected {expected}, found {found}")]
    NonContiguousTermIds { expected: usize, found: usize },
    #[error("empty surface for term {term}")]
    EmptySurface { term: TermId },
    #[error("duplicate surface {surface:?} (terms {first} and {second})")]
    DuplicateSurface {
        surface: String,
        first: TermId,
        second: TermId,
    },
    #[error("vocabulary has {vocab} terms but the matrix has {matrix}")]
    VocabularySizeMismatch { vocab: usize, matrix: usize },

    #[error("hierarchy has no nodes")]
    EmptyHierarchy,
    #[error("hierarchy JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("node ids must be contiguous from 0; id {0} is out of range")]
    NonContiguousNodeIds(NodeId),
    #[error("hierarchy has no root")]
    NoRoot,
    #[error("multiple roots: {0:?}")]
    MultipleRoots(Vec<NodeId>),
    #[error("orphan node {node}: parent {parent} does not exist")]
    OrphanNode { node: NodeId, parent: NodeId },
    #[error("node {node} lists unknown child {child}")]
    UnknownChild { node: NodeId, child: NodeId },
    #[error("cycle through node {0}")]
    Cycle(NodeId),
    #[error("inconsistent parent/children links at node {0}")]
    InconsistentLinks(NodeId),
    #[error("empty leaf {0}")]
    EmptyLeaf(NodeId),
    #[error("internal node {0} holds documents directly")]
    DocsAtInternalNode(NodeId),
    #[error("document {doc} assigned to leaves {first} and {second}")]
    DocAssignedTwice {
        doc: DocId,
        first: NodeId,
        second: NodeId,
    },
    #[error("document {0} is not assigned to any leaf")]
    DocUnassigned(DocId),

    #[error("invalid df-filter bounds low={low}, high={high}")]
    InvalidFilterBounds { low: f64, high: f64 },
    #[error("empty vocabulary after filter")]
    EmptyVocabularyAfterFilter,
}

impl CorpusError {
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            e @ (CorpusError::Parse { .. } | CorpusError::AtLine { .. }) => e,
            e => CorpusError::AtLine {
                line,
                source: Box::new(e),
            },
        }
    }

    /// Returns the innermost error, looking through line annotations.
    pub fn root_cause(&self) -> &CorpusError {
        match self {
            CorpusError::AtLine { source, .. } => source.root_cause(),
            e => e,
        }
    }
}
