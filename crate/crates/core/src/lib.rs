//! Cluster label selection for hierarchical document clusterings, with the
//! retrieval, variance-decomposition and coherence evaluations used to compare
//! labeling methods.

pub mod coherence;
pub mod corpus;
pub mod labeling;
pub mod pipeline;
pub mod queryeval;
pub mod stats;

#[cfg(test)]
mod fixtures;
