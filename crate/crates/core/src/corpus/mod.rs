//! Document–term matrix, vocabulary and cluster hierarchy, plus the per-node
//! statistics every labeling method reads.

mod error;
mod filter;
mod hierarchy;
mod matrix;
mod node_stats;
mod vocabulary;

pub use error::CorpusError;
pub use filter::{df_bounds, salton_df_filter, TermRemap};
pub use hierarchy::{Hierarchy, NodeRecord};
pub use matrix::DocTermMatrix;
pub use node_stats::{NodeTermStats, NodeTerms};
pub use vocabulary::Vocabulary;

pub type DocId = u32;
pub type TermId = u32;
pub type NodeId = usize;
