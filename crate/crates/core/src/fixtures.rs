//! Small hand-built corpora shared by unit tests.

use crate::corpus::{DocTermMatrix, Hierarchy, NodeRecord};

/// Root with three leaf children, one document each, realizing the
/// `research` contingency table: children totals 15/17/13, research 3/4/3.
pub fn research_fixture() -> (DocTermMatrix, Hierarchy) {
    let m = DocTermMatrix::from_triplets(
        3,
        3,
        vec![(0, 0, 3), (0, 1, 3), (0, 2, 9), (1, 0, 4), (1, 1, 13), (2, 0, 3), (2, 2, 10)],
    )
    .unwrap();
    let recs = vec![
        NodeRecord {
            id: 0,
            parent: None,
            children: vec![1, 2, 3],
            docs: vec![],
        },
        NodeRecord {
            id: 1,
            parent: Some(0),
            children: vec![],
            docs: vec![0],
        },
        NodeRecord {
            id: 2,
            parent: Some(0),
            children: vec![],
            docs: vec![1],
        },
        NodeRecord {
            id: 3,
            parent: Some(0),
            children: vec![],
            docs: vec![2],
        },
    ];
    (m, Hierarchy::new(recs, 3).unwrap())
}

