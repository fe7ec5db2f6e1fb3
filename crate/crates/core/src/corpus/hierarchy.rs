use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, DocId, NodeId};

/// One node record of the hierarchy file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    #[serde(default)]
    pub children: Vec<NodeId>,
    #[serde(default)]
    pub docs: Vec<DocId>,
}

#[derive(Debug, Serialize, Deserialize)]
struct HierarchyFile {
    nodes: Vec<NodeRecord>,
}

/// A validated cluster tree whose leaves partition the documents.
///
/// Node ids are dense (`0..len`). Levels are derived from the tree, with the
/// root at level 0. The root has no parent; scoring code that needs one uses
/// [`Hierarchy::parent_or_self`], which maps the root onto itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hierarchy {
    nodes: Vec<NodeRecord>,
    root: NodeId,
    level: Vec<u32>,
    preorder: Vec<NodeId>,
    docset: Vec<Vec<DocId>>,
    by_level: Vec<Vec<NodeId>>,
}

impl Hierarchy {
    pub fn new(mut records: Vec<NodeRecord>, n_docs: usize) -> Result<Self, CorpusError> {
        if records.is_empty() {
            return Err(CorpusError::EmptyHierarchy);
        }
        let n = records.len();
        let mut seen = vec![false; n];
        for r in &records {
            if r.id >= n {
                return Err(CorpusError::NonContiguousNodeIds(r.id));
            }
            if std::mem::replace(&mut seen[r.id], true) {
                return Err(CorpusError::DuplicateNode(r.id));
            }
        }
        records.sort_by_key(|r| r.id);

        for r in &records {
            match r.parent {
                Some(p) if p == r.id => return Err(CorpusError::Cycle(r.id)),
                Some(p) if p >= n => return Err(CorpusError::OrphanNode { node: r.id, parent: p }),
                _ => {}
            }
            if let Some(&c) = r.children.iter().find(|&&c| c >= n) {
                return Err(CorpusError::UnknownChild { node: r.id, child: c });
            }
        }
        let roots: Vec<NodeId> = records.iter().filter(|r| r.parent.is_none()).map(|r| r.id).collect();
        let root = match roots.as_slice() {
            [] => return Err(CorpusError::NoRoot),
            [r] => *r,
            _ => return Err(CorpusError::MultipleRoots(roots)),
        };

        let mut child_of = vec![None; n];
        for r in &records {
            for &c in &r.children {
                if c == r.id {
                    return Err(CorpusError::Cycle(c));
                }
                if child_of[c].replace(r.id).is_some() || records[c].parent != Some(r.id) {
                    return Err(CorpusError::InconsistentLinks(c));
                }
            }
        }
        for r in &records {
            if r.parent.is_some() && child_of[r.id] != r.parent {
                return Err(CorpusError::InconsistentLinks(r.id));
            }
        }

        let mut level = vec![u32::MAX; n];
        let mut preorder = Vec::with_capacity(n);
        let mut stack = vec![root];
        level[root] = 0;
        while let Some(id) = stack.pop() {
            preorder.push(id);
            for &c in records[id].children.iter().rev() {
                level[c] = level[id] + 1;
                stack.push(c);
            }
        }
        if preorder.len() != n {
            // Consistent links plus a single root: anything unreachable sits on a cycle.
            let stray = (0..n).find(|&i| level[i] == u32::MAX).expect("unreachable node exists");
            return Err(CorpusError::Cycle(stray));
        }

        let mut owner: Vec<Option<NodeId>> = vec![None; n_docs];
        for r in &records {
            if r.children.is_empty() {
                if r.docs.is_empty() {
                    return Err(CorpusError::EmptyLeaf(r.id));
                }
            } else if !r.docs.is_empty() {
                return Err(CorpusError::DocsAtInternalNode(r.id));
            }
            for &d in &r.docs {
                let slot = owner.get_mut(d as usize).ok_or(CorpusError::DocOutOfRange {
                    doc: d as u64,
                    n_docs,
                })?;
                if let Some(first) = slot.replace(r.id) {
                    return Err(CorpusError::DocAssignedTwice {
                        doc: d,
                        first,
                        second: r.id,
                    });
                }
            }
        }
        if let Some(d) = owner.iter().position(Option::is_none) {
            return Err(CorpusError::DocUnassigned(d as DocId));
        }

        let mut docset: Vec<Vec<DocId>> = vec![Vec::new(); n];
        for &id in preorder.iter().rev() {
            let mut docs = records[id].docs.clone();
            for &c in &records[id].children {
                docs.extend_from_slice(&docset[c]);
            }
            docs.sort_unstable();
            docset[id] = docs;
        }

        let depth = *level.iter().max().unwrap() as usize;
        let mut by_level = vec![Vec::new(); depth + 1];
        for id in 0..n {
            by_level[level[id] as usize].push(id);
        }

        Ok(Self {
            nodes: records,
            root,
            level,
            preorder,
            docset,
            by_level,
        })
    }

    /// A one-node hierarchy holding every document.
    pub fn single_node(n_docs: usize) -> Result<Self, CorpusError> {
        Self::new(
            vec![NodeRecord {
                id: 0,
                parent: None,
                children: vec![],
                docs: (0..n_docs as DocId).collect(),
            }],
            n_docs,
        )
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &NodeRecord {
        &self.nodes[id]
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    /// Parent of `id`, treating the root as its own parent.
    pub fn parent_or_self(&self, id: NodeId) -> NodeId {
        self.nodes[id].parent.unwrap_or(id)
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id].children.is_empty()
    }

    pub fn leaf_docs(&self, id: NodeId) -> &[DocId] {
        &self.nodes[id].docs
    }

    pub fn level(&self, id: NodeId) -> u32 {
        self.level[id]
    }

    pub fn depth(&self) -> u32 {
        (self.by_level.len() - 1) as u32
    }

    pub fn nodes_at_level(&self, level: u32) -> &[NodeId] {
        self.by_level.get(level as usize).map_or(&[], Vec::as_slice)
    }

    /// Sorted documents of the subtree rooted at `id`.
    pub fn docset(&self, id: NodeId) -> &[DocId] {
        &self.docset[id]
    }

    pub fn n_docs(&self) -> usize {
        self.docset[self.root].len()
    }

    /// Parents before children.
    pub fn preorder(&self) -> &[NodeId] {
        &self.preorder
    }

    /// Children before parents.
    pub fn postorder(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.preorder.iter().rev().copied()
    }

    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&p| self.parent(p))
    }

    /// Proper descendants of `id` paired with their edge distance from it.
    pub fn descendants_with_distance(&self, id: NodeId) -> Vec<(NodeId, u32)> {
        let base = self.level[id];
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.children(id).iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push((n, self.level[n] - base));
            stack.extend(self.children(n).iter().rev().copied());
        }
        out
    }

    pub fn records(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn from_json(text: &str, n_docs: usize) -> Result<Self, CorpusError> {
        let file: HierarchyFile = serde_json::from_str(text)?;
        Self::new(file.nodes, n_docs)
    }

    pub fn read_from<R: Read>(reader: R, n_docs: usize) -> Result<Self, CorpusError> {
        let file: HierarchyFile = serde_json::from_reader(reader)?;
        Self::new(file.nodes, n_docs)
    }

    pub fn load(path: impl AsRef<Path>, n_docs: usize) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_from(BufReader::new(file), n_docs)
    }

    pub fn to_json(&self) -> String {
        let file = HierarchyFile {
            nodes: self.nodes.clone(),
        };
        serde_json::to_string(&file).expect("hierarchy serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let path = path.as_ref();
        let io_err = |source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
        w.write_all(self.to_json().as_bytes()).map_err(io_err)?;
        w.write_all(b"\n").map_err(io_err)?;
        w.flush().map_err(io_err)
    }
}
