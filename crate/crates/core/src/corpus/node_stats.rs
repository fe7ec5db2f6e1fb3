use super::{DocTermMatrix, Hierarchy, NodeId, TermId};

/// Sparse per-node term statistics, sorted by term id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeTerms {
    terms: Vec<TermId>,
    freq: Vec<u64>,
    docfreq: Vec<u32>,
    child_support: Vec<u32>,
    total: u64,
    size: usize,
}

impl NodeTerms {
    /// Terms with positive cumulated frequency in this node.
    pub fn support(&self) -> &[TermId] {
        &self.terms
    }

    pub fn freqs(&self) -> &[u64] {
        &self.freq
    }

    fn find(&self, term: TermId) -> Option<usize> {
        self.terms.binary_search(&term).ok()
    }
}

/// Cumulated term statistics for every node of a hierarchy.
///
/// For node `n` and term `a`: `freq` is the summed count of `a` over the
/// documents of `n`'s subtree, `docfreq` the number of those documents
/// containing `a`, and `child_support` the number of direct children with
/// positive `freq`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTermStats {
    n_terms: usize,
    n_docs: usize,
    nodes: Vec<NodeTerms>,
    collection_freq: Vec<u64>,
    global_df: Vec<u32>,
}

impl NodeTermStats {
    /// Single bottom-up pass: leaves accumulate their documents, internal
    /// nodes merge their children.
    pub fn build(matrix: &DocTermMatrix, hierarchy: &Hierarchy) -> Self {
        let m = matrix.n_terms();
        let mut nodes = vec![NodeTerms::default(); hierarchy.len()];
        let mut freq = vec![0u64; m];
        let mut df = vec![0u32; m];
        let mut support = vec![0u32; m];
        let mut touched: Vec<TermId> = Vec::new();

        for id in hierarchy.postorder() {
            let children = hierarchy.children(id);
            if children.is_empty() {
                for &d in hierarchy.leaf_docs(id) {
                    for (t, c) in matrix.row(d) {
                        if freq[t as usize] == 0 {
                            touched.push(t);
                        }
                        freq[t as usize] += c;
                        df[t as usize] += 1;
                    }
                }
            } else {
                for &c in children {
                    let child = &nodes[c];
                    for (k, &t) in child.terms.iter().enumerate() {
                        let ti = t as usize;
                        if freq[ti] == 0 {
                            touched.push(t);
                        }
                        freq[ti] += child.freq[k];
                        df[ti] += child.docfreq[k];
                        support[ti] += 1;
                    }
                }
            }
            touched.sort_unstable();
            let node = &mut nodes[id];
            node.size = hierarchy.docset(id).len();
            node.terms = touched.clone();
            node.freq = touched.iter().map(|&t| freq[t as usize]).collect();
            node.docfreq = touched.iter().map(|&t| df[t as usize]).collect();
            node.child_support = touched.iter().map(|&t| support[t as usize]).collect();
            node.total = node.freq.iter().sum();
            for &t in &touched {
                freq[t as usize] = 0;
                df[t as usize] = 0;
                support[t as usize] = 0;
            }
            touched.clear();
        }

        Self {
            n_terms: m,
            n_docs: matrix.n_docs(),
            nodes,
            collection_freq: matrix.collection_frequencies(),
            global_df: matrix.document_frequencies(),
        }
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn node(&self, id: NodeId) -> &NodeTerms {
        &self.nodes[id]
    }

    /// Cumulated frequency `f_i(a_k)`.
    pub fn freq(&self, node: NodeId, term: TermId) -> u64 {
        let n = &self.nodes[node];
        n.find(term).map_or(0, |k| n.freq[k])
    }

    /// Number of documents of the node containing the term.
    pub fn docfreq(&self, node: NodeId, term: TermId) -> u32 {
        let n = &self.nodes[node];
        n.find(term).map_or(0, |k| n.docfreq[k])
    }

    /// Number of direct children of `node` containing the term.
    pub fn child_support(&self, node: NodeId, term: TermId) -> u32 {
        let n = &self.nodes[node];
        n.find(term).map_or(0, |k| n.child_support[k])
    }

    /// `Σ_t f_i(a_t)`.
    pub fn total(&self, node: NodeId) -> u64 {
        self.nodes[node].total
    }

    /// `|D_ni|`.
    pub fn size(&self, node: NodeId) -> usize {
        self.nodes[node].size
    }

    pub fn support(&self, node: NodeId) -> &[TermId] {
        &self.nodes[node].terms
    }

    /// Collection frequency `f(a_k)`.
    pub fn collection_freq(&self, term: TermId) -> u64 {
        self.collection_freq[term as usize]
    }

    /// Collection document frequency `#(a_k, D)`.
    pub fn global_df(&self, term: TermId) -> u32 {
        self.global_df[term as usize]
    }
}
