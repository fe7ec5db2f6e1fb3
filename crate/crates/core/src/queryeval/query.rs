use std::fmt;

use crate::corpus::{Hierarchy, NodeId, TermId};
use crate::labeling::LabelAssignment;

/// Boolean query over term presence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryExpr {
    Term(TermId),
    Or(Vec<QueryExpr>),
    And(Vec<QueryExpr>),
}

impl QueryExpr {
    /// Or over a label's terms, `None` for an empty label.
    pub fn or_terms(terms: impl IntoIterator<Item = TermId>) -> Option<Self> {
        let children: Vec<_> = terms.into_iter().map(QueryExpr::Term).collect();
        (!children.is_empty()).then_some(QueryExpr::Or(children))
    }

    /// Or over sub-queries; nested Ors are flattened and repeated operands dropped.
    pub fn or_of(parts: impl IntoIterator<Item = QueryExpr>) -> Option<Self> {
        let mut flat: Vec<QueryExpr> = Vec::new();
        let push = |q: QueryExpr, flat: &mut Vec<QueryExpr>| {
            if !flat.contains(&q) {
                flat.push(q);
            }
        };
        for p in parts {
            match p {
                QueryExpr::Or(children) => children.into_iter().for_each(|c| push(c, &mut flat)),
                other => push(other, &mut flat),
            }
        }
        (!flat.is_empty()).then_some(QueryExpr::Or(flat))
    }

    /// Checks the operator arity invariant and term ids against `n_terms`.
    pub fn is_valid(&self, n_terms: usize) -> bool {
        match self {
            QueryExpr::Term(t) => (*t as usize) < n_terms,
            QueryExpr::Or(c) | QueryExpr::And(c) => !c.is_empty() && c.iter().all(|q| q.is_valid(n_terms)),
        }
    }

    /// Top-level conjuncts: the children of an And, otherwise the query itself.
    pub fn conjuncts(&self) -> &[QueryExpr] {
        match self {
            QueryExpr::And(c) => c,
            other => std::slice::from_ref(other),
        }
    }

    pub fn terms(&self) -> Vec<TermId> {
        let mut out = Vec::new();
        self.collect_terms(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_terms(&self, out: &mut Vec<TermId>) {
        match self {
            QueryExpr::Term(t) => out.push(*t),
            QueryExpr::Or(c) | QueryExpr::And(c) => c.iter().for_each(|q| q.collect_terms(out)),
        }
    }
}

/// Prefix notation, e.g. `(AND (OR t12 t77) (OR t3))`.
impl fmt::Display for QueryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, children) = match self {
            QueryExpr::Term(t) => return write!(f, "t{t}"),
            QueryExpr::Or(c) => ("OR", c),
            QueryExpr::And(c) => ("AND", c),
        };
        write!(f, "({op}")?;
        for c in children {
            write!(f, " {c}")?;
        }
        f.write_str(")")
    }
}

/// Specific queries per node. Labeled nodes use the Or of their terms; an
/// unlabeled node inherits the query of its nearest labeled ancestor, or,
/// when every ancestor is unlabeled too, ORs its children's queries. `None`
/// marks a node with nothing to retrieve by.
pub fn derive_specific_queries(hierarchy: &Hierarchy, labels: &LabelAssignment) -> Vec<Option<QueryExpr>> {
    let own: Vec<Option<QueryExpr>> = (0..hierarchy.len())
        .map(|n| QueryExpr::or_terms(labels.terms(n)))
        .collect();

    let mut upward: Vec<Option<QueryExpr>> = vec![None; hierarchy.len()];
    for node in hierarchy.postorder() {
        upward[node] = match &own[node] {
            Some(q) => Some(q.clone()),
            None => QueryExpr::or_of(hierarchy.children(node).iter().filter_map(|&c| upward[c].clone())),
        };
    }

    // nearest labeled ancestor-or-self, top-down
    let mut anchor: Vec<Option<NodeId>> = vec![None; hierarchy.len()];
    let mut out: Vec<Option<QueryExpr>> = vec![None; hierarchy.len()];
    for &node in hierarchy.preorder() {
        let inherited = hierarchy.parent(node).and_then(|p| anchor[p]);
        anchor[node] = if own[node].is_some() { Some(node) } else { inherited };
        out[node] = match (&own[node], inherited) {
            (Some(q), _) => Some(q.clone()),
            (None, Some(a)) => own[a].clone(),
            (None, None) => upward[node].clone(),
        };
    }
    out
}

/// Generic queries: the root's equals its specific query; every other node
/// conjoins its parent's conjuncts with its own specific query, skipping a
/// conjunct already present. Nodes without a specific query get none.
pub fn derive_generic_queries(hierarchy: &Hierarchy, specific: &[Option<QueryExpr>]) -> Vec<Option<QueryExpr>> {
    let mut out: Vec<Option<QueryExpr>> = vec![None; hierarchy.len()];
    for &node in hierarchy.preorder() {
        let Some(own) = &specific[node] else { continue };
        let mut conj: Vec<QueryExpr> = hierarchy
            .parent(node)
            .and_then(|p| out[p].as_ref())
            .map(|g| g.conjuncts().to_vec())
            .unwrap_or_default();
        if !conj.contains(own) {
            conj.push(own.clone());
        }
        out[node] = Some(if conj.len() == 1 {
            conj.pop().unwrap()
        } else {
            QueryExpr::And(conj)
        });
    }
    out
}
