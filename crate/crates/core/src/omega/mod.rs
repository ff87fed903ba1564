//! Finite descriptions of infinitely branching and infinitely deep trees.
//!
//! A [`Node`] has explicitly labelled children, bundle parts and an optional
//! chain marker. `Rep(P)` stands for one copy of `P` under each of infinitely
//! many fresh labels; `Esc(P)` for copies where copy `n` first runs down a bare
//! handle of `n` nodes before reaching `P`; a chain is a single infinite branch.

mod derive;
mod oracle;

pub use derive::{d_step, iter_derive, iter_rank, DerivKind};
pub use oracle::{
    calibrate, expand, expand_annotated, threshold_d_step, Calibration, ExpandedNode, Origin,
    ORACLE_CHAIN, ORACLE_THRESHOLD, ORACLE_WIDTH, SAFE_CHAIN_DEPTH, SAFE_COPY_INDEX,
};

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::sexp::{FromSexp, Sexp};
use crate::trees::{FiniteTree, Seq};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PartKind {
    Rep,
    Esc,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Part {
    pub kind: PartKind,
    pub proto: Node,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node {
    pub children: BTreeMap<u64, Node>,
    /// Rep parts precede Esc parts; fresh labels in [`expand`] follow this order.
    pub parts: Vec<Part>,
    pub chain: bool,
}

/// A possibly empty tree described by its root node.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OmegaTree(pub Option<Node>);

impl Node {
    /// The one-point tree `{∅}`.
    pub fn leaf() -> Self {
        Node::default()
    }

    pub fn chain_node() -> Self {
        Node { chain: true, ..Node::default() }
    }

    pub fn with_child(mut self, label: u64, child: Node) -> Self {
        self.children.insert(label, child);
        self
    }

    pub fn with_part(mut self, kind: PartKind, proto: Node) -> Self {
        let at = self.parts.partition_point(|p| p.kind <= kind);
        self.parts.insert(at, Part { kind, proto });
        self
    }

    pub fn with_rep(self, proto: Node) -> Self {
        self.with_part(PartKind::Rep, proto)
    }

    pub fn with_esc(self, proto: Node) -> Self {
        self.with_part(PartKind::Esc, proto)
    }

    pub fn with_chain(mut self) -> Self {
        self.chain = true;
        self
    }

    /// No children, parts or chain: the node is a leaf of the denoted tree.
    pub fn is_point(&self) -> bool {
        self.children.is_empty() && self.parts.is_empty() && !self.chain
    }

    pub fn max_label(&self) -> Option<u64> {
        self.children.keys().next_back().copied()
    }

    /// Nesting depth of the description itself (a lone node has depth 0).
    pub fn description_depth(&self) -> usize {
        let below = self
            .children
            .values()
            .chain(self.parts.iter().map(|p| &p.proto))
            .map(|n| n.description_depth() + 1)
            .max();
        below.unwrap_or(0)
    }

    pub fn description_size(&self) -> usize {
        1 + self.children.values().map(Node::description_size).sum::<usize>()
            + self.parts.iter().map(|p| p.proto.description_size()).sum::<usize>()
    }

    pub fn has_chain(&self) -> bool {
        self.chain
            || self.children.values().any(Node::has_chain)
            || self.parts.iter().any(|p| p.proto.has_chain())
    }

    /// The denoted tree is finite: no chain, no bundle anywhere.
    pub fn is_finite(&self) -> bool {
        !self.chain && self.parts.is_empty() && self.children.values().all(Node::is_finite)
    }

    /// The denoted tree has branches of every finite length.
    pub fn is_unbounded(&self) -> bool {
        self.chain
            || self.children.values().any(Node::is_unbounded)
            || self.parts.iter().any(|p| p.kind == PartKind::Esc || p.proto.is_unbounded())
    }

    /// Whether the denoted tree has a node of length `depth`.
    pub fn has_depth(&self, depth: usize) -> bool {
        if depth == 0 {
            return true;
        }
        self.chain
            || self.children.values().any(|c| c.has_depth(depth - 1))
            || self.parts.iter().any(|p| match p.kind {
                PartKind::Rep => p.proto.has_depth(depth - 1),
                // copy n ≥ depth-1 puts a handle node at every depth 1..=n
                PartKind::Esc => true,
            })
    }

    /// A finite description of the denoted set, if it is finite.
    pub fn to_finite(&self) -> Option<FiniteTree> {
        fn walk(n: &Node, at: Seq, out: &mut Vec<Seq>) {
            for (label, c) in &n.children {
                walk(c, at.child(*label), out);
            }
            out.push(at);
        }
        if !self.is_finite() {
            return None;
        }
        let mut out = Vec::new();
        walk(self, Seq::empty(), &mut out);
        Some(crate::trees::cl_tr(out))
    }

    pub fn from_finite(tree: &FiniteTree) -> Option<Node> {
        fn build(tree: &FiniteTree, at: &Seq) -> Node {
            let mut n = Node::leaf();
            for c in tree.ims(at).unwrap_or_default() {
                let label = c.last().expect("child sequences are nonempty");
                n.children.insert(label, build(tree, &c));
            }
            n
        }
        (!tree.is_empty()).then(|| build(tree, &Seq::empty()))
    }

    fn sort_parts(&mut self) {
        self.parts.sort_by_key(|p| p.kind);
    }

    /// Canonical form for structural comparison: parts sorted, repeated Rep parts merged.
    pub fn normalized(&self) -> Node {
        let mut parts: Vec<Part> = self
            .parts
            .iter()
            .map(|p| Part { kind: p.kind, proto: p.proto.normalized() })
            .collect();
        parts.sort();
        parts.dedup_by(|a, b| a.kind == PartKind::Rep && a == b);
        Node {
            children: self.children.iter().map(|(l, c)| (*l, c.normalized())).collect(),
            parts,
            chain: self.chain,
        }
    }

    /// A sufficient structural test for `⟦self⟧ ⊆ ⟦other⟧`.
    pub fn embeds_in(&self, other: &Node) -> bool {
        (!self.chain || other.chain)
            && self
                .children
                .iter()
                .all(|(l, c)| other.children.get(l).is_some_and(|d| c.embeds_in(d)))
            && self.parts.iter().all(|p| {
                other.parts.iter().any(|q| q.kind == p.kind && p.proto.embeds_in(&q.proto))
            })
    }

    fn union(&self, other: &Node) -> Node {
        let mut children = self.children.clone();
        for (label, c) in &other.children {
            let merged = match children.get(label) {
                Some(mine) => mine.union(c),
                None => c.clone(),
            };
            children.insert(*label, merged);
        }
        let mut parts = self.parts.clone();
        for p in &other.parts {
            if !parts.contains(p) {
                parts.push(p.clone());
            }
        }
        let mut n = Node { children, parts, chain: self.chain || other.chain };
        n.sort_parts();
        n
    }
}

impl OmegaTree {
    pub fn empty() -> Self {
        OmegaTree(None)
    }

    pub fn point() -> Self {
        OmegaTree(Some(Node::leaf()))
    }

    pub fn root(&self) -> Option<&Node> {
        self.0.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn is_finite(&self) -> bool {
        self.0.as_ref().is_none_or(Node::is_finite)
    }

    /// `⊆ {∅}`.
    pub fn is_at_most_point(&self) -> bool {
        self.0.as_ref().is_none_or(Node::is_point)
    }

    pub fn has_depth(&self, depth: usize) -> bool {
        self.0.as_ref().is_some_and(|n| n.has_depth(depth))
    }

    pub fn normalized(&self) -> OmegaTree {
        OmegaTree(self.0.as_ref().map(Node::normalized))
    }

    pub fn embeds_in(&self, other: &OmegaTree) -> bool {
        match (&self.0, &other.0) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a.embeds_in(b),
        }
    }

    pub fn from_finite(tree: &FiniteTree) -> Self {
        OmegaTree(Node::from_finite(tree))
    }
}

impl From<Node> for OmegaTree {
    fn from(n: Node) -> Self {
        OmegaTree(Some(n))
    }
}

pub fn is_wf(tree: &OmegaTree) -> bool {
    !tree.0.as_ref().is_some_and(Node::has_chain)
}

/// Set union of the denoted trees: explicit children merge by label, bundles and chains accumulate.
pub fn omega_union(a: &OmegaTree, b: &OmegaTree) -> OmegaTree {
    match (&a.0, &b.0) {
        (None, _) => b.clone(),
        (_, None) => a.clone(),
        (Some(x), Some(y)) => OmegaTree(Some(x.union(y))),
    }
}

/// `depth` nested Rep bundles over `base`.
pub fn rep_nest(depth: usize, base: Node) -> Node {
    (0..depth).fold(base, |inner, _| Node::leaf().with_rep(inner))
}

/// `depth` nested Esc bundles over `base`.
pub fn esc_nest(depth: usize, base: Node) -> Node {
    (0..depth).fold(base, |inner, _| Node::leaf().with_esc(inner))
}

/// `T_k = ω^{≤k}`.
pub fn canonical_full(k: usize) -> Node {
    rep_nest(k, Node::leaf())
}

/// The canonical tree of a finite class: `T_{α'}` for even `α`, and `{∅} ∪ 1⌢T_{α'}` for odd `α`.
pub fn canonical(alpha: u64) -> Node {
    let k = (alpha / 2) as usize;
    if alpha.is_multiple_of(2) {
        canonical_full(k)
    } else {
        canonical_comma(alpha, 1)
    }
}

/// `{∅} ∪ i⌢T_{α'}`; the stem label `i` becomes a length-`i` requirement under admissible maps.
pub fn canonical_comma(alpha: u64, stem: u64) -> Node {
    Node::leaf().with_child(stem, canonical_full((alpha / 2) as usize))
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(node")?;
        if self.chain {
            f.write_str(" chain")?;
        }
        for (label, c) in &self.children {
            write!(f, " (child {label} {c})")?;
        }
        for p in &self.parts {
            let head = match p.kind {
                PartKind::Rep => "rep",
                PartKind::Esc => "esc",
            };
            write!(f, " ({head} {})", p.proto)?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for OmegaTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            None => f.write_str("(empty)"),
            Some(n) => n.fmt(f),
        }
    }
}

impl FromSexp for Node {
    fn from_sexp(sexp: &Sexp) -> Result<Self> {
        let args = sexp.form("node")?;
        let mut node = Node::leaf();
        for (idx, arg) in args.iter().enumerate() {
            if let Ok("chain") = arg.atom() {
                if idx != 0 {
                    return Err(arg.error("`chain` must come first"));
                }
                node.chain = true;
                continue;
            }
            match arg.head() {
                Some("child") => {
                    let inner = arg.form("child")?;
                    let [label, child] = inner else {
                        return Err(arg.error("expected (child <n> <node>)"));
                    };
                    let label = label.nat()?;
                    if node.children.contains_key(&label) {
                        return Err(arg.error(format!("duplicate child label {label}")));
                    }
                    node.children.insert(label, Node::from_sexp(child)?);
                }
                Some(head @ ("rep" | "esc")) => {
                    let [proto] = arg.form(head)? else {
                        return Err(arg.error(format!("expected ({head} <node>)")));
                    };
                    let kind = if head == "rep" { PartKind::Rep } else { PartKind::Esc };
                    node = node.with_part(kind, Node::from_sexp(proto)?);
                }
                _ => return Err(arg.error("expected chain, (child ...), (rep ...) or (esc ...)")),
            }
        }
        Ok(node)
    }
}

impl FromSexp for OmegaTree {
    fn from_sexp(sexp: &Sexp) -> Result<Self> {
        if sexp.head() == Some("empty") {
            if sexp.items()?.len() != 1 {
                return Err(sexp.error("(empty) takes no arguments"));
            }
            return Ok(OmegaTree::empty());
        }
        Node::from_sexp(sexp).map(OmegaTree::from)
    }
}

impl std::str::FromStr for OmegaTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        crate::sexp::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::parse;

    #[test]
    fn text_round_trip() {
        for text in [
            "(empty)",
            "(node)",
            "(node chain)",
            "(node (child 0 (node)) (child 3 (node chain)) (rep (node)) (esc (node (rep (node)))))",
        ] {
            let t: OmegaTree = parse(text).unwrap();
            assert_eq!(t.to_string(), text);
        }
    }

    #[test]
    fn parts_are_kept_rep_first() {
        let t: OmegaTree = parse("(node (esc (node)) (rep (node)))").unwrap();
        assert_eq!(t.to_string(), "(node (rep (node)) (esc (node)))");
    }

    #[test]
    fn malformed_descriptions_rejected() {
        assert!(parse::<OmegaTree>("(node (child 1 (node)) (child 1 (node)))").is_err());
        assert!(parse::<OmegaTree>("(node (rep (empty)))").is_err());
        assert!(parse::<OmegaTree>("(node (rep (node)) chain)").is_err());
        assert!(parse::<OmegaTree>("(node (kid 1 (node)))").is_err());
    }

    #[test]
    fn well_foundedness() {
        assert!(is_wf(&OmegaTree::from(Node::leaf().with_rep(Node::leaf().with_esc(Node::leaf())))));
        assert!(!is_wf(&OmegaTree::from(Node::chain_node())));
        assert!(is_wf(&OmegaTree::point()));
        assert!(!is_wf(&OmegaTree::from(Node::leaf().with_rep(Node::chain_node()))));
    }

    #[test]
    fn union_examples() {
        let t = OmegaTree::from(Node::leaf().with_child(2, Node::leaf()));
        assert_eq!(omega_union(&t, &OmegaTree::empty()), t);
        let u = omega_union(
            &OmegaTree::from(Node::chain_node()),
            &OmegaTree::from(Node::leaf().with_rep(Node::leaf())),
        );
        assert_eq!(u.to_string(), "(node chain (rep (node)))");
        let a = OmegaTree::from(Node::leaf().with_child(0, Node::leaf().with_child(1, Node::leaf())));
        let b = OmegaTree::from(Node::leaf().with_child(0, Node::leaf().with_child(2, Node::leaf())));
        assert_eq!(
            omega_union(&a, &b).to_string(),
            "(node (child 0 (node (child 1 (node)) (child 2 (node)))))"
        );
    }

    #[test]
    fn depth_queries() {
        let esc = Node::leaf().with_esc(Node::leaf());
        assert!((0..20).all(|d| esc.has_depth(d)));
        let fin = Node::leaf().with_child(0, Node::leaf().with_child(0, Node::leaf()));
        assert!(fin.has_depth(2) && !fin.has_depth(3));
        let rep = canonical_full(3);
        assert!(rep.has_depth(3) && !rep.has_depth(4));
    }

    #[test]
    fn canonical_shapes() {
        assert_eq!(canonical(0).to_string(), "(node)");
        assert_eq!(canonical(2).to_string(), "(node (rep (node)))");
        assert_eq!(canonical(3).to_string(), "(node (child 1 (node (rep (node)))))");
        assert_eq!(canonical_comma(5, 3).to_string(), "(node (child 3 (node (rep (node (rep (node)))))))");
    }

    #[test]
    fn finite_round_trip() {
        let f = crate::trees::cl_tr([Seq::new(vec![0, 4]), Seq::new(vec![2])]);
        let n = Node::from_finite(&f).unwrap();
        assert_eq!(n.to_finite().unwrap(), f);
    }

    #[test]
    fn normalization_merges_repeated_reps_only() {
        let n = Node::leaf().with_rep(Node::leaf()).with_rep(Node::leaf()).with_esc(Node::leaf()).with_esc(Node::leaf());
        assert_eq!(n.normalized().to_string(), "(node (rep (node)) (esc (node)) (esc (node)))");
    }
}
