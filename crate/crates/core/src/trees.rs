//! Finite sequences of naturals and explicit finite trees.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::ordinal::Rank;

/// A finite sequence of naturals, ordered by length first and then lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Seq(Vec<u64>);

impl Seq {
    pub fn empty() -> Self {
        Seq(Vec::new())
    }

    pub fn new(entries: Vec<u64>) -> Self {
        Seq(entries)
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn sum(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn child(&self, n: u64) -> Seq {
        let mut v = self.0.clone();
        v.push(n);
        Seq(v)
    }

    pub fn concat(&self, other: &Seq) -> Seq {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Seq(v)
    }

    pub fn prefix(&self, n: usize) -> Seq {
        Seq(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn parent(&self) -> Option<Seq> {
        (!self.0.is_empty()).then(|| self.prefix(self.0.len() - 1))
    }

    /// `self ⊑ other`.
    pub fn is_prefix_of(&self, other: &Seq) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn incomparable(&self, other: &Seq) -> bool {
        !self.is_prefix_of(other) && !other.is_prefix_of(self)
    }

    /// The part of `other` after `self`, if `self ⊑ other`.
    pub fn strip_from(&self, other: &Seq) -> Option<Seq> {
        self.is_prefix_of(other).then(|| Seq(other.0[self.0.len()..].to_vec()))
    }

    /// All prefixes, shortest first, including the empty one and `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = Seq> + '_ {
        (0..=self.0.len()).map(|n| self.prefix(n))
    }
}

impl Ord for Seq {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Seq {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u64>> for Seq {
    fn from(v: Vec<u64>) -> Self {
        Seq(v)
    }
}

impl From<&[u64]> for Seq {
    fn from(v: &[u64]) -> Self {
        Seq(v.to_vec())
    }
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(seq")?;
        for n in &self.0 {
            write!(f, " {n}")?;
        }
        f.write_str(")")
    }
}

/// An explicit prefix-closed finite set of sequences.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteTree {
    nodes: BTreeSet<Seq>,
}

impl FiniteTree {
    pub fn empty() -> Self {
        FiniteTree::default()
    }

    /// `{∅}`.
    pub fn point() -> Self {
        cl_tr([Seq::empty()])
    }

    /// Accepts a node set only if it is already prefix-closed.
    pub fn from_nodes(nodes: BTreeSet<Seq>) -> Result<Self> {
        if let Some(bad) = nodes.iter().find(|s| s.parent().is_some_and(|p| !nodes.contains(&p))) {
            return Err(Error::Invalid(format!("node set not prefix-closed at {bad}")));
        }
        Ok(FiniteTree { nodes })
    }

    pub fn nodes(&self) -> &BTreeSet<Seq> {
        &self.nodes
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Seq> {
        self.nodes.iter()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, s: &Seq) -> bool {
        self.nodes.contains(s)
    }

    pub fn height(&self) -> usize {
        self.nodes.iter().next_back().map_or(0, Seq::len)
    }

    fn require(&self, t: &Seq) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{t} is not a node of the tree")))
        }
    }

    /// Immediate successors; children of `t` are contiguous in the canonical order.
    fn children_of<'a>(&'a self, t: &Seq) -> impl Iterator<Item = &'a Seq> + 'a {
        self.nodes.range(t.child(0)..=t.child(u64::MAX))
    }

    pub fn ims(&self, t: &Seq) -> Result<Vec<Seq>> {
        self.require(t)?;
        Ok(self.children_of(t).cloned().collect())
    }

    pub fn is_leaf(&self, t: &Seq) -> bool {
        self.contains(t) && self.children_of(t).next().is_none()
    }

    pub fn subtree_at(&self, t: &Seq) -> Result<FiniteTree> {
        self.require(t)?;
        Ok(FiniteTree { nodes: self.nodes.iter().filter_map(|s| t.strip_from(s)).collect() })
    }

    pub fn leaves(&self) -> Vec<Seq> {
        self.nodes.iter().filter(|s| self.is_leaf(s)).cloned().collect()
    }

    /// Leaf rank of every node, computed bottom-up.
    pub fn node_ranks(&self) -> HashMap<Seq, u64> {
        let mut rank: HashMap<Seq, u64> = HashMap::with_capacity(self.nodes.len());
        for s in self.nodes.iter().rev() {
            let r = self.children_of(s).map(|c| rank[c] + 1).max().unwrap_or(0);
            rank.insert(s.clone(), r);
        }
        rank
    }

    pub fn leaf_rank(&self) -> Rank {
        if self.is_empty() {
            return Rank::NegOne;
        }
        Rank::nat(self.node_ranks()[&Seq::empty()])
    }

    pub fn max_branching(&self) -> usize {
        self.nodes.iter().map(|s| self.children_of(s).count()).max().unwrap_or(0)
    }

    /// `prefix ⌢ self`, together with the prefixes of `prefix`.
    pub fn graft_under(&self, prefix: &Seq) -> FiniteTree {
        if self.is_empty() {
            return FiniteTree::empty();
        }
        cl_tr(self.nodes.iter().map(|s| prefix.concat(s)))
    }
}

pub fn cl_tr<I: IntoIterator<Item = Seq>>(set: I) -> FiniteTree {
    let mut nodes = BTreeSet::new();
    for s in set {
        for p in s.prefixes() {
            nodes.insert(p);
        }
    }
    FiniteTree { nodes }
}

pub fn ims(tree: &FiniteTree, t: &Seq) -> Result<Vec<Seq>> {
    tree.ims(t)
}

pub fn subtree_at(tree: &FiniteTree, t: &Seq) -> Result<FiniteTree> {
    tree.subtree_at(t)
}

pub fn leaves(tree: &FiniteTree) -> Vec<Seq> {
    tree.leaves()
}

pub fn leaf_rank(tree: &FiniteTree) -> Rank {
    tree.leaf_rank()
}

pub fn tree_union(a: &FiniteTree, b: &FiniteTree) -> FiniteTree {
    FiniteTree { nodes: a.nodes.union(&b.nodes).cloned().collect() }
}

/// All sequences of length ≤ `k` over `{0, ..., width-1}`.
pub fn gen_t_fin(k: usize, width: u64) -> Result<FiniteTree> {
    if width == 0 {
        return Err(Error::Invalid("width must be at least 1".into()));
    }
    let mut nodes = BTreeSet::from([Seq::empty()]);
    let mut layer = vec![Seq::empty()];
    for _ in 0..k {
        layer = layer.iter().flat_map(|s| (0..width).map(move |n| s.child(n))).collect();
        nodes.extend(layer.iter().cloned());
    }
    Ok(FiniteTree { nodes })
}

impl fmt::Display for FiniteTree {
    /// Prints the leaves as generators; reading applies `cl_tr`, so this round-trips.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(tree")?;
        for leaf in self.leaves() {
            write!(f, " {leaf}")?;
        }
        f.write_str(")")
    }
}
