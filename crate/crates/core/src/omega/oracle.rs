//! Finite truncations of descriptions and threshold derivatives on them.
//!
//! "Infinitely many" becomes "at least `threshold`" on an explicit expansion.
//! Comparison with the exact engine is restricted to the part of the expansion
//! that a fixed width and chain length cannot distort: low copy indices and
//! shallow chain positions.

use std::collections::HashMap;

use super::derive::{iter_derive, DerivKind};
use super::{Node, OmegaTree, PartKind};
use crate::trees::{FiniteTree, Seq};

pub const ORACLE_WIDTH: u64 = 12;
pub const ORACLE_CHAIN: usize = 12;
pub const ORACLE_THRESHOLD: usize = 8;
/// Positions inside bundle copies with a larger index are outside the compared prefix.
pub const SAFE_COPY_INDEX: u64 = 3;
/// Positions deeper than this inside an expanded chain are outside the compared prefix.
pub const SAFE_CHAIN_DEPTH: usize = 3;

/// What a node of an expansion stands for in the description.
#[derive(Clone, Copy, Debug)]
pub enum Origin<'a> {
    Desc(&'a Node),
    /// A bare handle node of an Esc copy, `remaining` steps above the prototype root.
    Handle { proto: &'a Node, remaining: usize },
    Chain,
}

impl Origin<'_> {
    /// The description of the exact subtree rooted at this position.
    pub fn description(&self) -> Node {
        match *self {
            Origin::Desc(n) => n.clone(),
            Origin::Handle { proto, remaining } => {
                (0..remaining).fold(proto.clone(), |inner, _| Node::leaf().with_child(0, inner))
            }
            Origin::Chain => Node::chain_node(),
        }
    }

    fn key(&self) -> (usize, usize, u8) {
        match *self {
            Origin::Desc(n) => (n as *const Node as usize, 0, 0),
            Origin::Handle { proto, remaining } => (proto as *const Node as usize, remaining, 1),
            Origin::Chain => (0, 0, 2),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExpandedNode<'a> {
    pub seq: Seq,
    pub origin: Origin<'a>,
    /// Largest bundle-copy index used on the way down.
    pub copy_index: u64,
    /// Position inside an expanded chain (0 outside chains).
    pub chain_depth: usize,
}

impl ExpandedNode<'_> {
    pub fn in_safe_prefix(&self) -> bool {
        self.copy_index <= SAFE_COPY_INDEX && self.chain_depth <= SAFE_CHAIN_DEPTH
    }
}

/// Expansion with provenance. Copy `i` of the `j`-th part gets label
/// `max_explicit + 1 + j·width + i`; a chain starts at the first label after all parts
/// and continues with label 0, as do Esc handles.
pub fn expand_annotated(tree: &OmegaTree, width: u64, chain_len: usize) -> Vec<ExpandedNode<'_>> {
    let mut out = Vec::new();
    if let Some(root) = &tree.0 {
        expand_node(root, Seq::empty(), 0, width, chain_len, &mut out);
    }
    out
}

fn expand_node<'a>(n: &'a Node, at: Seq, copy: u64, width: u64, chain_len: usize, out: &mut Vec<ExpandedNode<'a>>) {
    out.push(ExpandedNode { seq: at.clone(), origin: Origin::Desc(n), copy_index: copy, chain_depth: 0 });
    for (label, c) in &n.children {
        expand_node(c, at.child(*label), copy, width, chain_len, out);
    }
    let base = n.max_label().map_or(0, |m| m + 1);
    for (j, part) in n.parts.iter().enumerate() {
        for i in 0..width {
            let mut s = at.child(base + j as u64 * width + i);
            let copy = copy.max(i);
            if part.kind == PartKind::Esc {
                for remaining in (1..=i as usize).rev() {
                    out.push(ExpandedNode {
                        seq: s.clone(),
                        origin: Origin::Handle { proto: &part.proto, remaining },
                        copy_index: copy,
                        chain_depth: 0,
                    });
                    s = s.child(0);
                }
            }
            expand_node(&part.proto, s, copy, width, chain_len, out);
        }
    }
    if n.chain {
        let mut s = at.child(base + n.parts.len() as u64 * width);
        for depth in 1..=chain_len {
            out.push(ExpandedNode { seq: s.clone(), origin: Origin::Chain, copy_index: copy, chain_depth: depth });
            s = s.child(0);
        }
    }
}

pub fn expand(tree: &OmegaTree, width: u64, chain_len: usize) -> FiniteTree {
    let nodes = expand_annotated(tree, width, chain_len).into_iter().map(|e| e.seq).collect();
    FiniteTree::from_nodes(nodes).expect("expansions are prefix-closed")
}

/// Index-based view of a finite tree; parents precede children.
struct Arena {
    seqs: Vec<Seq>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
}

impl Arena {
    fn new(tree: &FiniteTree) -> Self {
        let seqs: Vec<Seq> = tree.iter().cloned().collect();
        let index: HashMap<&Seq, usize> = seqs.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut children = vec![Vec::new(); seqs.len()];
        for (i, s) in seqs.iter().enumerate() {
            if let Some(p) = s.parent() {
                children[index[&p]].push(i);
            }
        }
        let depth = seqs.iter().map(Seq::len).collect();
        Arena { seqs, children, depth }
    }
}

/// One derivative step with "infinitely many" read as "at least `threshold`".
pub fn threshold_d_step(tree: &FiniteTree, kind: DerivKind, threshold: usize) -> FiniteTree {
    let arena = Arena::new(tree);
    let n = arena.seqs.len();
    let keep: Vec<bool> = match kind {
        DerivKind::L => arena.children.iter().map(|c| !c.is_empty()).collect(),
        // König: a subtree is infinite iff it branches infinitely somewhere or has an
        // infinite branch, so both are read off with the threshold
        DerivKind::I => {
            let mut wide = vec![false; n];
            let mut height = vec![0usize; n];
            for u in (0..n).rev() {
                let kids = &arena.children[u];
                wide[u] = kids.len() >= threshold || kids.iter().any(|&c| wide[c]);
                height[u] = kids.iter().map(|&c| height[c] + 1).max().unwrap_or(0);
            }
            wide.iter().zip(&height).map(|(&w, &h)| w || h >= threshold).collect()
        }
        DerivKind::Iie => AntichainSearch::new(&arena).kept(threshold),
    };
    let nodes = arena.seqs.iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s.clone()).collect();
    FiniteTree::from_nodes(nodes).expect("threshold keep-predicates are upward closed")
}

/// Decides, per node, whether its proper descendants contain `threshold`
/// pairwise incomparable nodes of pairwise distinct depths.
struct AntichainSearch<'a> {
    arena: &'a Arena,
    /// Depths present in each subtree.
    mask: Vec<u128>,
    /// Upper bound on the best antichain inside each subtree (the node included).
    best: Vec<u32>,
}

impl<'a> AntichainSearch<'a> {
    fn new(arena: &'a Arena) -> Self {
        let n = arena.seqs.len();
        assert!(
            arena.depth.iter().all(|&d| d < 128),
            "threshold oracle supports trees of height below 128"
        );
        let mut s = AntichainSearch { arena, mask: vec![0; n], best: vec![1; n] };
        for u in (0..n).rev() {
            let below = arena.children[u].iter().fold(0u128, |m, &c| m | s.mask[c]);
            s.mask[u] = below | (1u128 << arena.depth[u]);
            s.best[u] = s.bound(&arena.children[u], 0).max(1);
        }
        s
    }

    /// Candidates whose remaining depth sets coincide can jointly cover at most that many depths.
    fn bound(&self, cands: &[usize], used: u128) -> u32 {
        let mut groups: Vec<(u128, u32)> = Vec::new();
        for &c in cands {
            let key = self.mask[c] & !used;
            if key == 0 {
                continue;
            }
            let take = self.best[c].min(key.count_ones());
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some(g) => g.1 += take,
                None => groups.push((key, take)),
            }
        }
        groups.iter().map(|&(k, s)| s.min(k.count_ones())).sum()
    }

    fn kept(&self, threshold: usize) -> Vec<bool> {
        let n = self.arena.seqs.len();
        let mut kept = vec![false; n];
        for u in (0..n).rev() {
            let children = &self.arena.children[u];
            kept[u] = children.iter().any(|&c| kept[c]) || {
                let mut cands = children.clone();
                self.search(&mut cands, 0, threshold as u32)
            };
        }
        kept
    }

    /// Each candidate is either chosen (if its depth is free) or replaced by its children.
    fn search(&self, cands: &mut Vec<usize>, used: u128, need: u32) -> bool {
        if need == 0 {
            return true;
        }
        if self.bound(cands, used) < need {
            return false;
        }
        let Some(c) = cands.pop() else {
            return false;
        };
        let bit = 1u128 << self.arena.depth[c];
        let mut found = used & bit == 0 && self.search(cands, used | bit, need - 1);
        if !found {
            let before = cands.len();
            cands.extend_from_slice(&self.arena.children[c]);
            found = self.search(cands, used, need);
            cands.truncate(before);
        }
        cands.push(c);
        found
    }
}

/// Agreement between exact iterates and threshold iterates at one step count.
#[derive(Clone, Debug)]
pub struct Calibration {
    pub kind: DerivKind,
    pub steps: usize,
    pub compared: usize,
    /// `(position, exact membership, oracle membership)` for every mismatch.
    pub mismatches: Vec<(Seq, bool, bool)>,
}

/// Compares `D^k` for `k = 1..=max_steps` on the safe prefix of `expand(T, 12, 12)`.
///
/// Membership of a position in the exact iterate is decided locally: all three
/// derivatives only look at extensions, so `s ∈ D^k(T)` iff `D^k(T^s) ≠ ∅`.
pub fn calibrate(tree: &OmegaTree, kind: DerivKind, max_steps: usize) -> Vec<Calibration> {
    let expanded = expand_annotated(tree, ORACLE_WIDTH, ORACLE_CHAIN);
    let mut finite = FiniteTree::from_nodes(expanded.iter().map(|e| e.seq.clone()).collect())
        .expect("expansions are prefix-closed");
    let mut exact: HashMap<(usize, usize, u8), OmegaTree> = expanded
        .iter()
        .map(|e| (e.origin.key(), OmegaTree::from(e.origin.description())))
        .collect();
    let mut out = Vec::new();
    for steps in 1..=max_steps {
        finite = threshold_d_step(&finite, kind, ORACLE_THRESHOLD);
        for state in exact.values_mut() {
            *state = iter_derive(state, kind, 1);
        }
        let mut compared = 0;
        let mut mismatches = Vec::new();
        for e in expanded.iter().filter(|e| e.in_safe_prefix()) {
            let in_exact = !exact[&e.origin.key()].is_empty();
            let in_oracle = finite.contains(&e.seq);
            compared += 1;
            if in_exact != in_oracle {
                mismatches.push((e.seq.clone(), in_exact, in_oracle));
            }
        }
        out.push(Calibration { kind, steps, compared, mismatches });
    }
    out
}
