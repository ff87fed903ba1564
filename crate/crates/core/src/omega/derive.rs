//! Exact one-step derivatives and ranks on descriptions.
//!
//! Ranks are computed by structural recursion rather than by iterating
//! [`d_step`]: the leaf derivative has limit stages (e.g. on `Esc({∅})`) at
//! which the one-step description is a fixed point although the true iterate
//! keeps shrinking.

use std::fmt;
use std::str::FromStr;

use super::{Node, OmegaTree, Part, PartKind};
use crate::error::{Error, Result};
use crate::ordinal::{ord_add, Ordinal, Rank};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DerivKind {
    /// Remove leaves.
    L,
    /// Keep nodes with infinitely many extensions.
    I,
    /// Keep nodes with infinitely many pairwise incomparable extensions of pairwise distinct lengths.
    Iie,
}

impl DerivKind {
    pub const ALL: [DerivKind; 3] = [DerivKind::L, DerivKind::I, DerivKind::Iie];
}

impl fmt::Display for DerivKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DerivKind::L => "l",
            DerivKind::I => "i",
            DerivKind::Iie => "iie",
        })
    }
}

impl FromStr for DerivKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l" => Ok(DerivKind::L),
            "i" => Ok(DerivKind::I),
            "iie" => Ok(DerivKind::Iie),
            _ => Err(Error::Invalid(format!("unknown derivative `{s}` (expected l, i or iie)"))),
        }
    }
}

pub fn d_step(tree: &OmegaTree, kind: DerivKind) -> OmegaTree {
    OmegaTree(tree.0.as_ref().and_then(|n| match kind {
        DerivKind::L => step_l(n),
        DerivKind::I => step_i(n),
        DerivKind::Iie => step_iie(n),
    }))
}

pub fn iter_derive(tree: &OmegaTree, kind: DerivKind, steps: usize) -> OmegaTree {
    let mut t = tree.clone();
    for _ in 0..steps {
        if t.is_empty() {
            break;
        }
        t = d_step(&t, kind);
    }
    t
}

fn step_l(n: &Node) -> Option<Node> {
    if n.is_point() {
        return None;
    }
    let parts = n
        .parts
        .iter()
        .filter_map(|p| match p.kind {
            PartKind::Rep => step_l(&p.proto).map(|q| Part { kind: PartKind::Rep, proto: q }),
            // the handle of copy n+1 takes over the role of copy n
            PartKind::Esc => Some(Part { kind: PartKind::Esc, proto: step_l(&p.proto).unwrap_or_default() }),
        })
        .collect();
    Some(Node {
        children: n.children.iter().filter_map(|(l, c)| step_l(c).map(|d| (*l, d))).collect(),
        parts,
        chain: n.chain,
    })
}

fn step_i(n: &Node) -> Option<Node> {
    if n.is_finite() {
        return None;
    }
    Some(Node {
        children: n.children.iter().filter_map(|(l, c)| step_i(c).map(|d| (*l, d))).collect(),
        parts: n
            .parts
            .iter()
            .filter_map(|p| step_i(&p.proto).map(|q| Part { kind: p.kind, proto: q }))
            .collect(),
        chain: n.chain,
    })
}

/// Some Esc bundle, or some Rep bundle of unbounded depth, lies weakly below.
fn survives_iie(n: &Node) -> bool {
    n.parts.iter().any(|p| p.kind == PartKind::Esc || p.proto.is_unbounded())
        || n.children.values().any(survives_iie)
}

fn step_iie(n: &Node) -> Option<Node> {
    if !survives_iie(n) {
        return None;
    }
    Some(Node {
        children: n.children.iter().filter_map(|(l, c)| step_iie(c).map(|d| (*l, d))).collect(),
        parts: n
            .parts
            .iter()
            .filter_map(|p| step_iie(&p.proto).map(|q| Part { kind: p.kind, proto: q }))
            .collect(),
        chain: false,
    })
}

/// The least `α` with `D^{α+1}(T) = ∅`.
pub fn iter_rank(tree: &OmegaTree, kind: DerivKind) -> Rank {
    let Some(root) = &tree.0 else {
        return Rank::NegOne;
    };
    match kind {
        DerivKind::L => rank_l(root).map_or(Rank::Infinite, Rank::Ord),
        DerivKind::I => survival_i(root).map_or(Rank::Infinite, Rank::nat),
        DerivKind::Iie => Rank::nat(survival_iie(root)),
    }
}

/// Leaf rank; `None` when a chain keeps the tree from ever emptying.
fn rank_l(n: &Node) -> Option<Ordinal> {
    if n.chain {
        return None;
    }
    let mut best = Ordinal::zero();
    for c in n.children.values() {
        best = best.max(rank_l(c)?.succ());
    }
    for p in &n.parts {
        let r = rank_l(&p.proto)?;
        let via = match p.kind {
            PartKind::Rep => r.succ(),
            // copy n contributes r + n + 1; the supremum over n is r + ω
            PartKind::Esc => ord_add(&r, &Ordinal::omega()),
        };
        best = best.max(via);
    }
    Some(best)
}

/// The last `k` with the position still present in `D_i^k`; `None` for never.
fn survival_i(n: &Node) -> Option<u64> {
    if n.chain {
        return None;
    }
    let mut best = 0;
    for c in n.children.values() {
        best = best.max(survival_i(c)?);
    }
    for p in &n.parts {
        best = best.max(survival_i(&p.proto)? + 1);
    }
    Some(best)
}

/// The last `k` with the position present in `D_iie^k`.
fn survival_iie(n: &Node) -> u64 {
    let mut best = 0;
    for c in n.children.values() {
        best = best.max(survival_iie(c));
    }
    for p in &n.parts {
        let via = match p.kind {
            PartKind::Esc => Some(survival_iie(&p.proto) + 1),
            PartKind::Rep => unbounded_until(&p.proto).map(|k| k + 1),
        };
        best = best.max(via.unwrap_or(0));
    }
    best
}

/// The last `k` for which `D_iie^k` of this position is unbounded in depth.
fn unbounded_until(n: &Node) -> Option<u64> {
    let mut best = n.chain.then_some(0);
    for c in n.children.values() {
        best = best.max(unbounded_until(c));
    }
    for p in &n.parts {
        let via = match p.kind {
            PartKind::Esc => Some(survival_iie(&p.proto)),
            PartKind::Rep => unbounded_until(&p.proto),
        };
        best = best.max(via);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omega::{canonical_full, esc_nest, rep_nest};

    fn t(n: Node) -> OmegaTree {
        OmegaTree::from(n)
    }

    #[test]
    fn chain_alone() {
        let c = t(Node::chain_node());
        assert!(d_step(&c, DerivKind::Iie).is_empty());
        assert_eq!(d_step(&c, DerivKind::I), c);
        assert_eq!(d_step(&c, DerivKind::L), c);
        assert_eq!(iter_rank(&c, DerivKind::I), Rank::Infinite);
        assert_eq!(iter_rank(&c, DerivKind::L), Rank::Infinite);
        assert_eq!(iter_rank(&c, DerivKind::Iie), Rank::nat(0));
    }

    #[test]
    fn rep_over_chain_under_iie_is_a_point() {
        let x = t(Node::leaf().with_rep(Node::chain_node()));
        assert_eq!(d_step(&x, DerivKind::Iie), OmegaTree::point());
        assert_eq!(iter_rank(&x, DerivKind::Iie), Rank::nat(1));
    }

    #[test]
    fn esc_point_is_a_leaf_fixed_point_with_rank_omega() {
        let x = t(Node::leaf().with_esc(Node::leaf()));
        assert_eq!(d_step(&x, DerivKind::L), x);
        assert_eq!(iter_rank(&x, DerivKind::L), Rank::Ord(Ordinal::omega()));
        assert_eq!(iter_derive(&x, DerivKind::Iie, 1), OmegaTree::point());
        assert!(iter_derive(&x, DerivKind::Iie, 2).is_empty());
    }

    #[test]
    fn nested_esc_under_iie() {
        let x = t(esc_nest(2, Node::leaf()));
        assert_eq!(iter_derive(&x, DerivKind::Iie, 2), OmegaTree::point());
        assert_eq!(iter_rank(&x, DerivKind::Iie), Rank::nat(2));
    }

    #[test]
    fn canonical_ranks() {
        for k in 0..=8 {
            let x = t(canonical_full(k));
            assert_eq!(iter_rank(&x, DerivKind::L), Rank::nat(k as u64));
            assert_eq!(iter_rank(&x, DerivKind::I), Rank::nat(k as u64));
        }
    }

    #[test]
    fn esc_over_rep_ranks() {
        for a in 0..=2 {
            for b in 0..=3 {
                let x = t(rep_nest(b, esc_nest(a, Node::leaf())));
                let expect = ord_add(&Ordinal::omega_pow(1, a as u64), &Ordinal::nat(b as u64));
                assert_eq!(iter_rank(&x, DerivKind::L), Rank::Ord(expect));
            }
        }
    }

    #[test]
    fn empty_tree_has_rank_minus_one() {
        for k in DerivKind::ALL {
            assert_eq!(iter_rank(&OmegaTree::empty(), k), Rank::NegOne);
            assert!(d_step(&OmegaTree::empty(), k).is_empty());
        }
    }

    #[test]
    fn zero_steps_is_identity() {
        let x = t(Node::leaf().with_esc(Node::leaf().with_rep(Node::chain_node())));
        for k in DerivKind::ALL {
            assert_eq!(iter_derive(&x, k, 0), x);
        }
    }

    #[test]
    fn i_and_iie_ranks_match_step_counts() {
        let samples = [
            Node::leaf().with_rep(Node::leaf().with_esc(Node::leaf())),
            Node::leaf().with_child(3, esc_nest(2, Node::leaf())).with_rep(Node::leaf()),
            Node::leaf().with_rep(Node::leaf().with_rep(Node::chain_node())),
            Node::leaf().with_esc(Node::leaf().with_rep(Node::leaf())),
        ];
        for n in samples {
            let x = t(n);
            for kind in [DerivKind::I, DerivKind::Iie] {
                let Rank::Ord(r) = iter_rank(&x, kind) else { continue };
                let r = r.as_finite().unwrap() as usize;
                assert!(!iter_derive(&x, kind, r).is_empty(), "{x} {kind}");
                assert!(iter_derive(&x, kind, r + 1).is_empty(), "{x} {kind}");
            }
        }
    }

    #[test]
    fn kind_text() {
        for k in DerivKind::ALL {
            assert_eq!(k.to_string().parse::<DerivKind>().unwrap(), k);
        }
        assert!("x".parse::<DerivKind>().is_err());
    }
}
