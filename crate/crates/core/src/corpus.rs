//! Seeded random instances for the verification suites and property tests.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::broom::{BroomExpr, Fork, TailRule};
use crate::leaf_scheme::LeafScheme;
use crate::omega::{Node, OmegaTree, PartKind};
use crate::reindex::{Family, VecSeq};
use crate::suslin::{Continuation, PointSet, SuslinScheme, Universe};
use crate::trees::{cl_tr, FiniteTree, Seq};

/// Description depth of generated omega trees.
pub const TREE_DEPTH: usize = 3;
/// Parts per generated omega tree, counting chain markers.
pub const TREE_PARTS: usize = 3;
/// Explicit children per node.
pub const TREE_CHILDREN: usize = 2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The rng for instance `index` of a suite run with `seed`.
pub fn instance_rng(seed: u64, suite: &str, index: usize) -> ChaCha8Rng {
    let tag = suite.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    rng(seed ^ tag ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn random_subset(rng: &mut impl Rng, within: PointSet) -> PointSet {
    PointSet(within.0 & rng.gen::<u64>())
}

/// A random omega tree; with `well_founded` no chain markers appear.
pub fn omega_tree(rng: &mut impl Rng, well_founded: bool) -> OmegaTree {
    let mut parts_left = rng.gen_range(0..=TREE_PARTS);
    OmegaTree(Some(node(rng, TREE_DEPTH, &mut parts_left, well_founded)))
}

fn node(rng: &mut impl Rng, depth: usize, parts_left: &mut usize, well_founded: bool) -> Node {
    let mut n = Node::leaf();
    if depth == 0 {
        return n;
    }
    if !well_founded && *parts_left > 0 && rng.gen_bool(0.2) {
        *parts_left -= 1;
        n = n.with_chain();
    }
    let children = rng.gen_range(0..=TREE_CHILDREN);
    let mut labels: Vec<u64> = (0..4).collect();
    labels.shuffle(rng);
    for &label in &labels[..children] {
        let child = node(rng, depth - 1, parts_left, well_founded);
        n = n.with_child(label, child);
    }
    while *parts_left > 0 && rng.gen_bool(0.45) {
        *parts_left -= 1;
        let kind = if rng.gen_bool(0.5) { PartKind::Rep } else { PartKind::Esc };
        let proto = node(rng, depth - 1, parts_left, well_founded);
        n = n.with_part(kind, proto);
    }
    n
}

/// A random well-founded tree whose root is a bare node with a single Esc part, so that
/// every truncation of it is dominated by its longest handle.
pub fn esc_rooted_tree(rng: &mut impl Rng) -> OmegaTree {
    let mut parts_left = TREE_PARTS - 1;
    let proto = node(rng, TREE_DEPTH - 1, &mut parts_left, true);
    OmegaTree(Some(Node::leaf().with_esc(proto)))
}

/// A random broom of class exactly `class`.
pub fn broom(rng: &mut impl Rng, class: u64) -> BroomExpr {
    match class {
        0 => BroomExpr::Leaf0,
        c if c % 2 == 1 => {
            let len = rng.gen_range(1..=2);
            let h = Seq::new((0..len).map(|_| rng.gen_range(0..3)).collect());
            BroomExpr::handle(h, broom(rng, c - 1))
        }
        c => {
            let items = rng.gen_range(0..=2);
            let mut firsts: Vec<u64> = (0..4).collect();
            firsts.shuffle(rng);
            let items = firsts[..items]
                .iter()
                .map(|&first| {
                    let mut f = vec![first];
                    if rng.gen_bool(0.3) {
                        f.push(rng.gen_range(0..3));
                    }
                    let body_class = rng.gen_range(0..c);
                    (Seq::new(f), broom(rng, body_class))
                })
                .collect();
            let tail_class = rng.gen_range(c - 2..c);
            let tail = if rng.gen_bool(0.5) { TailRule::RepeatLast } else { TailRule::GrowHandle };
            let body = broom(rng, tail_class);
            BroomExpr::Fork(Fork::new(items, tail, Some(body)).expect("distinct first entries"))
        }
    }
}

/// A monotone scheme over at most `max_points` points, labels `0..alphabet`, keys of
/// length at most `depth`.
pub fn scheme(rng: &mut impl Rng, max_points: usize, alphabet: u64, depth: usize) -> SuslinScheme {
    let universe = Universe::numbered(rng.gen_range(1..=max_points));
    let mut entries = BTreeMap::new();
    let root = random_subset(rng, universe.full()).union(PointSet::singleton(0));
    entries.insert(Seq::empty(), root);
    let mut frontier = vec![Seq::empty()];
    while let Some(s) = frontier.pop() {
        if s.len() == depth {
            continue;
        }
        for a in 0..alphabet {
            if rng.gen_bool(0.55) {
                let parent = entries[&s];
                // bias towards keeping most points so that deep values stay nonempty
                let value = random_subset(rng, parent).union(random_subset(rng, parent));
                entries.insert(s.child(a), value);
                frontier.push(s.child(a));
            }
        }
    }
    let continuation = if rng.gen_bool(0.5) { Continuation::Vanish } else { Continuation::Extend };
    SuslinScheme::new(universe, entries, continuation).expect("generated schemes are monotone")
}

/// A random finite tree with at most `max_nodes` nodes and entries at most `max_entry`.
pub fn finite_tree(rng: &mut impl Rng, max_nodes: usize, max_entry: u64) -> FiniteTree {
    let target = rng.gen_range(1..=max_nodes);
    let mut nodes = vec![Seq::empty()];
    let mut seen: BTreeSet<Seq> = nodes.iter().cloned().collect();
    for _ in 0..4 * max_nodes {
        if nodes.len() == target {
            break;
        }
        let parent = nodes.choose(rng).expect("nonempty").clone();
        let child = parent.child(rng.gen_range(0..=max_entry));
        if seen.insert(child.clone()) {
            nodes.push(child);
        }
    }
    cl_tr(nodes)
}

pub fn vecseq(rng: &mut impl Rng, max_blocks: usize, max_entry: u64) -> VecSeq {
    let m = rng.gen_range(0..=max_blocks);
    VecSeq::new((1..=m).map(|k| Seq::new((0..=k).map(|_| rng.gen_range(0..=max_entry)).collect())).collect())
        .expect("block lengths follow the layout")
}

/// Extends `v` by up to `more` random blocks.
pub fn extend_vecseq(rng: &mut impl Rng, v: &VecSeq, more: usize, max_entry: u64) -> VecSeq {
    let mut blocks = v.blocks().to_vec();
    for _ in 0..rng.gen_range(0..=more) {
        let k = blocks.len() + 1;
        blocks.push(Seq::new((0..=k).map(|_| rng.gen_range(0..=max_entry)).collect()));
    }
    VecSeq::new(blocks).expect("block lengths follow the layout")
}

/// A family with rows indexed over `0..alphabet`, `|s| + |t| ≤ depth`, monotone rows.
pub fn family(rng: &mut impl Rng, max_points: usize, alphabet: u64, depth: usize) -> Family {
    let universe = Universe::numbered(rng.gen_range(1..=max_points));
    let mut rows = BTreeMap::new();
    let mut row_keys = vec![Seq::empty()];
    let mut frontier = vec![Seq::empty()];
    while let Some(s) = frontier.pop() {
        if s.len() + 1 >= depth {
            continue;
        }
        for a in 0..alphabet {
            if rng.gen_bool(0.6) {
                row_keys.push(s.child(a));
                frontier.push(s.child(a));
            }
        }
    }
    for s in row_keys {
        let mut row = BTreeMap::new();
        row.insert(Seq::empty(), random_subset(rng, universe.full()).union(random_subset(rng, universe.full())));
        let mut frontier = vec![Seq::empty()];
        while let Some(t) = frontier.pop() {
            if s.len() + t.len() >= depth {
                continue;
            }
            for a in 0..alphabet {
                if rng.gen_bool(0.6) {
                    let parent: PointSet = row[&t];
                    row.insert(t.child(a), random_subset(rng, parent).union(random_subset(rng, parent)));
                    frontier.push(t.child(a));
                }
            }
        }
        rows.insert(s, row);
    }
    Family::new(universe, rows).expect("generated rows are monotone")
}

/// A leaf-scheme on a random tree with at most `max_nodes` nodes.
pub fn leaf_scheme(rng: &mut impl Rng, max_nodes: usize, max_points: usize) -> LeafScheme {
    let tree = finite_tree(rng, max_nodes, 3);
    let universe = Universe::numbered(rng.gen_range(1..=max_points));
    let values = tree.leaves().into_iter().map(|l| (l, random_subset(rng, universe.full()))).collect();
    LeafScheme::new(universe, tree, values).expect("values on the leaves")
}

/// A leafwise shrink of `h` towards `x`: `H(t) ∩ X ⊆ H'(t) ⊆ H(t)`.
pub fn shrink(rng: &mut impl Rng, h: &LeafScheme, x: PointSet) -> LeafScheme {
    h.map_values(|_, v| v.inter(x).union(random_subset(rng, v)))
}
