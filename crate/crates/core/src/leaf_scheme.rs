//! Leaf-schemes: sets attached to the leaves of a well-founded tree, extended inward by
//! unions at odd leaf-rank and intersections at even leaf-rank.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::sexp::{FromSexp, Sexp};
use crate::suslin::{PointSet, Universe};
use crate::trees::{gen_t_fin, FiniteTree, Seq};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafScheme {
    universe: Universe,
    tree: FiniteTree,
    values: BTreeMap<Seq, PointSet>,
}

impl LeafScheme {
    pub fn new(universe: Universe, tree: FiniteTree, values: BTreeMap<Seq, PointSet>) -> Result<Self> {
        if tree.is_empty() {
            return Err(Error::Invalid("leaf-schemes need a nonempty tree".into()));
        }
        let leaves = tree.leaves();
        if leaves.len() != values.len() || leaves.iter().any(|l| !values.contains_key(l)) {
            return Err(Error::Invalid("values must be given on exactly the leaves".into()));
        }
        if values.values().any(|v| !v.is_subset(universe.full())) {
            return Err(Error::Invalid("a leaf value leaves the universe".into()));
        }
        Ok(LeafScheme { universe, tree, values })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn tree(&self) -> &FiniteTree {
        &self.tree
    }

    pub fn values(&self) -> &BTreeMap<Seq, PointSet> {
        &self.values
    }

    /// The same tree with leaf values replaced by `f(leaf, value)`.
    pub fn map_values(&self, mut f: impl FnMut(&Seq, PointSet) -> PointSet) -> LeafScheme {
        let values = self.values.iter().map(|(t, v)| (t.clone(), f(t, *v))).collect();
        LeafScheme { universe: self.universe.clone(), tree: self.tree.clone(), values }
    }
}

/// `H(t)` extended to every node: union of the children when `r_l(T^t)` is odd,
/// intersection when it is even and positive.
pub fn ls_eval(h: &LeafScheme, t: &Seq) -> Result<PointSet> {
    if !h.tree.contains(t) {
        return Err(Error::Domain(format!("{t} is not a node of the tree")));
    }
    let ranks = h.tree.node_ranks();
    let mut memo = HashMap::new();
    Ok(eval_at(h, &ranks, t, &mut memo))
}

fn eval_at(h: &LeafScheme, ranks: &HashMap<Seq, u64>, t: &Seq, memo: &mut HashMap<Seq, PointSet>) -> PointSet {
    if let Some(v) = h.values.get(t) {
        return *v;
    }
    if let Some(v) = memo.get(t) {
        return *v;
    }
    let children = h.tree.ims(t).expect("node");
    let parts = children.iter().map(|c| eval_at(h, ranks, c, memo)).collect::<Vec<_>>();
    let value = if ranks[t] % 2 == 1 {
        parts.into_iter().fold(PointSet::EMPTY, PointSet::union)
    } else {
        parts.into_iter().fold(h.universe.full(), PointSet::inter)
    };
    memo.insert(t.clone(), value);
    value
}

/// Whether `H(t) ∩ X ⊆ H'(t) ⊆ H(t)` at every leaf.
pub fn ls_shrink_equiv(h: &LeafScheme, hp: &LeafScheme, x: PointSet) -> Result<bool> {
    if h.tree != hp.tree {
        return Err(Error::Domain("leaf-schemes on different trees".into()));
    }
    if h.universe != hp.universe {
        return Err(Error::Domain("leaf-schemes over different universes".into()));
    }
    Ok(h.values.iter().all(|(t, &v)| {
        let w = hp.values[t];
        v.inter(x).is_subset(w) && w.is_subset(v)
    }))
}

/// An equivalent scheme on the leaves of `gen_t_fin(k, width)`.
///
/// A node of leaf-rank `r` placed at a level of rank `j > r` is padded: all `width` children
/// repeat it one level lower, which a union or an intersection of equal sets leaves
/// unchanged. At `j = r` the operations agree in parity, the children move down one level
/// each, and spare slots repeat the first child.
pub fn ls_normalize(h: &LeafScheme, k: usize, width: u64) -> Result<LeafScheme> {
    let ranks = h.tree.node_ranks();
    let root_rank = ranks[&Seq::empty()] as usize;
    if root_rank > k {
        return Err(Error::Bounds(format!("leaf-rank {root_rank} does not fit height {k}")));
    }
    if h.tree.max_branching() as u64 > width {
        return Err(Error::Bounds(format!("branching {} exceeds width {width}", h.tree.max_branching())));
    }
    let mut values = BTreeMap::new();
    place(h, &ranks, &Seq::empty(), &Seq::empty(), k, width, &mut values);
    LeafScheme::new(h.universe.clone(), gen_t_fin(k, width)?, values)
}

fn place(
    h: &LeafScheme,
    ranks: &HashMap<Seq, u64>,
    src: &Seq,
    dst: &Seq,
    level: usize,
    width: u64,
    out: &mut BTreeMap<Seq, PointSet>,
) {
    if level == 0 {
        out.insert(dst.clone(), h.values[src]);
        return;
    }
    if (ranks[src] as usize) < level {
        for slot in 0..width {
            place(h, ranks, src, &dst.child(slot), level - 1, width, out);
        }
        return;
    }
    let children = h.tree.ims(src).expect("node");
    for slot in 0..width {
        let from = children.get(slot as usize).unwrap_or(&children[0]);
        place(h, ranks, from, &dst.child(slot), level - 1, width, out);
    }
}

impl fmt::Display for LeafScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(leafscheme {} (universe", self.tree)?;
        for p in self.universe.points() {
            write!(f, " {p}")?;
        }
        f.write_str(")")?;
        for (t, v) in &self.values {
            write!(f, " (leaf {t} {})", self.universe.show(*v))?;
        }
        f.write_str(")")
    }
}

impl FromSexp for LeafScheme {
    fn from_sexp(sexp: &Sexp) -> Result<Self> {
        let [tree, universe, leaves @ ..] = sexp.form("leafscheme")? else {
            return Err(sexp.error("expected (leafscheme (tree ...) (universe ...) (leaf ...)*)"));
        };
        let tree = FiniteTree::from_sexp(tree)?;
        let universe = Universe::from_sexp(universe)?;
        let mut values = BTreeMap::new();
        for l in leaves {
            let [t, set] = l.form("leaf")? else {
                return Err(l.error("expected (leaf (seq ...) (set ...))"));
            };
            let t = Seq::from_sexp(t)?;
            if values.insert(t.clone(), universe.parse_set(set)?).is_some() {
                return Err(l.error(format!("duplicate leaf {t}")));
            }
        }
        LeafScheme::new(universe, tree, values).map_err(|e| sexp.error(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::parse;

    fn ls(text: &str) -> LeafScheme {
        parse(text).unwrap()
    }

    const A: PointSet = PointSet(0b001);
    const B: PointSet = PointSet(0b010);

    #[test]
    fn point_tree() {
        let h = ls("(leafscheme (tree (seq)) (universe a b c) (leaf (seq) (set a)))");
        assert_eq!(ls_eval(&h, &Seq::empty()).unwrap(), A);
    }

    #[test]
    fn odd_rank_is_a_union() {
        let h = ls("(leafscheme (tree (seq 0) (seq 1)) (universe a b c) (leaf (seq 0) (set a)) (leaf (seq 1) (set b)))");
        assert_eq!(ls_eval(&h, &Seq::empty()).unwrap(), A.union(B));
    }

    #[test]
    fn even_rank_intersects_child_unions() {
        let h = ls(
            "(leafscheme (tree (seq 0 0) (seq 0 1) (seq 1 0)) (universe a b c) \
             (leaf (seq 0 0) (set a)) (leaf (seq 0 1) (set b)) (leaf (seq 1 0) (set b c)))",
        );
        assert_eq!(ls_eval(&h, &Seq::empty()).unwrap(), B);
        assert!(ls_eval(&h, &Seq::from(vec![7])).is_err());
    }

    #[test]
    fn shrinking_to_the_represented_set_keeps_it() {
        let h = ls(
            "(leafscheme (tree (seq 0 0) (seq 0 1) (seq 1)) (universe a b c) \
             (leaf (seq 0 0) (set a b)) (leaf (seq 0 1) (set c)) (leaf (seq 1) (set a c)))",
        );
        let x = ls_eval(&h, &Seq::empty()).unwrap();
        let shrunk = h.map_values(|_, v| v.inter(x));
        assert!(ls_shrink_equiv(&h, &h, x).unwrap());
        assert!(ls_shrink_equiv(&h, &shrunk, x).unwrap());
        assert_eq!(ls_eval(&shrunk, &Seq::empty()).unwrap(), x);
    }

    #[test]
    fn normalizing_keeps_the_root_value() {
        let h = ls(
            "(leafscheme (tree (seq 0 0) (seq 0 1) (seq 1)) (universe a b c) \
             (leaf (seq 0 0) (set a b)) (leaf (seq 0 1) (set c)) (leaf (seq 1) (set a c)))",
        );
        let root = ls_eval(&h, &Seq::empty()).unwrap();
        for k in 2..5 {
            let n = ls_normalize(&h, k, 3).unwrap();
            assert_eq!(n.tree(), &gen_t_fin(k, 3).unwrap());
            assert_eq!(ls_eval(&n, &Seq::empty()).unwrap(), root, "k = {k}");
        }
        assert!(ls_normalize(&h, 1, 3).is_err());
        assert!(ls_normalize(&h, 2, 1).is_err());
    }

    #[test]
    fn text_round_trip_and_validation() {
        let text = "(leafscheme (tree (seq 0) (seq 1)) (universe a b) (leaf (seq 0) (set a)) (leaf (seq 1) (set)))";
        assert_eq!(ls(text).to_string(), text);
        assert!(parse::<LeafScheme>("(leafscheme (tree (seq 0)) (universe a) (leaf (seq) (set a)))").is_err());
    }
}
