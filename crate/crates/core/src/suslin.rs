//! Suslin schemes over a finite universe, the Suslin operation and the `R_T` operators.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::ordinal::Ordinal;
use crate::sexp::{FromSexp, Sexp};
use crate::trees::{gen_t_fin, FiniteTree, Seq};

/// A subset of a universe of at most 64 points, as a bitmask over point indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointSet(pub u64);

impl PointSet {
    pub const EMPTY: PointSet = PointSet(0);

    pub fn full(size: usize) -> Self {
        PointSet(if size >= 64 { u64::MAX } else { (1u64 << size) - 1 })
    }

    pub fn singleton(i: usize) -> Self {
        PointSet(1u64 << i)
    }

    pub fn union(self, other: PointSet) -> Self {
        PointSet(self.0 | other.0)
    }

    pub fn inter(self, other: PointSet) -> Self {
        PointSet(self.0 & other.0)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1u64 << i) != 0
    }

    pub fn is_subset(self, other: PointSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Universe {
    points: Vec<String>,
}

impl Universe {
    pub fn new(points: Vec<String>) -> Result<Self> {
        if points.len() > 64 {
            return Err(Error::Invalid("universes hold at most 64 points".into()));
        }
        let distinct: BTreeSet<&String> = points.iter().collect();
        if distinct.len() != points.len() {
            return Err(Error::Invalid("universe points must be distinct".into()));
        }
        Ok(Universe { points })
    }

    /// Points named `p0, p1, ...`.
    pub fn numbered(size: usize) -> Self {
        Universe { points: (0..size).map(|i| format!("p{i}")).collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn full(&self) -> PointSet {
        PointSet::full(self.len())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|p| p == name)
    }

    pub fn show(&self, set: PointSet) -> String {
        let mut out = String::from("(set");
        for i in set.indices() {
            out.push(' ');
            out.push_str(&self.points[i]);
        }
        out.push(')');
        out
    }

    pub fn parse_set(&self, sexp: &Sexp) -> Result<PointSet> {
        let mut set = PointSet::EMPTY;
        for p in sexp.form("set")? {
            let name = p.atom()?;
            let i = self.index_of(name).ok_or_else(|| p.error(format!("`{name}` is not in the universe")))?;
            set = set.union(PointSet::singleton(i));
        }
        Ok(set)
    }

    fn to_sexp_text(&self) -> String {
        let mut out = String::from("(universe");
        for p in &self.points {
            out.push(' ');
            out.push_str(p);
        }
        out.push(')');
        out
    }
}

impl FromSexp for Universe {
    fn from_sexp(sexp: &Sexp) -> Result<Self> {
        let names = sexp.form("universe")?.iter().map(|a| a.atom().map(str::to_string)).collect::<Result<Vec<_>>>()?;
        Universe::new(names).map_err(|e| sexp.error(e.to_string()))
    }
}

/// What `C(s)` is for `s` outside the stored key set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Continuation {
    Vanish,
    /// `C(s)` equals `C` at the longest stored prefix of `s`.
    Extend,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuslinScheme {
    universe: Universe,
    entries: BTreeMap<Seq, PointSet>,
    continuation: Continuation,
}

impl SuslinScheme {
    /// Rejects key sets that are not prefix-closed and values that are not monotone.
    pub fn new(universe: Universe, entries: BTreeMap<Seq, PointSet>, continuation: Continuation) -> Result<Self> {
        let full = universe.full();
        for (s, set) in &entries {
            if !set.is_subset(full) {
                return Err(Error::Invalid(format!("value at {s} leaves the universe")));
            }
            if let Some(p) = s.parent() {
                match entries.get(&p) {
                    None => return Err(Error::Invalid(format!("key set not prefix-closed: {s} stored without {p}"))),
                    Some(up) if !set.is_subset(*up) => {
                        return Err(Error::Invalid(format!(
                            "not monotone: C{s} = {} is not inside C{p} = {}",
                            universe.show(*set),
                            universe.show(*up)
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(SuslinScheme { universe, entries, continuation })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn entries(&self) -> &BTreeMap<Seq, PointSet> {
        &self.entries
    }

    pub fn continuation(&self) -> Continuation {
        self.continuation
    }

    pub fn is_key(&self, s: &Seq) -> bool {
        self.entries.contains_key(s)
    }

    pub fn max_key_depth(&self) -> usize {
        self.entries.keys().next_back().map_or(0, Seq::len)
    }

    pub fn key_labels(&self) -> BTreeSet<u64> {
        self.entries.keys().flat_map(|s| s.entries().iter().copied()).collect()
    }

    /// A label that occurs in no key.
    pub fn fresh_label(&self) -> u64 {
        self.key_labels().iter().next_back().map_or(0, |m| m + 1)
    }

    fn longest_stored_prefix(&self, s: &Seq) -> Option<&PointSet> {
        (0..=s.len()).rev().find_map(|n| self.entries.get(&s.prefix(n)))
    }

    /// `C(s)` under the continuation rule.
    pub fn value(&self, s: &Seq) -> PointSet {
        if let Some(v) = self.entries.get(s) {
            return *v;
        }
        match self.continuation {
            Continuation::Vanish => PointSet::EMPTY,
            Continuation::Extend => self.longest_stored_prefix(s).copied().unwrap_or_default(),
        }
    }
}

impl fmt::Display for SuslinScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let default = match self.continuation {
            Continuation::Vanish => "vanish",
            Continuation::Extend => "extend",
        };
        write!(f, "(scheme {} (default {default})", self.universe.to_sexp_text())?;
        for (s, set) in &self.entries {
            write!(f, " (entry {s} {})", self.universe.show(*set))?;
        }
        f.write_str(")")
    }
}

impl FromSexp for SuslinScheme {
    fn from_sexp(sexp: &Sexp) -> Result<Self> {
        let args = sexp.form("scheme")?;
        let [universe, default, entries @ ..] = args else {
            return Err(sexp.error("expected (scheme (universe ...) (default ...) (entry ...)*)"));
        };
        let universe = Universe::from_sexp(universe)?;
        let [mode] = default.form("default")? else {
            return Err(default.error("expected (default vanish|extend)"));
        };
        let continuation = match mode.atom()? {
            "vanish" => Continuation::Vanish,
            "extend" => Continuation::Extend,
            _ => return Err(mode.error("expected vanish or extend")),
        };
        let mut map = BTreeMap::new();
        for e in entries {
            let [key, set] = e.form("entry")? else {
                return Err(e.error("expected (entry (seq ...) (set ...))"));
            };
            let key = Seq::from_sexp(key)?;
            if map.insert(key.clone(), universe.parse_set(set)?).is_some() {
                return Err(e.error(format!("duplicate entry for {key}")));
            }
        }
        SuslinScheme::new(universe, map, continuation).map_err(|e| sexp.error(e.to_string()))
    }
}

/// `⋃_σ ⋂_n C(σ|n)`. A finite key set has no infinite branch, so under VANISH every branch
/// ends in `∅`; under EXTEND every stored node continues with an off-key letter along which
/// the values stabilize, and nothing else stabilizes anywhere else.
pub fn a_op(scheme: &SuslinScheme) -> PointSet {
    match scheme.continuation {
        Continuation::Vanish => PointSet::EMPTY,
        Continuation::Extend => scheme.entries.values().fold(PointSet::EMPTY, |a, &b| a.union(b)),
    }
}

/// `R^h_T(C)` by the recursion `R^h_T = ⋂_{(m)} ⋃_{|s|=m} R^{h⌢s}_{T^{(m)}}`.
///
/// Images are searched over key labels plus one fresh label; once an image leaves the
/// key set every further letter is equivalent, so the walk stops there.
pub fn rt_eval(tree: &FiniteTree, scheme: &SuslinScheme, h: &Seq) -> Result<PointSet> {
    if tree.is_empty() {
        return Err(Error::Invalid("R_T needs a nonempty tree".into()));
    }
    let eval = RecursiveEval { tree, scheme, memo: RefCell::new(HashMap::new()) };
    Ok(eval.at(&Seq::empty(), h))
}

struct RecursiveEval<'a> {
    tree: &'a FiniteTree,
    scheme: &'a SuslinScheme,
    memo: RefCell<HashMap<(Seq, Seq), PointSet>>,
}

impl RecursiveEval<'_> {
    /// Everything from here on is off the key set, so every image has the same value.
    fn off_key(&self, h: &Seq) -> PointSet {
        self.scheme.value(h)
    }

    fn at(&self, t: &Seq, h: &Seq) -> PointSet {
        if !self.scheme.is_key(h) {
            return self.off_key(h);
        }
        if let Some(v) = self.memo.borrow().get(&(t.clone(), h.clone())) {
            return *v;
        }
        let mut acc = self.scheme.value(h);
        for c in self.tree.ims(t).expect("t is a node") {
            let m = c.last().expect("child") as usize;
            acc = acc.inter(self.grow(&c, h, m));
        }
        self.memo.borrow_mut().insert((t.clone(), h.clone()), acc);
        acc
    }

    /// `⋃_{|s| = remaining} R^{h⌢s}` for the subtree at `t`.
    fn grow(&self, t: &Seq, h: &Seq, remaining: usize) -> PointSet {
        if remaining == 0 {
            return self.at(t, h);
        }
        let mut acc = match self.scheme.continuation {
            Continuation::Vanish => PointSet::EMPTY,
            Continuation::Extend => self.off_key(&h.child(self.scheme.fresh_label())),
        };
        let labels: Vec<u64> = self
            .scheme
            .entries
            .range(h.child(0)..=h.child(u64::MAX))
            .map(|(s, _)| s.last().expect("child key"))
            .collect();
        for a in labels {
            acc = acc.union(self.grow(t, &h.child(a), remaining - 1));
        }
        acc
    }
}

/// Default cap on candidate images examined by [`rt_eval_brute`].
pub const BRUTE_BUDGET: u64 = 20_000_000;

/// `R^h_T(C)` straight from the definition: a point is in iff some admissible map `φ`
/// keeps it inside every `C(h⌢φ(t))`. Maps are enumerated node by node over key labels
/// plus one fresh label; under EXTEND an image that has left the key set continues with
/// the fresh label only.
pub fn rt_eval_brute(tree: &FiniteTree, scheme: &SuslinScheme, h: &Seq) -> Result<PointSet> {
    rt_eval_brute_with_budget(tree, scheme, h, BRUTE_BUDGET)
}

pub fn rt_eval_brute_with_budget(tree: &FiniteTree, scheme: &SuslinScheme, h: &Seq, budget: u64) -> Result<PointSet> {
    if tree.is_empty() {
        return Err(Error::Invalid("R_T needs a nonempty tree".into()));
    }
    let order: Vec<Seq> = tree.iter().cloned().collect();
    let index: HashMap<&Seq, usize> = order.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let parent: Vec<usize> = order.iter().map(|s| s.parent().map_or(0, |p| index[&p])).collect();
    let mut alphabet: Vec<u64> = scheme.key_labels().into_iter().collect();
    alphabet.push(scheme.fresh_label());
    let mut search = BruteSearch {
        order: &order,
        parent: &parent,
        scheme,
        alphabet,
        images: vec![Seq::empty(); order.len()],
        point: 0,
        spent: 0,
        budget,
    };
    let mut result = PointSet::EMPTY;
    for x in 0..scheme.universe.len() {
        search.point = x;
        search.images[0] = h.clone();
        if !scheme.value(h).contains(x) {
            continue;
        }
        if let Outcome::Found = search.run(1)? {
            result = result.union(PointSet::singleton(x));
        }
    }
    Ok(result)
}

enum Outcome {
    Found,
    /// No completion exists given the image of this node.
    Blocked(usize),
}

struct BruteSearch<'a> {
    order: &'a [Seq],
    parent: &'a [usize],
    scheme: &'a SuslinScheme,
    alphabet: Vec<u64>,
    images: Vec<Seq>,
    point: usize,
    spent: u64,
    budget: u64,
}

impl BruteSearch<'_> {
    fn candidates(&self, from: &Seq, len: usize) -> Vec<Seq> {
        let mut layer = vec![from.clone()];
        for _ in 0..len {
            layer = layer
                .iter()
                .flat_map(|s| {
                    let letters: Vec<u64> = if self.scheme.is_key(s) {
                        self.alphabet.clone()
                    } else {
                        vec![*self.alphabet.last().expect("fresh label")]
                    };
                    letters.into_iter().map(move |a| s.child(a))
                })
                // under VANISH an image that leaves the key set holds no point
                .filter(|s| self.scheme.continuation == Continuation::Extend || self.scheme.is_key(s))
                .collect();
        }
        layer
    }

    /// Conflict-directed backtracking: a node's options depend only on its parent's image,
    /// so a node without options sends the search straight back to its parent.
    fn run(&mut self, at: usize) -> Result<Outcome> {
        if at == self.order.len() {
            return Ok(Outcome::Found);
        }
        let p = self.parent[at];
        let m = self.order[at].last().expect("non-root") as usize;
        for img in self.candidates(&self.images[p].clone(), m) {
            self.spent += 1;
            if self.spent > self.budget {
                return Err(Error::Bounds(format!("more than {} candidate images examined", self.budget)));
            }
            if !self.scheme.value(&img).contains(self.point) {
                continue;
            }
            self.images[at] = img;
            match self.run(at + 1)? {
                Outcome::Found => return Ok(Outcome::Found),
                Outcome::Blocked(j) if j == at => continue,
                blocked => return Ok(blocked),
            }
        }
        Ok(Outcome::Blocked(p))
    }
}

/// The canonical tree of class `alpha` cut down to entries `0..=depth+1`, where `depth` is
/// the deepest key: larger entries behave like `depth+1` under either continuation rule.
pub fn canonical_truncated(alpha: u64, scheme: &SuslinScheme) -> Result<FiniteTree> {
    let width = scheme.max_key_depth() as u64 + 2;
    let base = gen_t_fin((alpha / 2) as usize, width)?;
    Ok(if alpha.is_multiple_of(2) {
        base
    } else {
        crate::trees::tree_union(&FiniteTree::point(), &base.graft_under(&Seq::new(vec![1])))
    })
}

pub fn rt_alpha(alpha: &Ordinal, scheme: &SuslinScheme) -> Result<PointSet> {
    let a = alpha
        .as_finite()
        .filter(|&a| a <= 6)
        .ok_or_else(|| Error::Unsupported(format!("R_alpha is evaluated for classes 0..=6, not {alpha}")))?;
    rt_eval(&canonical_truncated(a, scheme)?, scheme, &Seq::empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::parse;
    use crate::trees::cl_tr;

    fn s(v: &[u64]) -> Seq {
        Seq::from(v)
    }

    fn scheme(text: &str) -> SuslinScheme {
        parse(text).unwrap()
    }

    #[test]
    fn suslin_operation_examples() {
        let c = scheme("(scheme (universe a b) (default vanish) (entry (seq) (set a b)) (entry (seq 0) (set a)))");
        assert_eq!(a_op(&c), PointSet::EMPTY);
        let c = scheme(
            "(scheme (universe a b) (default extend) (entry (seq) (set a)) (entry (seq 0) (set a)) (entry (seq 0 0) (set a)))",
        );
        assert_eq!(a_op(&c), PointSet::singleton(0));
        let c = scheme("(scheme (universe a) (default extend) (entry (seq) (set)))");
        assert_eq!(a_op(&c), PointSet::EMPTY);
    }

    #[test]
    fn point_tree_gives_the_root_value() {
        let c = scheme("(scheme (universe a b c) (default vanish) (entry (seq) (set a c)) (entry (seq 1) (set c)))");
        assert_eq!(rt_eval(&FiniteTree::point(), &c, &Seq::empty()).unwrap(), c.value(&Seq::empty()));
        assert_eq!(rt_eval_brute(&FiniteTree::point(), &c, &Seq::empty()).unwrap(), c.value(&Seq::empty()));
        assert_eq!(rt_eval(&FiniteTree::point(), &c, &s(&[1])).unwrap(), PointSet::singleton(2));
    }

    #[test]
    fn length_one_without_entries_vanishes() {
        let c = scheme("(scheme (universe a) (default vanish) (entry (seq) (set a)))");
        assert_eq!(rt_eval(&cl_tr([s(&[1])]), &c, &Seq::empty()).unwrap(), PointSet::EMPTY);
    }

    #[test]
    fn two_level_tree_matches_brute_force() {
        let c = scheme(
            "(scheme (universe a b c) (default vanish) (entry (seq) (set a b c)) (entry (seq 0) (set a b)) \
             (entry (seq 1) (set b c)) (entry (seq 0 0) (set a)) (entry (seq 1 0) (set c)) (entry (seq 1 1) (set b)))",
        );
        let t = gen_t_fin(2, 2).unwrap();
        assert_eq!(rt_eval(&t, &c, &Seq::empty()).unwrap(), rt_eval_brute(&t, &c, &Seq::empty()).unwrap());
    }

    #[test]
    fn r_alpha_examples() {
        let c = scheme("(scheme (universe a b) (default extend) (entry (seq) (set a)) (entry (seq 0) (set a)))");
        assert_eq!(rt_alpha(&Ordinal::nat(0), &c).unwrap(), c.value(&Seq::empty()));
        assert_eq!(rt_alpha(&Ordinal::nat(1), &c).unwrap(), PointSet::singleton(0));
        assert!(rt_alpha(&Ordinal::nat(7), &c).is_err());
    }

    #[test]
    fn r_two_is_the_limit_of_level_unions() {
        // ⋂_m ⋃_{|s|=m} C(s), evaluated directly with every m up to one past the key depth
        let c = scheme(
            "(scheme (universe a b) (default vanish) (entry (seq) (set a b)) (entry (seq 0) (set a b)) (entry (seq 0 2) (set b)))",
        );
        let direct = (0..=c.max_key_depth() + 1).fold(c.universe().full(), |acc, m| {
            let level = c.entries().iter().filter(|(k, _)| k.len() == m).fold(PointSet::EMPTY, |u, (_, v)| u.union(*v));
            acc.inter(level)
        });
        assert_eq!(rt_alpha(&Ordinal::nat(2), &c).unwrap(), direct);
    }

    #[test]
    fn monotonicity_violations_name_the_pair() {
        let err = parse::<SuslinScheme>("(scheme (universe a b) (default vanish) (entry (seq) (set a)) (entry (seq 3) (set b)))")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(seq 3)") && msg.contains("(seq)"), "{msg}");
        assert!(parse::<SuslinScheme>("(scheme (universe a) (default vanish) (entry (seq 1) (set a)))").is_err());
        assert!(parse::<SuslinScheme>("(scheme (universe a) (default vanish) (entry (seq) (set z)))").is_err());
    }

    #[test]
    fn text_round_trip() {
        let text = "(scheme (universe a b c) (default extend) (entry (seq) (set a b)) (entry (seq 2) (set b)))";
        assert_eq!(scheme(text).to_string(), text);
    }

    #[test]
    fn brute_budget_is_enforced() {
        let c = scheme("(scheme (universe a) (default extend) (entry (seq) (set a)) (entry (seq 0) (set a)))");
        let t = cl_tr([s(&[3, 3])]);
        assert!(matches!(rt_eval_brute_with_budget(&t, &c, &Seq::empty(), 1), Err(Error::Bounds(_))));
    }
}
