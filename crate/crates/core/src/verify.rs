//! The ten acceptance checks, each comparing an engine against an independent oracle or a
//! known value, grouped into suites for the `verify` subcommand.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::admissible::{exists_admissible_sym, Variant};
use crate::broom::{gen_optimal, to_extension, to_tree};
use crate::corpus;
use crate::error::Error;
use crate::leaf_scheme::{ls_eval, ls_normalize, ls_shrink_equiv, LeafScheme};
use crate::omega::{
    calibrate, canonical_full, d_step, esc_nest, expand, is_wf, iter_derive, iter_rank, omega_union, rep_nest,
    DerivKind, Node, OmegaTree,
};
use crate::ordinal::{Ordinal, Rank};
use crate::reindex::{compose_scheme, delta_k, f4_value, level_tree, rho, rho_inv, xi_k};
use crate::suslin::{a_op, canonical_truncated, rt_alpha, rt_eval, rt_eval_brute, PointSet};
use crate::trees::{FiniteTree, Seq};

#[derive(Clone, Debug)]
pub struct Report {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {:>2} {:<24} {:>8.3}s / {}s  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs(),
            self.detail
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Ranks,
    Brooms,
    Charact,
    Rt,
    Reindex,
    Leaf,
}

impl Suite {
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
            Suite::Ranks => &[1, 2, 8, 10],
            Suite::Brooms => &[3, 4],
            Suite::Charact => &[5],
            Suite::Rt => &[6],
            Suite::Reindex => &[7],
            Suite::Leaf => &[9],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::All => "all",
            Suite::Ranks => "ranks",
            Suite::Brooms => "brooms",
            Suite::Charact => "charact",
            Suite::Rt => "rt",
            Suite::Reindex => "reindex",
            Suite::Leaf => "leaf",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "all" => Suite::All,
            "ranks" => Suite::Ranks,
            "brooms" => Suite::Brooms,
            "charact" => Suite::Charact,
            "rt" => Suite::Rt,
            "reindex" => Suite::Reindex,
            "leaf" => Suite::Leaf,
            _ => return Err(Error::Invalid(format!("unknown suite `{s}`"))),
        })
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Vec<Report> {
    suite.criteria().iter().map(|&id| run_criterion(id, seed)).collect()
}

pub fn run_criterion(id: u8, seed: u64) -> Report {
    let (name, limit, check): (&'static str, u64, fn(u64) -> Outcome) = match id {
        1 => ("canonical ranks", 1, canonical_ranks),
        2 => ("transfinite leaf-rank", 5, transfinite_leaf_rank),
        3 => ("broom rank lemma", 30, broom_rank_lemma),
        4 => ("extension identity", 30, extension_identity),
        5 => ("characterization", 120, characterization),
        6 => ("R_T equivalence", 120, rt_equivalence),
        7 => ("reindex", 300, reindex),
        8 => ("oracle calibration", 120, oracle_calibration),
        9 => ("leaf-scheme suite", 30, leaf_schemes),
        10 => ("union rank", 30, union_rank),
        _ => panic!("criteria are numbered 1..=10"),
    };
    let start = Instant::now();
    let outcome = check(seed);
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(limit);
    let mut detail = outcome.summary();
    if elapsed > limit {
        detail.push_str("; over the time limit");
    }
    Report { id, name, pass: outcome.failures.is_empty() && elapsed <= limit, detail, elapsed, limit }
}

/// Checks run and the first few failures.
#[derive(Default)]
struct Outcome {
    checks: usize,
    failures: Vec<String>,
    failure_count: usize,
    notes: Vec<String>,
}

impl Outcome {
    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < 3 {
                self.failures.push(describe());
            }
        }
    }

    fn note(&mut self, note: String) {
        self.notes.push(note);
    }

    fn summary(&self) -> String {
        let mut out = if self.failures.is_empty() {
            format!("{} checks", self.checks)
        } else {
            format!("{} of {} checks failed", self.failure_count, self.checks)
        };
        for n in &self.notes {
            out.push_str("; ");
            out.push_str(n);
        }
        if !self.failures.is_empty() {
            out.push_str("; first: ");
            out.push_str(&self.failures.join(" | "));
        }
        out
    }
}

fn tree(node: Node) -> OmegaTree {
    OmegaTree::from(node)
}

fn canonical_ranks(_seed: u64) -> Outcome {
    let mut out = Outcome::default();
    for k in 0..=8 {
        let t = tree(canonical_full(k));
        for kind in [DerivKind::L, DerivKind::I] {
            let r = iter_rank(&t, kind);
            out.check(r == Rank::nat(k as u64), || format!("r_{kind}(T_{k}) = {r}"));
        }
        // the finite expansion has the same leaf-rank
        let w = if k <= 6 { 4 } else { 3 };
        let f = expand(&t, w, 0).leaf_rank();
        out.check(f == Rank::nat(k as u64), || format!("leaf-rank of expand(T_{k}) = {f}"));
    }
    out
}

fn omega_times(a: u64, b: u64) -> Ordinal {
    let terms = if a == 0 { vec![] } else { vec![(1, a)] };
    Ordinal::from_terms(terms, b).expect("valid normal form")
}

fn transfinite_leaf_rank(seed: u64) -> Outcome {
    let mut out = Outcome::default();
    for a in 0..=2 {
        for b in 0..=3 {
            let t = tree(rep_nest(b, esc_nest(a, Node::leaf())));
            let r = iter_rank(&t, DerivKind::L);
            let want = omega_times(a as u64, b as u64);
            out.check(r == Rank::Ord(want.clone()), || format!("Rep^{b}(Esc^{a}) has leaf-rank {r}, not {want}"));
        }
    }
    for index in 0..25 {
        let t = corpus::esc_rooted_tree(&mut corpus::instance_rng(seed, "esc-rooted", index));
        let ranks: Vec<u64> = (1..=6).map(|w| expand(&t, w, 0).leaf_rank().as_finite().expect("finite")).collect();
        out.check(ranks.windows(2).all(|p| p[0] < p[1]), || format!("{t}: truncated leaf-ranks {ranks:?}"));
    }
    out
}

fn brooms(seed: u64) -> Vec<(u64, crate::broom::BroomExpr)> {
    (0..50)
        .map(|index| {
            let mut rng = corpus::instance_rng(seed, "brooms", index);
            let class = 1 + (index as u64 % 6);
            (class, corpus::broom(&mut rng, class))
        })
        .collect()
}

fn broom_rank_lemma(seed: u64) -> Outcome {
    let mut out = Outcome::default();
    for (class, b) in brooms(seed) {
        let steps = (class / 2) as usize;
        let d = iter_derive(&tree(to_tree(&b)), DerivKind::Iie, steps);
        out.check(d.is_finite(), || format!("class {class}: D_iie^{steps}({b}) is infinite"));
        if class % 2 == 0 {
            out.check(d.is_at_most_point(), || format!("class {class}: D_iie^{steps}({b}) = {d} exceeds {{∅}}"));
        }
    }
    for class in 1..=6 {
        let b = gen_optimal(class).expect("supported class");
        let steps = (class / 2) as usize;
        let d = iter_derive(&tree(to_tree(&b)), DerivKind::Iie, steps);
        out.check(!d.is_empty(), || format!("optimal broom of class {class} dies after {steps} steps"));
        if class % 2 == 1 {
            out.check(!d.is_at_most_point(), || format!("optimal broom of class {class} keeps only the root"));
        }
    }
    out
}

fn extension_identity(seed: u64) -> Outcome {
    let mut out = Outcome::default();
    for (_, b) in brooms(seed) {
        let got = d_step(&tree(to_extension(&b)), DerivKind::Iie).normalized();
        let want = tree(to_tree(&b)).normalized();
        out.check(got == want, || format!("{b}: D_iie of the extension is {got}, not {want}"));
    }
    out
}

fn characterization(seed: u64) -> Outcome {
    let mut out = Outcome::default();
    for index in 0..100 {
        let s = corpus::omega_tree(&mut corpus::instance_rng(seed, "charact", index), true);
        for alpha in 2..=6u64 {
            let d = iter_derive(&s, DerivKind::Iie, (alpha / 2) as usize);
            let ord = Ordinal::nat(alpha);
            let (predicted, got) = if alpha % 2 == 0 {
                (!d.is_empty(), exists_admissible_sym(&ord, Variant::Plain, &s))
            } else {
                (d.has_depth(1), exists_admissible_sym(&ord, Variant::Plain, &s))
            };
            out.check(got.as_ref().ok() == Some(&predicted), || format!("{s}, α = {alpha}: {got:?} vs {predicted}"));
            if alpha % 2 == 1 {
                for i in 1..=3 {
                    let got = exists_admissible_sym(&ord, Variant::Comma(i), &s);
                    let predicted = d.has_depth(i as usize);
                    out.check(got.as_ref().ok() == Some(&predicted), || {
                        format!("{s}, α = {alpha}, stem {i}: {got:?} vs {predicted}")
                    });
                }
            }
        }
    }
    out
}

fn rt_equivalence(seed: u64) -> Outcome {
    let mut out = Outcome::default();
    for index in 0..200 {
        let mut rng = corpus::instance_rng(seed, "rt", index);
        let c = corpus::scheme(&mut rng, 5, 3, 3);
        for _ in 0..3 {
            let t = corpus::finite_tree(&mut rng, 8, 3);
            let fast = rt_eval(&t, &c, &Seq::empty());
            let brute = rt_eval_brute(&t, &c, &Seq::empty());
            out.check(fast.is_ok() && fast.as_ref().ok() == brute.as_ref().ok(), || {
                format!("{t} on {c}: {fast:?} vs {brute:?}")
            });
        }
        let mut previous = c.universe().full();
        for alpha in 0..=6 {
            let r = rt_alpha(&Ordinal::nat(alpha), &c).expect("supported class");
            out.check(r.is_subset(previous), || format!("{c}: R_{alpha} = {r:?} leaves R_{} = {previous:?}", alpha.max(1) - 1));
            previous = r;
        }
        let a = a_op(&c);
        out.check(a.is_subset(previous), || format!("{c}: A(C) = {a:?} leaves R_6 = {previous:?}"));
    }
    out
}

fn reindex(seed: u64) -> Outcome {
    let mut out = Outcome::default();
    for index in 0..500 {
        let mut rng = corpus::instance_rng(seed, "vecseq", index);
        // left-folded pairing of six entries up to 2 stays below 2^48
        let v = corpus::vecseq(&mut rng, 5, 2);
        let w = corpus::extend_vecseq(&mut rng, &v, 5 - v.len(), 2);
        let u = corpus::vecseq(&mut rng, 5, 2);
        let (rv, rw, ru) = (rho(&v).expect("small"), rho(&w).expect("small"), rho(&u).expect("small"));
        out.check(rv.len() == v.len() && rho_inv(&rv) == v, || format!("ρ does not invert on {v}"));
        out.check(rv.is_prefix_of(&rw), || format!("{v} ⊑ {w} but ρ values are not nested"));
        out.check(ru.is_prefix_of(&rv) == u.is_prefix_of(&v), || format!("ρ changes the order of {u} and {v}"));
        let code = Seq::new((0..v.len()).map(|_| rng.gen_range(0..1_000_000)).collect());
        out.check(rho(&rho_inv(&code)).ok() == Some(code.clone()), || format!("ρ∘ρ⁻¹ moves {code}"));
        for k in 0..=v.len() {
            let (d, x) = (delta_k(&v, k).expect("k ≤ m"), xi_k(&v, k).expect("k ≤ m"));
            out.check(d.concat(&x).len() == v.len(), || format!("|Δ_{k}⌢ξ_{k}| ≠ |{v}|"));
            let (dw, xw) = (delta_k(&w, k).expect("k ≤ m"), xi_k(&w, k).expect("k ≤ m"));
            out.check(d == dw && x.is_prefix_of(&xw), || format!("Δ_{k}/ξ_{k} not stable from {v} to {w}"));
        }
    }
    for index in 0..20 {
        let f = corpus::family(&mut corpus::instance_rng(seed, "family", index), 4, 2, 4);
        let c = match compose_scheme(&f) {
            Ok(c) => c,
            Err(e) => {
                out.check(false, || format!("{f}: {e}"));
                continue;
            }
        };
        let rhs = canonical_truncated(4, &c).and_then(|t| rt_eval_brute(&t, &c, &Seq::empty()));
        let lhs = f4_value(&f, None);
        out.check(rhs.as_ref().ok() == Some(&lhs), || format!("{f}: {lhs:?} vs {rhs:?}"));
        for bound in 0..=3 {
            let r = rt_eval(&level_tree(bound), &c, &Seq::empty()).expect("nonempty tree");
            let levels = f4_value(&f, Some((bound as usize, bound as usize)));
            out.check(r.is_subset(levels), || format!("{f}: bounded R_4 {r:?} leaves {levels:?}"));
        }
    }
    out
}

fn oracle_calibration(seed: u64) -> Outcome {
    let mut out = Outcome::default();
    let mut by_kind = [0usize; 3];
    for index in 0..100 {
        let t = corpus::omega_tree(&mut corpus::instance_rng(seed, "calibrate", index), false);
        for (slot, kind) in DerivKind::ALL.into_iter().enumerate() {
            for cal in calibrate(&t, kind, 3) {
                by_kind[slot] += usize::from(!cal.mismatches.is_empty());
                out.check(cal.mismatches.is_empty(), || {
                    let (s, exact, oracle) = &cal.mismatches[0];
                    format!("{t}, D_{kind}^{}: at {s} exact {exact}, oracle {oracle}", cal.steps)
                });
            }
        }
    }
    if out.failure_count > 0 {
        let [l, i, iie] = by_kind;
        out.note(format!("failing iterates by derivative: l {l}, i {i}, iie {iie}"));
    }
    out
}

/// Leaf-rank by repeatedly removing all leaves.
fn strip_rank(tree: &FiniteTree) -> u64 {
    let mut nodes = tree.nodes().clone();
    let mut rounds = 0;
    loop {
        let leaves: Vec<Seq> =
            nodes.iter().filter(|s| !nodes.range((*s).clone()..).skip(1).any(|c| s.is_prefix_of(c))).cloned().collect();
        for l in &leaves {
            nodes.remove(l);
        }
        if nodes.is_empty() {
            return rounds;
        }
        rounds += 1;
    }
}

fn parity_eval(h: &LeafScheme, t: &Seq) -> PointSet {
    if let Some(v) = h.values().get(t) {
        return *v;
    }
    let children = h.tree().ims(t).expect("node");
    let parts = children.iter().map(|c| parity_eval(h, c));
    if strip_rank(&h.tree().subtree_at(t).expect("node")) % 2 == 1 {
        parts.fold(PointSet::EMPTY, PointSet::union)
    } else {
        parts.fold(h.universe().full(), PointSet::inter)
    }
}

fn leaf_schemes(seed: u64) -> Outcome {
    let mut out = Outcome::default();
    for index in 0..100 {
        let mut rng = corpus::instance_rng(seed, "leaf", index);
        let h = corpus::leaf_scheme(&mut rng, 12, 6);
        for t in h.tree().iter() {
            let got = ls_eval(&h, t).expect("node");
            let want = parity_eval(&h, t);
            out.check(got == want, || format!("{h} at {t}: {got:?} vs {want:?}"));
        }
        let x = ls_eval(&h, &Seq::empty()).expect("root");
        let hp = corpus::shrink(&mut rng, &h, x);
        out.check(ls_shrink_equiv(&h, &hp, x).unwrap_or(false), || format!("{hp} is not a shrink of {h}"));
        let y = ls_eval(&hp, &Seq::empty()).expect("root");
        out.check(y == x, || format!("shrinking {h} changed {x:?} to {y:?}"));
        let k = strip_rank(h.tree()) as usize + 1;
        let width = h.tree().max_branching().max(1) as u64;
        let n = ls_normalize(&h, k, width).map(|n| ls_eval(&n, &Seq::empty()).expect("root"));
        out.check(n.as_ref().ok() == Some(&x), || format!("normalizing {h}: {n:?} vs {x:?}"));
    }
    out
}

fn union_rank(seed: u64) -> Outcome {
    let mut out = Outcome::default();
    for index in 0..100 {
        let mut rng = corpus::instance_rng(seed, "union", index);
        let (a, b) = (corpus::omega_tree(&mut rng, true), corpus::omega_tree(&mut rng, true));
        debug_assert!(is_wf(&a) && is_wf(&b));
        let u = omega_union(&a, &b);
        for kind in [DerivKind::L, DerivKind::I] {
            let (ra, rb, ru) = (iter_rank(&a, kind), iter_rank(&b, kind), iter_rank(&u, kind));
            let want = ra.clone().max(rb.clone());
            out.check(ru == want, || format!("r_{kind}({a} ∪ {b}) = {ru}, parts {ra} and {rb}"));
        }
    }
    out
}
