use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;

use fborel::admissible::{exists_admissible_sym, Variant};
use fborel::broom::{broom_class, gen_optimal, to_extension, to_tree, BroomExpr};
use fborel::corpus;
use fborel::leaf_scheme::{ls_eval, ls_shrink_equiv, LeafScheme};
use fborel::omega::{
    canonical, d_step, expand, is_wf, iter_derive, iter_rank, omega_union, DerivKind, Node, OmegaTree,
};
use fborel::ordinal::{alpha_prime, decompose, ord_add, Parity};
use fborel::reindex::{delta_k, pi, pi_inv, rho, rho_inv, xi_k, Family};
use fborel::sexp::parse;
use fborel::suslin::{a_op, rt_alpha, rt_eval, rt_eval_brute, Continuation, SuslinScheme};
use fborel::trees::{cl_tr, gen_t_fin, tree_union};
use fborel::{FiniteTree, Ordinal, Rank, Seq};

fn ordinal() -> impl Strategy<Value = Ordinal> {
    (prop::collection::vec(0u64..4, 0..4), 0u64..20).prop_map(|(coefs, finite)| {
        let terms = coefs.iter().enumerate().rev().filter(|(_, &c)| c > 0).map(|(e, &c)| (e as u32 + 1, c)).collect();
        Ordinal::from_terms(terms, finite).unwrap()
    })
}

fn wf_tree() -> impl Strategy<Value = OmegaTree> {
    any::<u64>().prop_map(|seed| corpus::omega_tree(&mut corpus::rng(seed), true))
}

fn any_tree() -> impl Strategy<Value = OmegaTree> {
    any::<u64>().prop_map(|seed| corpus::omega_tree(&mut corpus::rng(seed), false))
}

fn finite_tree() -> impl Strategy<Value = FiniteTree> {
    any::<u64>().prop_map(|seed| corpus::finite_tree(&mut corpus::rng(seed), 8, 3))
}

fn scheme() -> impl Strategy<Value = SuslinScheme> {
    any::<u64>().prop_map(|seed| corpus::scheme(&mut corpus::rng(seed), 5, 3, 3))
}

fn nat_rank(r: &Rank) -> Option<u64> {
    r.as_finite()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ord_add_laws(a in ordinal(), b in ordinal(), c in ordinal()) {
        prop_assert_eq!(ord_add(&ord_add(&a, &b), &c), ord_add(&a, &ord_add(&b, &c)));
        prop_assert_eq!(ord_add(&a, &Ordinal::zero()), a.clone());
        prop_assert_eq!(ord_add(&Ordinal::zero(), &a), a);
    }

    #[test]
    fn alpha_prime_laws(a in ordinal()) {
        prop_assert!(alpha_prime(&a) <= a);
        let even = a.parity() == Parity::Even;
        prop_assert_eq!(alpha_prime(&a) == alpha_prime(&a.succ()), even);
    }

    #[test]
    fn decompose_recomposes(a in ordinal()) {
        let d = decompose(&a);
        prop_assert!(d.limit.is_zero() || d.limit.is_limit());
        prop_assert!(d.i <= 1);
        prop_assert_eq!(ord_add(&d.limit, &Ordinal::nat(2 * d.n + u64::from(d.i))), a);
    }

    #[test]
    fn ordinal_text_round_trip(a in ordinal()) {
        prop_assert_eq!(a.to_string().parse::<Ordinal>().unwrap(), a);
    }

    #[test]
    fn cl_tr_is_idempotent_and_monotone(t in finite_tree(), extra in prop::collection::vec(prop::collection::vec(0u64..4, 0..4), 0..4)) {
        prop_assert_eq!(cl_tr(t.iter().cloned()), t.clone());
        let bigger = cl_tr(t.iter().cloned().chain(extra.into_iter().map(Seq::new)));
        prop_assert!(t.iter().all(|s| bigger.contains(s)));
    }

    #[test]
    fn finite_leaf_rank_laws(a in finite_tree(), b in finite_tree()) {
        let u = tree_union(&a, &b);
        prop_assert_eq!(u.leaf_rank(), a.leaf_rank().max(b.leaf_rank()));
        for t in a.iter() {
            let is_leaf = a.ims(t).unwrap().is_empty();
            prop_assert_eq!(a.leaves().contains(t), is_leaf);
            prop_assert_eq!(a.subtree_at(t).unwrap().leaf_rank() == Rank::nat(0), is_leaf);
        }
    }

    #[test]
    fn derivatives_shrink_and_iterates_decrease(t in any_tree()) {
        for kind in DerivKind::ALL {
            let d = d_step(&t, kind);
            prop_assert!(d.embeds_in(&t), "D_{}({}) = {}", kind, t, d);
            let d2 = iter_derive(&t, kind, 2);
            prop_assert!(d2.embeds_in(&d));
            // printed results re-read as trees, so they are prefix-closed descriptions
            prop_assert_eq!(parse::<OmegaTree>(&d.to_string()).unwrap(), d);
        }
    }

    #[test]
    fn i_leaves_chains_and_iie_kills_them(t in any_tree()) {
        if !is_wf(&t) {
            prop_assert_eq!(iter_rank(&t, DerivKind::I), Rank::Infinite);
        }
        prop_assert!(d_step(&OmegaTree::from(Node::chain_node()), DerivKind::Iie).is_empty());
    }

    #[test]
    fn union_rank_is_the_max(a in wf_tree(), b in wf_tree()) {
        let u = omega_union(&a, &b);
        for kind in [DerivKind::L, DerivKind::I] {
            prop_assert_eq!(iter_rank(&u, kind), iter_rank(&a, kind).max(iter_rank(&b, kind)));
        }
    }

    #[test]
    fn omega_tree_round_trip(t in any_tree()) {
        prop_assert_eq!(parse::<OmegaTree>(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn finite_leaf_rank_matches_the_symbolic_one(t in finite_tree()) {
        let symbolic = OmegaTree::from_finite(&t);
        prop_assert_eq!(iter_rank(&symbolic, DerivKind::L), t.leaf_rank());
        prop_assert_eq!(expand(&symbolic, 3, 3), t);
    }

    #[test]
    fn broom_laws(seed in any::<u64>(), class in 1u64..=6) {
        let b = corpus::broom(&mut corpus::rng(seed), class);
        prop_assert_eq!(broom_class(&b), Ordinal::nat(class));
        prop_assert_eq!(parse::<BroomExpr>(&b.to_string()).unwrap(), b.clone());
        let steps = (class / 2) as usize;
        let a = iter_derive(&d_step(&OmegaTree::from(to_extension(&b)), DerivKind::Iie), DerivKind::Iie, steps);
        prop_assert!(a.is_finite());
        if class % 2 == 0 {
            let h = BroomExpr::handle(Seq::new(vec![2]), b.clone());
            prop_assert!(broom_class(&h) > broom_class(&b));
        }
        prop_assert!(iter_derive(&OmegaTree::from(to_tree(&b)), DerivKind::Iie, steps).is_finite());
    }

    #[test]
    fn admissible_existence_is_monotone(s in wf_tree(), extra in wf_tree(), alpha in 2u64..=6) {
        let bigger = omega_union(&s, &extra);
        let ord = Ordinal::nat(alpha);
        if exists_admissible_sym(&ord, Variant::Plain, &s).unwrap() {
            prop_assert!(exists_admissible_sym(&ord, Variant::Plain, &bigger).unwrap());
            // the canonical tree two classes down embeds into this one
            prop_assert!(exists_admissible_sym(&Ordinal::nat(alpha - 2), Variant::Plain, &s).unwrap());
        }
        let d = iter_derive(&s, DerivKind::Iie, (alpha / 2) as usize);
        let predicted = if alpha % 2 == 0 { !d.is_empty() } else { d.has_depth(1) };
        prop_assert_eq!(exists_admissible_sym(&ord, Variant::Plain, &s).unwrap(), predicted);
    }

    #[test]
    fn optimal_brooms_host_their_canonical_tree(alpha in 0u64..=6) {
        let t = OmegaTree::from(to_tree(&gen_optimal(alpha).unwrap()));
        prop_assert!(exists_admissible_sym(&Ordinal::nat(alpha), Variant::Plain, &t).unwrap());
        // a canonical tree needs images of every length, which its own Rep bundles never supply
        let own = OmegaTree::from(canonical(alpha));
        prop_assert_eq!(exists_admissible_sym(&Ordinal::nat(alpha), Variant::Plain, &own).unwrap(), alpha <= 1);
    }

    #[test]
    fn rt_matches_brute_force(c in scheme(), t in finite_tree()) {
        prop_assert_eq!(rt_eval(&t, &c, &Seq::empty()).unwrap(), rt_eval_brute(&t, &c, &Seq::empty()).unwrap());
        let h = c.entries().keys().last().unwrap().clone();
        prop_assert_eq!(rt_eval(&t, &c, &h).unwrap(), rt_eval_brute(&t, &c, &h).unwrap());
    }

    #[test]
    fn r_alpha_chain(c in scheme()) {
        let mut previous = c.universe().full();
        for alpha in 0..=6 {
            let r = rt_alpha(&Ordinal::nat(alpha), &c).unwrap();
            prop_assert!(r.is_subset(previous));
            previous = r;
        }
        prop_assert!(a_op(&c).is_subset(previous));
    }

    #[test]
    fn larger_trees_give_smaller_sets(c in scheme(), seed in any::<u64>()) {
        // f lengthens each new entry by a random amount, so f is monotone and sum-increasing
        let mut rng = corpus::rng(seed);
        let t = corpus::finite_tree(&mut rng, 6, 2);
        let mut image: BTreeMap<Seq, Seq> = BTreeMap::new();
        for s in t.iter() {
            let f = match s.parent() {
                None => Seq::empty(),
                Some(p) => image[&p].child(s.last().unwrap() + rng.gen_range(0..2)),
            };
            image.insert(s.clone(), f);
        }
        let extra = corpus::finite_tree(&mut rng, 4, 2);
        let s_tree = tree_union(&cl_tr(image.into_values()), &extra);
        let rs = rt_eval(&s_tree, &c, &Seq::empty()).unwrap();
        let rt = rt_eval(&t, &c, &Seq::empty()).unwrap();
        prop_assert!(rs.is_subset(rt));
        prop_assert!(rt_eval(&tree_union(&t, &extra), &c, &Seq::empty()).unwrap().is_subset(rt));
    }

    #[test]
    fn long_branches_collapse_to_the_suslin_operation(c in scheme()) {
        if c.continuation() == Continuation::Vanish {
            let deep = c.max_key_depth() as u64 + 1;
            let t = cl_tr([Seq::new(vec![1; deep as usize])]);
            prop_assert_eq!(rt_eval_brute(&t, &c, &Seq::empty()).unwrap(), a_op(&c));
        }
    }

    #[test]
    fn scheme_round_trip(c in scheme()) {
        prop_assert_eq!(parse::<SuslinScheme>(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn reindex_lemma(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let v = corpus::vecseq(&mut rng, 5, 2);
        let w = corpus::extend_vecseq(&mut rng, &v, 5 - v.len(), 2);
        let (rv, rw) = (rho(&v).unwrap(), rho(&w).unwrap());
        prop_assert_eq!(rv.len(), v.len());
        prop_assert_eq!(rho_inv(&rv), v.clone());
        prop_assert!(rv.is_prefix_of(&rw));
        for k in 0..=v.len() {
            prop_assert_eq!(delta_k(&v, k).unwrap().len() + xi_k(&v, k).unwrap().len(), v.len());
            prop_assert_eq!(delta_k(&v, k).unwrap(), delta_k(&w, k).unwrap());
            prop_assert!(xi_k(&v, k).unwrap().is_prefix_of(&xi_k(&w, k).unwrap()));
        }
        prop_assert!(delta_k(&v, v.len() + 1).is_err());
    }

    #[test]
    fn pi_round_trip(entries in prop::collection::vec(0u64..50, 2..4), z in 0u64..1_000_000, k in 2usize..6) {
        let s = Seq::new(entries);
        prop_assert_eq!(pi_inv(pi(&s).unwrap(), s.len()).unwrap(), s);
        prop_assert_eq!(pi(&pi_inv(z, k).unwrap()).unwrap(), z);
    }

    #[test]
    fn family_round_trip(seed in any::<u64>()) {
        let f = corpus::family(&mut corpus::rng(seed), 4, 2, 4);
        prop_assert_eq!(parse::<Family>(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn shrinking_keeps_the_represented_set(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let h = corpus::leaf_scheme(&mut rng, 12, 6);
        let x = ls_eval(&h, &Seq::empty()).unwrap();
        let hp = corpus::shrink(&mut rng, &h, x);
        prop_assert!(ls_shrink_equiv(&h, &hp, x).unwrap());
        prop_assert_eq!(ls_eval(&hp, &Seq::empty()).unwrap(), x);
        prop_assert_eq!(parse::<LeafScheme>(&h.to_string()).unwrap(), h);
    }

    #[test]
    fn leaf_evaluation_is_local(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let h = corpus::leaf_scheme(&mut rng, 12, 6);
        for t in h.tree().iter() {
            let sub = h.tree().subtree_at(t).unwrap();
            let values = h.values().iter().filter_map(|(l, v)| t.strip_from(l).map(|r| (r, *v))).collect();
            let local = LeafScheme::new(h.universe().clone(), sub, values).unwrap();
            prop_assert_eq!(ls_eval(&local, &Seq::empty()).unwrap(), ls_eval(&h, t).unwrap());
        }
    }

    #[test]
    fn single_child_collapse_preserves_values(seed in any::<u64>()) {
        // replacing the child list of an internal node by one child of the same value
        let mut rng = corpus::rng(seed);
        let h = corpus::leaf_scheme(&mut rng, 12, 6);
        for t in h.tree().iter().filter(|t| !h.tree().is_leaf(t)) {
            let children = h.tree().ims(t).unwrap();
            let keep = &children[0];
            let value = ls_eval(&h, keep).unwrap();
            let siblings_equal = children.iter().all(|c| ls_eval(&h, c).unwrap() == value);
            if !siblings_equal || children.len() == 1 {
                continue;
            }
            let nodes = h.tree().iter().filter(|s| !children[1..].iter().any(|c| c.is_prefix_of(s))).cloned().collect();
            let tree = FiniteTree::from_nodes(nodes).unwrap();
            let values = h.values().iter().filter(|(l, _)| tree.contains(l)).map(|(l, v)| (l.clone(), *v)).collect();
            let collapsed = LeafScheme::new(h.universe().clone(), tree, values).unwrap();
            prop_assert_eq!(ls_eval(&collapsed, t).unwrap(), ls_eval(&h, t).unwrap());
        }
    }
}

#[test]
fn gen_t_fin_leaf_ranks() {
    for k in 0..=8 {
        for w in 1..=(if k > 5 { 2 } else { 3 }) {
            assert_eq!(nat_rank(&gen_t_fin(k, w).unwrap().leaf_rank()), Some(k as u64));
        }
    }
}
