//! Symbolic finite broom sets: `{∅}`, handles prepended at odd steps, forking unions at even steps.

use std::fmt;

use crate::error::{Error, Result};
use crate::omega::Node;
use crate::ordinal::Ordinal;
use crate::sexp::{FromSexp, Sexp};
use crate::trees::Seq;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TailRule {
    /// Copy `n` is the tail body under the fresh label `c_n`.
    RepeatLast,
    /// Copy `n` runs down a bare handle of length `n` before the tail body.
    GrowHandle,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fork {
    items: Vec<(Seq, BroomExpr)>,
    tail: TailRule,
    tail_body: Box<BroomExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BroomExpr {
    Leaf0,
    Handle(Seq, Box<BroomExpr>),
    Fork(Fork),
}

impl Fork {
    /// The tail repeats `tail_body`, or the last item's body when none is given.
    pub fn new(items: Vec<(Seq, BroomExpr)>, tail: TailRule, tail_body: Option<BroomExpr>) -> Result<Self> {
        let mut firsts = std::collections::BTreeSet::new();
        for (f, _) in &items {
            let Some(&first) = f.entries().first() else {
                return Err(Error::Invalid("fork items need nonempty forking sequences".into()));
            };
            if !firsts.insert(first) {
                return Err(Error::Invalid(format!("fork items share the first entry {first}")));
            }
        }
        let body = match tail_body {
            Some(b) => b,
            None => match items.last() {
                Some((_, b)) => b.clone(),
                None => return Err(Error::Invalid("a fork without items needs an explicit tail body".into())),
            },
        };
        Ok(Fork { items, tail, tail_body: Box::new(body) })
    }

    pub fn items(&self) -> &[(Seq, BroomExpr)] {
        &self.items
    }

    pub fn tail(&self) -> TailRule {
        self.tail
    }

    pub fn tail_body(&self) -> &BroomExpr {
        &self.tail_body
    }

    fn bodies(&self) -> impl Iterator<Item = &BroomExpr> {
        self.items.iter().map(|(_, b)| b).chain(std::iter::once(&*self.tail_body))
    }
}

impl BroomExpr {
    pub fn handle(h: Seq, body: BroomExpr) -> Self {
        BroomExpr::Handle(h, Box::new(body))
    }

    /// A fork with no explicit items whose tail repeats `body`.
    pub fn fork_over(tail: TailRule, body: BroomExpr) -> Self {
        BroomExpr::Fork(Fork { items: Vec::new(), tail, tail_body: Box::new(body) })
    }

    fn class_nat(&self) -> u64 {
        match self {
            BroomExpr::Leaf0 => 0,
            BroomExpr::Handle(h, body) => {
                let beta = body.class_nat();
                // an odd-class body already starts with a handle that absorbs `h`
                if h.is_empty() || beta % 2 == 1 {
                    beta
                } else {
                    beta + 1
                }
            }
            BroomExpr::Fork(fork) => {
                let top = fork.bodies().map(BroomExpr::class_nat).max().unwrap_or(0);
                top + 2 - top % 2
            }
        }
    }
}

/// The least `α` with the denoted set in the class `B_α`.
pub fn broom_class(b: &BroomExpr) -> Ordinal {
    Ordinal::nat(b.class_nat())
}

/// The longest common prefix of all elements.
pub fn handle_of(b: &BroomExpr) -> Seq {
    match b {
        BroomExpr::Leaf0 | BroomExpr::Fork(_) => Seq::empty(),
        BroomExpr::Handle(h, body) => h.concat(&handle_of(body)),
    }
}

fn along(labels: &[u64], end: Node) -> Node {
    labels.iter().rev().fold(end, |inner, &l| Node::leaf().with_child(l, inner))
}

fn build(b: &BroomExpr, element: &dyn Fn() -> Node) -> Node {
    match b {
        BroomExpr::Leaf0 => element(),
        BroomExpr::Handle(h, body) => along(h.entries(), build(body, element)),
        BroomExpr::Fork(fork) => {
            let mut root = Node::leaf();
            for (f, body) in &fork.items {
                let e = f.entries();
                root = root.with_child(e[0], along(&e[1..], build(body, element)));
            }
            let tail = build(&fork.tail_body, element);
            match fork.tail {
                TailRule::RepeatLast => root.with_rep(tail),
                TailRule::GrowHandle => root.with_esc(tail),
            }
        }
    }
}

/// The prefix closure of the broom set.
pub fn to_tree(b: &BroomExpr) -> Node {
    build(b, &Node::leaf)
}

/// Every element `s` additionally carries infinitely many infinite branches `s⌢f_n⌢ν_n`.
pub fn to_extension(b: &BroomExpr) -> Node {
    build(b, &|| Node::leaf().with_rep(Node::chain_node()))
}

/// A broom of class exactly `alpha` whose iterated `D_iie^{α'}` stays nonempty.
pub fn gen_optimal(alpha: u64) -> Result<BroomExpr> {
    if alpha > 8 {
        return Err(Error::Unsupported(format!("optimal brooms are generated for classes 0..=8, not {alpha}")));
    }
    Ok(match alpha {
        0 => BroomExpr::Leaf0,
        a if a % 2 == 0 => BroomExpr::fork_over(TailRule::GrowHandle, gen_optimal(a - 2)?),
        a => BroomExpr::handle(Seq::new(vec![1]), gen_optimal(a - 1)?),
    })
}

impl fmt::Display for BroomExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BroomExpr::Leaf0 => f.write_str("(broom0)"),
            BroomExpr::Handle(h, body) => write!(f, "(handle {h} {body})"),
            BroomExpr::Fork(fork) => {
                f.write_str("(fork")?;
                for (s, body) in &fork.items {
                    write!(f, " (item {s} {body})")?;
                }
                let rule = match fork.tail {
                    TailRule::RepeatLast => "repeat",
                    TailRule::GrowHandle => "grow",
                };
                match fork.items.last() {
                    Some((_, last)) if *last == *fork.tail_body => write!(f, " (tail {rule}))"),
                    _ => write!(f, " (tail {rule} {}))", fork.tail_body),
                }
            }
        }
    }
}

impl FromSexp for BroomExpr {
    fn from_sexp(sexp: &Sexp) -> Result<Self> {
        match sexp.head() {
            Some("broom0") => {
                if sexp.items()?.len() != 1 {
                    return Err(sexp.error("(broom0) takes no arguments"));
                }
                Ok(BroomExpr::Leaf0)
            }
            Some("handle") => {
                let [h, body] = sexp.form("handle")? else {
                    return Err(sexp.error("expected (handle (seq ...) <broom>)"));
                };
                Ok(BroomExpr::handle(Seq::from_sexp(h)?, BroomExpr::from_sexp(body)?))
            }
            Some("fork") => {
                let args = sexp.form("fork")?;
                let Some((tail, items)) = args.split_last() else {
                    return Err(sexp.error("a fork needs a (tail ...) clause"));
                };
                let items = items
                    .iter()
                    .map(|it| match it.form("item")? {
                        [f, body] => Ok((Seq::from_sexp(f)?, BroomExpr::from_sexp(body)?)),
                        _ => Err(it.error("expected (item (seq ...) <broom>)")),
                    })
                    .collect::<Result<Vec<_>>>()?;
                let (rule, body) = match tail.form("tail")? {
                    [rule] => (rule, None),
                    [rule, body] => (rule, Some(BroomExpr::from_sexp(body)?)),
                    _ => return Err(tail.error("expected (tail repeat|grow [<broom>])")),
                };
                let rule = match rule.atom()? {
                    "repeat" => TailRule::RepeatLast,
                    "grow" => TailRule::GrowHandle,
                    _ => return Err(rule.error("expected repeat or grow")),
                };
                Fork::new(items, rule, body).map(BroomExpr::Fork).map_err(|e| sexp.error(e.to_string()))
            }
            _ => Err(sexp.error("expected (broom0), (handle ...) or (fork ...)")),
        }
    }
}
