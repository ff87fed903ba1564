//! Admissible maps: monotone tree maps with `|φ(t)| = t(0) + ... + t(|t|-1)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::omega::{Node, OmegaTree, PartKind};
use crate::ordinal::Ordinal;
use crate::trees::{FiniteTree, Seq};

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdmissibleMap {
    pub assignment: BTreeMap<Seq, Seq>,
}

impl AdmissibleMap {
    pub fn image(&self, t: &Seq) -> Option<&Seq> {
        self.assignment.get(t)
    }
}

pub fn check_admissible(phi: &AdmissibleMap, tree: &FiniteTree) -> Result<bool> {
    if phi.assignment.len() != tree.len() || !tree.iter().all(|t| phi.assignment.contains_key(t)) {
        return Err(Error::Domain("the map's domain differs from the tree".into()));
    }
    Ok(phi.assignment.iter().all(|(t, image)| {
        image.len() as u64 == t.sum()
            && t.parent().is_none_or(|p| phi.assignment[&p].is_prefix_of(image))
    }))
}

/// All admissible maps `T → S`: each immediate successor `t⌢m` is sent to some node of `S`
/// extending the parent's image by exactly `m` entries.
pub fn enumerate_admissible(tree: &FiniteTree, target: &FiniteTree) -> Result<Vec<AdmissibleMap>> {
    if tree.is_empty() || target.is_empty() {
        return Err(Error::Invalid("admissible maps need nonempty trees".into()));
    }
    let order: Vec<&Seq> = tree.iter().collect();
    let mut out = Vec::new();
    let mut current = AdmissibleMap::default();
    current.assignment.insert(Seq::empty(), Seq::empty());
    extend(&order, 1, target, &mut current, &mut out);
    Ok(out)
}

fn extend(order: &[&Seq], at: usize, target: &FiniteTree, current: &mut AdmissibleMap, out: &mut Vec<AdmissibleMap>) {
    let Some(&t) = order.get(at) else {
        out.push(current.clone());
        return;
    };
    let parent_image = current.assignment[&t.parent().expect("non-root")].clone();
    let want = parent_image.len() + t.last().expect("non-root") as usize;
    let candidates: Vec<Seq> = target
        .iter()
        .filter(|s| s.len() == want && parent_image.is_prefix_of(s))
        .cloned()
        .collect();
    for s in candidates {
        current.assignment.insert(t.clone(), s);
        extend(order, at + 1, target, current, out);
    }
    current.assignment.remove(t);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Plain,
    /// The odd canonical tree rooted through a stem of the given length.
    Comma(u64),
}

/// A set of naturals of the form "finite set ∪ [tail, ∞)".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
struct Distances {
    low: u128,
    tail: Option<u32>,
}

impl Distances {
    fn from(start: u32) -> Self {
        Distances { low: 0, tail: Some(start) }
    }

    fn zero() -> Self {
        Distances { low: 1, tail: None }
    }

    fn normalize(mut self) -> Self {
        if let Some(mut c) = self.tail {
            self.low &= (1u128 << c) - 1;
            while c > 0 && self.low & (1u128 << (c - 1)) != 0 {
                c -= 1;
                self.low &= !(1u128 << c);
            }
            self.tail = Some(c);
        }
        self
    }

    fn union(self, other: Distances) -> Self {
        let tail = match (self.tail, other.tail) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Distances { low: self.low | other.low, tail }.normalize()
    }

    fn shift_one(self) -> Self {
        debug_assert!(self.low >> 127 == 0, "distance sets stay below 127");
        Distances { low: self.low << 1, tail: self.tail.map(|c| c + 1) }.normalize()
    }

    fn contains(&self, d: u64) -> bool {
        self.tail.is_some_and(|c| d >= c as u64) || (d < 128 && self.low & (1u128 << d) != 0)
    }

    fn is_all(&self) -> bool {
        self.tail == Some(0)
    }

    fn min(&self) -> Option<u32> {
        if self.low != 0 {
            Some(self.low.trailing_zeros())
        } else {
            self.tail
        }
    }
}

/// Per level `j`: whether `T_j` embeds admissibly at the position, and the distances
/// below it at which `T_j` embeds. Copies of a bundle share their prototype's analysis;
/// an Esc handle of length `r` above `P` behaves like `P` with `r` extra levels on top.
fn analyze(n: &Node, levels: usize) -> Vec<(bool, Distances)> {
    let children: Vec<_> = n.children.values().map(|c| analyze(c, levels)).collect();
    let parts: Vec<_> = n.parts.iter().map(|p| (p.kind, analyze(&p.proto, levels))).collect();
    let mut out: Vec<(bool, Distances)> = Vec::with_capacity(levels + 1);
    for j in 0..=levels {
        let embeds = j == 0 || out[j - 1].1.is_all();
        let mut d = if embeds { Distances::zero() } else { Distances::default() };
        for c in &children {
            d = d.union(c[j].1.shift_one());
        }
        for (kind, p) in &parts {
            let (p_embeds, p_dist) = p[j];
            match kind {
                PartKind::Rep => d = d.union(p_dist.shift_one()),
                PartKind::Esc => {
                    if let Some(m) = p_dist.min() {
                        d = d.union(Distances::from(m + 1));
                    }
                    if p_embeds {
                        d = d.union(Distances::from(1));
                    }
                }
            }
        }
        if n.chain {
            d = d.union(Distances::from(1));
        }
        out.push((embeds, d));
    }
    out
}

/// Whether the full canonical tree of class `alpha` (or its stemmed variant) maps
/// admissibly into the tree denoted by `target`.
pub fn exists_admissible_sym(alpha: &Ordinal, variant: Variant, target: &OmegaTree) -> Result<bool> {
    let a = alpha
        .as_finite()
        .filter(|&a| a <= 8)
        .ok_or_else(|| Error::Unsupported(format!("canonical trees are supported for classes 0..=8, not {alpha}")))?;
    if matches!(variant, Variant::Comma(_)) && a % 2 == 0 {
        return Err(Error::Invalid("the stemmed canonical tree exists only for odd classes".into()));
    }
    let Some(root) = target.root() else {
        return Ok(false);
    };
    let k = (a / 2) as usize;
    let (embeds, dist) = analyze(root, k)[k];
    Ok(match (a % 2, variant) {
        (0, _) => embeds,
        (_, Variant::Plain) => dist.contains(1),
        (_, Variant::Comma(i)) => dist.contains(i),
    })
}
