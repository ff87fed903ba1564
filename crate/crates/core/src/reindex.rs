//! Sequences of sequences: the coding `ρ` of `S_m` into `ω^m`, the diagonal `Δ_k` and
//! column tails `ξ_k`, and the composition of a two-index family into one Suslin scheme.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::sexp::{FromSexp, Sexp};
use crate::suslin::{Continuation, PointSet, SuslinScheme, Universe};
use crate::trees::{FiniteTree, Seq};

/// Cantor pairing `(a+b)(a+b+1)/2 + b`.
pub fn pair(a: u64, b: u64) -> Result<u64> {
    let (a, b) = (a as u128, b as u128);
    let w = a + b;
    w.checked_mul(w + 1)
        .and_then(|t| u64::try_from(t / 2 + b).ok())
        .ok_or_else(|| Error::Bounds(format!("pairing of {a} and {b} exceeds 64 bits")))
}

pub fn unpair(z: u64) -> (u64, u64) {
    let z = z as u128;
    // largest w with w(w+1)/2 ≤ z
    let mut w = (((8 * z + 1) as f64).sqrt() as u128).saturating_sub(1) / 2;
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    let b = z - w * (w + 1) / 2;
    ((w - b) as u64, b as u64)
}

/// `π_k : ω^k → ω`, the left fold of [`pair`] over the entries.
pub fn pi(s: &Seq) -> Result<u64> {
    let [first, rest @ ..] = s.entries() else {
        return Err(Error::Domain("π_k needs k ≥ 2".into()));
    };
    if rest.is_empty() {
        return Err(Error::Domain("π_k needs k ≥ 2".into()));
    }
    rest.iter().try_fold(*first, |acc, &x| pair(acc, x))
}

pub fn pi_inv(z: u64, k: usize) -> Result<Seq> {
    if k < 2 {
        return Err(Error::Domain("π_k needs k ≥ 2".into()));
    }
    let mut out = vec![0; k];
    let mut z = z;
    for slot in out[1..].iter_mut().rev() {
        let (a, b) = unpair(z);
        *slot = b;
        z = a;
    }
    out[0] = z;
    Ok(Seq::new(out))
}

/// An element of `S_m`: blocks `s_1, ..., s_m` with `|s_k| = k+1`. Entry `l` of block `k`
/// is written `s_k^l`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VecSeq {
    blocks: Vec<Seq>,
}

impl VecSeq {
    pub fn new(blocks: Vec<Seq>) -> Result<Self> {
        for (i, b) in blocks.iter().enumerate() {
            if b.len() != i + 2 {
                return Err(Error::Invalid(format!("block {} must have length {}, found {b}", i + 1, i + 2)));
            }
        }
        Ok(VecSeq { blocks })
    }

    pub fn empty() -> Self {
        VecSeq::default()
    }

    pub fn blocks(&self) -> &[Seq] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// The first `m` blocks.
    pub fn truncate(&self, m: usize) -> VecSeq {
        VecSeq { blocks: self.blocks[..m.min(self.len())].to_vec() }
    }

    pub fn is_prefix_of(&self, other: &VecSeq) -> bool {
        other.blocks.starts_with(&self.blocks)
    }

    fn entry(&self, block: usize, l: usize) -> u64 {
        self.blocks[block - 1].entries()[l]
    }

    /// Every element of `S_m` whose entries come from `alphabet`.
    pub fn all_over(alphabet: &[u64], m: usize) -> Vec<VecSeq> {
        let mut layer = vec![VecSeq::empty()];
        for k in 1..=m {
            let blocks = words(alphabet, k + 1);
            layer = layer
                .iter()
                .flat_map(|v| {
                    blocks.iter().map(move |b| {
                        let mut next = v.clone();
                        next.blocks.push(b.clone());
                        next
                    })
                })
                .collect();
        }
        layer
    }
}

impl fmt::Display for VecSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(vecseq")?;
        for b in &self.blocks {
            write!(f, " {b}")?;
        }
        f.write_str(")")
    }
}

fn words(alphabet: &[u64], len: usize) -> Vec<Seq> {
    let mut layer = vec![Seq::empty()];
    for _ in 0..len {
        layer = layer.iter().flat_map(|s| alphabet.iter().map(move |&a| s.child(a))).collect();
    }
    layer
}

/// `ρ(s_1, ..., s_m) = (π_2(s_1), ..., π_{m+1}(s_m))`.
pub fn rho(v: &VecSeq) -> Result<Seq> {
    v.blocks.iter().map(pi).collect::<Result<Vec<_>>>().map(Seq::new)
}

pub fn rho_inv(s: &Seq) -> VecSeq {
    let blocks = s.entries().iter().enumerate().map(|(i, &z)| pi_inv(z, i + 2).expect("k ≥ 2")).collect();
    VecSeq { blocks }
}

/// `Δ_k = (s_1^1, ..., s_k^k)`.
pub fn delta_k(v: &VecSeq, k: usize) -> Result<Seq> {
    if k > v.len() {
        return Err(Error::Domain(format!("Δ_{k} of a vector with {} blocks", v.len())));
    }
    Ok(Seq::new((1..=k).map(|j| v.entry(j, j)).collect()))
}

/// `ξ_k = (s_{k+1}^k, ..., s_m^k)`.
pub fn xi_k(v: &VecSeq, k: usize) -> Result<Seq> {
    if k > v.len() {
        return Err(Error::Domain(format!("ξ_{k} of a vector with {} blocks", v.len())));
    }
    Ok(Seq::new((k + 1..=v.len()).map(|j| v.entry(j, k)).collect()))
}

/// A family `X_s^t` with finite support, empty off the support. Each row `t ↦ X_s^t` has a
/// prefix-closed key set and is monotone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    universe: Universe,
    rows: BTreeMap<Seq, BTreeMap<Seq, PointSet>>,
}

impl Family {
    pub fn new(universe: Universe, rows: BTreeMap<Seq, BTreeMap<Seq, PointSet>>) -> Result<Self> {
        for (s, row) in &rows {
            // reuse the scheme validation for each row
            SuslinScheme::new(universe.clone(), row.clone(), Continuation::Vanish)
                .map_err(|e| Error::Invalid(format!("row {s}: {e}")))?;
        }
        Ok(Family { universe, rows })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn rows(&self) -> &BTreeMap<Seq, BTreeMap<Seq, PointSet>> {
        &self.rows
    }

    pub fn value(&self, s: &Seq, t: &Seq) -> PointSet {
        self.rows.get(s).and_then(|row| row.get(t)).copied().unwrap_or_default()
    }

    /// Labels occurring in any row or column index.
    pub fn labels(&self) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        for (s, row) in &self.rows {
            out.extend(s.entries());
            for t in row.keys() {
                out.extend(t.entries());
            }
        }
        out
    }

    pub fn max_row_len(&self) -> usize {
        self.rows.keys().map(Seq::len).max().unwrap_or(0)
    }

    pub fn max_column_len(&self) -> usize {
        self.rows.values().flat_map(|r| r.keys().map(Seq::len)).max().unwrap_or(0)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(family (universe")?;
        for p in self.universe.points() {
            write!(f, " {p}")?;
        }
        f.write_str(")")?;
        for (s, row) in &self.rows {
            write!(f, " (row {s}")?;
            for (t, set) in row {
                write!(f, " (entry {t} {})", self.universe.show(*set))?;
            }
            f.write_str(")")?;
        }
        f.write_str(")")
    }
}

impl FromSexp for Family {
    fn from_sexp(sexp: &Sexp) -> Result<Self> {
        let [universe, rows @ ..] = sexp.form("family")? else {
            return Err(sexp.error("expected (family (universe ...) (row ...)*)"));
        };
        let universe = Universe::from_sexp(universe)?;
        let mut map = BTreeMap::new();
        for r in rows {
            let [s, entries @ ..] = r.form("row")? else {
                return Err(r.error("expected (row (seq ...) (entry ...)*)"));
            };
            let s = Seq::from_sexp(s)?;
            let mut row = BTreeMap::new();
            for e in entries {
                let [t, set] = e.form("entry")? else {
                    return Err(e.error("expected (entry (seq ...) (set ...))"));
                };
                row.insert(Seq::from_sexp(t)?, universe.parse_set(set)?);
            }
            if map.insert(s.clone(), row).is_some() {
                return Err(r.error(format!("duplicate row {s}")));
            }
        }
        Family::new(universe, map).map_err(|e| sexp.error(e.to_string()))
    }
}

/// `C(ρ(s⃗)) = ⋂_{k ≤ |s⃗|} X_{Δ_k(s⃗)}^{ξ_k(s⃗)}`.
///
/// Every entry of `s⃗` lands in the index of some term, so `C` is empty unless all entries
/// are family labels; only the nonempty values are stored, which keeps the key set
/// prefix-closed because `C` is monotone.
pub fn compose_value(family: &Family, v: &VecSeq) -> PointSet {
    (0..=v.len()).fold(family.universe.full(), |acc, k| {
        acc.inter(family.value(&delta_k(v, k).expect("k ≤ m"), &xi_k(v, k).expect("k ≤ m")))
    })
}

pub fn compose_scheme(family: &Family) -> Result<SuslinScheme> {
    let alphabet: Vec<u64> = family.labels().into_iter().collect();
    let mut entries = BTreeMap::new();
    let mut frontier = vec![VecSeq::empty()];
    entries.insert(Seq::empty(), compose_value(family, &VecSeq::empty()));
    while let Some(v) = frontier.pop() {
        for block in words(&alphabet, v.len() + 2) {
            let mut w = v.clone();
            w.blocks.push(block);
            let value = compose_value(family, &w);
            if !value.is_empty() {
                entries.insert(rho(&w)?, value);
                frontier.push(w);
            }
        }
    }
    SuslinScheme::new(family.universe.clone(), entries, Continuation::Vanish)
}

/// `⋂_{m ≤ M} ⋃_{|s|=m} ⋂_{n ≤ N} ⋃_{|t|=n} X_s^t`, with `s` and `t` ranging over all
/// sequences. Off the support rows and columns are empty, so taking `M` and `N` one past
/// the longest stored index gives the unbounded value.
pub fn f4_value(family: &Family, bounds: Option<(usize, usize)>) -> PointSet {
    let (max_m, max_n) = bounds.unwrap_or((family.max_row_len() + 1, family.max_column_len() + 1));
    let mut outer = family.universe.full();
    for m in 0..=max_m {
        let mut union = PointSet::EMPTY;
        for row in family.rows.iter().filter(|(s, _)| s.len() == m).map(|(_, row)| row) {
            let mut inner = family.universe.full();
            for n in 0..=max_n {
                let level = row.iter().filter(|(t, _)| t.len() == n).fold(PointSet::EMPTY, |u, (_, x)| u.union(*x));
                inner = inner.inter(level);
            }
            union = union.union(inner);
        }
        outer = outer.inter(union);
    }
    outer
}

/// The canonical tree of class 4 with every entry at most `bound`.
pub fn level_tree(bound: u64) -> FiniteTree {
    crate::trees::gen_t_fin(2, bound + 1).expect("positive width")
}
