//! Ordinals below ω^ω in Cantor normal form, and the rank values built on them.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `ω^e1·c1 + ... + ω^ej·cj + k` with `e1 > ... > ej ≥ 1` and every `ci ≥ 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Ordinal {
    terms: Vec<(u32, u64)>,
    finite: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// `α = λ + 2n + i` with `λ` zero or a limit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub limit: Ordinal,
    pub n: u64,
    pub i: u8,
}

impl Ordinal {
    pub const fn zero() -> Self {
        Ordinal { terms: Vec::new(), finite: 0 }
    }

    pub const fn nat(n: u64) -> Self {
        Ordinal { terms: Vec::new(), finite: n }
    }

    pub fn omega() -> Self {
        Self::omega_pow(1, 1)
    }

    /// `ω^exp · coef`; `exp = 0` gives the natural `coef`.
    pub fn omega_pow(exp: u32, coef: u64) -> Self {
        if coef == 0 {
            Self::zero()
        } else if exp == 0 {
            Self::nat(coef)
        } else {
            Ordinal { terms: vec![(exp, coef)], finite: 0 }
        }
    }

    /// Builds from raw parts, rejecting anything not in normal form.
    pub fn from_terms(terms: Vec<(u32, u64)>, finite: u64) -> Result<Self> {
        for w in terms.windows(2) {
            if w[0].0 <= w[1].0 {
                return Err(Error::Invalid("exponents must strictly decrease".into()));
            }
        }
        if terms.iter().any(|&(e, c)| e == 0 || c == 0) {
            return Err(Error::Invalid("exponents and coefficients must be positive".into()));
        }
        Ok(Ordinal { terms, finite })
    }

    pub fn terms(&self) -> &[(u32, u64)] {
        &self.terms
    }

    pub fn finite_part(&self) -> u64 {
        self.finite
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.finite == 0
    }

    pub fn is_finite(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_finite(&self) -> Option<u64> {
        self.is_finite().then_some(self.finite)
    }

    pub fn is_limit(&self) -> bool {
        !self.terms.is_empty() && self.finite == 0
    }

    pub fn succ(&self) -> Self {
        ord_add(self, &Ordinal::nat(1))
    }

    pub fn decompose(&self) -> Decomposition {
        Decomposition {
            limit: Ordinal { terms: self.terms.clone(), finite: 0 },
            n: self.finite / 2,
            i: (self.finite % 2) as u8,
        }
    }

    pub fn alpha_prime(&self) -> Self {
        let d = self.decompose();
        ord_add(&d.limit, &Ordinal::nat(d.n))
    }

    pub fn parity(&self) -> Parity {
        if self.finite.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Parity::Even
    }
}

/// Non-commutative ordinal sum: the terms of `a` below the leading exponent of `b` are absorbed.
pub fn ord_add(a: &Ordinal, b: &Ordinal) -> Ordinal {
    let Some(&(lead, lead_coef)) = b.terms.first() else {
        return Ordinal { terms: a.terms.clone(), finite: a.finite + b.finite };
    };
    let mut terms: Vec<(u32, u64)> = a.terms.iter().copied().filter(|&(e, _)| e > lead).collect();
    let carried = a.terms.iter().find(|&&(e, _)| e == lead).map_or(0, |&(_, c)| c);
    terms.push((lead, carried + lead_coef));
    terms.extend_from_slice(&b.terms[1..]);
    Ordinal { terms, finite: b.finite }
}

pub fn decompose(a: &Ordinal) -> Decomposition {
    a.decompose()
}

pub fn alpha_prime(a: &Ordinal) -> Ordinal {
    a.alpha_prime()
}

pub fn parity(a: &Ordinal) -> Parity {
    a.parity()
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (x, y) in self.terms.iter().zip(&other.terms) {
            let o = x.0.cmp(&y.0).then(x.1.cmp(&y.1));
            if o != Ordering::Equal {
                return o;
            }
        }
        self.terms
            .len()
            .cmp(&other.terms.len())
            .then(self.finite.cmp(&other.finite))
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::nat(n)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|&(e, c)| {
                let base = if e == 1 { "w".to_string() } else { format!("w^{e}") };
                if c == 1 {
                    base
                } else {
                    format!("{base}*{c}")
                }
            })
            .collect();
        if self.finite > 0 || parts.is_empty() {
            parts.push(self.finite.to_string());
        }
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for Ordinal {
    type Err = Error;

    /// Accepts any sum of `w`, `w^e`, `w*c`, `w^e*c` and naturals; the sum is normalized.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Invalid(format!("ordinal `{s}`: {why}"));
        let num = |t: &str| t.parse::<u64>().map_err(|_| bad("expected a natural number"));
        if s.trim().is_empty() {
            return Err(bad("empty"));
        }
        let mut acc = Ordinal::zero();
        for raw in s.split('+') {
            let term = raw.trim();
            let next = if let Some(rest) = term.strip_prefix('w') {
                let (exp, coef) = match rest.split_once('*') {
                    Some((e, c)) => (e, num(c)?),
                    None => (rest, 1),
                };
                let exp = match exp.strip_prefix('^') {
                    Some(e) => u32::try_from(num(e)?).map_err(|_| bad("exponent too large"))?,
                    None if exp.is_empty() => 1,
                    None => return Err(bad("malformed term")),
                };
                Ordinal::omega_pow(exp, coef)
            } else {
                Ordinal::nat(num(term)?)
            };
            acc = ord_add(&acc, &next);
        }
        Ok(acc)
    }
}

/// Rank values: the empty tree's `-1`, an ordinal, or "never empties".
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    NegOne,
    Ord(Ordinal),
    Infinite,
}

impl Rank {
    pub fn nat(n: u64) -> Self {
        Rank::Ord(Ordinal::nat(n))
    }

    pub fn as_ordinal(&self) -> Option<&Ordinal> {
        match self {
            Rank::Ord(o) => Some(o),
            _ => None,
        }
    }

    pub fn as_finite(&self) -> Option<u64> {
        self.as_ordinal().and_then(Ordinal::as_finite)
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::NegOne => f.write_str("-1"),
            Rank::Ord(o) => o.fmt(f),
            Rank::Infinite => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn addition_absorbs_on_the_left() {
        assert_eq!(ord_add(&o("1"), &o("w")), o("w"));
        assert_eq!(ord_add(&o("w"), &o("1")).to_string(), "w+1");
        assert_eq!(ord_add(&o("2"), &o("w+3")), o("w+3"));
        assert_eq!(ord_add(&o("w^2+w*3+4"), &o("w*2+1")).to_string(), "w^2+w*5+1");
        assert_eq!(ord_add(&o("w+5"), &o("w^2")).to_string(), "w^2");
    }

    #[test]
    fn decomposition_examples() {
        let d = o("0").decompose();
        assert_eq!((d.limit, d.n, d.i), (o("0"), 0, 0));
        let d = o("5").decompose();
        assert_eq!((d.limit, d.n, d.i), (o("0"), 2, 1));
        let d = o("w+3").decompose();
        assert_eq!((d.limit, d.n, d.i), (o("w"), 1, 1));
    }

    #[test]
    fn alpha_prime_examples() {
        assert_eq!(o("0").alpha_prime(), o("0"));
        assert_eq!(o("4").alpha_prime(), o("2"));
        assert_eq!(o("w+5").alpha_prime(), o("w+2"));
    }

    #[test]
    fn parity_examples() {
        assert_eq!(o("w").parity(), Parity::Even);
        assert_eq!(o("3").parity(), Parity::Odd);
        assert_eq!(o("w*2+2").parity(), Parity::Even);
    }

    #[test]
    fn text_round_trip_and_canonical_form() {
        for s in ["0", "7", "w", "w+1", "w*2", "w^2*3+w+5", "w^3+w^2"] {
            assert_eq!(o(s).to_string(), s);
        }
        assert_eq!(o("1+w").to_string(), "w");
        assert_eq!(o("w^1*1+0").to_string(), "w");
        assert!("".parse::<Ordinal>().is_err());
        assert!("w^".parse::<Ordinal>().is_err());
        assert!("x".parse::<Ordinal>().is_err());
    }

    #[test]
    fn ordering_is_lexicographic_on_terms() {
        let mut v: Vec<Ordinal> = ["w^2", "w*3+9", "w*3", "100", "w^2+1", "0", "w"]
            .iter()
            .map(|s| o(s))
            .collect();
        v.sort();
        let printed: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        assert_eq!(printed, ["0", "100", "w", "w*3", "w*3+9", "w^2", "w^2+1"]);
    }

    #[test]
    fn ranks_order_around_ordinals() {
        assert!(Rank::NegOne < Rank::nat(0));
        assert!(Rank::Ord(o("w^5")) < Rank::Infinite);
        assert_eq!(Rank::NegOne.to_string(), "-1");
    }

    #[test]
    fn non_normal_terms_rejected() {
        assert!(Ordinal::from_terms(vec![(1, 1), (2, 1)], 0).is_err());
        assert!(Ordinal::from_terms(vec![(2, 0)], 0).is_err());
        assert!(Ordinal::from_terms(vec![(2, 1), (1, 4)], 3).is_ok());
    }
}
