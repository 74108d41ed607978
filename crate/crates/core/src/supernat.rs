//! Supernatural numbers with a sparse exception map and a default exponent.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::arith::is_prime;
use crate::error::{Error, Result};

/// An exponent in {0, 1, 2, ...} ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Exp {
    Fin(u32),
    Inf,
}

impl Exp {
    pub const ZERO: Exp = Exp::Fin(0);

    pub fn is_inf(self) -> bool {
        matches!(self, Exp::Inf)
    }

    pub fn is_zero(self) -> bool {
        self == Exp::ZERO
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Exp::Fin(e) => Some(e),
            Exp::Inf => None,
        }
    }

    /// Finite positive (0 < e < ∞).
    pub fn is_finite_positive(self) -> bool {
        matches!(self, Exp::Fin(e) if e > 0)
    }

    pub fn add(self, other: Exp) -> Exp {
        match (self, other) {
            (Exp::Fin(a), Exp::Fin(b)) => Exp::Fin(a.saturating_add(b)),
            _ => Exp::Inf,
        }
    }

    /// min(e, n) with ∞ mapped to n.
    pub fn truncate(self, n: u32) -> u32 {
        match self {
            Exp::Fin(e) => e.min(n),
            Exp::Inf => n,
        }
    }
}

impl fmt::Display for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exp::Fin(e) => write!(f, "{e}"),
            Exp::Inf => write!(f, "inf"),
        }
    }
}

/// A supernatural number Π p^{n_p}: exponents listed in `finite_part`,
/// every other prime carries `default` (0 or ∞).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Supernatural {
    finite_part: BTreeMap<u64, Exp>,
    default: Exp,
}

impl Supernatural {
    /// The supernatural number 1 (all exponents 0).
    pub fn one() -> Self {
        Supernatural {
            finite_part: BTreeMap::new(),
            default: Exp::ZERO,
        }
    }

    /// All exponents ∞; the order of Ẑ.
    pub fn full() -> Self {
        Supernatural {
            finite_part: BTreeMap::new(),
            default: Exp::Inf,
        }
    }

    pub fn prime_power(p: u64, e: Exp) -> Result<Self> {
        Self::new([(p, e)], Exp::ZERO)
    }

    pub fn new(entries: impl IntoIterator<Item = (u64, Exp)>, default: Exp) -> Result<Self> {
        if default != Exp::ZERO && default != Exp::Inf {
            return Err(Error::Invalid(format!("default exponent must be 0 or inf, got {default}")));
        }
        let mut finite_part = BTreeMap::new();
        for (p, e) in entries {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            if e != default {
                finite_part.insert(p, e);
            }
        }
        Ok(Supernatural { finite_part, default })
    }

    /// Builds from entries already known to use primes; canonicalizes.
    pub(crate) fn from_parts(entries: BTreeMap<u64, Exp>, default: Exp) -> Self {
        let finite_part = entries.into_iter().filter(|&(_, e)| e != default).collect();
        Supernatural { finite_part, default }
    }

    pub fn finite_part(&self) -> &BTreeMap<u64, Exp> {
        &self.finite_part
    }

    pub fn default_exp(&self) -> Exp {
        self.default
    }

    /// Primes whose exponent differs from the default.
    pub fn support(&self) -> BTreeSet<u64> {
        self.finite_part.keys().copied().collect()
    }

    /// Exponent at p; p must be prime.
    pub fn exponent(&self, p: u64) -> Result<Exp> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(self.at(p))
    }

    /// Exponent lookup without the primality check.
    pub fn at(&self, p: u64) -> Exp {
        self.finite_part.get(&p).copied().unwrap_or(self.default)
    }

    pub fn is_one(&self) -> bool {
        self.default == Exp::ZERO && self.finite_part.is_empty()
    }

    /// True when infinitely many exponents are positive or some exponent is ∞.
    pub fn is_infinite(&self) -> bool {
        self.default == Exp::Inf || self.finite_part.values().any(|e| e.is_inf())
    }

    fn pointwise(&self, other: &Self, f: impl Fn(Exp, Exp) -> Exp) -> Self {
        let default = f(self.default, other.default);
        let primes: BTreeSet<u64> = self.support().union(&other.support()).copied().collect();
        let entries = primes.into_iter().map(|p| (p, f(self.at(p), other.at(p)))).collect();
        Supernatural::from_parts(entries, default)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.pointwise(other, Exp::add)
    }

    /// Pointwise maximum.
    pub fn lcm(&self, other: &Self) -> Self {
        self.pointwise(other, |a, b| a.max(b))
    }

    /// Pointwise minimum.
    pub fn gcd(&self, other: &Self) -> Self {
        self.pointwise(other, |a, b| a.min(b))
    }

    pub fn map(&self, f: impl Fn(Exp) -> Exp) -> Self {
        let default = f(self.default);
        let entries = self.finite_part.iter().map(|(&p, &e)| (p, f(e))).collect();
        Supernatural::from_parts(entries, default)
    }

    pub fn divides(&self, other: &Self) -> bool {
        if self.default > other.default {
            return false;
        }
        let primes: BTreeSet<u64> = self.support().union(&other.support()).copied().collect();
        primes.into_iter().all(|p| self.at(p) <= other.at(p))
    }

    pub fn equivalent(&self, other: &Self) -> bool {
        if self.default != other.default {
            return false;
        }
        let primes: BTreeSet<u64> = self.support().union(&other.support()).copied().collect();
        primes.into_iter().all(|p| {
            let (a, b) = (self.at(p), other.at(p));
            a == b || (!a.is_inf() && !b.is_inf())
        })
    }

    pub fn type_class(&self) -> TypeClass {
        TypeClass {
            representative: self.map(|e| if e.is_inf() { Exp::Inf } else { Exp::ZERO }),
        }
    }

    /// Finite integer value when every exponent is finite and the default is 0.
    pub fn to_integer(&self) -> Option<num_bigint::BigInt> {
        if self.is_infinite() {
            return None;
        }
        let mut acc = num_bigint::BigInt::from(1);
        for (&p, &e) in &self.finite_part {
            acc *= crate::arith::pow_int(p, e.finite()?);
        }
        Some(acc)
    }
}

pub fn sn_p_exponent(s: &Supernatural, p: u64) -> Result<Exp> {
    s.exponent(p)
}

pub fn sn_mul(a: &Supernatural, b: &Supernatural) -> Supernatural {
    a.mul(b)
}

pub fn sn_divides(a: &Supernatural, b: &Supernatural) -> bool {
    a.divides(b)
}

pub fn sn_equivalent(a: &Supernatural, b: &Supernatural) -> bool {
    a.equivalent(b)
}

impl PartialOrd for Supernatural {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Total order used only for deterministic sorting.
impl Ord for Supernatural {
    fn cmp(&self, other: &Self) -> Ordering {
        self.default
            .cmp(&other.default)
            .then_with(|| self.finite_part.iter().cmp(other.finite_part.iter()))
    }
}

impl fmt::Display for Supernatural {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.finite_part.iter().map(|(p, e)| format!("{p}^{e}")).collect();
        match (parts.is_empty(), self.default) {
            (true, Exp::Inf) => write!(f, "default inf"),
            (true, _) => write!(f, "1"),
            (false, Exp::Inf) => write!(f, "{} default inf", parts.join(" * ")),
            (false, _) => write!(f, "{}", parts.join(" * ")),
        }
    }
}

impl FromStr for Supernatural {
    type Err = Error;

    /// Parses `p1^e1 * p2^e2 [default 0|inf]`; `1` denotes the empty product
    /// and a bare prime means exponent 1. Errors carry the column (1-based)
    /// within `s` and line 0.
    fn from_str(s: &str) -> Result<Self> {
        let err = |col: usize, msg: String| Error::Parse {
            line: 0,
            column: col + 1,
            message: msg,
        };
        let (product, default) = match s.find("default") {
            Some(idx) => {
                let tail = s[idx + "default".len()..].trim();
                let d = match tail {
                    "0" => Exp::ZERO,
                    "inf" => Exp::Inf,
                    _ => return Err(err(idx, format!("default must be 0 or inf, got '{tail}'"))),
                };
                (&s[..idx], d)
            }
            None => (s, Exp::ZERO),
        };
        let mut entries: BTreeMap<u64, Exp> = BTreeMap::new();
        let trimmed = product.trim();
        if !(trimmed.is_empty() || trimmed == "1") {
            let mut offset = 0;
            for factor in product.split('*') {
                let col = offset + (factor.len() - factor.trim_start().len());
                offset += factor.len() + 1;
                let factor = factor.trim();
                if factor.is_empty() {
                    return Err(err(col, "empty factor".into()));
                }
                let (base, exp) = match factor.split_once('^') {
                    Some((b, e)) => (b.trim(), e.trim()),
                    None => (factor, "1"),
                };
                let p: u64 = base.parse().map_err(|_| err(col, format!("invalid prime '{base}'")))?;
                if !is_prime(p) {
                    return Err(err(col, format!("{p} is not prime")));
                }
                let e = if exp == "inf" {
                    Exp::Inf
                } else {
                    Exp::Fin(exp.parse().map_err(|_| err(col, format!("invalid exponent '{exp}'")))?)
                };
                if entries.insert(p, e).is_some() {
                    return Err(err(col, format!("prime {p} repeated")));
                }
            }
        }
        Ok(Supernatural::from_parts(entries, default))
    }
}

/// Equivalence class of a supernatural number under finite-finite
/// disagreement at finitely many primes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeClass {
    representative: Supernatural,
}

impl TypeClass {
    pub fn representative(&self) -> &Supernatural {
        &self.representative
    }

    pub fn is_zero(&self) -> bool {
        self.representative.is_one()
    }
}

impl fmt::Display for TypeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.representative)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sn(s: &str) -> Supernatural {
        s.parse().unwrap()
    }

    #[test]
    fn exponent_lookup() {
        let s = sn("2^3");
        assert_eq!(s.exponent(2).unwrap(), Exp::Fin(3));
        assert_eq!(s.exponent(5).unwrap(), Exp::ZERO);
        assert_eq!(Supernatural::full().exponent(7).unwrap(), Exp::Inf);
        assert!(matches!(s.exponent(4), Err(Error::NotPrime(4))));
    }

    #[test]
    fn multiplication() {
        assert_eq!(sn("2^1").mul(&sn("2^2")), sn("2^3"));
        assert_eq!(sn("2^inf").mul(&sn("2^5")), sn("2^inf"));
        assert_eq!(sn("3").mul(&sn("5")), sn("3^1 * 5^1"));
    }

    #[test]
    fn divisibility() {
        assert!(sn("2").divides(&sn("2^inf")));
        assert!(!sn("3").divides(&sn("2^inf")));
        let s = sn("2^4 * 7^inf default inf");
        assert!(s.divides(&s));
        assert!(sn("5^9").divides(&Supernatural::full()));
        assert!(!Supernatural::full().divides(&sn("5^inf")));
    }

    #[test]
    fn equivalence() {
        assert!(sn("2").equivalent(&sn("2^4")));
        assert!(!sn("2^inf").equivalent(&sn("2^4")));
        assert!(!Supernatural::full().equivalent(&Supernatural::one()));
    }

    #[test]
    fn text_round_trip() {
        for t in ["1", "default inf", "2^3 * 5^inf", "2^0 * 3^2 default inf"] {
            assert_eq!(sn(t).to_string(), t);
        }
        assert_eq!(sn("1 default inf"), Supernatural::full());
        assert_eq!(sn("2^0"), Supernatural::one());
        assert_eq!(sn("2^inf default 0").to_string(), "2^inf");
    }

    #[test]
    fn parse_errors() {
        assert!("2^-1".parse::<Supernatural>().is_err());
        assert!("4^2".parse::<Supernatural>().is_err());
        assert!("2^1 * 2^3".parse::<Supernatural>().is_err());
        assert!("2^1 default 3".parse::<Supernatural>().is_err());
        assert!("2 * * 3".parse::<Supernatural>().is_err());
    }

    #[test]
    fn canonical_sparsity() {
        let s = Supernatural::new([(2, Exp::Inf), (3, Exp::ZERO)], Exp::Inf).unwrap();
        assert_eq!(s.finite_part().len(), 1);
        assert_eq!(s, sn("3^0 default inf"));
    }

    #[test]
    fn types_kill_finite_values() {
        assert_eq!(sn("2^2").type_class(), Supernatural::one().type_class());
        assert_eq!(sn("2^inf * 3^4").type_class(), sn("2^inf").type_class());
        assert_ne!(sn("2^inf").type_class(), sn("3^inf").type_class());
        assert_eq!(sn("3^2 default inf").type_class(), sn("3^7 default inf").type_class());
    }

    const PRIMES: [u64; 5] = [2, 3, 5, 7, 11];

    fn arb_exp() -> impl Strategy<Value = Exp> {
        prop_oneof![4 => (0u32..4).prop_map(Exp::Fin), 1 => Just(Exp::Inf)]
    }

    fn arb_sn() -> impl Strategy<Value = Supernatural> {
        (proptest::collection::vec(arb_exp(), 5), prop::bool::weighted(0.2)).prop_map(|(es, d)| {
            let default = if d { Exp::Inf } else { Exp::ZERO };
            Supernatural::new(PRIMES.iter().copied().zip(es), default).unwrap()
        })
    }

    proptest! {
        #[test]
        fn mul_commutative_associative(a in arb_sn(), b in arb_sn(), c in arb_sn()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn divides_is_partial_order(a in arb_sn(), b in arb_sn(), c in arb_sn()) {
            prop_assert!(a.divides(&a));
            if a.divides(&b) && b.divides(&a) { prop_assert_eq!(&a, &b); }
            if a.divides(&b) && b.divides(&c) { prop_assert!(a.divides(&c)); }
        }

        #[test]
        fn equivalence_relation(a in arb_sn(), b in arb_sn(), c in arb_sn()) {
            prop_assert!(a.equivalent(&a));
            prop_assert_eq!(a.equivalent(&b), b.equivalent(&a));
            if a.equivalent(&b) && b.equivalent(&c) { prop_assert!(a.equivalent(&c)); }
            prop_assert_eq!(a.equivalent(&b), a.type_class() == b.type_class());
        }

        #[test]
        fn equivalence_compatible_with_mul(a in arb_sn(), b in arb_sn(), c in arb_sn()) {
            let finite_where_disagree = PRIMES.iter().all(|&p| a.at(p) == b.at(p) || !c.at(p).is_inf());
            if a.equivalent(&b) && finite_where_disagree {
                prop_assert!(a.mul(&c).equivalent(&b.mul(&c)));
            }
        }

        #[test]
        fn text_round_trips(a in arb_sn()) {
            prop_assert_eq!(a.to_string().parse::<Supernatural>().unwrap(), a);
        }
    }
}
