//! Finitely generated profinite abelian groups Ẑ(n⃗) as supernatural vectors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::arith::{factor, pow_int, DEFAULT_PRIME_BOUND};
use crate::error::{Error, Result};
use crate::supernat::{Exp, Supernatural};

/// Default bound on truncation depth.
pub const DEFAULT_DEPTH_BOUND: u32 = 12;

/// Standard representation: rows Δ_j = Π_p Ẑ(p^{r_p(j)}) with each prime's
/// column sorted in descending order and no trailing trivial row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StdRep {
    rows: Vec<Supernatural>,
}

/// A finite abelian group as a list of prime-power cyclic orders.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FiniteAbelian {
    factors: Vec<(u64, u32)>,
}

impl FiniteAbelian {
    pub fn new(factors: impl IntoIterator<Item = (u64, u32)>) -> Self {
        let mut factors: Vec<(u64, u32)> = factors.into_iter().filter(|&(_, k)| k > 0).collect();
        factors.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        FiniteAbelian { factors }
    }

    pub fn trivial() -> Self {
        FiniteAbelian::default()
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn order(&self) -> BigInt {
        self.factors.iter().fold(BigInt::one(), |acc, &(p, k)| acc * pow_int(p, k))
    }

    pub fn direct_sum(&self, other: &FiniteAbelian) -> FiniteAbelian {
        FiniteAbelian::new(self.factors.iter().chain(&other.factors).copied())
    }
}

impl fmt::Display for FiniteAbelian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|(p, k)| format!("{p}^{k}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl StdRep {
    pub fn empty() -> Self {
        StdRep { rows: Vec::new() }
    }

    pub fn rows(&self) -> &[Supernatural] {
        &self.rows
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Primes at which some row departs from its default.
    pub fn support(&self) -> BTreeSet<u64> {
        self.rows.iter().flat_map(|r| r.support()).collect()
    }

    /// Exponents of all rows at p (row order).
    pub fn column(&self, p: u64) -> Vec<Exp> {
        self.rows.iter().map(|r| r.at(p)).collect()
    }

    /// Exponents of all rows at a prime outside the support.
    pub fn default_column(&self) -> Vec<Exp> {
        self.rows.iter().map(|r| r.default_exp()).collect()
    }

    pub fn is_sorted(&self) -> bool {
        let sorted = |col: Vec<Exp>| col.windows(2).all(|w| w[0] >= w[1]);
        sorted(self.default_column()) && self.support().into_iter().all(|p| sorted(self.column(p)))
    }

    pub fn has_trailing_zero_row(&self) -> bool {
        self.rows.last().is_some_and(|r| r.is_one())
    }

    /// Serialization: `m` then one supernatural per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.rows.len());
        for r in &self.rows {
            s.push_str(&format!("{r}\n"));
        }
        s
    }
}

impl fmt::Display for StdRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.rows.iter().map(|r| format!("{{{r}}}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Canonical form: each prime's exponent multiset is sorted in descending
/// order down the rows, then trivial trailing rows are dropped.
pub fn std_rep(raw: &[Supernatural]) -> StdRep {
    let m = raw.len();
    let primes: BTreeSet<u64> = raw.iter().flat_map(|r| r.support()).collect();
    let mut defaults: Vec<Exp> = raw.iter().map(|r| r.default_exp()).collect();
    defaults.sort_by(|a, b| b.cmp(a));
    let mut columns: BTreeMap<u64, Vec<Exp>> = BTreeMap::new();
    for &p in &primes {
        let mut col: Vec<Exp> = raw.iter().map(|r| r.at(p)).collect();
        col.sort_by(|a, b| b.cmp(a));
        columns.insert(p, col);
    }
    let mut rows: Vec<Supernatural> = (0..m)
        .map(|j| {
            let entries = columns.iter().map(|(&p, col)| (p, col[j])).collect();
            Supernatural::from_parts(entries, defaults[j])
        })
        .collect();
    while rows.last().is_some_and(|r| r.is_one()) {
        rows.pop();
    }
    StdRep { rows }
}

pub fn width_na(s: &StdRep) -> usize {
    s.rows.len()
}

pub fn dim_na(s: &StdRep) -> usize {
    s.rows.iter().filter(|r| r.is_infinite()).count()
}

/// Isogeny test on canonical forms: equal dim_nA and pairwise equivalent
/// infinite rows. Infinite rows form a prefix of a canonical form.
pub fn profinite_isogenous(a: &StdRep, b: &StdRep) -> bool {
    let ia: Vec<&Supernatural> = a.rows.iter().filter(|r| r.is_infinite()).collect();
    let ib: Vec<&Supernatural> = b.rows.iter().filter(|r| r.is_infinite()).collect();
    ia.len() == ib.len() && ia.iter().zip(&ib).all(|(x, y)| x.equivalent(y))
}

fn check_prime(p: u64) -> Result<()> {
    if crate::arith::is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// p-part of S modulo p^N.
pub fn truncate(s: &StdRep, p: u64, n: u32) -> Result<FiniteAbelian> {
    truncate_bounded(s, p, n, DEFAULT_DEPTH_BOUND)
}

pub fn truncate_bounded(s: &StdRep, p: u64, n: u32, bound: u32) -> Result<FiniteAbelian> {
    check_prime(p)?;
    if n == 0 || n > bound {
        return Err(Error::Bound {
            what: "truncation depth",
            value: n.to_string(),
            limit: bound.to_string(),
        });
    }
    Ok(FiniteAbelian::new(s.rows.iter().map(|r| (p, r.at(p).truncate(n)))))
}

/// Kernel of multiplication by n on S.
pub fn mu_kernel(s: &StdRep, n: i64) -> Result<FiniteAbelian> {
    if n == 0 {
        return Err(Error::Invalid("multiplication by zero".into()));
    }
    let fs = factor(&BigInt::from(n), DEFAULT_PRIME_BOUND)?;
    let mut out = Vec::new();
    for (p, v) in fs {
        for r in &s.rows {
            if let Exp::Fin(e) = r.at(p) {
                out.push((p, e.min(v)));
            }
        }
    }
    Ok(FiniteAbelian::new(out))
}

/// Kernel K of Ẑ^m ↠ Ẑ(n⃗): row j has ∞ wherever S has a finite exponent
/// and 0 wherever S has ∞.
pub fn projective_kernel(s: &StdRep) -> StdRep {
    let flip = |e: Exp| if e.is_inf() { Exp::ZERO } else { Exp::Inf };
    let raw: Vec<Supernatural> = s.rows.iter().map(|r| r.map(flip)).collect();
    std_rep(&raw)
}

/// Raises every finite p-exponent by v_p(k).
pub fn scale_exponents(s: &StdRep, k: u64) -> Result<StdRep> {
    if k == 0 {
        return Err(Error::Invalid("scaling by zero".into()));
    }
    let fs = factor(&BigInt::from(k), DEFAULT_PRIME_BOUND)?;
    let raw: Vec<Supernatural> = s
        .rows
        .iter()
        .map(|r| {
            let mut entries: BTreeMap<u64, Exp> = r.finite_part().clone();
            for &(p, v) in &fs {
                let e = r.at(p);
                entries.insert(p, e.add(Exp::Fin(v)));
            }
            Supernatural::from_parts(entries, r.default_exp())
        })
        .collect();
    Ok(std_rep(&raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sn(s: &str) -> Supernatural {
        s.parse().unwrap()
    }

    fn rep(rows: &[&str]) -> StdRep {
        std_rep(&rows.iter().map(|r| sn(r)).collect::<Vec<_>>())
    }

    #[test]
    fn std_rep_examples() {
        assert_eq!(rep(&["2^1", "2^inf"]).rows(), &[sn("2^inf"), sn("2^1")]);
        let r = rep(&["2^1 * 3^0", "1"]);
        assert_eq!(r.rows(), &[sn("2^1")]);
        // Z(2) x Z(3) ≅ Z(6): both primes pack into the first row
        assert_eq!(rep(&["2^1", "3^1"]).rows(), &[sn("2^1 * 3^1")]);
        assert_eq!(std_rep(&[]).m(), 0);
    }

    #[test]
    fn default_columns_sort_first() {
        let r = rep(&["2^1", "3^0 default inf"]);
        assert_eq!(r.rows(), &[sn("3^0 default inf"), sn("2^1")]);
        let r = rep(&["5^2", "default inf", "7^inf"]);
        assert_eq!(r.rows()[0], Supernatural::full());
        assert_eq!(r.rows()[1], sn("5^2 * 7^inf"));
    }

    #[test]
    fn widths() {
        let z = StdRep {
            rows: vec![Supernatural::full()],
        };
        assert_eq!((width_na(&z), dim_na(&z)), (1, 1));
        let s = rep(&["2^inf", "2^2 * 3^2"]);
        assert_eq!((width_na(&s), dim_na(&s)), (2, 1));
        // distinct primes pack into one row under the per-prime sort
        let s = rep(&["2^inf", "3^2"]);
        assert_eq!((width_na(&s), dim_na(&s)), (1, 1));
        assert_eq!((width_na(&StdRep::empty()), dim_na(&StdRep::empty())), (0, 0));
    }

    #[test]
    fn isogeny_examples() {
        assert!(profinite_isogenous(&rep(&["2^inf"]), &rep(&["2^inf * 3^5"])));
        assert!(!profinite_isogenous(&rep(&["2^inf"]), &rep(&["3^inf"])));
        let s = rep(&["2^inf * 5^1", "3^2"]);
        assert!(profinite_isogenous(&s, &s));
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(truncate(&rep(&["2^inf"]), 2, 3).unwrap(), FiniteAbelian::new([(2, 3)]));
        assert_eq!(truncate(&rep(&["2^1"]), 2, 3).unwrap(), FiniteAbelian::new([(2, 1)]));
        let t = truncate(&rep(&["2^inf", "2^2"]), 2, 3).unwrap();
        assert_eq!(t, FiniteAbelian::new([(2, 3), (2, 2)]));
        assert_eq!(t.order(), BigInt::from(32));
        assert!(truncate(&rep(&["2^1"]), 2, 13).is_err());
        assert!(truncate(&rep(&["2^1"]), 4, 3).is_err());
    }

    #[test]
    fn kernel_examples() {
        assert!(mu_kernel(&rep(&["2^inf"]), 2).unwrap().is_trivial());
        assert_eq!(mu_kernel(&rep(&["2^2"]), 2).unwrap(), FiniteAbelian::new([(2, 1)]));
        assert_eq!(mu_kernel(&rep(&["2^2", "3^1"]), 6).unwrap(), FiniteAbelian::new([(2, 1), (3, 1)]));
        assert!(mu_kernel(&rep(&["2^2"]), 0).is_err());
    }

    #[test]
    fn projective_kernel_examples() {
        assert_eq!(projective_kernel(&rep(&["2^2"])).rows(), &[Supernatural::full()]);
        assert_eq!(projective_kernel(&rep(&["2^inf"])).rows(), &[sn("2^0 default inf")]);
        assert_eq!(projective_kernel(&StdRep::empty()).m(), 0);
    }

    const PRIMES: [u64; 4] = [2, 3, 5, 7];

    fn arb_row() -> impl Strategy<Value = Supernatural> {
        let e = prop_oneof![4 => (0u32..4).prop_map(Exp::Fin), 1 => Just(Exp::Inf)];
        (proptest::collection::vec(e, 4), prop::bool::weighted(0.15)).prop_map(|(es, d)| {
            let default = if d { Exp::Inf } else { Exp::ZERO };
            Supernatural::new(PRIMES.iter().copied().zip(es), default).unwrap()
        })
    }

    proptest! {
        #[test]
        fn std_rep_canonical(rows in proptest::collection::vec(arb_row(), 0..5), seed in any::<u64>()) {
            let s = std_rep(&rows);
            prop_assert!(s.is_sorted());
            prop_assert!(!s.has_trailing_zero_row());
            prop_assert_eq!(std_rep(s.rows()), s.clone());
            let mut shuffled = rows.clone();
            let len = shuffled.len();
            if len > 1 {
                shuffled.rotate_left((seed as usize) % len);
                shuffled.swap(0, (seed as usize / 7) % len);
            }
            prop_assert_eq!(std_rep(&shuffled), s.clone());
            prop_assert!(dim_na(&s) <= width_na(&s));
        }

        #[test]
        fn kernel_torsion_free(rows in proptest::collection::vec(arb_row(), 0..5)) {
            let k = projective_kernel(&std_rep(&rows));
            for r in k.rows() {
                prop_assert!(r.finite_part().values().all(|e| e.is_inf() || e.is_zero()));
                prop_assert!(r.default_exp().is_inf() || r.default_exp().is_zero());
            }
        }

        #[test]
        fn scaling_preserves_isogeny(rows in proptest::collection::vec(arb_row(), 0..4), k in 1u64..200) {
            let s = std_rep(&rows);
            let t = scale_exponents(&s, k).unwrap();
            prop_assert!(profinite_isogenous(&s, &t));
            prop_assert_eq!(dim_na(&s), dim_na(&t));
        }
    }
}
