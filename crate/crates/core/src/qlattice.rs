//! Full-rank lattices in Q^n kept in Hermite normal form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{fmt_rat, fmt_vec, lcm_denominators, transpose, Int, Matrix, Rat, Vector};
use crate::error::{Error, Result};

/// A full-rank subgroup of Q^n. The basis rows are in Hermite normal form:
/// upper triangular, positive diagonal, entries above each pivot in [0, pivot).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lattice {
    rank: usize,
    basis: Matrix,
}

/// Primitive integer point with first nonzero coordinate positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HemispherePoint {
    coords: Vec<Int>,
}

/// Position of a lattice relative to Z^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Equal,
    Sub,
    Super,
    /// Neither contains the other; outside the correspondence with L(G).
    Mixed,
}

impl HemispherePoint {
    pub fn coords(&self) -> &[Int] {
        &self.coords
    }

    pub fn to_rational(&self) -> Vector {
        self.coords.iter().map(|c| Rat::from_integer(c.clone())).collect()
    }
}

impl fmt::Display for HemispherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn hnf_integer(mut rows: Vec<Vec<Int>>, n: usize) -> Result<Vec<Vec<Int>>> {
    let mut r = 0;
    for c in 0..n {
        loop {
            let nz: Vec<usize> = (r..rows.len()).filter(|&i| !rows[i][c].is_zero()).collect();
            if nz.is_empty() {
                return Err(Error::RankDeficient(n));
            }
            let piv = *nz.iter().min_by_key(|&&i| rows[i][c].abs()).unwrap();
            if nz.len() == 1 {
                rows.swap(r, piv);
                break;
            }
            for &i in &nz {
                if i != piv {
                    let f = rows[i][c].div_floor(&rows[piv][c]);
                    let pr = rows[piv].clone();
                    for (x, y) in rows[i].iter_mut().zip(&pr) {
                        *x -= &f * y;
                    }
                }
            }
        }
        if rows[r][c].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -x.clone();
            }
        }
        let pr = rows[r].clone();
        for i in 0..r {
            let f = rows[i][c].div_floor(&pr[c]);
            if !f.is_zero() {
                for (x, y) in rows[i].iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
            }
        }
        r += 1;
    }
    rows.truncate(n);
    Ok(rows)
}

impl Lattice {
    pub fn standard(n: usize) -> Self {
        Lattice {
            rank: n,
            basis: crate::arith::identity(n),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn det(&self) -> Rat {
        self.basis.iter().enumerate().fold(Rat::one(), |acc, (i, row)| acc * &row[i])
    }

    /// Coordinates x with x·B = v.
    pub fn coordinates(&self, v: &[Rat]) -> Result<Vector> {
        if v.len() != self.rank {
            return Err(Error::Dimension {
                expected: self.rank,
                got: v.len(),
            });
        }
        let n = self.rank;
        let mut x: Vector = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = v[j].clone();
            for (i, xi) in x.iter().enumerate() {
                acc -= xi * &self.basis[i][j];
            }
            x.push(acc / &self.basis[j][j]);
        }
        Ok(x)
    }

    pub fn contains(&self, v: &[Rat]) -> Result<bool> {
        Ok(self.coordinates(v)?.iter().all(|q| q.is_integer()))
    }

    pub fn contains_lattice(&self, other: &Lattice) -> Result<bool> {
        for row in &other.basis {
            if !self.contains(row)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn scaled(&self, k: &Rat) -> Result<Lattice> {
        if k.is_zero() {
            return Err(Error::Invalid("scaling by zero".into()));
        }
        let gens: Vec<Vector> = self.basis.iter().map(|r| crate::arith::scale(r, k)).collect();
        hnf_basis(&gens, self.rank)
    }

    /// The dual lattice {y : x·y ∈ Z for all x in L}.
    pub fn dual(&self) -> Lattice {
        let inv = crate::arith::inverse(&self.basis).expect("full rank");
        let rows = transpose(&inv, self.rank);
        hnf_basis(&rows, self.rank).expect("dual is full rank")
    }

    pub fn position(&self) -> Position {
        let z = Lattice::standard(self.rank);
        let sub = z.contains_lattice(self).unwrap();
        let sup = self.contains_lattice(&z).unwrap();
        match (sub, sup) {
            (true, true) => Position::Equal,
            (true, false) => Position::Sub,
            (false, true) => Position::Super,
            (false, false) => Position::Mixed,
        }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|r| r.iter().map(fmt_rat).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "[{}]", rows.join(";"))
    }
}

/// HNF basis of the subgroup generated by rational vectors of length n.
pub fn hnf_basis(generators: &[Vector], n: usize) -> Result<Lattice> {
    for g in generators {
        if g.len() != n {
            return Err(Error::Dimension { expected: n, got: g.len() });
        }
    }
    let d = generators.iter().fold(BigInt::one(), |acc, g| acc.lcm(&lcm_denominators(g)));
    let dr = Rat::from_integer(d.clone());
    let rows: Vec<Vec<Int>> = generators
        .iter()
        .map(|g| g.iter().map(|q| (q * &dr).to_integer()).collect())
        .collect();
    let h = hnf_integer(rows, n)?;
    let basis = h
        .into_iter()
        .map(|r| r.into_iter().map(|x| Rat::new(x, d.clone())).collect())
        .collect();
    Ok(Lattice { rank: n, basis })
}

fn same_rank(a: &Lattice, b: &Lattice) -> Result<()> {
    if a.rank != b.rank {
        return Err(Error::Dimension {
            expected: a.rank,
            got: b.rank,
        });
    }
    Ok(())
}

pub fn lattice_sum(a: &Lattice, b: &Lattice) -> Result<Lattice> {
    same_rank(a, b)?;
    let gens: Vec<Vector> = a.basis.iter().chain(&b.basis).cloned().collect();
    hnf_basis(&gens, a.rank)
}

/// Intersection, computed as the dual of the sum of the duals.
pub fn lattice_meet(a: &Lattice, b: &Lattice) -> Result<Lattice> {
    same_rank(a, b)?;
    Ok(lattice_sum(&a.dual(), &b.dual())?.dual())
}

/// [big : small] for small ⊆ big.
pub fn lattice_index(big: &Lattice, small: &Lattice) -> Result<Int> {
    same_rank(big, small)?;
    for row in &small.basis {
        if !big.contains(row)? {
            return Err(Error::NotNested(fmt_vec(row)));
        }
    }
    let q = small.det() / big.det();
    debug_assert!(q.is_integer());
    Ok(q.to_integer().abs())
}

/// Minimal k ≥ 1 with k·a ⊆ b.
pub fn scaling_witness(a: &Lattice, b: &Lattice) -> Result<Int> {
    same_rank(a, b)?;
    let mut k = BigInt::one();
    for row in &a.basis {
        k = k.lcm(&lcm_denominators(&b.coordinates(row)?));
    }
    Ok(k)
}

/// Canonical primitive point on the line Qz and the radius of the integer
/// rescaling of z (z itself when integral).
pub fn hemisphere_rep(z: &[Rat]) -> Result<(HemispherePoint, Int)> {
    if crate::arith::is_zero_vec(z) {
        return Err(Error::ZeroVector);
    }
    let d = lcm_denominators(z);
    let w: Vec<Int> = z.iter().map(|q| (q * Rat::from_integer(d.clone())).to_integer()).collect();
    let g = w.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let mut coords: Vec<Int> = w.iter().map(|x| x / &g).collect();
    if coords.iter().find(|c| !c.is_zero()).unwrap().is_negative() {
        for c in coords.iter_mut() {
            *c = -c.clone();
        }
    }
    Ok((HemispherePoint { coords }, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{frac, int, ivec};
    use proptest::prelude::*;

    fn lat(rows: &[&[i64]]) -> Lattice {
        let gens: Vec<Vector> = rows.iter().map(|r| ivec(r)).collect();
        hnf_basis(&gens, rows[0].len()).unwrap()
    }

    #[test]
    fn hnf_examples() {
        assert_eq!(lat(&[&[1, 0], &[0, 1], &[1, 1]]), Lattice::standard(2));
        assert_eq!(lat(&[&[2, 0], &[0, 3]]).basis(), &vec![ivec(&[2, 0]), ivec(&[0, 3])]);
        // frozen from a membership enumeration over [-4,4]^2
        assert_eq!(lat(&[&[2, 2], &[0, 4]]).basis(), &vec![ivec(&[2, 2]), ivec(&[0, 4])]);
        assert!(matches!(hnf_basis(&[ivec(&[1, 1])], 2), Err(Error::RankDeficient(2))));
    }

    #[test]
    fn hnf_rational_and_idempotent() {
        let l = hnf_basis(&[vec![frac(1, 2), frac(1, 3)], ivec(&[0, 1]), ivec(&[1, 0])], 2).unwrap();
        assert_eq!(l.det(), frac(1, 6));
        assert_eq!(hnf_basis(l.basis(), 2).unwrap(), l);
    }

    #[test]
    fn sum_meet_examples() {
        let id = Lattice::standard(2);
        let two = lat(&[&[2, 0], &[0, 2]]);
        assert_eq!(lattice_sum(&two, &id).unwrap(), id);
        let a = lat(&[&[2, 0], &[0, 1]]);
        let b = lat(&[&[1, 0], &[0, 3]]);
        assert_eq!(lattice_meet(&a, &b).unwrap(), lat(&[&[2, 0], &[0, 3]]));
        assert_eq!(lattice_meet(&a, &a).unwrap(), a);
    }

    #[test]
    fn index_examples() {
        let id = Lattice::standard(2);
        assert_eq!(lattice_index(&id, &lat(&[&[2, 0], &[0, 3]])).unwrap(), Int::from(6));
        assert_eq!(lattice_index(&id, &id).unwrap(), Int::from(1));
        assert_eq!(lattice_index(&id, &lat(&[&[2, 0], &[0, 2]])).unwrap(), Int::from(4));
        let err = lattice_index(&lat(&[&[2, 0], &[0, 1]]), &id).unwrap_err();
        assert!(matches!(err, Error::NotNested(w) if w == "(1,0)"));
    }

    #[test]
    fn scaling_examples() {
        let id = Lattice::standard(2);
        let d = lat(&[&[2, 0], &[0, 3]]);
        assert_eq!(scaling_witness(&id, &d).unwrap(), Int::from(6));
        assert_eq!(scaling_witness(&d, &d).unwrap(), Int::from(1));
        assert_eq!(scaling_witness(&lat(&[&[2, 0], &[0, 2]]), &id).unwrap(), Int::from(1));
    }

    #[test]
    fn hemisphere_examples() {
        let (h, r) = hemisphere_rep(&ivec(&[2, 4])).unwrap();
        assert_eq!(h.to_rational(), ivec(&[1, 2]));
        assert_eq!(r, Int::from(2));
        let (h, r) = hemisphere_rep(&ivec(&[-1, 3])).unwrap();
        assert_eq!(h.to_rational(), ivec(&[1, -3]));
        assert_eq!(r, Int::from(1));
        let (h, r) = hemisphere_rep(&[frac(1, 2), frac(1, 3)]).unwrap();
        assert_eq!(h.to_rational(), ivec(&[3, 2]));
        assert_eq!(r, Int::from(1));
        assert!(hemisphere_rep(&ivec(&[0, 0])).is_err());
    }

    #[test]
    fn positions() {
        assert_eq!(Lattice::standard(2).position(), Position::Equal);
        assert_eq!(lat(&[&[2, 0], &[0, 1]]).position(), Position::Sub);
        let half = hnf_basis(&[vec![frac(1, 2), int(0)], ivec(&[0, 1])], 2).unwrap();
        assert_eq!(half.position(), Position::Super);
        let mixed = hnf_basis(&[vec![frac(1, 2), int(0)], ivec(&[0, 2])], 2).unwrap();
        assert_eq!(mixed.position(), Position::Mixed);
    }

    fn arb_lattice(n: usize) -> impl Strategy<Value = Lattice> {
        proptest::collection::vec(proptest::collection::vec(-6i64..=6, n), n..n + 2).prop_filter_map("full rank", move |rows| {
            let gens: Vec<Vector> = rows.iter().map(|r| ivec(r)).collect();
            hnf_basis(&gens, n).ok()
        })
    }

    proptest! {
        #[test]
        fn lattice_axioms(a in arb_lattice(2), b in arb_lattice(2), c in arb_lattice(2)) {
            let s = |x: &Lattice, y: &Lattice| lattice_sum(x, y).unwrap();
            let m = |x: &Lattice, y: &Lattice| lattice_meet(x, y).unwrap();
            prop_assert_eq!(s(&a, &b), s(&b, &a));
            prop_assert_eq!(m(&a, &b), m(&b, &a));
            prop_assert_eq!(s(&s(&a, &b), &c), s(&a, &s(&b, &c)));
            prop_assert_eq!(m(&m(&a, &b), &c), m(&a, &m(&b, &c)));
            prop_assert_eq!(s(&a, &m(&a, &b)), a.clone());
            prop_assert_eq!(m(&a, &s(&a, &b)), a.clone());
        }

        #[test]
        fn det_product_rule(a in arb_lattice(3), b in arb_lattice(3)) {
            let s = lattice_sum(&a, &b).unwrap();
            let m = lattice_meet(&a, &b).unwrap();
            prop_assert_eq!((s.det() * m.det()).abs(), (a.det() * b.det()).abs());
        }

        #[test]
        fn index_multiplicative(a in arb_lattice(2), b in arb_lattice(2), c in arb_lattice(2)) {
            let l1 = lattice_sum(&lattice_sum(&a, &b).unwrap(), &c).unwrap();
            let l2 = lattice_sum(&a, &b).unwrap();
            let l3 = lattice_meet(&a, &l2).unwrap();
            let lhs = lattice_index(&l1, &l3).unwrap();
            let rhs = lattice_index(&l1, &l2).unwrap() * lattice_index(&l2, &l3).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn mutual_scaling(a in arb_lattice(2), b in arb_lattice(2)) {
            let k = scaling_witness(&a, &b).unwrap();
            let ka = a.scaled(&Rat::from_integer(k.clone())).unwrap();
            prop_assert!(b.contains_lattice(&ka).unwrap());
            prop_assert!(lattice_index(&b, &ka).is_ok());
            let j = scaling_witness(&b, &a).unwrap();
            let jb = b.scaled(&Rat::from_integer(j)).unwrap();
            prop_assert!(a.contains_lattice(&jb).unwrap());
        }

        #[test]
        fn hemisphere_constant_on_lines(v in proptest::collection::vec(-9i64..=9, 3), num in -5i64..=5, den in 1i64..=7) {
            prop_assume!(v.iter().any(|&x| x != 0) && num != 0);
            let z = ivec(&v);
            let (h, _) = hemisphere_rep(&z).unwrap();
            let (h2, _) = hemisphere_rep(&crate::arith::scale(&z, &frac(num, den))).unwrap();
            prop_assert_eq!(&h, &h2);
            let (h3, r3) = hemisphere_rep(&h.to_rational()).unwrap();
            prop_assert_eq!(h3, h);
            prop_assert_eq!(r3, Int::from(1));
        }
    }
}
