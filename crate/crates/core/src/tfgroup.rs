//! Finite-rank torsion-free groups Z^n ⊆ X ⊆ Q^n given by directives
//! X = Z^n + Σ A(s_i)·v_i, where A(s) = {a/b : b | s}.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{
    self, first_prime_outside, fmt_vec, is_prime, lcm_denominators, mat_vec, parse_rat, pow_rat, prime_divisors, rat_valuation, rref,
    unit_vector, Int, Matrix, Rat, Vector, DEFAULT_PRIME_BOUND,
};
use crate::error::{Error, Result};
use crate::profinite::{std_rep, StdRep};
use crate::qlattice::{hemisphere_rep, hnf_basis, Lattice};
use crate::supernat::{Exp, Supernatural, TypeClass};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Directive {
    pub v: Vector,
    pub s: Supernatural,
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dir v={} s={}", fmt_vec(&self.v), self.s)
    }
}

#[derive(Debug, Clone)]
pub struct GroupDescription {
    rank: usize,
    directives: Vec<Directive>,
    prime_bound: u64,
    special: BTreeSet<u64>,
}

impl PartialEq for GroupDescription {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.directives == other.directives
    }
}

impl Eq for GroupDescription {}

fn sort_key(d: &Directive) -> (Vec<Int>, String, Vector) {
    let (h, _) = hemisphere_rep(&d.v).expect("nonzero");
    (h.coords().to_vec(), d.s.to_string(), d.v.clone())
}

impl GroupDescription {
    pub fn new(rank: usize, directives: Vec<Directive>) -> Result<Self> {
        Self::with_bound(rank, directives, DEFAULT_PRIME_BOUND)
    }

    pub fn with_bound(rank: usize, directives: Vec<Directive>, prime_bound: u64) -> Result<Self> {
        let mut dirs = Vec::with_capacity(directives.len());
        for mut d in directives {
            if d.v.len() != rank {
                return Err(Error::Dimension {
                    expected: rank,
                    got: d.v.len(),
                });
            }
            if arith::is_zero_vec(&d.v) {
                return Err(Error::ZeroVector);
            }
            // A(s)·v = A(s)·(−v)
            if d.v.iter().find(|q| !q.is_zero()).unwrap().is_negative() {
                d.v = d.v.iter().map(|q| -q).collect();
            }
            dirs.push(d);
        }
        dirs.sort_by_cached_key(sort_key);
        dirs.dedup();
        let mut special = BTreeSet::new();
        for d in &dirs {
            special.extend(d.s.support());
            special.extend(prime_divisors(&lcm_denominators(&d.v), prime_bound)?);
        }
        Ok(GroupDescription {
            rank,
            directives: dirs,
            prime_bound,
            special,
        })
    }

    pub fn free(rank: usize) -> Self {
        GroupDescription::new(rank, Vec::new()).unwrap()
    }

    pub fn with_prime_bound(self, bound: u64) -> Result<Self> {
        Self::with_bound(self.rank, self.directives, bound)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn directives(&self) -> &[Directive] {
        &self.directives
    }

    pub fn prime_bound(&self) -> u64 {
        self.prime_bound
    }

    /// Primes in any directive's exception set or dividing a directive
    /// denominator; every other prime behaves generically.
    pub fn special_primes(&self) -> &BTreeSet<u64> {
        &self.special
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_group(text)
    }

    /// Canonical serialization.
    pub fn to_text(&self) -> String {
        let mut s = format!("rank {}\n", self.rank);
        for d in &self.directives {
            s.push_str(&format!("{d}\n"));
        }
        s
    }

    fn exponent_at(&self, d: &Directive, p: Option<u64>) -> Exp {
        match p {
            Some(p) => d.s.at(p),
            None => d.s.default_exp(),
        }
    }
}

impl fmt::Display for GroupDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text().trim_end().replace('\n', "; "))
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parses the group-description format: a `rank <n>` line followed by
/// `dir v=(q1,...,qn) s=<supernatural>` lines. `;` also separates lines and
/// `#` starts a comment.
pub fn parse_group(text: &str) -> Result<GroupDescription> {
    let mut rank: Option<usize> = None;
    let mut dirs = Vec::new();
    for (ln, raw_line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let content = raw_line.split('#').next().unwrap();
        let mut offset = 0;
        for stmt in content.split(';') {
            let col0 = offset + (stmt.len() - stmt.trim_start().len()) + 1;
            offset += stmt.len() + 1;
            let stmt = stmt.trim();
            if stmt.is_empty() {
                continue;
            }
            if let Some(rest) = stmt.strip_prefix("rank") {
                if rank.is_some() {
                    return Err(parse_err(line_no, col0, "duplicate rank line"));
                }
                let n: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(line_no, col0 + 4, format!("invalid rank '{}'", rest.trim())))?;
                if n < 1 {
                    return Err(parse_err(line_no, col0 + 4, "rank must be at least 1"));
                }
                rank = Some(n);
            } else if let Some(rest) = stmt.strip_prefix("dir") {
                let n = rank.ok_or_else(|| parse_err(line_no, col0, "directive before rank line"))?;
                dirs.push(parse_directive(rest, n, line_no, col0 + 3)?);
            } else {
                return Err(parse_err(line_no, col0, format!("unexpected '{stmt}'")));
            }
        }
    }
    let n = rank.ok_or_else(|| parse_err(1, 1, "missing rank line"))?;
    GroupDescription::new(n, dirs)
}

fn parse_directive(rest: &str, n: usize, line: usize, col: usize) -> Result<Directive> {
    let vpos = rest.find("v=(").ok_or_else(|| parse_err(line, col, "expected v=(...)"))?;
    let open = vpos + 3;
    let close = rest[open..]
        .find(')')
        .map(|i| i + open)
        .ok_or_else(|| parse_err(line, col + open, "unclosed vector"))?;
    let mut v = Vec::new();
    let mut off = open;
    for tok in rest[open..close].split(',') {
        let q = parse_rat(tok).ok_or_else(|| parse_err(line, col + off, format!("invalid rational '{}'", tok.trim())))?;
        v.push(q);
        off += tok.len() + 1;
    }
    if v.len() != n {
        return Err(parse_err(line, col + open, format!("vector has {} entries, rank is {n}", v.len())));
    }
    if arith::is_zero_vec(&v) {
        return Err(parse_err(line, col + vpos, "zero directive vector"));
    }
    let after = &rest[close + 1..];
    let spos = after
        .find("s=")
        .ok_or_else(|| parse_err(line, col + close + 1, "expected s=<supernatural>"))?;
    let stext = &after[spos + 2..];
    let s: Supernatural = stext.parse().map_err(|e| match e {
        Error::Parse { column, message, .. } => parse_err(line, col + close + 1 + spos + 2 + column - 1, message),
        other => other,
    })?;
    Ok(Directive { v, s })
}

/// p-local decomposition X_(p) = D_p ⊕ M_p. `prime = None` is the splitting
/// shared by all primes outside the special set.
#[derive(Debug, Clone)]
pub struct PLocalSplitting {
    pub prime: Option<u64>,
    /// RREF basis of D_p, the span of directives with exponent ∞ at p.
    pub divisible_subspace: Matrix,
    pivots: Vec<usize>,
    free_coords: Vec<usize>,
    /// Λ_p ⊆ Q^{n-d}: the image of the generators under projection along D_p.
    pub free_module: Lattice,
    /// Positive p-local elementary exponents of π(Z^n) inside Λ_p.
    pub elementary_exponents: Vec<u32>,
    n: usize,
}

impl PLocalSplitting {
    fn build(x: &GroupDescription, p: Option<u64>) -> Result<Self> {
        let n = x.rank;
        let inf_rows: Vec<Vector> = x
            .directives
            .iter()
            .filter(|d| x.exponent_at(d, p).is_inf())
            .map(|d| d.v.clone())
            .collect();
        let (divisible_subspace, pivots) = rref(&inf_rows, n);
        let free_coords: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let mut sp = PLocalSplitting {
            prime: p,
            divisible_subspace,
            pivots,
            free_coords,
            free_module: Lattice::standard(0),
            elementary_exponents: Vec::new(),
            n,
        };
        let mut gens: Vec<Vector> = (0..n).map(|k| sp.project(&unit_vector(n, k))).collect();
        for d in &x.directives {
            if let Exp::Fin(e) = x.exponent_at(d, p) {
                let scale = match p {
                    Some(p) => pow_rat(p, -(e as i64)),
                    None => Rat::one(),
                };
                gens.push(arith::scale(&sp.project(&d.v), &scale));
            }
        }
        sp.free_module = hnf_basis(&gens, sp.free_coords.len())?;
        if let Some(p) = p {
            let c: Matrix = (0..n)
                .map(|k| sp.free_module.coordinates(&sp.project(&unit_vector(n, k))).unwrap())
                .collect();
            sp.elementary_exponents = plocal_smith(c, p).into_iter().filter(|&e| e > 0).collect();
        }
        Ok(sp)
    }

    pub fn divisible_dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn free_rank(&self) -> usize {
        self.free_coords.len()
    }

    /// Projection along D_p onto the non-pivot coordinates.
    pub fn project(&self, q: &[Rat]) -> Vector {
        let mut w = q.to_vec();
        for (row, &c) in self.divisible_subspace.iter().zip(&self.pivots) {
            if !w[c].is_zero() {
                let f = w[c].clone();
                for j in 0..self.n {
                    w[j] -= &f * &row[j];
                }
            }
        }
        self.free_coords.iter().map(|&c| w[c].clone()).collect()
    }

    /// Coordinates of the free component in the basis of Λ_p.
    pub fn free_coordinates(&self, q: &[Rat]) -> Vector {
        self.free_module.coordinates(&self.project(q)).unwrap()
    }

    pub fn in_divisible_part(&self, q: &[Rat]) -> bool {
        arith::is_zero_vec(&self.project(q))
    }

    /// q ∈ X_(p) at the given prime.
    pub fn contains_at(&self, q: &[Rat], p: u64) -> bool {
        self.free_coordinates(q).iter().all(|c| arith::is_p_integral(c, p))
    }

    /// p-height of z in X_(p); z must lie in X_(p).
    pub fn height_at(&self, z: &[Rat], p: u64) -> Exp {
        let c = self.free_coordinates(z);
        c.iter()
            .filter_map(|x| rat_valuation(x, p))
            .min()
            .map_or(Exp::Inf, |v| Exp::Fin(v.max(0) as u32))
    }
}

/// Valuations of the pivots in a p-local Smith reduction of a matrix with
/// p-integral entries; one value per unit of rank.
pub fn plocal_smith(mut c: Matrix, p: u64) -> Vec<u32> {
    let rows = c.len();
    let cols = c.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if let Some(v) = rat_valuation(&c[i][j], p) {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, bi, bj)) = best else { break };
        c.swap(t, bi);
        for row in c.iter_mut() {
            row.swap(t, bj);
        }
        let piv = c[t][t].clone();
        for i in t + 1..rows {
            if !c[i][t].is_zero() {
                let f = &c[i][t] / &piv;
                for j in t..cols {
                    let s = &f * &c[t][j];
                    c[i][j] -= s;
                }
            }
        }
        for j in t + 1..cols {
            c[t][j] = Rat::zero();
        }
        out.push(v.max(0) as u32);
        t += 1;
    }
    out
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

fn check_dim(x: &GroupDescription, q: &[Rat]) -> Result<()> {
    if q.len() != x.rank {
        return Err(Error::Dimension {
            expected: x.rank,
            got: q.len(),
        });
    }
    Ok(())
}

pub fn splitting(x: &GroupDescription, p: u64) -> Result<PLocalSplitting> {
    check_prime(p)?;
    PLocalSplitting::build(x, Some(p))
}

pub fn generic_splitting(x: &GroupDescription) -> PLocalSplitting {
    PLocalSplitting::build(x, None).expect("generic generators span")
}

/// Decides q ∈ X prime by prime over the primes dividing q's denominators.
pub fn member(x: &GroupDescription, q: &[Rat]) -> Result<bool> {
    check_dim(x, q)?;
    for p in prime_divisors(&lcm_denominators(q), x.prime_bound)? {
        if !splitting(x, p)?.contains_at(q, p) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn require_member(x: &GroupDescription, z: &[Rat]) -> Result<()> {
    check_dim(x, z)?;
    if arith::is_zero_vec(z) {
        return Err(Error::ZeroVector);
    }
    if !member(x, z)? {
        return Err(Error::NotMember(fmt_vec(z)));
    }
    Ok(())
}

/// max{j : z ∈ p^j X}, with ∞ exactly when z lies in D_p.
pub fn p_height(x: &GroupDescription, p: u64, z: &[Rat]) -> Result<Exp> {
    check_prime(p)?;
    require_member(x, z)?;
    Ok(splitting(x, p)?.height_at(z, p))
}

/// The full height sequence of z as a supernatural number.
pub fn height_seq(x: &GroupDescription, z: &[Rat]) -> Result<Supernatural> {
    require_member(x, z)?;
    let gen = generic_splitting(x);
    let default = if gen.in_divisible_part(z) { Exp::Inf } else { Exp::ZERO };
    let mut candidates: BTreeSet<u64> = x.special.clone();
    if default == Exp::ZERO {
        let coords = gen.free_coordinates(z);
        let g = coords
            .iter()
            .filter(|c| !c.is_zero())
            .fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()));
        if !g.is_zero() {
            candidates.extend(prime_divisors(&g, x.prime_bound)?);
        }
    }
    let mut entries = BTreeMap::new();
    for p in candidates {
        let h = splitting(x, p)?.height_at(z, p);
        entries.insert(p, h);
    }
    Ok(Supernatural::from_parts(entries, default))
}

fn require_rank1(x: &GroupDescription) -> Result<()> {
    if x.rank != 1 {
        return Err(Error::Dimension { expected: 1, got: x.rank });
    }
    Ok(())
}

pub fn rank1_type(x: &GroupDescription) -> Result<TypeClass> {
    require_rank1(x)?;
    Ok(height_seq(x, &[Rat::one()])?.type_class())
}

pub fn rank1_isomorphic(x: &GroupDescription, y: &GroupDescription) -> Result<bool> {
    Ok(rank1_type(x)? == rank1_type(y)?)
}

/// Directive lines and standard basis lines, as primitive integer points.
pub fn canonical_lines(x: &GroupDescription) -> Vec<Vector> {
    let mut pts: BTreeSet<Vec<Int>> = BTreeSet::new();
    for d in &x.directives {
        pts.insert(hemisphere_rep(&d.v).unwrap().0.coords().to_vec());
    }
    for k in 0..x.rank {
        pts.insert(hemisphere_rep(&unit_vector(x.rank, k)).unwrap().0.coords().to_vec());
    }
    pts.into_iter().map(|c| c.into_iter().map(Rat::from_integer).collect()).collect()
}

/// Pointwise supremum of ht(z) over all primitive lines z.
///
/// Finite suprema are attained on the canonical lines. When 0 < dim D_p < n
/// the lines d + p^k·e have unbounded height, so the supremum is ∞ there.
pub fn tau_sup_sequence(x: &GroupDescription) -> Result<Supernatural> {
    let n = x.rank;
    let mut acc = Supernatural::one();
    for z in canonical_lines(x) {
        acc = acc.lcm(&height_seq(x, &z)?);
    }
    let mut entries: BTreeMap<u64, Exp> = acc.finite_part().clone();
    for &p in &x.special {
        let d = splitting(x, p)?.divisible_dim();
        if d > 0 && d < n {
            entries.insert(p, Exp::Inf);
        } else {
            entries.entry(p).or_insert(acc.default_exp());
        }
    }
    let d_gen = generic_splitting(x).divisible_dim();
    let default = if d_gen > 0 && d_gen < n { Exp::Inf } else { acc.default_exp() };
    for (&p, e) in entries.iter_mut() {
        if !x.special.contains(&p) && default.is_inf() {
            *e = Exp::Inf;
        }
    }
    Ok(Supernatural::from_parts(entries, default))
}

pub fn tau_sup(x: &GroupDescription) -> Result<TypeClass> {
    Ok(tau_sup_sequence(x)?.type_class())
}

/// X_(p) ≠ Z_(p)^n.
pub fn locally_nontrivial(x: &GroupDescription, p: u64) -> bool {
    x.directives.iter().any(|d| match d.s.at(p) {
        Exp::Inf => true,
        Exp::Fin(e) => e > 0 || d.v.iter().any(|q| !arith::is_p_integral(q, p)),
    })
}

/// X_(p) ≠ Z_(p)^n for the primes outside the special set.
pub fn generically_nontrivial(x: &GroupDescription) -> bool {
    x.directives.iter().any(|d| d.s.default_exp().is_inf())
}

/// Standard representation of the dual of X/F.
pub fn quotient_structure(x: &GroupDescription, f: &Lattice) -> Result<StdRep> {
    if f.rank() != x.rank {
        return Err(Error::Dimension {
            expected: x.rank,
            got: f.rank(),
        });
    }
    for row in f.basis() {
        if !member(x, row)? {
            return Err(Error::NotMember(format!("lattice vector {}", fmt_vec(row))));
        }
    }
    let mut primes = x.special.clone();
    for row in f.basis() {
        primes.extend(prime_divisors(&lcm_denominators(row), x.prime_bound)?);
    }
    let det = f.det();
    if x.rank > 0 {
        primes.extend(prime_divisors(det.numer(), x.prime_bound)?);
    }
    let d_gen = generic_splitting(x).divisible_dim();
    let mut columns: BTreeMap<u64, Vec<Exp>> = BTreeMap::new();
    for p in primes {
        let sp = splitting(x, p)?;
        let c: Matrix = f.basis().iter().map(|row| sp.free_coordinates(row)).collect();
        let mut col = vec![Exp::Inf; sp.divisible_dim()];
        col.extend(plocal_smith(c, p).into_iter().filter(|&e| e > 0).map(Exp::Fin));
        columns.insert(p, col);
    }
    let m = columns.values().map(|c| c.len()).max().unwrap_or(0).max(d_gen);
    let raw: Vec<Supernatural> = (0..m)
        .map(|j| {
            let default = if j < d_gen { Exp::Inf } else { Exp::ZERO };
            let entries = columns
                .iter()
                .map(|(&p, col)| (p, col.get(j).copied().unwrap_or(Exp::ZERO)))
                .collect();
            Supernatural::from_parts(entries, default)
        })
        .collect();
    Ok(std_rep(&raw))
}

fn check_shape(a: &Matrix, x: &GroupDescription, y: &GroupDescription) -> Result<()> {
    if a.len() != y.rank {
        return Err(Error::Dimension {
            expected: y.rank,
            got: a.len(),
        });
    }
    for row in a {
        if row.len() != x.rank {
            return Err(Error::Dimension {
                expected: x.rank,
                got: row.len(),
            });
        }
    }
    Ok(())
}

/// Some x ∈ X with A·x ∉ Y, or None when A·X ⊆ Y.
pub fn hom_check_witness(a: &Matrix, x: &GroupDescription, y: &GroupDescription) -> Result<Option<Vector>> {
    check_shape(a, x, y)?;
    let n = x.rank;
    for k in 0..n {
        let e = unit_vector(n, k);
        if !member(y, &mat_vec(a, &e))? {
            return Ok(Some(e));
        }
    }
    // Past the first failing power of p the image leaves Y.
    let escape = |v: &Vector, av: &Vector, p: u64| -> Result<Option<Vector>> {
        match p_height(y, p, av)? {
            Exp::Inf => Ok(None),
            Exp::Fin(h) => Ok(Some(arith::scale(v, &pow_rat(p, -(h as i64) - 1)))),
        }
    };
    for d in &x.directives {
        let av = mat_vec(a, &d.v);
        if !member(y, &av)? {
            return Ok(Some(d.v.clone()));
        }
        if arith::is_zero_vec(&av) {
            continue;
        }
        let mut local: BTreeSet<u64> = d.s.support();
        if d.s.default_exp().is_inf() {
            local.extend(y.special.iter().copied());
        }
        for p in local {
            match d.s.at(p) {
                Exp::Fin(0) => {}
                Exp::Fin(e) => {
                    let w = arith::scale(&d.v, &pow_rat(p, -(e as i64)));
                    if !member(y, &mat_vec(a, &w))? {
                        return Ok(Some(w));
                    }
                }
                Exp::Inf => {
                    if let Some(w) = escape(&d.v, &av, p)? {
                        return Ok(Some(w));
                    }
                }
            }
        }
        if d.s.default_exp().is_inf() && !generic_splitting(y).in_divisible_part(&av) {
            let mut avoid = y.special.clone();
            avoid.extend(d.s.support());
            for q in prime_divisors(&lcm_denominators(&av), y.prime_bound)? {
                avoid.insert(q);
            }
            let p = first_prime_outside(&avoid);
            if let Some(w) = escape(&d.v, &av, p)? {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

/// A·X ⊆ Y.
pub fn hom_check(a: &Matrix, x: &GroupDescription, y: &GroupDescription) -> Result<bool> {
    Ok(hom_check_witness(a, x, y)?.is_none())
}

/// Smallest k > 0 with k·X ⊆ Y in the common coordinates, if any.
pub fn scaling_into(x: &GroupDescription, y: &GroupDescription) -> Result<Option<Int>> {
    if x.rank != y.rank {
        return Err(Error::Dimension {
            expected: y.rank,
            got: x.rank,
        });
    }
    let n = x.rank;
    let mut gens: Vec<Vector> = (0..n).map(|k| unit_vector(n, k)).collect();
    let mut primes: BTreeSet<u64> = x.special.union(&y.special).copied().collect();
    for d in &x.directives {
        gens.push(d.v.clone());
        for &p in &d.s.support() {
            if let Exp::Fin(e) = d.s.at(p) {
                gens.push(arith::scale(&d.v, &pow_rat(p, -(e as i64))));
            }
        }
        primes.extend(prime_divisors(&lcm_denominators(&d.v), x.prime_bound)?);
    }
    let gen_y = generic_splitting(y);
    for d in x.directives.iter().filter(|d| d.s.default_exp().is_inf()) {
        if !gen_y.in_divisible_part(&d.v) {
            return Ok(None);
        }
    }
    let mut k = Int::one();
    for p in primes {
        let sp = splitting(y, p)?;
        for d in &x.directives {
            if d.s.at(p).is_inf() && !sp.in_divisible_part(&d.v) {
                return Ok(None);
            }
        }
        let worst = gens
            .iter()
            .flat_map(|g| sp.free_coordinates(g))
            .filter_map(|c| rat_valuation(&c, p))
            .min()
            .unwrap_or(0);
        if worst < 0 {
            k *= arith::pow_int(p, (-worst) as u32);
        }
    }
    Ok(Some(k))
}

/// Same subgroup of Q^n.
pub fn same_group(x: &GroupDescription, y: &GroupDescription) -> Result<bool> {
    if x.rank != y.rank {
        return Ok(false);
    }
    let id = arith::identity(x.rank);
    Ok(hom_check(&id, x, y)? && hom_check(&id, y, x)?)
}

/// Result of splitting off free and divisible summands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub r: usize,
    pub k: usize,
    pub reduced: GroupDescription,
}

/// Intersection of two subspaces given by spanning rows.
fn intersect(a: &[Vector], b: &[Vector], n: usize) -> Matrix {
    let (a, _) = rref(a, n);
    let (b, _) = rref(b, n);
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // Null space of the stacked rows [a; -b], read through a.
    let stacked: Matrix = a.iter().cloned().chain(b.iter().map(|r| r.iter().map(|x| -x).collect())).collect();
    let t = arith::transpose(&stacked, n);
    let cols = stacked.len();
    let (r, piv) = rref(&t, cols);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !piv.contains(c)) {
        let mut coef = vec![Rat::zero(); cols];
        coef[free] = Rat::one();
        for (row, &pc) in r.iter().zip(&piv) {
            coef[pc] = -row[free].clone();
        }
        out.push(arith::vec_mat(&coef[..a.len()], &a, n));
    }
    rref(&out, n).0
}

/// Re-expresses directives in the coordinates of a unimodular basis `q`
/// (rows) and keeps the coordinates `range`.
fn recoordinatize(dirs: &[Directive], q: &Matrix, range: std::ops::Range<usize>) -> Vec<Directive> {
    let n = q.len();
    let qinv = arith::inverse(q).expect("unimodular");
    dirs.iter()
        .filter_map(|d| {
            let y = arith::vec_mat(&d.v, &qinv, n);
            let v: Vector = y[range.clone()].to_vec();
            (!arith::is_zero_vec(&v)).then(|| Directive { v, s: d.s.clone() })
        })
        .collect()
}

/// Splits X ≅ Z^r ⊕ Q^k ⊕ X_reduced after one exact basis reduction.
///
/// Directions outside the span W of the nontrivial directives (those with
/// A(s)·v ⊄ Z^n) are free summands; the maximal divisible subspace of the
/// W-part gives the Q-summands. Free summands hidden inside W are not found.
pub fn canonical_split(x: &GroupDescription) -> Result<Split> {
    let n = x.rank;
    let over_l: Vec<Directive> = x
        .directives
        .iter()
        .filter(|d| !d.s.is_one() || !arith::is_integral(&d.v))
        .cloned()
        .collect();
    let (w, _) = rref(&over_l.iter().map(|d| d.v.clone()).collect::<Vec<_>>(), n);
    let wdim = w.len();
    let qw = arith::saturated_completion(&w, n);
    let w_part = GroupDescription::with_bound(wdim, recoordinatize(&over_l, &qw, 0..wdim), x.prime_bound)?;

    let mut v_space: Matrix = generic_splitting(&w_part).divisible_subspace;
    for &p in w_part.special_primes() {
        if v_space.is_empty() {
            break;
        }
        v_space = intersect(&v_space, &splitting(&w_part, p)?.divisible_subspace, wdim);
    }
    let k = v_space.len();
    let qv = arith::saturated_completion(&v_space, wdim);
    let reduced = GroupDescription::with_bound(wdim - k, recoordinatize(w_part.directives(), &qv, k..wdim), x.prime_bound)?;
    Ok(Split { r: n - wdim, k, reduced })
}
