//! Brute-force and modular checks that share no normal-form code with the
//! symbolic modules. Every local question is reduced to linear algebra over
//! Z/p^c with machine integers, or to explicit enumeration.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::arith::{self, prime_divisors, Rat, Vector};
use crate::error::{Error, Result};
use crate::profinite::{truncate, FiniteAbelian, StdRep, DEFAULT_DEPTH_BOUND};
use crate::qlattice::{lattice_index, lattice_meet, lattice_sum, scaling_witness, Lattice};
use crate::supernat::Exp;
use crate::tfgroup::GroupDescription;

/// Total elements an enumeration may touch.
pub const ELEMENT_CEILING: u64 = 1 << 24;
/// Largest modulus used by the modular routines.
const MODULUS_LIMIT: i128 = 1 << 62;

fn bound(what: &'static str, value: impl ToString, limit: impl ToString) -> Error {
    Error::Bound {
        what,
        value: value.to_string(),
        limit: limit.to_string(),
    }
}

fn vp(n: &BigInt, p: u64) -> u32 {
    let bp = BigInt::from(p);
    let mut m = n.clone();
    let mut e = 0;
    while !m.is_zero() && (&m % &bp).is_zero() {
        m /= &bp;
        e += 1;
    }
    e
}

fn vp_small(mut x: i128, p: i128) -> u32 {
    let mut e = 0;
    while x != 0 && x % p == 0 {
        x /= p;
        e += 1;
    }
    e
}

fn inv_mod(a: i128, m: i128) -> i128 {
    let g = a.extended_gcd(&m);
    debug_assert!(g.gcd == 1);
    g.x.rem_euclid(m)
}

/// A p-integral rational reduced mod p^c.
fn reduce(q: &Rat, p: u64, m: i128) -> i128 {
    let den = q.denom();
    let bm = BigInt::from(m);
    let num = q.numer().mod_floor(&bm).to_i128().unwrap();
    let d = den.mod_floor(&bm).to_i128().unwrap();
    debug_assert!(d % p as i128 != 0);
    (num * inv_mod(d, m)).rem_euclid(m)
}

/// Fraction-free elimination over Z: independent rows, and the valuation
/// at p of a nonzero maximal minor of those rows.
fn bareiss_minor_valuation(rows: &[Vec<BigInt>], p: u64) -> u32 {
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    if a.is_empty() {
        return 0;
    }
    let cols = a[0].len();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        let Some(sel) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, sel);
        for i in r + 1..a.len() {
            for j in c + 1..cols {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
        if r == a.len() {
            break;
        }
    }
    if r == 0 {
        0
    } else {
        vp(&prev, p)
    }
}

/// Local generators at p: integer vectors u with shifts, meaning
/// Z_(p)·p^{-shift}·u, and the ∞ vectors spanning D_p.
struct LocalGens {
    finite: Vec<(Vec<BigInt>, u32)>,
    infinite: Vec<Vec<BigInt>>,
    delta: u32,
}

fn integerize(v: &[Rat]) -> (Vec<BigInt>, BigInt) {
    let d = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let u = v.iter().map(|q| (q * Rat::from_integer(d.clone())).to_integer()).collect();
    (u, d)
}

fn local_gens(x: &GroupDescription, p: u64) -> LocalGens {
    let mut finite = Vec::new();
    let mut infinite = Vec::new();
    for d in x.directives() {
        let (u, den) = integerize(&d.v);
        match d.s.at(p) {
            Exp::Inf => infinite.push(u),
            Exp::Fin(t) => finite.push((u, vp(&den, p) + t)),
        }
    }
    let delta = bareiss_minor_valuation(&infinite, p);
    LocalGens { finite, infinite, delta }
}

impl LocalGens {
    fn max_shift(&self) -> u32 {
        self.finite.iter().map(|(_, s)| *s).max().unwrap_or(0)
    }

    /// Generators of p^c·X_(p) mod p^c.
    fn matrix(&self, p: u64, c: u32) -> Result<(Vec<Vec<i128>>, i128)> {
        let m = modulus(p, c)?;
        let bm = BigInt::from(m);
        let red =
            |u: &[BigInt], k: i128| -> Vec<i128> { u.iter().map(|x| (x.mod_floor(&bm).to_i128().unwrap() * k).rem_euclid(m)).collect() };
        let mut rows: Vec<Vec<i128>> = self.infinite.iter().map(|u| red(u, 1)).collect();
        for (u, s) in &self.finite {
            let k = if *s >= c { 1 } else { (p as i128).pow(c - s) % m };
            rows.push(red(u, k));
        }
        Ok((rows, m))
    }
}

fn modulus(p: u64, c: u32) -> Result<i128> {
    let mut m: i128 = 1;
    for _ in 0..c {
        m = m
            .checked_mul(p as i128)
            .filter(|&v| v <= MODULUS_LIMIT)
            .ok_or_else(|| bound("modulus p^c", format!("{p}^{c}"), MODULUS_LIMIT))?;
    }
    Ok(m)
}

/// Is `target` in the Z/p^c-span of `gens`? Echelon form with the extra
/// p^{c-v}·pivot rows that make reduction decide membership.
fn span_contains(mut pool: Vec<Vec<i128>>, target: &[i128], p: i128, m: i128) -> bool {
    let n = target.len();
    let mut pivots: Vec<(usize, Vec<i128>, i128)> = Vec::new();
    for col in 0..n {
        let best = pool
            .iter()
            .enumerate()
            .filter(|(_, r)| r[col] != 0)
            .min_by_key(|(_, r)| vp_small(r[col], p))
            .map(|(i, _)| i);
        let Some(i) = best else { continue };
        let mut piv = pool.swap_remove(i);
        let v = vp_small(piv[col], p);
        let pv = p.pow(v);
        let unit = inv_mod(piv[col] / pv, m);
        for x in piv.iter_mut() {
            *x = (*x * unit).rem_euclid(m);
        }
        for r in pool.iter_mut() {
            if r[col] != 0 {
                let f = r[col] / pv;
                for (x, y) in r.iter_mut().zip(&piv) {
                    *x = (*x - f * y).rem_euclid(m);
                }
            }
        }
        let k = m / pv;
        let extra: Vec<i128> = piv.iter().map(|x| (x * k).rem_euclid(m)).collect();
        if extra.iter().any(|&x| x != 0) {
            pool.push(extra);
        }
        pool.retain(|r| r.iter().any(|&x| x != 0));
        pivots.push((col, piv, pv));
    }
    let mut t: Vec<i128> = target.iter().map(|x| x.rem_euclid(m)).collect();
    for (col, piv, pv) in &pivots {
        if t[*col] % pv != 0 {
            return false;
        }
        let f = t[*col] / pv;
        for (x, y) in t.iter_mut().zip(piv) {
            *x = (*x - f * y).rem_euclid(m);
        }
    }
    t.iter().all(|&x| x == 0)
}

fn local_member(x: &GroupDescription, q: &[Rat], p: u64) -> Result<bool> {
    let lg = local_gens(x, p);
    let a = vp(&arith::lcm_denominators(q), p).max(lg.max_shift());
    let c = a + lg.delta;
    let (gens, m) = lg.matrix(p, c)?;
    let pc = Rat::from_integer(arith::pow_int(p, c));
    let target: Vec<i128> = q.iter().map(|qi| reduce(&(qi * &pc), p, m)).collect();
    Ok(span_contains(gens, &target, p as i128, m))
}

/// Decides q ∈ X by congruences modulo p^c at each prime dividing a
/// denominator of q.
pub fn oracle_member(x: &GroupDescription, q: &[Rat]) -> Result<bool> {
    if q.len() != x.rank() {
        return Err(Error::Dimension {
            expected: x.rank(),
            got: q.len(),
        });
    }
    for p in prime_divisors(&arith::lcm_denominators(q), x.prime_bound())? {
        if !local_member(x, q, p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleHeight {
    Exact(u32),
    /// Every check up to the bound passed.
    AtLeast(u32),
}

impl fmt::Display for OracleHeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleHeight::Exact(j) => write!(f, "{j}"),
            OracleHeight::AtLeast(j) => write!(f, ">={j}"),
        }
    }
}

/// Largest j ≤ N with z/p^j ∈ X.
pub fn oracle_height(x: &GroupDescription, p: u64, z: &[Rat], n: u32) -> Result<OracleHeight> {
    let mut w = z.to_vec();
    let inv_p = Rat::new(BigInt::one(), BigInt::from(p));
    for j in 1..=n {
        w = w.iter().map(|c| c * &inv_p).collect();
        if !oracle_member(x, &w)? {
            return Ok(OracleHeight::Exact(j - 1));
        }
    }
    Ok(OracleHeight::AtLeast(n))
}

/// Valuations of the diagonal of a Smith form over Z/p^c (c for zero).
fn smith_valuations_mod(mut a: Vec<Vec<i128>>, cols: usize, p: i128, c: u32, m: i128) -> Vec<u32> {
    let rows = a.len();
    let mut out = Vec::new();
    for t in 0..rows.min(cols) {
        let best = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0)
            .min_by_key(|&(i, j)| vp_small(a[i][j], p));
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for r in a.iter_mut() {
            r.swap(t, bj);
        }
        let v = vp_small(a[t][t], p);
        let pv = p.pow(v);
        let unit = inv_mod(a[t][t] / pv, m);
        for x in a[t].iter_mut() {
            *x = (*x * unit).rem_euclid(m);
        }
        for i in t + 1..rows {
            if a[i][t] != 0 {
                let f = a[i][t] / pv;
                let rt = a[t].clone();
                for (x, y) in a[i].iter_mut().zip(&rt) {
                    *x = (*x - f * y).rem_euclid(m);
                }
            }
        }
        for j in t + 1..cols {
            a[t][j] = 0;
        }
        out.push(v);
    }
    out.retain(|&v| v < c);
    out
}

/// Invariants of (X/Z^n)[p^N], from the structure of p^c·X_(p) mod p^c.
pub fn oracle_quotient_invariants(x: &GroupDescription, p: u64, n: u32) -> Result<FiniteAbelian> {
    let lg = local_gens(x, p);
    let c = n.max(lg.max_shift()) + lg.delta;
    let (gens, m) = lg.matrix(p, c)?;
    let vals = smith_valuations_mod(gens, x.rank(), p as i128, c, m);
    Ok(FiniteAbelian::new(vals.into_iter().map(|v| (p, (c - v).min(n)))))
}

/// Every invariant of (X/Z^n)[p^N] equals N, so each class is p-divisible
/// inside the truncation.
pub fn oracle_divisible(x: &GroupDescription, p: u64, n: u32) -> Result<bool> {
    let h = oracle_quotient_invariants(x, p, n)?;
    Ok(h.factors().iter().all(|&(_, k)| k >= n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactnessReport {
    pub middle: u64,
    pub sub: u64,
    pub quotient: u64,
    pub image_is_kernel: bool,
    pub ok: bool,
}

fn checked_pow(p: u64, e: u32) -> Option<u64> {
    p.checked_pow(e)
}

/// n⃗Ẑ^m → Ẑ^m → Ẑ(n⃗) truncated mod p^N, checked by enumeration.
pub fn oracle_exactness(s: &StdRep, p: u64, n: u32) -> Result<ExactnessReport> {
    let m = s.m();
    let big = checked_pow(p, n).ok_or_else(|| bound("p^N", format!("{p}^{n}"), ELEMENT_CEILING))?;
    let middle = checked_pow(big, m as u32)
        .filter(|&v| v <= ELEMENT_CEILING)
        .ok_or_else(|| bound("truncated group size", format!("{p}^({n}*{m})"), ELEMENT_CEILING))?;
    let t: Vec<u32> = s.column(p).into_iter().map(|e| e.truncate(n)).collect();
    let quot_mods: Vec<u64> = t.iter().map(|&k| p.pow(k)).collect();
    let sub_mods: Vec<u64> = t.iter().map(|&k| p.pow(n - k)).collect();
    let decode = |mut x: u64, mods: &[u64]| -> Vec<u64> {
        mods.iter()
            .map(|&md| {
                let r = x % md;
                x /= md;
                r
            })
            .collect()
    };
    let encode = |v: &[u64], mods: &[u64]| -> u64 { v.iter().zip(mods).rev().fold(0, |acc, (x, md)| acc * md + x) };
    let mid_mods = vec![big; m];
    let sub_size: u64 = sub_mods.iter().product();
    let mut image = BTreeSet::new();
    for y in 0..sub_size {
        let ys = decode(y, &sub_mods);
        let inc: Vec<u64> = ys.iter().zip(&quot_mods).map(|(yy, q)| (yy * q) % big).collect();
        image.insert(encode(&inc, &mid_mods));
    }
    let mut kernel = BTreeSet::new();
    let mut proj_image = BTreeSet::new();
    for xm in 0..middle {
        let xs = decode(xm, &mid_mods);
        let pr: Vec<u64> = xs.iter().zip(&quot_mods).map(|(a, q)| a % q).collect();
        let code = encode(&pr, &quot_mods);
        if code == 0 {
            kernel.insert(xm);
        }
        proj_image.insert(code);
    }
    let injective = image.len() as u64 == sub_size;
    let image_is_kernel = image == kernel;
    let quotient = proj_image.len() as u64;
    let ok = injective && image_is_kernel && quotient == quot_mods.iter().product::<u64>() && middle == sub_size * quotient;
    Ok(ExactnessReport {
        middle,
        sub: sub_size,
        quotient,
        image_is_kernel,
        ok,
    })
}

/// Invariants of a finite abelian p-group from the number of elements of
/// each order p^j.
fn invariants_from_orders(p: u64, counts: &[u64]) -> FiniteAbelian {
    let log = |mut t: u64| {
        let mut e = 0u32;
        while t > 1 {
            t /= p;
            e += 1;
        }
        e
    };
    let mut cum = 0;
    let c: Vec<u32> = counts
        .iter()
        .map(|&k| {
            cum += k;
            log(cum)
        })
        .collect();
    let top = c.len() - 1;
    let mut factors = Vec::new();
    for j in 1..=top {
        let ge_j = c[j] - c[j - 1];
        let ge_next = if j < top { c[j + 1] - c[j] } else { 0 };
        factors.extend(std::iter::repeat_n((p, j as u32), (ge_j - ge_next) as usize));
    }
    FiniteAbelian::new(factors)
}

/// (p^{-(s+m)}Z/Z) / (p^{-s}Z/Z) by enumerating cosets.
pub fn oracle_envelope_row(p: u64, s: u32, m: u32) -> Result<FiniteAbelian> {
    let d = checked_pow(p, s + m)
        .filter(|&v| v <= ELEMENT_CEILING)
        .ok_or_else(|| bound("envelope row", format!("{p}^{}", s + m), ELEMENT_CEILING))?;
    // C is generated by p^m inside Z/p^{s+m}
    let step = p.pow(m);
    let in_c = |x: u64| x % step == 0;
    let mut classes = BTreeSet::new();
    let mut counts = vec![0u64; (s + m) as usize + 1];
    for x in 0..d {
        let rep = x % step;
        if !classes.insert(rep) {
            continue;
        }
        let mut k = 0;
        let mut y = x;
        while !in_c(y) {
            y = (y * p) % d;
            k += 1;
        }
        counts[k] += 1;
    }
    Ok(invariants_from_orders(p, &counts))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawReport {
    pub trials: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

/// v ∈ span_Z(rows) by exact rational solving, rows square and invertible.
fn lattice_has(rows: &[Vector], v: &[Rat]) -> bool {
    let n = rows.len();
    // augmented system rows^T · c = v
    let mut a: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let mut r: Vec<Rat> = rows.iter().map(|row| row[i].clone()).collect();
            r.push(v[i].clone());
            r
        })
        .collect();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&i| !a[i][col].is_zero()) else {
            return false;
        };
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                let rc = a[col].clone();
                for (x, y) in a[i].iter_mut().zip(&rc) {
                    *x -= &f * y;
                }
            }
        }
    }
    a.iter().all(|r| r[n].is_integer())
}

fn lattice_within(small: &Lattice, big: &Lattice) -> bool {
    small.basis().iter().all(|v| lattice_has(big.basis(), v))
}

fn random_lattice(rng: &mut ChaCha8Rng, n: usize) -> Lattice {
    loop {
        let den = rng.gen_range(1..=4i64);
        let rows: Vec<Vector> = (0..n)
            .map(|_| (0..n).map(|_| arith::frac(rng.gen_range(-16..=16), den)).collect())
            .collect();
        if let Ok(l) = crate::qlattice::hnf_basis(&rows, n) {
            return l;
        }
    }
}

fn det_abs(rows: &[Vector]) -> Rat {
    arith::det(&rows.to_vec()).abs()
}

/// Randomized laws of the lattice of full-rank lattices: closure of sum and
/// meet, finite nested indices with multiplicativity, scaling witnesses,
/// μ_n preimages and finite extensions.
pub fn oracle_lattice_laws(seed: u64, trials: usize, max_rank: usize) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut checks = 0;
    let fail = |failures: &mut Vec<String>, msg: String| {
        if failures.len() < 20 {
            failures.push(msg);
        }
    };
    for trial in 0..trials {
        let n = rng.gen_range(1..=max_rank.max(1));
        let a = random_lattice(&mut rng, n);
        let b = if trial % 10 == 0 { a.clone() } else { random_lattice(&mut rng, n) };
        let tag = format!(
            "trial {trial}: A={} B={}",
            arith::fmt_matrix(a.basis()),
            arith::fmt_matrix(b.basis())
        );
        let (Ok(s), Ok(m)) = (lattice_sum(&a, &b), lattice_meet(&a, &b)) else {
            fail(&mut failures, format!("{tag}: sum or meet failed"));
            continue;
        };
        checks += 1;
        if !(lattice_within(&a, &s) && lattice_within(&b, &s) && lattice_within(&m, &a) && lattice_within(&m, &b)) {
            fail(&mut failures, format!("{tag}: closure containment"));
        }
        // the meet is the largest common sublattice: a random common vector lies in it
        checks += 1;
        match (scaling_witness(&a, &b), scaling_witness(&b, &a)) {
            (Ok(k1), Ok(k2)) => {
                let (q1, q2) = (Rat::from_integer(k1.clone()), Rat::from_integer(k2.clone()));
                let ok = a.basis().iter().all(|v| lattice_has(b.basis(), &arith::scale(v, &q1)))
                    && b.basis().iter().all(|v| lattice_has(a.basis(), &arith::scale(v, &q2)));
                if !ok {
                    fail(&mut failures, format!("{tag}: scaling witnesses {k1}, {k2} fail"));
                }
                // k1·a ⊆ a ∩ b, so the meet must hold it
                let common = arith::scale(&a.basis()[0], &q1);
                checks += 1;
                if !lattice_has(m.basis(), &common) {
                    fail(&mut failures, format!("{tag}: meet misses a common vector"));
                }
            }
            _ => fail(&mut failures, format!("{tag}: no scaling witness")),
        }
        checks += 1;
        match (
            lattice_index(&s, &a),
            lattice_index(&a, &m),
            lattice_index(&s, &m),
            lattice_index(&s, &b),
            lattice_index(&b, &m),
        ) {
            (Ok(i1), Ok(i2), Ok(i3), Ok(i4), Ok(i5)) => {
                let dets = det_abs(m.basis()) / det_abs(s.basis());
                if i1.clone() * &i2 != i3 || i4 * i5 != i3 || Rat::from_integer(i3.clone()) != dets {
                    fail(&mut failures, format!("{tag}: index multiplicativity [{i1}·{i2} vs {i3}]"));
                }
            }
            _ => fail(&mut failures, format!("{tag}: nested index not finite")),
        }
        // μ_n preimage: {x : n·x ∈ A} contains A with index dividing n^rank
        let nn = rng.gen_range(2..=6i64);
        checks += 1;
        let pre = a.scaled(&arith::frac(1, nn)).unwrap();
        let ok = lattice_within(&a, &pre)
            && pre
                .basis()
                .iter()
                .all(|v| lattice_has(a.basis(), &arith::scale(v, &arith::int(nn))))
            && lattice_index(&pre, &a)
                .map(|i| (BigInt::from(nn).pow(n as u32) % i).is_zero())
                .unwrap_or(false);
        if !ok {
            fail(&mut failures, format!("{tag}: mu_{nn} preimage law"));
        }
        // finite extension A + Z·x/k stays a lattice with index dividing k
        let kk = rng.gen_range(2..=5i64);
        let x = arith::scale(&a.basis()[rng.gen_range(0..n)], &arith::frac(1, kk));
        let mut gens = a.basis().clone();
        gens.push(x.clone());
        checks += 1;
        match crate::qlattice::hnf_basis(&gens, n) {
            Ok(ext) => {
                let ok = lattice_within(&a, &ext)
                    && lattice_has(ext.basis(), &x)
                    && lattice_index(&ext, &a).map(|i| (BigInt::from(kk) % i).is_zero()).unwrap_or(false);
                if !ok {
                    fail(&mut failures, format!("{tag}: finite extension by {}", arith::fmt_vec(&x)));
                }
            }
            Err(e) => fail(&mut failures, format!("{tag}: finite extension failed: {e}")),
        }
    }
    LawReport { trials, checks, failures }
}

/// Stable short hash of a check instance.
pub fn instance_hash(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckLine {
    pub name: String,
    pub hash: String,
    pub pass: bool,
    pub witness: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CHECK {} {} {} {}",
            self.name,
            self.hash,
            if self.pass { "PASS" } else { "FAIL" },
            self.witness
        )
    }
}

/// Largest depth k ≤ n with p^k ≤ ceiling.
pub fn clamp_depth(p: u64, n: u32, ceiling: u64) -> u32 {
    let mut k = 0;
    while k < n && p.checked_pow(k + 1).is_some_and(|v| v <= ceiling) {
        k += 1;
    }
    k
}

/// Validates a requested truncation depth.
pub fn check_depth(n: u32) -> Result<()> {
    if n == 0 || n > DEFAULT_DEPTH_BOUND {
        return Err(bound("truncation depth", n, DEFAULT_DEPTH_BOUND));
    }
    Ok(())
}

/// Compares the oracle's quotient invariants with the symbolic truncation.
pub fn quotient_agrees(x: &GroupDescription, delta_star: &StdRep, p: u64, n: u32) -> Result<(bool, String)> {
    let o = oracle_quotient_invariants(x, p, n)?;
    let s = truncate(delta_star, p, n)?;
    Ok((o == s, format!("oracle={o} symbolic={s}")))
}

/// Random vectors with denominators built from the given primes.
pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, primes: &[u64], max_den: i64) -> Vector {
    (0..n)
        .map(|_| {
            let mut den: i64 = 1;
            if !primes.is_empty() {
                for _ in 0..rng.gen_range(0..=3) {
                    let p = primes[rng.gen_range(0..primes.len())] as i64;
                    if den * p <= max_den {
                        den *= p;
                    }
                }
            }
            arith::frac(rng.gen_range(-12..=12), den)
        })
        .collect()
}

/// Primes used by the randomized instance generators.
pub const SMALL_PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// A random directive group: rank ≤ max_rank, at most max_dirs directives,
/// denominators ≤ 64 over primes ≤ 13.
pub fn random_group(rng: &mut ChaCha8Rng, max_rank: usize, max_dirs: usize) -> GroupDescription {
    use crate::supernat::Supernatural;
    use crate::tfgroup::Directive;
    let n = rng.gen_range(1..=max_rank);
    let k = rng.gen_range(0..=max_dirs);
    let mut dirs = Vec::new();
    while dirs.len() < k {
        let v = random_vector(rng, n, &SMALL_PRIMES, 64);
        if arith::is_zero_vec(&v) {
            continue;
        }
        let mut entries = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            let p = SMALL_PRIMES[rng.gen_range(0..4)];
            let e = match rng.gen_range(0..5) {
                4 => Exp::Inf,
                e => Exp::Fin(e),
            };
            if !entries.iter().any(|&(q, _)| q == p) {
                entries.push((p, e));
            }
        }
        let default = if rng.gen_bool(0.08) { Exp::Inf } else { Exp::ZERO };
        let s = Supernatural::new(entries, default).unwrap();
        dirs.push(Directive { v, s });
    }
    GroupDescription::new(n, dirs).unwrap()
}

/// A random vector near X: an integer combination of members of X,
/// sometimes divided by a small prime so that non-members appear too.
pub fn random_candidate(rng: &mut ChaCha8Rng, x: &GroupDescription) -> Vector {
    let n = x.rank();
    let mut q: Vector = (0..n).map(|_| arith::int(rng.gen_range(-3..=3))).collect();
    for d in x.directives() {
        let mut scale = Rat::from_integer(BigInt::from(rng.gen_range(-3..=3)));
        for p in d.s.support().into_iter().chain(SMALL_PRIMES.iter().copied().take(3)) {
            let e = match d.s.at(p) {
                Exp::Inf => rng.gen_range(0..=4),
                Exp::Fin(e) => rng.gen_range(0..=e),
            };
            scale /= Rat::from_integer(arith::pow_int(p, e));
        }
        q = arith::add(&q, &arith::scale(&d.v, &scale));
    }
    if rng.gen_bool(0.5) {
        let p = SMALL_PRIMES[rng.gen_range(0..3)];
        q = arith::scale(&q, &arith::frac(1, p as i64));
    }
    if arith::is_zero_vec(&q) {
        q[0] = arith::frac(1, 2);
    }
    q
}
