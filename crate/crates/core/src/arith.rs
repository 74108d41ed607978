//! Exact integer and rational helpers shared by the symbolic modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rat = BigRational;
pub type Vector = Vec<Rat>;
pub type Matrix = Vec<Vec<Rat>>;

/// Default trial-division bound used when factoring denominators and numerators.
pub const DEFAULT_PRIME_BOUND: u64 = 1 << 20;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn ivec(xs: &[i64]) -> Vector {
    xs.iter().map(|&x| int(x)).collect()
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&k| is_prime(k)).collect()
}

/// Smallest prime not in `avoid`.
pub fn first_prime_outside(avoid: &std::collections::BTreeSet<u64>) -> u64 {
    let mut p = 2;
    loop {
        if is_prime(p) && !avoid.contains(&p) {
            return p;
        }
        p += 1;
    }
}

/// Prime factorization of |n| by trial division up to `bound`.
///
/// A leftover cofactor is accepted when it fits in 64 bits and passes the
/// primality test; anything larger is reported as an error.
pub fn factor(n: &Int, bound: u64) -> Result<Vec<(u64, u32)>> {
    let mut m = n.abs();
    if m.is_zero() {
        return Err(Error::Invalid("cannot factor zero".into()));
    }
    let mut out = Vec::new();
    if let Some(mut small) = m.to_u64() {
        let mut p = 2u64;
        while p <= bound && p.saturating_mul(p) <= small {
            if small % p == 0 {
                let mut e = 0;
                while small % p == 0 {
                    small /= p;
                    e += 1;
                }
                out.push((p, e));
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if small > 1 {
            if is_prime(small) {
                out.push((small, 1));
            } else {
                return Err(Error::Factorization(n.to_string()));
            }
        }
        return Ok(out);
    }
    let mut p = 2u64;
    while p <= bound {
        let bp = BigInt::from(p);
        if (&bp * &bp) > m {
            break;
        }
        if (&m % &bp).is_zero() {
            let mut e = 0;
            while (&m % &bp).is_zero() {
                m /= &bp;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !m.is_one() {
        match m.to_u64() {
            Some(c) if is_prime(c) => out.push((c, 1)),
            _ => return Err(Error::Factorization(n.to_string())),
        }
    }
    Ok(out)
}

pub fn prime_divisors(n: &Int, bound: u64) -> Result<Vec<u64>> {
    Ok(factor(n, bound)?.into_iter().map(|(p, _)| p).collect())
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &Int, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let bp = BigInt::from(p);
    let mut m = n.clone();
    let mut e = 0;
    while (&m % &bp).is_zero() {
        m /= &bp;
        e += 1;
    }
    e
}

/// p-adic valuation of a rational; `None` for zero.
pub fn rat_valuation(q: &Rat, p: u64) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    Some(valuation(q.numer(), p) as i64 - valuation(q.denom(), p) as i64)
}

pub fn is_p_integral(q: &Rat, p: u64) -> bool {
    q.is_zero() || !(q.denom() % BigInt::from(p)).is_zero()
}

pub fn pow_int(p: u64, e: u32) -> Int {
    num_traits::pow(BigInt::from(p), e as usize)
}

pub fn pow_rat(p: u64, e: i64) -> Rat {
    if e >= 0 {
        Rat::from_integer(pow_int(p, e as u32))
    } else {
        Rat::new(BigInt::one(), pow_int(p, (-e) as u32))
    }
}

pub fn lcm_denominators(v: &[Rat]) -> Int {
    v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub fn is_integral(v: &[Rat]) -> bool {
    v.iter().all(|q| q.is_integer())
}

pub fn is_zero_vec(v: &[Rat]) -> bool {
    v.iter().all(|q| q.is_zero())
}

pub fn scale(v: &[Rat], c: &Rat) -> Vector {
    v.iter().map(|x| x * c).collect()
}

pub fn add(a: &[Rat], b: &[Rat]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn unit_vector(n: usize, k: usize) -> Vector {
    (0..n).map(|i| if i == k { int(1) } else { int(0) }).collect()
}

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|k| unit_vector(n, k)).collect()
}

pub fn transpose(m: &Matrix, cols: usize) -> Matrix {
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Matrix times column vector.
pub fn mat_vec(a: &Matrix, v: &[Rat]) -> Vector {
    a.iter()
        .map(|row| row.iter().zip(v).fold(Rat::zero(), |acc, (x, y)| acc + x * y))
        .collect()
}

/// Row vector times matrix.
pub fn vec_mat(v: &[Rat], m: &Matrix, cols: usize) -> Vector {
    let mut out = vec![Rat::zero(); cols];
    for (c, row) in v.iter().zip(m) {
        if c.is_zero() {
            continue;
        }
        for j in 0..cols {
            out[j] += c * &row[j];
        }
    }
    out
}

pub fn mat_mul(a: &Matrix, b: &Matrix, cols: usize) -> Matrix {
    a.iter().map(|row| vec_mat(row, b, cols)).collect()
}

/// Reduced row echelon form of the row space. Returns the nonzero rows and
/// their pivot columns.
pub fn rref(rows: &[Vector], cols: usize) -> (Matrix, Vec<usize>) {
    let mut m: Matrix = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(sel) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, sel);
        let inv = m[r][c].recip();
        let piv: Vector = m[r].iter().map(|x| x * &inv).collect();
        m[r] = piv;
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vector], cols: usize) -> usize {
    rref(rows, cols).1.len()
}

pub fn det(m: &Matrix) -> Rat {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Rat::one();
    for c in 0..n {
        let Some(sel) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rat::zero();
        };
        if sel != c {
            a.swap(sel, c);
            d = -d;
        }
        d *= &a[c][c];
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                for j in c..n {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    d
}

pub fn inverse(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut a: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend(unit_vector(n, i));
            r
        })
        .collect();
    for c in 0..n {
        let sel = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, sel);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..2 * n {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Unimodular integer matrix whose first rows form a basis of V ∩ Z^n,
/// where V is the rational span of `rows` (assumed linearly independent).
pub fn saturated_completion(rows: &[Vector], n: usize) -> Matrix {
    let k = rows.len();
    let mut b: Vec<Vec<Int>> = rows
        .iter()
        .map(|r| {
            let d = lcm_denominators(r);
            r.iter().map(|q| (q * Rat::from_integer(d.clone())).to_integer()).collect()
        })
        .collect();
    // Column operations on b are mirrored on u, so b_final = b_initial * u.
    let mut u: Vec<Vec<Int>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
        .collect();
    let col_op = |m: &mut Vec<Vec<Int>>, dst: usize, src: usize, f: &Int| {
        for row in m.iter_mut() {
            let t = &row[src] * f;
            row[dst] -= t;
        }
    };
    for i in 0..k {
        loop {
            let nz: Vec<usize> = (i..n).filter(|&j| !b[i][j].is_zero()).collect();
            if nz.len() <= 1 {
                if let Some(&j) = nz.first() {
                    if j != i {
                        for row in b.iter_mut() {
                            row.swap(i, j);
                        }
                        for row in u.iter_mut() {
                            row.swap(i, j);
                        }
                    }
                }
                break;
            }
            let piv = *nz.iter().min_by_key(|&&j| b[i][j].abs()).unwrap();
            for &j in &nz {
                if j != piv {
                    let f = b[i][j].div_floor(&b[i][piv]);
                    col_op(&mut b, j, piv, &f);
                    col_op(&mut u, j, piv, &f);
                }
            }
        }
    }
    let ur: Matrix = u.iter().map(|r| r.iter().map(|x| Rat::from_integer(x.clone())).collect()).collect();
    inverse(&ur).expect("unimodular")
}

/// Smith form U·C·V = diag(d) of an integer matrix, keeping V and V^{-1}.
#[derive(Debug, Clone)]
pub struct Smith {
    pub diag: Vec<Int>,
    pub v: Vec<Vec<Int>>,
    pub v_inv: Vec<Vec<Int>>,
}

pub fn smith_normal_form(c: &[Vec<Int>], cols: usize) -> Smith {
    let rows = c.len();
    let mut a: Vec<Vec<Int>> = c.to_vec();
    let id = |n: usize| -> Vec<Vec<Int>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
            .collect()
    };
    let mut v = id(cols);
    let mut vi = id(cols);
    // col_j -= f·col_t on a and v; row_t += f·row_j on v^{-1}.
    let col_sub = |a: &mut Vec<Vec<Int>>, v: &mut Vec<Vec<Int>>, vi: &mut Vec<Vec<Int>>, j: usize, t: usize, f: &Int| {
        for row in a.iter_mut().chain(v.iter_mut()) {
            let x = &row[t] * f;
            row[j] -= x;
        }
        let rj = vi[j].clone();
        for (x, y) in vi[t].iter_mut().zip(rj) {
            *x += y * f;
        }
    };
    let col_swap = |a: &mut Vec<Vec<Int>>, v: &mut Vec<Vec<Int>>, vi: &mut Vec<Vec<Int>>, i: usize, j: usize| {
        for row in a.iter_mut().chain(v.iter_mut()) {
            row.swap(i, j);
        }
        vi.swap(i, j);
    };
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                break;
            };
            a.swap(t, bi);
            col_swap(&mut a, &mut v, &mut vi, t, bj);
            let mut clean = true;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let f = a[i][t].div_floor(&a[t][t]);
                    let rt = a[t].clone();
                    for (x, y) in a[i].iter_mut().zip(&rt) {
                        *x -= y * &f;
                    }
                    clean &= a[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let f = a[t][j].div_floor(&a[t][t]);
                    col_sub(&mut a, &mut v, &mut vi, j, t, &f);
                    clean &= a[t][j].is_zero();
                }
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
            match bad {
                Some(i) => {
                    let ri = a[i].clone();
                    for (x, y) in a[t].iter_mut().zip(ri) {
                        *x += y;
                    }
                }
                None => break,
            }
        }
        if a[t][t].is_zero() {
            break;
        }
        diag.push(a[t][t].abs());
    }
    Smith { diag, v, v_inv: vi }
}

pub fn fmt_rat(q: &Rat) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn fmt_vec(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_rat).collect();
    format!("({})", parts.join(","))
}

pub fn fmt_matrix(m: &Matrix) -> String {
    let rows: Vec<String> = m.iter().map(|r| r.iter().map(fmt_rat).collect::<Vec<_>>().join(",")).collect();
    format!("[{}]", rows.join(";"))
}

pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: Int = a.trim().parse().ok()?;
        let b: Int = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        Some(Rat::new(a, b))
    } else {
        s.parse::<Int>().ok().map(Rat::from_integer)
    }
}

/// Parses a matrix written as rows separated by `;` with entries separated
/// by `,` or whitespace, optionally wrapped in brackets.
pub fn parse_matrix(s: &str) -> Option<Matrix> {
    let body = s.trim().trim_start_matches('[').trim_end_matches(']');
    let mut rows = Vec::new();
    for row in body.split(';') {
        let row = row.trim().trim_start_matches('[').trim_end_matches(']');
        let entries: Option<Vector> = row
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(parse_rat)
            .collect();
        let entries = entries?;
        if entries.is_empty() {
            return None;
        }
        rows.push(entries);
    }
    let w = rows.first()?.len();
    if rows.iter().any(|r| r.len() != w) {
        return None;
    }
    Some(rows)
}
