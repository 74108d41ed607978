//! Protorus-level structure computed from the dual group X.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{
    self, fmt_vec, identity, is_prime, lcm_denominators, mat_vec, pow_int, pow_rat, prime_divisors, smith_normal_form, unit_vector, Int,
    Matrix, Rat, Vector,
};
use crate::error::{Error, Result};
use crate::profinite::{dim_na, std_rep, width_na, FiniteAbelian, StdRep, DEFAULT_DEPTH_BOUND};
use crate::qlattice::{hnf_basis, lattice_meet, Lattice};
use crate::supernat::{Exp, Supernatural};
use crate::tfgroup::{
    canonical_lines, canonical_split, generic_splitting, height_seq, hom_check, hom_check_witness, locally_nontrivial, member,
    quotient_structure, splitting, Directive, GroupDescription, Split,
};

#[derive(Debug, Clone)]
pub struct ProtorusDescriptor {
    pub dual: GroupDescription,
    pub dim: usize,
    pub delta_star: StdRep,
    pub dim_na: usize,
    pub width_na: usize,
    pub split: Split,
    /// delta_star of the reduced part, relative to its own Z^rank.
    pub reduced_delta_star: StdRep,
}

impl ProtorusDescriptor {
    /// dim_nA ≤ width_nA ≤ dim.
    pub fn chain_holds(&self) -> bool {
        self.dim_na <= self.width_na && self.width_na <= self.dim
    }

    pub fn torus_free(&self) -> bool {
        self.split.r == 0
    }
}

pub fn from_dual(x: &GroupDescription) -> Result<ProtorusDescriptor> {
    let n = x.rank();
    let delta_star = quotient_structure(x, &Lattice::standard(n))?;
    let split = canonical_split(x)?;
    let reduced_delta_star = quotient_structure(&split.reduced, &Lattice::standard(split.reduced.rank()))?;
    Ok(ProtorusDescriptor {
        dual: x.clone(),
        dim: n,
        dim_na: dim_na(&delta_star),
        width_na: width_na(&delta_star),
        delta_star,
        split,
        reduced_delta_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HullMode {
    /// Promote every positive height to ∞.
    Inf,
    /// Promote only finite positive heights.
    FinInf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineScope {
    Directives,
    Saturated,
}

impl fmt::Display for HullMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HullMode::Inf => "inf",
            HullMode::FinInf => "fininf",
        })
    }
}

impl fmt::Display for LineScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LineScope::Directives => "directives",
            LineScope::Saturated => "saturated",
        })
    }
}

const HULL_ROUNDS: usize = 64;

fn promoted(h: &Supernatural, mode: HullMode) -> Supernatural {
    match mode {
        HullMode::Inf => h.map(|e| if e.is_zero() { Exp::ZERO } else { Exp::Inf }),
        HullMode::FinInf => h.map(|e| if e.is_finite_positive() { Exp::Inf } else { Exp::ZERO }),
    }
}

/// Is X_(p) promoted wholesale by the saturated scope at p (`None` = generic)?
fn saturated_active(x: &GroupDescription, p: Option<u64>, mode: HullMode) -> Result<bool> {
    let n = x.rank();
    let d = match p {
        Some(p) => {
            if !locally_nontrivial(x, p) {
                return Ok(false);
            }
            splitting(x, p)?.divisible_dim()
        }
        None => {
            let d = generic_splitting(x).divisible_dim();
            if d == 0 {
                return Ok(false);
            }
            d
        }
    };
    Ok(match mode {
        HullMode::Inf => true,
        HullMode::FinInf => d < n,
    })
}

fn promote_once(x: &GroupDescription, mode: HullMode, scope: LineScope) -> Result<GroupDescription> {
    let n = x.rank();
    let mut dirs: Vec<Directive> = x.directives().to_vec();
    for z in canonical_lines(x) {
        let s = promoted(&height_seq(x, &z)?, mode);
        if !s.is_one() {
            dirs.push(Directive { v: z, s });
        }
    }
    if scope == LineScope::Saturated {
        let mut entries = BTreeMap::new();
        for &p in x.special_primes() {
            if saturated_active(x, Some(p), mode)? {
                entries.insert(p, Exp::Inf);
            }
        }
        let default = if saturated_active(x, None, mode)? { Exp::Inf } else { Exp::ZERO };
        if default.is_inf() {
            for &p in x.special_primes() {
                entries.entry(p).or_insert(Exp::ZERO);
            }
        }
        let s = Supernatural::new(entries, default)?;
        if !s.is_one() {
            dirs.extend((0..n).map(|k| Directive {
                v: unit_vector(n, k),
                s: s.clone(),
            }));
        }
    }
    GroupDescription::with_bound(n, dirs, x.prime_bound())
}

fn contained(a: &GroupDescription, b: &GroupDescription) -> Result<bool> {
    hom_check(&identity(a.rank()), a, b)
}

/// Drops directives already implied by the others.
pub fn simplify(x: &GroupDescription) -> Result<GroupDescription> {
    let n = x.rank();
    let mut kept: Vec<Directive> = x.directives().to_vec();
    let mut i = 0;
    while i < kept.len() {
        let single = GroupDescription::with_bound(n, vec![kept[i].clone()], x.prime_bound())?;
        let mut rest = kept.clone();
        rest.remove(i);
        let rest_group = GroupDescription::with_bound(n, rest.clone(), x.prime_bound())?;
        if contained(&single, &rest_group)? {
            kept = rest;
        } else {
            i += 1;
        }
    }
    GroupDescription::with_bound(n, kept, x.prime_bound())
}

/// Quotient-divisible hull. Promotion is repeated until nothing changes, so
/// the result is a fixed point and a second application returns it as is.
pub fn qd_hull(x: &GroupDescription, mode: HullMode, scope: LineScope) -> Result<GroupDescription> {
    let mut cur = x.clone();
    for _ in 0..HULL_ROUNDS {
        let next = promote_once(&cur, mode, scope)?;
        if contained(&next, &cur)? {
            return if cur == *x { Ok(cur) } else { simplify(&cur) };
        }
        cur = next;
    }
    Err(Error::Bound {
        what: "qd_hull rounds",
        value: HULL_ROUNDS.to_string(),
        limit: HULL_ROUNDS.to_string(),
    })
}

/// Per-prime (r_p, s_p) exponents of the hull of Δ* inside Δ̂ of X∞.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullExponents {
    pub per_prime: BTreeMap<u64, (usize, usize)>,
    /// The pair shared by every unlisted prime.
    pub generic: (usize, usize),
    /// Zero-exponent rows of delta_star that X∞ activates, by prime.
    pub activated_zero_rows: BTreeMap<u64, usize>,
    pub generic_activated_zero_rows: usize,
}

impl HullExponents {
    pub fn at(&self, p: u64) -> (usize, usize) {
        self.per_prime.get(&p).copied().unwrap_or(self.generic)
    }
}

/// Per prime: r_p rows of delta_star with exponent ∞, s_p rows that X∞
/// turns into Prüfer factors (finite positive rows, plus zero rows when X∞
/// gains divisible rank beyond them).
pub fn universal_resolution(g: &ProtorusDescriptor) -> Result<HullExponents> {
    if g.split.r > 0 {
        return Err(Error::TorusFactor(g.split.r));
    }
    let x = &g.dual;
    let x_inf = qd_hull(x, HullMode::Inf, LineScope::Directives)?;
    let mut primes: BTreeSet<u64> = x.special_primes().clone();
    primes.extend(x_inf.special_primes());
    primes.extend(g.delta_star.support());
    // s_p counts rows: the finite positive ones, then zero rows for whatever
    // divisible rank X∞ gains beyond them
    let pair = |col: &[Exp], d_inf: usize| {
        let r = col.iter().filter(|e| e.is_inf()).count();
        let finite_pos = col.iter().filter(|e| e.is_finite_positive()).count();
        let zeros = col.iter().filter(|e| e.is_zero()).count();
        let act = d_inf.saturating_sub(r + finite_pos).min(zeros);
        ((r, finite_pos + act), act)
    };
    let mut per_prime = BTreeMap::new();
    let mut activated = BTreeMap::new();
    let gen_d = generic_splitting(&x_inf).divisible_dim();
    let (generic, gen_act) = pair(&g.delta_star.default_column(), gen_d);
    for p in primes {
        let d = splitting(&x_inf, p)?.divisible_dim();
        let (rs, act) = pair(&g.delta_star.column(p), d);
        if rs != generic {
            per_prime.insert(p, rs);
        }
        if act > 0 {
            activated.insert(p, act);
        }
    }
    Ok(HullExponents {
        per_prime,
        generic,
        activated_zero_rows: activated,
        generic_activated_zero_rows: gen_act,
    })
}

/// Local factor symbols appearing in envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LocalFactor {
    /// Q̂_p
    QHat,
    /// Ẑ_p
    ZHat,
    /// Z(p^∞)
    Prufer,
    /// p^{-a}Ẑ_p/Ẑ_p, cyclic of order p^a (a > 0).
    Cyclic(u32),
    Zero,
}

impl LocalFactor {
    fn cyclic(a: u32) -> Self {
        if a == 0 {
            LocalFactor::Zero
        } else {
            LocalFactor::Cyclic(a)
        }
    }

    pub fn render(&self, p: Option<u64>) -> String {
        let p = p.map_or("p".to_string(), |p| p.to_string());
        match self {
            LocalFactor::QHat => format!("Q^_{p}"),
            LocalFactor::ZHat => format!("Z^_{p}"),
            LocalFactor::Prufer => format!("Z({p}^inf)"),
            LocalFactor::Cyclic(a) => format!("Z({p}^{a})"),
            LocalFactor::Zero => "0".to_string(),
        }
    }
}

/// Formal direct sum of Prüfer and finite cyclic p-groups.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormalSum {
    pub per_prime: BTreeMap<u64, Vec<LocalFactor>>,
    /// Summands at every prime not listed in `per_prime`.
    pub generic: Vec<LocalFactor>,
}

impl FormalSum {
    pub fn is_zero(&self) -> bool {
        self.generic.is_empty() && self.per_prime.values().all(|v| v.is_empty())
    }

    /// Summands at p.
    pub fn at(&self, p: u64) -> &[LocalFactor] {
        self.per_prime.get(&p).map_or(&self.generic[..], |v| &v[..])
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (&p, v) in &self.per_prime {
            parts.extend(v.iter().map(|t| t.render(Some(p))));
        }
        if !self.generic.is_empty() {
            let g: Vec<String> = self.generic.iter().map(|t| t.render(None)).collect();
            parts.push(format!("[other p: {}]", g.join(" + ")));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Torsion subgroup of the hull: ⊕_p Z(p^∞)^{s_p}.
pub fn torsion_part(h: &HullExponents) -> FormalSum {
    let mut per_prime = BTreeMap::new();
    for (&p, &(_, s)) in &h.per_prime {
        per_prime.insert(p, vec![LocalFactor::Prufer; s]);
    }
    FormalSum {
        per_prime,
        generic: vec![LocalFactor::Prufer; h.generic.1],
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopeRow {
    pub s: Exp,
    pub d: LocalFactor,
    pub c: LocalFactor,
    /// Contribution to D/C (Zero when trivial).
    pub quotient: LocalFactor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicEnvelope {
    pub per_prime: BTreeMap<u64, Vec<EnvelopeRow>>,
    pub generic: Vec<EnvelopeRow>,
    pub m: Supernatural,
    pub quotient: FormalSum,
}

/// The three-case table for one row at one prime.
pub fn envelope_row(s: Exp, m: Exp) -> EnvelopeRow {
    match (s, m) {
        (Exp::Inf, _) => EnvelopeRow {
            s,
            d: LocalFactor::QHat,
            c: LocalFactor::ZHat,
            quotient: LocalFactor::Prufer,
        },
        (Exp::Fin(s_), Exp::Inf) => EnvelopeRow {
            s,
            d: LocalFactor::Prufer,
            c: LocalFactor::cyclic(s_),
            quotient: LocalFactor::Prufer,
        },
        (Exp::Fin(s_), Exp::Fin(m_)) => EnvelopeRow {
            s,
            d: LocalFactor::cyclic(s_ + m_),
            c: LocalFactor::cyclic(s_),
            quotient: LocalFactor::cyclic(m_),
        },
    }
}

pub fn periodic_envelope(delta_star: &StdRep, m: &Supernatural) -> PeriodicEnvelope {
    let mut primes = delta_star.support();
    primes.extend(m.support());
    let rows_at = |col: Vec<Exp>, mp: Exp| -> Vec<EnvelopeRow> { col.into_iter().map(|s| envelope_row(s, mp)).collect() };
    let mut per_prime = BTreeMap::new();
    let mut quotient = FormalSum::default();
    let nonzero =
        |rows: &[EnvelopeRow]| -> Vec<LocalFactor> { rows.iter().map(|r| r.quotient).filter(|q| *q != LocalFactor::Zero).collect() };
    for p in primes {
        let rows = rows_at(delta_star.column(p), m.at(p));
        quotient.per_prime.insert(p, nonzero(&rows));
        per_prime.insert(p, rows);
    }
    let generic = rows_at(delta_star.default_column(), m.default_exp());
    quotient.generic = nonzero(&generic);
    PeriodicEnvelope {
        per_prime,
        generic,
        m: m.clone(),
        quotient,
    }
}

pub const SUBGROUP_BOUND_LIMIT: u64 = 1024;
const PART_SIZE_LIMIT: u64 = 1 << 16;
const SUBGROUP_COUNT_LIMIT: usize = 20_000;

/// Subgroups of a truncated D/C with their (proper, covering) containments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupLattice {
    pub subgroups: Vec<FiniteAbelian>,
    pub orders: Vec<u64>,
    /// Pairs (i, j) with subgroup i maximal inside subgroup j.
    pub covers: Vec<(usize, usize)>,
}

fn bound_err(what: &'static str, value: impl ToString, limit: impl ToString) -> Error {
    Error::Bound {
        what,
        value: value.to_string(),
        limit: limit.to_string(),
    }
}

/// Subgroups of ⊕ Z/p^{a_i}, each as a sorted list of encoded elements.
fn p_part_subgroups(p: u64, exps: &[u32], bound: u64) -> Result<Vec<Vec<u64>>> {
    let mods: Vec<u64> = exps.iter().map(|&a| p.pow(a)).collect();
    let size: u64 = mods.iter().product();
    if size > PART_SIZE_LIMIT {
        return Err(bound_err("p-part size", size, PART_SIZE_LIMIT));
    }
    let decode = |mut x: u64| -> Vec<u64> {
        mods.iter()
            .map(|&m| {
                let r = x % m;
                x /= m;
                r
            })
            .collect()
    };
    let encode = |v: &[u64]| -> u64 {
        let mut x = 0;
        for (i, &m) in mods.iter().enumerate().rev() {
            x = x * m + v[i];
        }
        x
    };
    let add = |a: u64, b: u64| -> u64 {
        let (va, vb) = (decode(a), decode(b));
        let s: Vec<u64> = va.iter().zip(&vb).zip(&mods).map(|((x, y), m)| (x + y) % m).collect();
        encode(&s)
    };
    let close = |h: &[u64], g: u64| -> Vec<u64> {
        let mut set: BTreeSet<u64> = h.iter().copied().collect();
        let mut frontier: Vec<u64> = set.iter().copied().collect();
        // the group generated by h and g: repeatedly add g until closure
        loop {
            let mut added = Vec::new();
            for &x in &frontier {
                let y = add(x, g);
                if set.insert(y) {
                    added.push(y);
                }
            }
            if added.is_empty() {
                break;
            }
            frontier = added;
        }
        set.into_iter().collect()
    };
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut queue = vec![vec![0u64]];
    seen.insert(vec![0]);
    while let Some(h) = queue.pop() {
        for g in 0..size {
            if h.binary_search(&g).is_ok() {
                continue;
            }
            let h2 = close(&h, g);
            if (h2.len() as u64) <= bound && seen.insert(h2.clone()) {
                if seen.len() > SUBGROUP_COUNT_LIMIT {
                    return Err(bound_err("subgroup count", seen.len(), SUBGROUP_COUNT_LIMIT));
                }
                queue.push(h2);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

fn p_type(p: u64, exps: &[u32], elems: &[u64]) -> FiniteAbelian {
    let mods: Vec<u64> = exps.iter().map(|&a| p.pow(a)).collect();
    let order_exp = |mut x: u64| -> u32 {
        let mut e = 0;
        for &m in &mods {
            let mut r = x % m;
            x /= m;
            let mut k = 0;
            while r != 0 {
                r = (r * p) % m;
                k += 1;
            }
            e = e.max(k);
        }
        e
    };
    // |H[p^j]| = p^{c_j}; factors with exponent ≥ j number c_j − c_{j−1}.
    let max_e = exps.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0u32; max_e as usize + 1];
    for &x in elems {
        counts[order_exp(x) as usize] += 1;
    }
    let mut c = vec![0u32; max_e as usize + 1];
    let mut cum = 0u64;
    for j in 0..=max_e as usize {
        cum += counts[j] as u64;
        let mut lg = 0;
        let mut t = cum;
        while t > 1 {
            t /= p;
            lg += 1;
        }
        c[j] = lg;
    }
    let mut factors = Vec::new();
    for j in 1..=max_e as usize {
        let ge_j = c[j] - c[j - 1];
        let ge_next = if j < max_e as usize { c[j + 1] - c[j] } else { 0 };
        for _ in 0..(ge_j - ge_next) {
            factors.push((p, j as u32));
        }
    }
    FiniteAbelian::new(factors)
}

/// Subgroups of order ≤ bound of the formal sum D/C, with containments.
/// Prüfer summands are truncated at exponent ⌊log_p bound⌋.
pub fn finite_subgroups(quotient: &FormalSum, bound: u64) -> Result<SubgroupLattice> {
    if bound == 0 || bound > SUBGROUP_BOUND_LIMIT {
        return Err(bound_err("subgroup order bound", bound, SUBGROUP_BOUND_LIMIT));
    }
    let mut parts: Vec<(u64, Vec<u32>)> = Vec::new();
    for p in (2..=bound).filter(|&p| is_prime(p)) {
        let mut k = 0;
        while p.pow(k + 1) <= bound {
            k += 1;
        }
        let exps: Vec<u32> = quotient
            .at(p)
            .iter()
            .filter_map(|t| match t {
                LocalFactor::Prufer => Some(k),
                LocalFactor::Cyclic(a) => Some((*a).min(k)),
                _ => None,
            })
            .filter(|&a| a > 0)
            .collect();
        if !exps.is_empty() {
            parts.push((p, exps));
        }
    }
    // (type, order, per-part subgroup index) for each combination
    let mut combos: Vec<(Vec<Option<usize>>, u64)> = vec![(Vec::new(), 1)];
    let mut part_subs = Vec::new();
    for (i, (p, exps)) in parts.iter().enumerate() {
        let subs = p_part_subgroups(*p, exps, bound)?;
        let mut next = Vec::new();
        for (choice, ord) in &combos {
            for (j, h) in subs.iter().enumerate() {
                let o = ord * h.len() as u64;
                if o <= bound {
                    let mut c = choice.clone();
                    c.resize(i, None);
                    c.push(Some(j));
                    next.push((c, o));
                }
            }
        }
        if next.len() > SUBGROUP_COUNT_LIMIT {
            return Err(bound_err("subgroup count", next.len(), SUBGROUP_COUNT_LIMIT));
        }
        combos = next;
        part_subs.push(subs);
    }
    let types: Vec<FiniteAbelian> = combos
        .iter()
        .map(|(choice, _)| {
            choice.iter().enumerate().fold(FiniteAbelian::trivial(), |acc, (i, j)| {
                let (p, exps) = &parts[i];
                acc.direct_sum(&p_type(*p, exps, &part_subs[i][j.unwrap()]))
            })
        })
        .collect();
    let sub_of = |a: &[Option<usize>], b: &[Option<usize>]| -> bool {
        a.iter().zip(b).enumerate().all(|(i, (x, y))| {
            let (hx, hy) = (&part_subs[i][x.unwrap()], &part_subs[i][y.unwrap()]);
            hx.iter().all(|e| hy.binary_search(e).is_ok())
        })
    };
    let mut idx: Vec<usize> = (0..combos.len()).collect();
    idx.sort_by(|&a, &b| combos[a].1.cmp(&combos[b].1).then_with(|| combos[a].0.cmp(&combos[b].0)));
    let subgroups: Vec<FiniteAbelian> = idx.iter().map(|&i| types[i].clone()).collect();
    let orders: Vec<u64> = idx.iter().map(|&i| combos[i].1).collect();
    let mut covers = Vec::new();
    for (a, &ia) in idx.iter().enumerate() {
        for (b, &ib) in idx.iter().enumerate() {
            if orders[a] >= orders[b] || orders[b] % orders[a] != 0 || !sub_of(&combos[ia].0, &combos[ib].0) {
                continue;
            }
            // maximal: no c strictly between
            let between = idx.iter().enumerate().any(|(c, &ic)| {
                orders[c] > orders[a]
                    && orders[c] < orders[b]
                    && sub_of(&combos[ia].0, &combos[ic].0)
                    && sub_of(&combos[ic].0, &combos[ib].0)
            });
            if !between {
                covers.push((a, b));
            }
        }
    }
    Ok(SubgroupLattice { subgroups, orders, covers })
}

/// Factor of a completely factorable protorus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorDescriptor {
    /// T with the marked finite subgroup (1/r)Z/Z.
    Circle { order: Int },
    /// (Δ(n) × R)/Z(1,1) for the supernatural row n.
    Solenoid { row: Supernatural },
}

impl fmt::Display for FactorDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorDescriptor::Circle { order } => write!(f, "circle T with subgroup (1/{order})Z/Z"),
            FactorDescriptor::Solenoid { row } => write!(f, "solenoid (Z^({row}) x R)/Z(1,1)"),
        }
    }
}

pub fn factorable_construction(s: &StdRep) -> Vec<FactorDescriptor> {
    s.rows()
        .iter()
        .map(|row| match row.to_integer() {
            Some(order) => FactorDescriptor::Circle { order },
            None => FactorDescriptor::Solenoid { row: row.clone() },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcdReport {
    pub flag: bool,
    /// dim = dim_nA for the whole group, not just the reduced part.
    pub full_width: bool,
    pub witness: Vec<FactorDescriptor>,
}

/// Sufficient test for the dual being almost completely decomposable:
/// the reduced part has dim = dim_nA.
pub fn acd_flag(g: &ProtorusDescriptor) -> AcdReport {
    let red_dim = g.split.reduced.rank();
    let flag = red_dim == dim_na(&g.reduced_delta_star);
    let witness = if flag {
        // multiplying by the product of the finite parts leaves the infinite
        // rows, reduced to their types
        let rows: Vec<Supernatural> = g
            .reduced_delta_star
            .rows()
            .iter()
            .filter(|r| r.is_infinite())
            .map(|r| r.type_class().representative().clone())
            .collect();
        factorable_construction(&std_rep(&rows))
    } else {
        Vec::new()
    };
    AcdReport {
        flag,
        full_width: g.dim == g.dim_na,
        witness,
    }
}

/// (X ∩ p^{-N}·F)/F for a lattice F ⊆ X, with invariant-factor generators.
#[derive(Debug, Clone)]
pub struct TorsionLayer {
    pub p: u64,
    pub depth: u32,
    pub base: Lattice,
    pub lattice: Lattice,
    /// Generators g_i (rows) of the cyclic factors, with orders p^{exps[i]}.
    pub gens: Matrix,
    pub exps: Vec<u32>,
    /// x ∈ lattice has invariant coordinates x · coord_map.
    coord_map: Matrix,
}

impl TorsionLayer {
    pub fn order(&self) -> Int {
        pow_int(self.p, self.exps.iter().sum())
    }

    pub fn group(&self) -> FiniteAbelian {
        FiniteAbelian::new(self.exps.iter().map(|&e| (self.p, e)))
    }

    /// Invariant coordinates of a lattice vector, reduced mod the orders.
    pub fn coordinates(&self, x: &[Rat]) -> Option<Vec<Int>> {
        let c = self.lattice.coordinates(x).ok()?;
        if !arith::is_integral(&c) {
            return None;
        }
        let y = arith::vec_mat(&c, &self.coord_map, self.exps.len());
        Some(
            y.iter()
                .zip(&self.exps)
                .map(|(q, &e)| q.to_integer().mod_floor(&pow_int(self.p, e)))
                .collect(),
        )
    }

    /// Representative in the lattice of the element with coordinates c.
    pub fn element(&self, c: &[Int]) -> Vector {
        let mut out = vec![Rat::zero(); self.lattice.rank()];
        for (g, k) in self.gens.iter().zip(c) {
            out = arith::add(&out, &arith::scale(g, &Rat::from_integer(k.clone())));
        }
        out
    }
}

/// Builds the p^N-torsion layer of X/F.
pub fn torsion_layer(x: &GroupDescription, base: &Lattice, p: u64, depth: u32) -> Result<TorsionLayer> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let n = x.rank();
    let sp = splitting(x, p)?;
    let mut gens: Vec<Vector> = (0..n).map(|k| unit_vector(n, k)).collect();
    let mut top = depth as i64;
    for d in x.directives() {
        if let Exp::Fin(t) = d.s.at(p) {
            let g = arith::scale(&d.v, &pow_rat(p, -(t as i64)));
            let h = arith::valuation(&lcm_denominators(&g), p) as i64;
            top = top.max(h);
            gens.push(g);
        }
    }
    // D_p ∩ Z^n, scaled deep enough to reach every p^{-N} class
    let dp = arith::saturated_completion(&sp.divisible_subspace, n);
    for b in dp.iter().take(sp.divisible_dim()) {
        gens.push(arith::scale(b, &pow_rat(p, -top)));
    }
    let m = hnf_basis(&gens, n)?;
    let deep = base.scaled(&pow_rat(p, -(depth as i64)))?;
    let lattice = lattice_meet(&m, &deep)?;
    let c: Vec<Vec<Int>> = base
        .basis()
        .iter()
        .map(|row| lattice.coordinates(row).map(|v| v.iter().map(|q| q.to_integer()).collect()))
        .collect::<Result<_>>()?;
    let smith = smith_normal_form(&c, n);
    let to_rat = |m: &Vec<Vec<Int>>| -> Matrix { m.iter().map(|r| r.iter().map(|x| Rat::from_integer(x.clone())).collect()).collect() };
    let v = to_rat(&smith.v);
    let vinv = to_rat(&smith.v_inv);
    let all_gens = arith::mat_mul(&vinv, lattice.basis(), n);
    let mut keep = Vec::new();
    let mut exps = Vec::new();
    for (i, d) in smith.diag.iter().enumerate() {
        if !d.is_one() {
            keep.push(i);
            exps.push(arith::valuation(d, p));
        }
    }
    let gens_kept: Matrix = keep.iter().map(|&i| all_gens[i].clone()).collect();
    let coord_map: Matrix = v.iter().map(|row| keep.iter().map(|&i| row[i].clone()).collect()).collect();
    Ok(TorsionLayer {
        p,
        depth,
        base: base.clone(),
        lattice,
        gens: gens_kept,
        exps,
        coord_map,
    })
}

/// Orders of kernel, image and cokernel of an integer map between finite
/// abelian groups given in invariant coordinates.
fn map_orders(block: &[Vec<Int>], src: &TorsionLayer, dst: &TorsionLayer) -> (Int, Int, Int) {
    let rows = dst.exps.len();
    // relations of the cokernel: dst orders plus the image columns
    let mut rel: Vec<Vec<Int>> = Vec::new();
    for (j, &e) in dst.exps.iter().enumerate() {
        let mut r = vec![Int::zero(); rows];
        r[j] = pow_int(dst.p, e);
        rel.push(r);
    }
    for i in 0..src.exps.len() {
        rel.push((0..rows).map(|j| block[j][i].clone()).collect());
    }
    let coker: Int = if rows == 0 {
        Int::one()
    } else {
        smith_normal_form(&rel, rows).diag.iter().product()
    };
    let im = dst.order() / &coker;
    let ker = src.order() / &im;
    (ker, im, coker)
}

pub const ELEMENTWISE_LIMIT: u64 = 1 << 12;

#[derive(Debug, Clone)]
pub struct LiftReport {
    pub real_block: Matrix,
    /// {x ∈ Z^n : A·x ∈ Z^m}; equals Z^n for integer A.
    pub source_lattice: Lattice,
    pub p: u64,
    pub depth: u32,
    pub source: FiniteAbelian,
    pub target: FiniteAbelian,
    /// Integer matrix of the profinite block in invariant coordinates.
    pub block: Vec<Vec<Int>>,
    pub kernel_order: Int,
    pub image_order: Int,
    pub cokernel_order: Int,
    /// Every generator image lies in the codomain's truncated block.
    pub image_in_target: bool,
    pub certificate: bool,
    pub checked_elements: u64,
    pub elementwise: bool,
    pub failure: Option<String>,
}

/// Real-linear block, truncated profinite block and a commuting-square
/// certificate for a valid A: X → Y.
pub fn lift_morphism(a: &Matrix, x: &GroupDescription, y: &GroupDescription, p: u64, depth: u32) -> Result<LiftReport> {
    if depth == 0 || depth > DEFAULT_DEPTH_BOUND {
        return Err(bound_err("truncation depth", depth, DEFAULT_DEPTH_BOUND));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if let Some(w) = hom_check_witness(a, x, y)? {
        return Err(Error::NotHomomorphism(format!(
            "{} lies in X but A·{} = {} is not in Y",
            fmt_vec(&w),
            fmt_vec(&w),
            fmt_vec(&mat_vec(a, &w))
        )));
    }
    let n = x.rank();
    let m = y.rank();
    let mut g: Vec<Vector> = (0..n).map(|k| unit_vector(n, k)).collect();
    g.extend(a.iter().cloned());
    let source_lattice = hnf_basis(&g, n)?.dual();
    let src = torsion_layer(x, &source_lattice, p, depth)?;
    let dst = torsion_layer(y, &Lattice::standard(m), p, depth)?;
    let limit = Int::from(crate::oracle::ELEMENT_CEILING);
    for layer in [&src, &dst] {
        if layer.order() > limit {
            return Err(bound_err("truncated group order", layer.order(), crate::oracle::ELEMENT_CEILING));
        }
    }
    let mut block = vec![vec![Int::zero(); src.exps.len()]; dst.exps.len()];
    let mut image_in_target = true;
    for (i, gi) in src.gens.iter().enumerate() {
        let img = mat_vec(a, gi);
        match dst.coordinates(&img) {
            Some(c) => {
                for (j, cj) in c.into_iter().enumerate() {
                    block[j][i] = cj;
                }
            }
            None => image_in_target = false,
        }
        image_in_target &= member(y, &img)?;
    }
    let (kernel_order, image_order, cokernel_order) = map_orders(&block, &src, &dst);

    // Two routes around the square: the rational image A·x reduced in Y/Z^m,
    // against the block applied to coordinates.
    let route_block = |c: &[Int]| -> Vector {
        let d: Vec<Int> = (0..dst.exps.len())
            .map(|j| {
                let s: Int = block[j].iter().zip(c).map(|(b, x)| b * x).sum();
                s.mod_floor(&pow_int(p, dst.exps[j]))
            })
            .collect();
        dst.element(&d)
    };
    let agrees = |c: &[Int]| -> Result<bool> {
        let x_el = src.element(c);
        let ax = mat_vec(a, &x_el);
        let diff = arith::sub(&ax, &route_block(c));
        Ok(member(y, &ax)? && arith::is_integral(&diff))
    };
    let total = src.order().to_u64().unwrap_or(u64::MAX);
    let elementwise = total <= ELEMENTWISE_LIMIT;
    let mut checked = 0u64;
    let mut failure = None;
    let mut test_coords: Vec<Vec<Int>> = Vec::new();
    if elementwise {
        let mut c = vec![Int::zero(); src.exps.len()];
        loop {
            test_coords.push(c.clone());
            let mut i = 0;
            while i < c.len() {
                c[i] += 1;
                if c[i] < pow_int(p, src.exps[i]) {
                    break;
                }
                c[i] = Int::zero();
                i += 1;
            }
            if i == c.len() {
                break;
            }
        }
    } else {
        // a homomorphism is fixed by the generators; sums check additivity
        let k = src.exps.len();
        for i in 0..k {
            let mut c = vec![Int::zero(); k];
            c[i] = Int::one();
            test_coords.push(c.clone());
            for j in i + 1..k {
                let mut d = c.clone();
                d[j] = Int::one();
                test_coords.push(d);
            }
        }
    }
    for c in &test_coords {
        checked += 1;
        if !agrees(c)? {
            failure = Some(format!("element {}", fmt_vec(&src.element(c))));
            break;
        }
    }
    Ok(LiftReport {
        real_block: a.clone(),
        source_lattice,
        p,
        depth,
        source: src.group(),
        target: dst.group(),
        block,
        kernel_order,
        image_order,
        cokernel_order,
        image_in_target,
        certificate: failure.is_none(),
        checked_elements: checked,
        elementwise,
        failure,
    })
}

/// Primes worth reporting for a description: its special primes, or 2 when
/// there are none.
pub fn report_primes(x: &GroupDescription) -> Vec<u64> {
    let s: Vec<u64> = x.special_primes().iter().copied().collect();
    if s.is_empty() {
        vec![2]
    } else {
        s
    }
}

/// Prime factors of an integer, for witnesses.
pub fn factor_list(k: &Int) -> Result<Vec<u64>> {
    if k.is_zero() {
        return Ok(Vec::new());
    }
    prime_divisors(&k.abs(), arith::DEFAULT_PRIME_BOUND)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ivec;
    use crate::tfgroup::{parse_group, same_group};

    fn g(text: &str) -> GroupDescription {
        parse_group(text).unwrap()
    }

    fn sn(s: &str) -> Supernatural {
        s.parse().unwrap()
    }

    #[test]
    fn descriptors() {
        let d = from_dual(&g("rank 1; dir v=(1) s=2^inf")).unwrap();
        assert_eq!((d.dim, d.dim_na, d.width_na), (1, 1, 1));
        assert_eq!(d.delta_star.rows(), &[sn("2^inf")]);
        assert_eq!((d.split.r, d.split.k), (0, 0));
        let t = from_dual(&g("rank 2")).unwrap();
        assert_eq!(t.delta_star.m(), 0);
        assert_eq!((t.split.r, t.split.k), (2, 0));
        let q = from_dual(&g("rank 1; dir v=(1) s=default inf")).unwrap();
        assert_eq!((q.split.r, q.split.k, q.split.reduced.rank()), (0, 1, 0));
        assert!(d.chain_holds() && t.chain_holds() && q.chain_holds());
    }

    #[test]
    fn hull_examples() {
        let z = g("rank 1");
        for mode in [HullMode::Inf, HullMode::FinInf] {
            for scope in [LineScope::Directives, LineScope::Saturated] {
                assert_eq!(qd_hull(&z, mode, scope).unwrap(), z);
                let quarter = qd_hull(&g("rank 1; dir v=(1/2) s=1"), mode, scope).unwrap();
                assert!(same_group(&quarter, &g("rank 1; dir v=(1) s=2^inf")).unwrap());
                let sixth = g("rank 1; dir v=(1) s=2^inf * 3^inf");
                assert_eq!(qd_hull(&sixth, mode, scope).unwrap(), sixth);
            }
        }
    }

    #[test]
    fn hull_scopes_differ_on_half_diagonal() {
        let x = g("rank 2; dir v=(1/2,1/2) s=1");
        let dir = qd_hull(&x, HullMode::Inf, LineScope::Directives).unwrap();
        let sat = qd_hull(&x, HullMode::Inf, LineScope::Saturated).unwrap();
        assert!(same_group(&dir, &g("rank 2; dir v=(1,1) s=2^inf")).unwrap());
        assert!(same_group(&sat, &g("rank 2; dir v=(1,0) s=2^inf; dir v=(0,1) s=2^inf")).unwrap());
        assert!(contained(&dir, &sat).unwrap() && !contained(&sat, &dir).unwrap());
        assert_eq!(qd_hull(&dir, HullMode::Inf, LineScope::Directives).unwrap(), dir);
        assert_eq!(qd_hull(&sat, HullMode::Inf, LineScope::Saturated).unwrap(), sat);
    }

    #[test]
    fn resolution_examples() {
        let h = universal_resolution(&from_dual(&g("rank 1; dir v=(1) s=2^inf")).unwrap()).unwrap();
        assert_eq!(h.at(2), (1, 0));
        assert_eq!(h.at(3), (0, 0));
        // Δ* ≅ Z(4); X∞ = Z[1/2]
        let h = universal_resolution(&from_dual(&g("rank 1; dir v=(1/4) s=1")).unwrap()).unwrap();
        assert_eq!(h.at(2), (0, 1));
        assert!(h.activated_zero_rows.is_empty());
        assert!(matches!(
            universal_resolution(&from_dual(&g("rank 2")).unwrap()),
            Err(Error::TorusFactor(2))
        ));
        let t = torsion_part(&h);
        assert_eq!(t.at(2), &[LocalFactor::Prufer]);
        assert!(t.at(3).is_empty());
    }

    #[test]
    fn torsion_examples() {
        let h = HullExponents {
            per_prime: BTreeMap::from([(2, (1, 1)), (3, (0, 2))]),
            generic: (0, 0),
            activated_zero_rows: BTreeMap::new(),
            generic_activated_zero_rows: 0,
        };
        assert_eq!(torsion_part(&h).to_string(), "Z(2^inf) + Z(3^inf) + Z(3^inf)");
        let free = HullExponents {
            per_prime: BTreeMap::from([(2, (1, 0))]),
            ..h
        };
        assert!(torsion_part(&free).is_zero());
    }

    #[test]
    fn envelope_case_table() {
        let r = envelope_row(Exp::Inf, Exp::Fin(3));
        assert_eq!((r.d, r.c), (LocalFactor::QHat, LocalFactor::ZHat));
        let r = envelope_row(Exp::Fin(1), Exp::Inf);
        assert_eq!(
            (r.d, r.c, r.quotient),
            (LocalFactor::Prufer, LocalFactor::Cyclic(1), LocalFactor::Prufer)
        );
        let r = envelope_row(Exp::Fin(1), Exp::Fin(2));
        assert_eq!(
            (r.d, r.c, r.quotient),
            (LocalFactor::Cyclic(3), LocalFactor::Cyclic(1), LocalFactor::Cyclic(2))
        );
        let s = std_rep(&[sn("2^inf")]);
        let e = periodic_envelope(&s, &sn("2^inf"));
        assert_eq!(e.per_prime[&2][0].d, LocalFactor::QHat);
        assert_eq!(e.quotient.at(2), &[LocalFactor::Prufer]);
        assert!(e.quotient.generic.is_empty());
    }

    #[test]
    fn subgroup_examples() {
        let prufer = FormalSum {
            per_prime: BTreeMap::from([(2, vec![LocalFactor::Prufer])]),
            generic: vec![],
        };
        let l = finite_subgroups(&prufer, 4).unwrap();
        assert_eq!(l.orders, vec![1, 2, 4]);
        assert_eq!(l.covers, vec![(0, 1), (1, 2)]);
        let klein = FormalSum {
            per_prime: BTreeMap::from([(2, vec![LocalFactor::Cyclic(1), LocalFactor::Cyclic(1)])]),
            generic: vec![],
        };
        let l = finite_subgroups(&klein, 4).unwrap();
        assert_eq!(l.subgroups.len(), 5);
        assert_eq!(l.orders, vec![1, 2, 2, 2, 4]);
        assert_eq!(l.covers.len(), 6);
        let zero = finite_subgroups(&FormalSum::default(), 4).unwrap();
        assert_eq!(zero.subgroups, vec![FiniteAbelian::trivial()]);
        assert!(finite_subgroups(&prufer, 5000).is_err());
        let mixed = FormalSum {
            per_prime: BTreeMap::from([(2, vec![LocalFactor::Cyclic(1)]), (3, vec![LocalFactor::Prufer])]),
            generic: vec![],
        };
        // 1, 2, 3, 6, 9, 18 ≤ 20
        assert_eq!(finite_subgroups(&mixed, 20).unwrap().orders, vec![1, 2, 3, 6, 9, 18]);
    }

    #[test]
    fn factorable_examples() {
        let s = std_rep(&[sn("2^inf")]);
        assert_eq!(factorable_construction(&s), vec![FactorDescriptor::Solenoid { row: sn("2^inf") }]);
        let c = std_rep(&[sn("2^2")]);
        assert_eq!(factorable_construction(&c), vec![FactorDescriptor::Circle { order: Int::from(4) }]);
        assert!(factorable_construction(&StdRep::empty()).is_empty());
    }

    #[test]
    fn acd_examples() {
        let a = acd_flag(&from_dual(&g("rank 1; dir v=(1) s=2^inf")).unwrap());
        assert!(a.flag && a.full_width);
        assert_eq!(a.witness.len(), 1);
        assert!(acd_flag(&from_dual(&g("rank 3")).unwrap()).flag);
        let d = from_dual(&g("rank 2; dir v=(1,1) s=2^inf")).unwrap();
        assert_eq!(d.delta_star.m(), 1);
        let a = acd_flag(&d);
        assert!(a.flag && !a.full_width);
    }

    #[test]
    fn lift_examples() {
        let z2 = g("rank 1; dir v=(1) s=2^inf");
        let id = lift_morphism(&vec![ivec(&[1])], &z2, &z2, 2, 4).unwrap();
        assert_eq!(id.source, FiniteAbelian::new([(2, 4)]));
        assert_eq!((id.kernel_order.clone(), id.cokernel_order.clone()), (Int::one(), Int::one()));
        assert!(id.certificate && id.elementwise);
        let two = lift_morphism(&vec![ivec(&[2])], &z2, &z2, 2, 4).unwrap();
        assert_eq!((two.kernel_order.clone(), two.cokernel_order.clone()), (Int::from(2), Int::from(2)));
        assert_eq!(two.block, vec![vec![Int::from(2)]]);
        assert!(two.certificate);
        let zero = lift_morphism(&vec![ivec(&[0])], &z2, &z2, 2, 4).unwrap();
        assert_eq!(zero.cokernel_order, Int::from(16));
        assert!(zero.certificate);
        let half = lift_morphism(&vec![vec![crate::arith::frac(1, 2)]], &z2, &z2, 2, 3).unwrap();
        assert!(half.certificate);
        assert_eq!(half.source_lattice.basis(), &vec![ivec(&[2])]);
        let z = g("rank 1");
        assert!(matches!(
            lift_morphism(&vec![ivec(&[1])], &z2, &z, 2, 4),
            Err(Error::NotHomomorphism(_))
        ));
        assert!(lift_morphism(&vec![ivec(&[1])], &z2, &z2, 2, 13).is_err());
    }
}
