use std::collections::BTreeSet;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use protori::arith::{self, fmt_matrix, fmt_vec, Matrix};
use protori::oracle::{
    check_depth, clamp_depth, instance_hash, oracle_divisible, oracle_exactness, oracle_height, oracle_lattice_laws, oracle_member,
    quotient_agrees, random_candidate, CheckLine, OracleHeight, ELEMENT_CEILING,
};
use protori::profinite::{dim_na, profinite_isogenous, width_na};
use protori::protorus::{
    acd_flag, from_dual, lift_morphism, periodic_envelope, qd_hull, report_primes, torsion_part, universal_resolution, HullMode, LineScope,
    ProtorusDescriptor,
};
use protori::tfgroup::{locally_nontrivial, member, p_height, rank1_isomorphic, scaling_into, splitting, tau_sup_sequence};
use protori::{Error, Exp, GroupDescription, Result};

use crate::report::{obj, Report};

/// A finished report. `Failed` means one of its checks failed.
pub enum Outcome {
    Ok(Report),
    Failed(Report),
}

fn group_line(x: &GroupDescription) -> String {
    x.to_string()
}

fn pair(rs: (usize, usize)) -> Value {
    json!([rs.0, rs.1])
}

fn descriptor_section(r: &mut Report, d: &ProtorusDescriptor) {
    r.put("dim", d.dim);
    r.put("dim_nA", d.dim_na);
    r.put("width_nA", d.width_na);
    r.put("chain", d.chain_holds());
    r.put(
        "split",
        obj([
            ("r", json!(d.split.r)),
            ("k", json!(d.split.k)),
            ("reduced", json!(group_line(&d.split.reduced))),
        ]),
    );
    let rows: Vec<Value> = d.delta_star.rows().iter().map(|s| json!(format!("{{{s}}}"))).collect();
    r.put("delta_star", rows);
}

pub fn analyze(x: &GroupDescription) -> Result<Outcome> {
    let d = from_dual(x)?;
    let mut r = Report::new("analyze", 0);
    r.put("group", group_line(x));
    descriptor_section(&mut r, &d);
    let acd = acd_flag(&d);
    r.put(
        "flags",
        obj([
            ("torus_free", json!(d.torus_free())),
            ("acd", json!(acd.flag)),
            ("full_width", json!(acd.full_width)),
        ]),
    );
    if !d.torus_free() {
        let note = format!("skipped: torus factor present (r = {})", d.split.r);
        r.put("hull", note.clone());
        r.put("envelope", note);
        return Ok(Outcome::Ok(r));
    }
    let h = universal_resolution(&d)?;
    let mut hull: Vec<(String, Value)> = h.per_prime.iter().map(|(p, rs)| (p.to_string(), pair(*rs))).collect();
    hull.push(("generic".into(), pair(h.generic)));
    r.put("hull", obj(hull));
    if !h.activated_zero_rows.is_empty() || h.generic_activated_zero_rows > 0 {
        let mut act: Vec<(String, Value)> = h.activated_zero_rows.iter().map(|(p, k)| (p.to_string(), json!(k))).collect();
        act.push(("generic".into(), json!(h.generic_activated_zero_rows)));
        r.put("activated_zero_rows", obj(act));
    }
    r.put("torsion", torsion_part(&h).to_string());
    let m = tau_sup_sequence(x)?;
    let env = periodic_envelope(&d.delta_star, &m);
    let render_rows = |p: Option<u64>, rows: &[protori::protorus::EnvelopeRow]| -> Value {
        rows.iter()
            .map(|e| {
                json!(format!(
                    "s={} D={} C={} D/C={}",
                    e.s,
                    e.d.render(p),
                    e.c.render(p),
                    e.quotient.render(p)
                ))
            })
            .collect()
    };
    let mut table: Vec<(String, Value)> = env
        .per_prime
        .iter()
        .map(|(p, rows)| (p.to_string(), render_rows(Some(*p), rows)))
        .collect();
    table.push(("generic".into(), render_rows(None, &env.generic)));
    r.put(
        "envelope",
        obj([
            ("m", json!(m.to_string())),
            ("rows", obj(table)),
            ("quotient", json!(env.quotient.to_string())),
        ]),
    );
    if acd.flag {
        r.put("acd_witness", acd.witness.iter().map(|f| json!(f.to_string())).collect::<Vec<_>>());
    }
    Ok(Outcome::Ok(r))
}

pub fn isogeny(a: &GroupDescription, b: &GroupDescription) -> Result<Outcome> {
    if a.rank() != b.rank() {
        return Err(Error::Dimension {
            expected: a.rank(),
            got: b.rank(),
        });
    }
    let mut r = Report::new("isogeny", 0);
    r.put("a", group_line(a));
    r.put("b", group_line(b));
    let ab = scaling_into(a, b)?;
    let ba = scaling_into(b, a)?;
    let show = |k: &Option<arith::Int>| k.as_ref().map_or(json!("none"), |k| json!(k.to_string()));
    r.put("scaling_a_into_b", show(&ab));
    r.put("scaling_b_into_a", show(&ba));
    let (da, db) = (from_dual(a)?, from_dual(b)?);
    let prof = profinite_isogenous(&da.delta_star, &db.delta_star);
    r.put("delta_star_isogenous", prof);
    r.put("dim_nA", json!([dim_na(&da.delta_star), dim_na(&db.delta_star)]));
    let verdict = if a.rank() == 1 {
        r.put("criterion", "type equality");
        if rank1_isomorphic(a, b)? {
            "isogenous"
        } else {
            "not isogenous"
        }
    } else {
        r.put("criterion", "scaling witnesses and delta_star");
        if ab.is_some() && ba.is_some() {
            "isogenous"
        } else if !prof || width_na(&da.delta_star) != width_na(&db.delta_star) {
            "not isogenous"
        } else {
            "undetermined"
        }
    };
    r.put("verdict", verdict);
    Ok(Outcome::Ok(r))
}

fn divisible_dims(x: &GroupDescription, primes: &BTreeSet<u64>) -> Result<Vec<(String, Value)>> {
    primes
        .iter()
        .map(|&p| Ok((p.to_string(), json!(splitting(x, p)?.divisible_dim()))))
        .collect()
}

pub fn hull(x: &GroupDescription, mode: HullMode, scope: LineScope) -> Result<Outcome> {
    let h = qd_hull(x, mode, scope)?;
    let mut r = Report::new("hull", 0);
    r.put("group", group_line(x));
    r.put("mode", mode.to_string());
    r.put("scope", scope.to_string());
    r.put("hull", group_line(&h));
    r.put("changed", h != *x);
    let mut primes: BTreeSet<u64> = x.special_primes().clone();
    primes.extend(h.special_primes());
    r.put("divisible_dim_before", obj(divisible_dims(x, &primes)?));
    r.put("divisible_dim_after", obj(divisible_dims(&h, &primes)?));
    let other = match scope {
        LineScope::Directives => LineScope::Saturated,
        LineScope::Saturated => LineScope::Directives,
    };
    let h2 = qd_hull(x, mode, other)?;
    if !protori::tfgroup::same_group(&h, &h2)? {
        r.put(
            "alternate",
            obj([("scope", json!(other.to_string())), ("hull", json!(group_line(&h2)))]),
        );
    }
    Ok(Outcome::Ok(r))
}

pub fn lift(a: &Matrix, x: &GroupDescription, y: &GroupDescription, p: u64, depth: u32) -> Result<Outcome> {
    let l = lift_morphism(a, x, y, p, depth)?;
    let mut r = Report::new("lift", 0);
    r.put("source_group", group_line(x));
    r.put("target_group", group_line(y));
    r.put("real_block", fmt_matrix(&l.real_block));
    r.put("source_lattice", l.source_lattice.to_string());
    r.put("prime", p);
    r.put("depth", depth);
    r.put("source", l.source.to_string());
    r.put("target", l.target.to_string());
    let block: Vec<String> = l
        .block
        .iter()
        .map(|row| row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
        .collect();
    r.put("profinite_block", json!(block));
    r.put("kernel_order", l.kernel_order.to_string());
    r.put("image_order", l.image_order.to_string());
    r.put("cokernel_order", l.cokernel_order.to_string());
    r.put("image_in_target", l.image_in_target);
    r.put(
        "certificate",
        obj([
            ("pass", json!(l.certificate)),
            (
                "mode",
                json!(if l.elementwise {
                    "elementwise"
                } else {
                    "generators and pairwise sums"
                }),
            ),
            ("checked", json!(l.checked_elements)),
            ("failure", l.failure.clone().map_or(Value::Null, Value::from)),
        ]),
    );
    Ok(if l.certificate && l.image_in_target {
        Outcome::Ok(r)
    } else {
        Outcome::Failed(r)
    })
}

struct Battery {
    group_text: String,
    lines: Vec<CheckLine>,
    nontrivial: usize,
}

impl Battery {
    fn push(&mut self, name: &str, key: &str, pass: bool, witness: String, nontrivial: bool) {
        let hash = instance_hash(&[&self.group_text, name, key]);
        self.lines.push(CheckLine {
            name: name.to_string(),
            hash,
            pass,
            witness,
        });
        if nontrivial {
            self.nontrivial += 1;
        }
    }
}

fn height_agrees(sym: Exp, orc: OracleHeight, n: u32) -> bool {
    match (sym, orc) {
        (Exp::Inf, OracleHeight::AtLeast(k)) => k == n,
        (Exp::Fin(h), OracleHeight::Exact(j)) => h == j,
        (Exp::Fin(h), OracleHeight::AtLeast(k)) => h >= k,
        _ => false,
    }
}

/// Runs the oracle battery against the symbolic results for one group.
pub fn verify(x: &GroupDescription, depth: u32, trials: usize, seed: u64) -> Result<Outcome> {
    check_depth(depth)?;
    let d = from_dual(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Battery {
        group_text: x.to_text(),
        lines: Vec::new(),
        nontrivial: 0,
    };
    let mut notes: Vec<Value> = Vec::new();
    let special = !x.special_primes().is_empty();
    let primes = report_primes(x);

    // membership on random candidates near X
    let mut members = Vec::new();
    let mut bad = None;
    for _ in 0..trials {
        let q = random_candidate(&mut rng, x);
        let s = member(x, &q)?;
        if s != oracle_member(x, &q)? && bad.is_none() {
            bad = Some(fmt_vec(&q));
        }
        if s {
            members.push(q);
        }
    }
    b.push(
        "member",
        "candidates",
        bad.is_none(),
        bad.map_or(format!("agree on {trials} candidates"), |q| format!("disagree at {q}")),
        special,
    );

    let mut probes: Vec<Vec<protori::arith::Rat>> = (0..x.rank()).map(|k| arith::unit_vector(x.rank(), k)).collect();
    probes.extend(x.directives().iter().map(|dir| dir.v.clone()));
    probes.extend(members.into_iter().filter(|q| !arith::is_zero_vec(q)).take(8));
    let hull_inf = qd_hull(x, HullMode::Inf, LineScope::Saturated)?;
    let hull_fin = qd_hull(x, HullMode::FinInf, LineScope::Saturated)?;
    for &p in &primes {
        let n = clamp_depth(p, depth, ELEMENT_CEILING);
        if n < depth {
            notes.push(json!(format!("depth clamped to {n} at p={p}")));
        }
        let key = format!("p={p} N={n}");
        let nt = x.special_primes().contains(&p);

        let mut bad = None;
        for z in &probes {
            let sym = p_height(x, p, z)?;
            let orc = oracle_height(x, p, z, n)?;
            if !height_agrees(sym, orc, n) {
                bad = Some(format!("z={} symbolic={sym} oracle={orc}", fmt_vec(z)));
                break;
            }
        }
        b.push(
            "height",
            &key,
            bad.is_none(),
            bad.unwrap_or(format!("{key} probes={}", probes.len())),
            nt,
        );

        let (ok, w) = quotient_agrees(x, &d.delta_star, p, n)?;
        b.push("quotient", &key, ok, format!("{key} {w}"), nt);

        // the exactness enumeration touches p^(N·m) elements
        let m = d.delta_star.m().max(1) as u32;
        let ne = (1..=depth)
            .rev()
            .find(|&k| p.checked_pow(k * m).is_some_and(|v| v <= ELEMENT_CEILING));
        match ne {
            Some(ne) => {
                let e = oracle_exactness(&d.delta_star, p, ne)?;
                b.push(
                    "exactness",
                    &format!("p={p} N={ne}"),
                    e.ok && e.image_is_kernel,
                    format!("p={p} N={ne} |middle|={} |sub|={} |quotient|={}", e.middle, e.sub, e.quotient),
                    nt,
                );
            }
            None => notes.push(json!(format!("exactness skipped at p={p}: truncation exceeds the element ceiling"))),
        }

        for (mode, h) in [(HullMode::Inf, &hull_inf), (HullMode::FinInf, &hull_fin)] {
            let ok = !locally_nontrivial(h, p) || oracle_divisible(h, p, n)?;
            b.push("divisible", &format!("{key} {mode}"), ok, format!("{key} mode={mode} hull={h}"), nt);
        }
    }

    b.push(
        "chain",
        "descriptor",
        d.chain_holds(),
        format!("dim_nA={} width_nA={} dim={}", d.dim_na, d.width_na, d.dim),
        special,
    );
    let ok = d.split.r + d.split.k + d.split.reduced.rank() == d.dim && !d.reduced_delta_star.has_trailing_zero_row();
    b.push(
        "split",
        "descriptor",
        ok,
        format!("r={} k={} reduced rank={}", d.split.r, d.split.k, d.split.reduced.rank()),
        special,
    );
    if d.torus_free() {
        let h = universal_resolution(&d)?;
        let mut bad = None;
        for &p in &primes {
            let (rp, sp) = h.at(p);
            let inf = d.delta_star.column(p).iter().filter(|e| e.is_inf()).count();
            if rp != inf || rp + sp > d.width_na {
                bad = Some(format!("p={p} (r,s)=({rp},{sp}) width={}", d.width_na));
                break;
            }
        }
        b.push(
            "hull_resolution",
            "descriptor",
            bad.is_none(),
            bad.unwrap_or_else(|| "r_p + s_p <= width_nA".into()),
            special,
        );
    } else {
        notes.push(json!(format!("hull_resolution skipped: torus factor present (r = {})", d.split.r)));
    }

    let laws = oracle_lattice_laws(seed, trials, 3);
    b.push(
        "lattice_laws",
        &format!("seed={seed} trials={trials}"),
        laws.failures.is_empty(),
        laws.failures
            .first()
            .cloned()
            .unwrap_or(format!("{} checks over {} trials", laws.checks, laws.trials)),
        false,
    );

    let failed = b.lines.iter().filter(|l| !l.pass).count();
    let mut r = Report::new("verify", seed);
    r.put("group", group_line(x));
    r.put("depth", depth);
    r.put("trials", trials);
    r.put("checks", b.lines.iter().map(|l| json!(l.to_string())).collect::<Vec<_>>());
    r.put(
        "summary",
        obj([
            ("total", json!(b.lines.len())),
            ("passed", json!(b.lines.len() - failed)),
            ("failed", json!(failed)),
            ("nontrivial", json!(b.nontrivial)),
        ]),
    );
    if !notes.is_empty() {
        r.put("notes", notes);
    }
    Ok(if failed == 0 { Outcome::Ok(r) } else { Outcome::Failed(r) })
}
