//! Property tests for group-level invariants. Groups are drawn from the
//! seeded generator, so a failing case shrinks to a seed and a few indices.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use protori::arith::{self, identity, pow_rat, Rat};
use protori::oracle::{random_candidate, random_group, SMALL_PRIMES};
use protori::protorus::{from_dual, qd_hull, universal_resolution, HullMode, LineScope};
use protori::qlattice::{hnf_basis, lattice_index};
use protori::tfgroup::{hom_check, member, p_height, rank1_isomorphic, splitting};
use protori::{Directive, Exp, GroupDescription, Lattice};

fn group(seed: u64, rank: usize, dirs: usize) -> (GroupDescription, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_group(&mut rng, rank, dirs);
    (x, rng)
}

/// A random member of X; falls back to e_1, which is always in X.
fn member_candidate(rng: &mut ChaCha8Rng, x: &GroupDescription) -> Vec<Rat> {
    (0..16)
        .map(|_| random_candidate(rng, x))
        .find(|q| member(x, q).unwrap())
        .unwrap_or_else(|| arith::unit_vector(x.rank(), 0))
}

fn shifted(z: &[Rat], p: u64, j: i64) -> Vec<Rat> {
    arith::scale(z, &pow_rat(p, -j))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn height_brackets_membership(seed in any::<u64>(), pi in 0usize..4) {
        let (x, mut rng) = group(seed, 3, 3);
        let p = SMALL_PRIMES[pi];
        let z = member_candidate(&mut rng, &x);
        match p_height(&x, p, &z).unwrap() {
            Exp::Fin(j) => {
                prop_assert!(member(&x, &shifted(&z, p, j as i64)).unwrap());
                prop_assert!(!member(&x, &shifted(&z, p, j as i64 + 1)).unwrap());
            }
            Exp::Inf => {
                for j in 0..=8 {
                    prop_assert!(member(&x, &shifted(&z, p, j)).unwrap());
                }
            }
        }
    }

    #[test]
    fn divisible_directions_do_not_move_heights(seed in any::<u64>(), pi in 0usize..4) {
        let (x, mut rng) = group(seed, 3, 3);
        let p = SMALL_PRIMES[pi];
        let w = member_candidate(&mut rng, &x);
        let sp = splitting(&x, p).unwrap();
        for d in x.directives() {
            let moved = arith::add(&w, &d.v);
            if sp.in_divisible_part(&d.v) && !arith::is_zero_vec(&moved) {
                prop_assert_eq!(p_height(&x, p, &moved).unwrap(), p_height(&x, p, &w).unwrap());
            }
        }
    }

    #[test]
    fn rank1_isomorphism_is_an_equivalence(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), k in 2i64..40) {
        let a = group(s1, 1, 2).0;
        let b = group(s2, 1, 2).0;
        let c = group(s3, 1, 2).0;
        let iso = |x: &GroupDescription, y: &GroupDescription| rank1_isomorphic(x, y).unwrap();
        prop_assert!(iso(&a, &a));
        prop_assert_eq!(iso(&a, &b), iso(&b, &a));
        if iso(&a, &b) && iso(&b, &c) {
            prop_assert!(iso(&a, &c));
        }
        let scaled = GroupDescription::new(
            1,
            a.directives().iter().map(|d| Directive { v: arith::scale(&d.v, &arith::int(k)), s: d.s.clone() }).collect(),
        ).unwrap();
        prop_assert!(iso(&a, &scaled));
    }

    #[test]
    fn descriptor_bookkeeping(seed in any::<u64>()) {
        let (x, _) = group(seed, 3, 3);
        let d = from_dual(&x).unwrap();
        prop_assert!(d.chain_holds());
        prop_assert_eq!(d.split.r + d.split.k + d.split.reduced.rank(), d.dim);
        prop_assert!(!d.reduced_delta_star.has_trailing_zero_row());
        if let Ok(h) = universal_resolution(&d) {
            for p in SMALL_PRIMES {
                let (r, s) = h.at(p);
                prop_assert_eq!(r, d.delta_star.column(p).iter().filter(|e| e.is_inf()).count());
                prop_assert!(r + s <= d.width_na);
            }
        }
    }

    #[test]
    fn hulls_are_extensive_idempotent_and_monotone(seed in any::<u64>()) {
        let (x, _) = group(seed, 2, 3);
        let id = identity(x.rank());
        for mode in [HullMode::Inf, HullMode::FinInf] {
            let dir = qd_hull(&x, mode, LineScope::Directives).unwrap();
            let sat = qd_hull(&x, mode, LineScope::Saturated).unwrap();
            prop_assert!(hom_check(&id, &x, &dir).unwrap());
            prop_assert!(hom_check(&id, &dir, &sat).unwrap());
            if mode == HullMode::Inf {
                prop_assert_eq!(qd_hull(&dir, mode, LineScope::Directives).unwrap(), dir);
                prop_assert_eq!(qd_hull(&sat, mode, LineScope::Saturated).unwrap(), sat);
            }
        }
    }

    #[test]
    fn dyadic_shell_index(n in 1usize..4, pi in 0usize..4, depth in 1u32..5) {
        let p = SMALL_PRIMES[pi];
        let z = Lattice::standard(n);
        let shell = hnf_basis(&arith::identity(n).iter().map(|r| arith::scale(r, &pow_rat(p, -(depth as i64)))).collect::<Vec<_>>(), n).unwrap();
        prop_assert_eq!(lattice_index(&shell, &z).unwrap(), arith::pow_int(p, depth * n as u32));
    }
}
