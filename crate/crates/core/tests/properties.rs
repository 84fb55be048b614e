mod common;

use common::*;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use pchaos::density::{banach_window, empirical_density, max_banach_ratio, IndexSet};
use pchaos::seqspace::{project, weighted_x};
use pchaos::verify::{block_witness, exclusion_set, fhc0_check, fhc2_fraction, hyp0_witness};
use pchaos::{Dyadic, NormKind, OperatorT, Schedule, SparseVec};
use proptest::prelude::*;

fn dyadic() -> impl Strategy<Value = Dyadic> {
    (-(1i64 << 40)..(1i64 << 40), -60i64..60).prop_map(|(m, e)| Dyadic::new(BigInt::from(m), e))
}

fn small_dyadic() -> impl Strategy<Value = Dyadic> {
    (1i64..16, any::<bool>(), -6i64..7).prop_map(|(m, neg, e)| Dyadic::from_int(if neg { -m } else { m }).mul_pow2(e))
}

fn sparse(limit: u64) -> impl Strategy<Value = SparseVec> {
    prop::collection::vec((0..limit, small_dyadic()), 0..8).prop_map(SparseVec::from_entries)
}

fn op(p: usize) -> OperatorT {
    OperatorT::new(Schedule::small2(p).unwrap()).unwrap()
}

proptest! {
    #[test]
    fn dyadic_arithmetic_is_rational_arithmetic(a in dyadic(), b in dyadic()) {
        let (ra, rb) = (a.to_rational(), b.to_rational());
        prop_assert_eq!((&a + &b).to_rational(), &ra + &rb);
        prop_assert_eq!((&a - &b).to_rational(), &ra - &rb);
        prop_assert_eq!((&a * &b).to_rational(), &ra * &rb);
        prop_assert_eq!(a.cmp(&b), ra.cmp(&rb));
        prop_assert_eq!(a.abs().to_rational(), num_traits::Signed::abs(&ra));
    }

    #[test]
    fn dyadic_is_canonical(a in dyadic()) {
        if a.is_zero() {
            prop_assert_eq!(a.exponent(), 0);
        } else {
            prop_assert!(num_integer::Integer::is_odd(a.mantissa()));
        }
        prop_assert_eq!(Dyadic::from_rational(&a.to_rational()), Some(a.clone()));
    }

    #[test]
    fn dyadic_text_and_json_round_trip(a in dyadic()) {
        let back: Dyadic = a.to_string().parse().unwrap();
        prop_assert_eq!(&back, &a);
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<Dyadic>(&json).unwrap(), a);
    }

    #[test]
    fn sparse_json_round_trip(v in sparse(5000)) {
        let json = serde_json::to_string(&v).unwrap();
        prop_assert_eq!(serde_json::from_str::<SparseVec>(&json).unwrap(), v);
    }

    #[test]
    fn blocks_partition_a_vector(v in sparse(1376)) {
        let s = Schedule::small2(4).unwrap();
        let mut sum = SparseVec::zero();
        for n in 0..4 {
            let p = project(&v, n, &s).unwrap();
            prop_assert!(weighted_x(&v, n, &s).unwrap().l1() >= p.l1());
            sum = sum + &p;
        }
        prop_assert_eq!(sum, v);
    }

    #[test]
    fn norms_are_consistent(v in sparse(1000), c in small_dyadic()) {
        let sup = v.norm(NormKind::Sup).value;
        let l1 = v.l1();
        prop_assert!(sup <= l1);
        prop_assert_eq!(v.scale(&c).l1(), &l1 * &c.abs());
        let l2 = v.norm(NormKind::Lp(2)).value;
        prop_assert!(l2 <= &l1 * &l1);
        prop_assert!(&sup * &sup <= l2);
    }

    #[test]
    fn operator_is_linear(u in sparse(1376), v in sparse(1376), c in small_dyadic()) {
        let t = op(4);
        let combo = u.scale(&c) + &v;
        let lhs = t.apply(&combo).unwrap();
        let rhs = t.apply(&u).unwrap().scale(&c) + &t.apply(&v).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn operator_norm_is_at_most_two(v in sparse(5472)) {
        let t = op(4);
        prop_assert!(t.apply(&v).unwrap().l1() <= v.l1().mul_pow2(1));
    }

    #[test]
    fn fast_power_matches_reference(v in sparse(352), j in 0u64..400) {
        let t = op(3);
        let tables = small2_tables(3);
        let want = power(&tables, &to_r(&v), j);
        prop_assert_eq!(to_r(&t.apply_power_u64(&v, j).unwrap()), want.clone());
        prop_assert_eq!(to_r(&t.apply_power_stepped(&v, j).unwrap()), want);
    }

    #[test]
    fn powers_compose(v in sparse(1376), i in 0u64..100_000, j in 0u64..100_000) {
        let t = op(4);
        let once = t.apply_power_u64(&v, i + j).unwrap();
        let twice = t.apply_power_u64(&t.apply_power_u64(&v, i).unwrap(), j).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn huge_exponents_reduce_by_period(v in sparse(1376), r in 0u64..2048, q in 0u64..1000) {
        let t = op(4);
        let period = t.period_of(&v).unwrap();
        let big = BigUint::from(q) * BigUint::from(period) * BigUint::from(u64::MAX) + BigUint::from(r);
        prop_assert_eq!(t.apply_power(&v, &big).unwrap(), t.apply_power_u64(&v, r).unwrap());
    }

    #[test]
    fn hyp0_residual_has_closed_form(
        eps_exp in -8i64..0,
        k in 0u64..96,
        modulus in 1u64..8,
        m in 0u64..8,
        xk in small_dyadic(),
    ) {
        let t = op(8);
        let residue = m % modulus;
        let rep = hyp0_witness(
            &t,
            &Dyadic::pow2(eps_exp),
            k,
            &BigUint::from(modulus),
            &BigUint::from(residue),
            &xk,
        );
        match rep {
            Ok(rep) => {
                prop_assert!(rep.holds(), "{}", rep.summary());
                prop_assert!(rep.checks.iter().all(|c| c.is_consistent()));
            }
            Err(pchaos::Error::PrefixTooShort(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn block_witness_posts(
        block in 0usize..3,
        offsets in prop::collection::btree_set(0u64..64, 1..5),
        coeffs in prop::collection::vec(small_dyadic(), 5),
        modulus in 1u64..16,
        m in 0u64..16,
    ) {
        let t = op(20);
        let s = t.schedule();
        let targets: Vec<(u64, Dyadic)> = offsets
            .iter()
            .zip(&coeffs)
            .map(|(&o, c)| (s.b(block) + o % s.block_len(block), c.clone()))
            .collect::<std::collections::BTreeMap<_, _>>()
            .into_iter()
            .collect();
        let eps = Dyadic::pow2(-4);
        let rep = block_witness(&t, &eps, &targets, &BigUint::from(modulus), &BigUint::from(m % modulus)).unwrap();
        prop_assert!(rep.holds(), "{}", rep.summary());
        let w = &rep.witness;
        let image = t.apply_power(&w.z(), &w.exponent).unwrap();
        let dist = (&image - &SparseVec::from_entries(targets.iter().cloned())).l1();
        prop_assert_eq!(dist, w.residual());
        prop_assert!(w.entries.iter().all(|p| p.z.abs() < eps && p.residual < eps));
    }

    #[test]
    fn fhc0_bound_on_random_block_vectors(l in 1usize..4, seed in any::<u64>()) {
        let t = op(4);
        let s = t.schedule();
        let x = pchaos::suite::random_block_vector(&mut pchaos::suite::rng(seed), s, l, 8);
        for n in 0..l {
            let rep = fhc0_check(&t, &x, n, l, NormKind::L1).unwrap();
            prop_assert!(rep.holds(), "{}", rep.summary());
        }
    }

    #[test]
    fn fhc2_bound_for_every_horizon(l in 0usize..3, seed in any::<u64>(), k in 0u64..2048) {
        let t = op(3);
        let x = pchaos::suite::random_block_vector(&mut pchaos::suite::rng(seed), t.schedule(), l, 8);
        prop_assert!(fhc2_fraction(&t, &x, l, k).unwrap().holds());
    }

    #[test]
    fn exclusion_sets_cover_delta(l in 0usize..4, i in 0u64..4096) {
        let s = Schedule::small2(4).unwrap();
        let i = i % s.block_len(l);
        let set = exclusion_set(&s, l, i).unwrap();
        prop_assert_eq!(set.len(), s.delta(l));
    }

    #[test]
    fn density_ordering(elems in prop::collection::vec(0u64..300, 0..120), extra in 1u64..50) {
        let horizon = elems.iter().copied().max().unwrap_or(0) + extra;
        let a = IndexSet::new(elems, horizon).unwrap();
        let d = empirical_density(&a, None);
        let banach = max_banach_ratio(&a).unwrap();
        prop_assert!(d.lower <= d.upper);
        prop_assert!(d.upper <= banach);
        for w in [1, horizon / 3 + 1, horizon] {
            let bw = banach_window(&a, w).unwrap();
            prop_assert!(bw.max_count <= w);
            prop_assert_eq!(a.count_in(bw.argmax_start, bw.argmax_start + w - 1), bw.max_count);
            prop_assert_eq!(bw.ratio, BigRational::new(bw.max_count.into(), w.into()));
        }
    }

    #[test]
    fn index_set_json_round_trip(elems in prop::collection::vec(0u64..300, 0..50)) {
        let a = IndexSet::new(elems, 300).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<IndexSet>(&json).unwrap(), a);
    }
}
