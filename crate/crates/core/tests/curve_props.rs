use std::sync::Arc;

use ecrank_core::arith::sieve_primes;
use ecrank_core::curve::{
    ap_batch, ap_good_prime, point_add, point_on_curve, reduction_type, residue, scalar_mul, ProjectivePoint,
    ReductionType, WeierstrassCurve,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_ap(e: &WeierstrassCurve, p: u64) -> i32 {
    let a = e.ainvs().map(|x| residue(&x, p));
    let mut n = 1u64;
    for x in 0..p {
        let rhs = (x * x % p * x + a[1] * x % p * x + a[3] * x + a[4]) % p;
        let lin = (a[0] * x + a[2]) % p;
        for y in 0..p {
            if (y * y + lin * y) % p == rhs {
                n += 1;
            }
        }
    }
    (p as i64 + 1 - n as i64) as i32
}

fn random_curve(rng: &mut impl Rng, bound: i64) -> WeierstrassCurve {
    loop {
        let a = [
            rng.gen_range(0..=1),
            rng.gen_range(-1..=1),
            rng.gen_range(0..=1),
            rng.gen_range(-bound..=bound),
            rng.gen_range(-bound..=bound),
        ];
        if let Ok(e) = WeierstrassCurve::from_ainvs(a) {
            return e;
        }
    }
}

fn arb_curve() -> impl Strategy<Value = WeierstrassCurve> {
    (0i64..=1, -1i64..=1, 0i64..=1, -10_000i64..=10_000, -10_000i64..=10_000)
        .prop_filter_map("singular", |(a1, a2, a3, a4, a6)| WeierstrassCurve::from_ainvs([a1, a2, a3, a4, a6]).ok())
}

#[test]
fn character_sums_match_enumeration_below_500() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let primes = sieve_primes(500);
    for _ in 0..200 {
        let e = random_curve(&mut rng, 1000);
        for &p in primes.primes() {
            match ap_good_prime(&e, p) {
                Ok(ap) => assert_eq!(ap, brute_ap(&e, p), "{e} at {p}"),
                Err(_) => assert!(reduction_type(&e, p).is_ok()),
            }
        }
    }
}

#[test]
fn hasse_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let primes = sieve_primes(10_000);
    let mut checked = 0;
    while checked < 10_000 {
        let e = random_curve(&mut rng, 1_000_000);
        let p = primes.primes()[rng.gen_range(0..primes.len())];
        if let Ok(ap) = ap_good_prime(&e, p) {
            let bound = (4 * p).isqrt() as i32;
            assert!(ap.abs() <= bound, "{e} a_{p} = {ap}");
            checked += 1;
        }
    }
}

#[test]
fn batch_equals_single_curve_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let curves: Vec<_> = (0..100).map(|_| random_curve(&mut rng, 5000)).collect();
    let table = Arc::new(sieve_primes(1000));
    let batch = ap_batch(&curves, &table);
    for (e, rec) in curves.iter().zip(batch) {
        let rec = rec.unwrap();
        for (p, ap, red) in rec.iter() {
            match red {
                ReductionType::Good => {
                    assert_eq!(ap, ap_good_prime(e, p).unwrap());
                    assert_eq!(ap, brute_ap(e, p));
                }
                _ => assert_eq!(reduction_type(e, p).unwrap(), (red, ap)),
            }
        }
    }
    assert!(ap_batch(&[], &table).is_empty());
}

/// Points on 5077a1, which has rank 3 with generators (-2,3), (-1,3), (0,2).
fn rank3_point(c: [i64; 3]) -> (WeierstrassCurve, ProjectivePoint) {
    let e = WeierstrassCurve::from_ainvs([0, 0, 1, -7, 6]).unwrap();
    let gens = [(-2, 3), (-1, 3), (0, 2)];
    let mut acc = ProjectivePoint::infinity();
    for (k, (x, y)) in c.iter().zip(gens) {
        let m = scalar_mul(&e, *k, &ProjectivePoint::from_integers(x, y)).unwrap();
        acc = point_add(&e, &acc, &m).unwrap();
    }
    (e, acc)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn group_law_is_associative(
        p in prop::array::uniform3(-2i64..=2),
        q in prop::array::uniform3(-2i64..=2),
        r in prop::array::uniform3(-2i64..=2),
    ) {
        let (e, p) = rank3_point(p);
        let (_, q) = rank3_point(q);
        let (_, r) = rank3_point(r);
        let left = point_add(&e, &point_add(&e, &p, &q).unwrap(), &r).unwrap();
        let right = point_add(&e, &p, &point_add(&e, &q, &r).unwrap()).unwrap();
        prop_assert!(point_on_curve(&e, &left));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn addition_commutes(p in prop::array::uniform3(-3i64..=3), q in prop::array::uniform3(-3i64..=3)) {
        let (e, p) = rank3_point(p);
        let (_, q) = rank3_point(q);
        prop_assert_eq!(point_add(&e, &p, &q).unwrap(), point_add(&e, &q, &p).unwrap());
    }

    #[test]
    fn bad_primes_carry_the_fixed_trace(e in arb_curve()) {
        let primes = sieve_primes(200);
        for &p in primes.primes() {
            if let Ok((red, ap)) = reduction_type(&e, p) {
                prop_assert_eq!(red.bad_ap(), Some(ap));
            }
        }
    }

    #[test]
    fn traces_are_invariant_under_coordinate_change(e in arb_curve(), r in -20i64..20, s in -5i64..5, t in -20i64..20) {
        let f = e.shifted(&r.into(), &s.into(), &t.into());
        prop_assert_eq!(&f.disc, &e.disc);
        for p in [2u64, 3, 5, 7, 11, 101] {
            if let Ok(ap) = ap_good_prime(&e, p) {
                prop_assert_eq!(ap_good_prime(&f, p).unwrap(), ap);
            }
        }
    }
}
