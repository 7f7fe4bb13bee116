use std::sync::Arc;

use ecrank_core::arith::sieve_primes;
use ecrank_core::curve::{ap_batch, point_on_curve, WeierstrassCurve};
use ecrank_core::dataset::*;
use num_bigint::BigUint;
use proptest::prelude::*;

#[test]
fn feature_rows_bounded_on_random_curves() {
    let recs = gen_random_weierstrass(1000, 1000, 99);
    let table = Arc::new(sieve_primes(1000));
    let curves: Vec<WeierstrassCurve> = recs.iter().map(|r| r.curve().unwrap()).collect();
    let n_max = recs.iter().map(|r| r.conductor.clone()).max().unwrap();
    for (r, ap) in recs.iter().zip(ap_batch(&curves, &table)) {
        let m = build_feature_matrix(&r.conductor, &ap.unwrap(), &table, &n_max).unwrap();
        assert!(m.row(0).iter().all(|v| (-2.0..=2.0).contains(v)), "{}", r.id);
        let c = m.row(1)[0];
        assert!(c > 0.0 && c <= 1.0);
        let step = 2.0 / m.cols as f64;
        assert!(m.row(2).windows(2).all(|w| (w[1] - w[0] - step).abs() < 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pencil_points_lie_on_cubic_and_model(k in 2usize..=8, seed in any::<u64>()) {
        let pc = gen_pencil_cubic(k, 20, seed).unwrap();
        for p in &pc.points {
            prop_assert!(pc.cubic.eval(p) == 0.into());
        }
        if let Ok((e, map)) = cubic_to_weierstrass(&pc.cubic, &pc.points[0]) {
            prop_assert!(e.disc != 0.into());
            for p in &pc.points {
                if let Some(img) = map.apply(p).unwrap() {
                    prop_assert!(point_on_curve(&e, &img));
                }
            }
        }
    }

    #[test]
    fn splits_partition(n in 10usize..300, seed in any::<u64>(), frac in 0.1f64..0.5) {
        let conductors: Vec<BigUint> = (0..n).map(|i| BigUint::from(11 + i as u64 * 7)).collect();
        let refs: Vec<&BigUint> = conductors.iter().collect();
        let spec = SplitSpec { mode: SplitMode::Uniform { test_fraction: frac }, seed, ..SplitSpec::default() };
        let s = split_by_conductor(&refs, &spec).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(&s, &split_by_conductor(&refs, &spec).unwrap());
    }

    #[test]
    fn binary_relabel_monotone(mut ranks in proptest::collection::vec(0u32..11, 1..50), t in 0u32..11) {
        ranks.sort_unstable();
        let labels = merge_binary_labels(&ranks, t);
        prop_assert!(labels.windows(2).all(|w| w[0] <= w[1]));
    }
}
