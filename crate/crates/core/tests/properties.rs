use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use walklab::barrier::{absorption_probability, p_barrier, q1p, q2p};
use walklab::exact::{binomial, parse_rational, ratio, ExactRational};
use walklab::montecarlo::{simulate, wilson_interval, BarrierMode, SimulationConfig, Z_95};
use walklab::series::{p_from_x, Branch};
use walklab::walk::{distribution_row, q0p, reachable};
use walklab::Odds;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// Rational p strictly inside (0, 1).
fn probability() -> impl Strategy<Value = ExactRational> {
    (2i64..64).prop_flat_map(|den| (1..den).prop_map(move |num| ratio(num, den)))
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn rows_are_normalized_and_follow_the_recurrence(p in probability(), n in 0u32..30) {
        let odds = Odds::exact(p);
        let row = distribution_row(n, &odds);
        prop_assert_eq!(row.total(), ExactRational::one());
        for k in reachable(n) {
            prop_assert_eq!(row.get(k), q0p(n, k, &odds));
        }
        prop_assert!(q0p(n, i64::from(n) + 1, &odds).is_zero());
    }

    #[test]
    fn mirror_symmetry(p in probability(), n in 0u32..30, j in 0u32..30) {
        let k = i64::from(n) - 2 * i64::from(j.min(n));
        let odds = Odds::exact(p);
        prop_assert_eq!(q0p(n, k, &odds), q0p(n, -k, &odds.mirrored()));
    }

    #[test]
    fn barrier_vanishes_on_the_barrier(p in probability(), n in 0u32..30, a in 1u32..5) {
        let odds = Odds::exact(p);
        prop_assert!(p_barrier(n, i64::from(a), a, &odds).unwrap().is_zero());
    }

    #[test]
    fn delayed_barrier_forms(p in probability(), n in 2u32..30, j in 0u32..30) {
        let k = i64::from(n) - 2 * i64::from(j.min(n));
        let odds = Odds::exact(p);
        let nn = ExactRational::from_integer(n.into());
        let kk = ExactRational::from_integer(k.into());
        prop_assert_eq!(q1p(n, k, &odds), -&kk / &nn * q0p(n, k, &odds));
        let factor = (&kk * &kk - &nn) / (&nn * (&nn - ExactRational::one()));
        prop_assert_eq!(q2p(n, k, &odds).unwrap(), factor * q0p(n, k, &odds));
    }

    #[test]
    fn absorption_is_a_sub_probability(p in probability(), m in 1u32..20) {
        let odds = Odds::exact(p);
        let total: ExactRational = (1..=m).map(|i| absorption_probability(i, &odds).unwrap()).sum();
        prop_assert!(total <= ExactRational::one());
        let survivors: ExactRational = reachable(2 * m).map(|k| q1p(2 * m, k, &odds).abs()).sum();
        prop_assert_eq!(total + survivors, ExactRational::one());
    }

    #[test]
    fn binomial_symmetry(n in 0u64..200, l in 0i64..200) {
        prop_assert_eq!(binomial(n, l), binomial(n, n as i64 - l));
    }

    #[test]
    fn rational_text_roundtrip(num in -10_000i64..10_000, den in 1i64..10_000) {
        let q = ratio(num, den);
        prop_assert_eq!(parse_rational(&q.to_string()).unwrap(), q);
    }

    #[test]
    fn linkage_holds_on_both_branches(x in -1.0f64..=1.0) {
        for branch in [Branch::Plus, Branch::Minus] {
            let p = p_from_x(x, branch).unwrap();
            prop_assert!((4.0 * p.value() * p.complement() - x * x).abs() <= 1e-15);
            prop_assert!((p.value() + p.complement() - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(trials in 1u64..100_000, frac in 0.0f64..=1.0) {
        let successes = (trials as f64 * frac).round() as u64;
        let (lo, hi) = wilson_interval(successes, trials, Z_95);
        let phat = successes as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= phat + 1e-12 && phat <= hi + 1e-12 && hi <= 1.0);
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn ensembles_conserve_walks(
        p in 0.0f64..=1.0,
        half_steps in 1u32..15,
        walks in 1u64..3_000,
        chunk in 1u64..700,
        seed: u64,
        absorbing: bool,
    ) {
        let barrier = if absorbing { BarrierMode::DelayedAtOrigin } else { BarrierMode::None };
        let config = SimulationConfig::new(p, 2 * half_steps, walks, seed, barrier).with_chunk_size(chunk);
        let report = simulate(&config).unwrap();
        let returned: u64 = report.first_return_histogram.iter().map(|(_, c)| c).sum();
        prop_assert_eq!(returned + report.escaped_count, walks);
        let occupied: u64 = report.occupancy_histogram.iter().map(|(_, c)| c).sum();
        prop_assert_eq!(occupied, if absorbing { report.escaped_count } else { walks });
        prop_assert!(report.occupancy_histogram.iter().all(|(k, _)| k.rem_euclid(2) == 0));
        if absorbing {
            prop_assert_eq!(report.occupancy_count(0), 0);
        }
    }
}
