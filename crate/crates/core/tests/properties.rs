use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use csmac::analytics::{break_even_beta, total_throughput, BreakEvenParams, TimingModel};
use csmac::config::SystemConfig;
use csmac::recovery::{brute_force_l0, default_tolerance, greedy_recover, ls_refine, residual};
use csmac::sensing::{generate_bernoulli_matrix, measure};
use csmac::thresholds::digital_thresholds;

fn sparse_vector(n: usize, support: &[usize], rng: &mut ChaCha8Rng) -> Vec<f64> {
    use rand::Rng;
    let mut v = vec![0.0; n];
    for &i in support {
        v[i] = 0.5 + rng.random::<f64>() * 4.0;
    }
    v
}

fn random_support(n: usize, s: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut support = idx[..s].to_vec();
    support.sort_unstable();
    support
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn throughput_never_increases_with_reservation(
        slot_exp in 7u32..=9,
        m1 in 0u64..300,
        extra in 0u64..300,
        rate in 0.0f64..5.0,
    ) {
        let base = TimingModel::new(10f64.powi(-(slot_exp as i32)), 30e-6, 3.3334e-6).unwrap();
        let m2 = (m1 + extra).min(base.p);
        let m1 = m1.min(m2);
        let a = total_throughput(rate, &base.with_reservation(m1).unwrap()).throughput;
        let b = total_throughput(rate, &base.with_reservation(m2).unwrap()).throughput;
        prop_assert!(b <= a + 1e-15);
        prop_assert!(a <= rate + 1e-15);
    }

    #[test]
    fn digital_thresholds_partition_the_gain_axis(s in 1usize..5, k in 1usize..8, x in 0.0f64..12.0) {
        let n = 200;
        prop_assume!(s * k < n);
        let set = digital_thresholds(n, s, k).unwrap();
        prop_assert!(set.levels().windows(2).all(|w| w[0] < w[1]));
        match set.interval_of(x) {
            Some(j) => {
                let (lo, hi) = set.interval(j);
                prop_assert!(lo <= x && x < hi);
            }
            None => prop_assert!(x < set.levels()[0]),
        }
    }

    #[test]
    fn analog_break_even_grows_with_slot_count(t in 1u64..5000, r in 2u64..200) {
        let lo = break_even_beta(&BreakEvenParams::Analog { t, r }).threshold().unwrap();
        let hi = break_even_beta(&BreakEvenParams::Analog { t, r: r + 1 }).threshold().unwrap();
        prop_assert!(hi > lo);
        prop_assert!(lo >= 1.0);
    }

    #[test]
    fn greedy_success_survives_column_permutation(seed in any::<u64>(), s in 1usize..4) {
        let (n, r) = (40, 24);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = generate_bernoulli_matrix(r, n, &mut rng).unwrap();
        let support = random_support(n, s, &mut rng);
        let v = sparse_vector(n, &support, &mut rng);
        let y = measure(&a, &v).unwrap();
        let rec = greedy_recover(&y, &a, 2 * s, default_tolerance(&y));
        prop_assume!(rec.exact && rec.support == support);

        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let ap = a.permute_columns(&perm).unwrap();
        let vp: Vec<f64> = perm.iter().map(|&p| v[p]).collect();
        let yp = measure(&ap, &vp).unwrap();
        let recp = greedy_recover(&yp, &ap, 2 * s, default_tolerance(&yp));
        let mut mapped: Vec<usize> = recp.support.iter().map(|&i| perm[i]).collect();
        mapped.sort_unstable();
        prop_assert_eq!(mapped, support);
    }

    #[test]
    fn refinement_is_idempotent_after_success(seed in any::<u64>(), s in 1usize..4) {
        let (n, r) = (60, 30);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = generate_bernoulli_matrix(r, n, &mut rng).unwrap();
        let support = random_support(n, s, &mut rng);
        let v = sparse_vector(n, &support, &mut rng);
        let y = measure(&a, &v).unwrap();
        let rec = greedy_recover(&y, &a, 2 * s, default_tolerance(&y));
        prop_assume!(rec.exact);
        let again = ls_refine(&y, &a, &rec.support).unwrap();
        for (x, z) in rec.values.iter().zip(&again) {
            prop_assert!((x - z).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_always_reproduces_noiseless_measurements(seed in any::<u64>(), s in 0usize..=2) {
        let (n, r) = (12, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = generate_bernoulli_matrix(r, n, &mut rng).unwrap();
        let support = random_support(n, s, &mut rng);
        let v = sparse_vector(n, &support, &mut rng);
        let y = measure(&a, &v).unwrap();
        let tol = default_tolerance(&y);
        let oracle = brute_force_l0(&y, &a, 2, tol).unwrap();
        prop_assert!(oracle.exact);
        prop_assert!(oracle.support.len() <= s);
        let res = residual(&y, &a, &oracle.support, &oracle.values);
        prop_assert!(res.iter().map(|x| x * x).sum::<f64>().sqrt() <= tol);
        let greedy = greedy_recover(&y, &a, 2, tol);
        if greedy.exact {
            let res = residual(&y, &a, &greedy.support, &greedy.values);
            prop_assert!(res.iter().map(|x| x * x).sum::<f64>().sqrt() <= tol);
        }
    }

    #[test]
    fn config_text_round_trips(
        n in 20usize..500,
        s in 1usize..5,
        k in 1usize..4,
        c in 0.25f64..5.0,
        seed in any::<u64>(),
        frames in 1u64..100_000,
    ) {
        let cfg = SystemConfig { n, s, k, c, master_seed: seed, frames, ..SystemConfig::default() };
        let back = SystemConfig::parse(&cfg.to_config_string()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
