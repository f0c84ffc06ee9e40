//! Contention thresholds.
//!
//! A threshold `zeta` admits each user independently with probability
//! `e^{-zeta}`; choosing `e^{-zeta} = s/n` makes `s` the most likely number
//! of contenders. The digital protocol stacks `k` thresholds so that every
//! interval `[zeta_j, zeta_{j+1})` carries mass `s/n`.

use crate::error::{invalid, Result};

/// Ascending thresholds `zeta_1 < ... < zeta_k`; `zeta_{k+1}` is `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet {
    levels: Vec<f64>,
}

impl ThresholdSet {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(invalid("threshold set needs at least one level"));
        }
        if levels.iter().any(|z| !z.is_finite() || *z <= 0.0) {
            return Err(invalid("thresholds must be finite and positive"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("thresholds must be strictly increasing"));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    /// Interval `j` (0-based) as `[lo, hi)`; the last interval is open above.
    pub fn interval(&self, j: usize) -> (f64, f64) {
        let hi = self.levels.get(j + 1).copied().unwrap_or(f64::INFINITY);
        (self.levels[j], hi)
    }

    /// Index of the interval containing `gain`, if any.
    pub fn interval_of(&self, gain: f64) -> Option<usize> {
        self.levels.iter().rposition(|&z| gain >= z)
    }
}

fn check_population(n: usize, contenders: usize) -> Result<()> {
    if contenders == 0 {
        return Err(invalid("sparsity must be at least 1"));
    }
    if contenders >= n {
        return Err(invalid(format!(
            "expected contenders {contenders} must be below the population {n}"
        )));
    }
    Ok(())
}

/// `zeta = -ln(s/n)`.
pub fn analog_threshold(n: usize, s: usize) -> Result<f64> {
    check_population(n, s)?;
    Ok(-(s as f64 / n as f64).ln())
}

/// `zeta_j = -ln(s (k - j + 1) / n)` for `j = 1..=k`.
pub fn digital_thresholds(n: usize, s: usize, k: usize) -> Result<ThresholdSet> {
    if k == 0 {
        return Err(invalid("need at least one threshold"));
    }
    let total = s.checked_mul(k).ok_or_else(|| invalid("s*k overflows"))?;
    check_population(n, total)?;
    let levels = (1..=k)
        .map(|j| -((s * (k - j + 1)) as f64 / n as f64).ln())
        .collect();
    ThresholdSet::new(levels)
}

/// Mean number of users at or above `zeta`: `n e^{-zeta}`.
pub fn expected_contenders(n: usize, zeta: f64) -> f64 {
    n as f64 * (-zeta).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::GainDistribution;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn analog_examples() {
        assert_relative_eq!(
            analog_threshold(100, 1).unwrap(),
            4.605170186,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            analog_threshold(100, 5).unwrap(),
            2.995732274,
            epsilon = 1e-9
        );
        assert!(analog_threshold(100, 100).is_err());
        assert!(analog_threshold(100, 0).is_err());
    }

    #[test]
    fn digital_examples() {
        let two = digital_thresholds(100, 1, 2).unwrap();
        assert_relative_eq!(two.levels()[0], 3.912023005, epsilon = 1e-9);
        assert_relative_eq!(two.levels()[1], 4.605170186, epsilon = 1e-9);

        let one = digital_thresholds(100, 1, 1).unwrap();
        assert_eq!(one.levels(), &[analog_threshold(100, 1).unwrap()]);

        let four = digital_thresholds(100, 1, 4).unwrap();
        let expect = [3.218875825, 3.506557897, 3.912023005, 4.605170186];
        for (z, e) in four.levels().iter().zip(expect) {
            assert_relative_eq!(*z, e, epsilon = 1e-9);
        }
        assert!(digital_thresholds(100, 25, 4).is_err());
        assert!(digital_thresholds(100, 1, 0).is_err());
    }

    #[test]
    fn expected_contender_examples() {
        assert_relative_eq!(
            expected_contenders(100, -(0.05f64).ln()),
            5.0,
            epsilon = 1e-12
        );
        assert_eq!(expected_contenders(100, 0.0), 100.0);
        assert_relative_eq!(expected_contenders(100, 100f64.ln()), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn interval_lookup() {
        let t = digital_thresholds(100, 1, 2).unwrap();
        assert_eq!(t.interval_of(1.0), None);
        assert_eq!(t.interval_of(4.0), Some(0));
        assert_eq!(t.interval_of(t.levels()[1]), Some(1));
        assert_eq!(t.interval(1).1, f64::INFINITY);
    }

    fn binomial_mode_weight(n: u64, s: u64, u: f64) -> f64 {
        // log of C(n,s) u^s (1-u)^(n-s); the binomial coefficient is constant in u.
        s as f64 * u.ln() + (n - s) as f64 * (1.0 - u).ln()
    }

    #[test]
    fn s_over_n_maximises_binomial_probability() {
        for (n, s) in [(20u64, 1u64), (20, 3), (100, 5)] {
            let mut best = (0.0, f64::NEG_INFINITY);
            for i in 1..10_000 {
                let u = i as f64 * 1e-4;
                let w = binomial_mode_weight(n, s, u);
                if w > best.1 {
                    best = (u, w);
                }
            }
            assert!(
                (best.0 - s as f64 / n as f64).abs() <= 1e-4,
                "n={n} s={s} argmax={}",
                best.0
            );
        }
    }

    proptest! {
        #[test]
        fn threshold_round_trip(n in 2usize..5000, frac in 0.0f64..1.0) {
            let s = 1 + ((n - 2) as f64 * frac) as usize;
            let z = analog_threshold(n, s).unwrap();
            prop_assert!((expected_contenders(n, z) - s as f64).abs() <= 1e-12 * s as f64 + 1e-12);
        }

        #[test]
        fn threshold_decreases_with_s(n in 3usize..5000, frac in 0.0f64..1.0) {
            let s = 1 + ((n - 3) as f64 * frac) as usize;
            prop_assert!(analog_threshold(n, s + 1).unwrap() < analog_threshold(n, s).unwrap());
        }

        #[test]
        fn every_interval_has_mass_s_over_n(n in 10usize..2000, s in 1usize..5, k in 1usize..8) {
            prop_assume!(s * k < n);
            let t = digital_thresholds(n, s, k).unwrap();
            let target = s as f64 / n as f64;
            for j in 0..t.k() {
                let (lo, hi) = t.interval(j);
                let mass = GainDistribution::ccdf(lo) - if hi.is_finite() { GainDistribution::ccdf(hi) } else { 0.0 };
                prop_assert!((mass - target).abs() <= 1e-12);
            }
        }
    }
}
