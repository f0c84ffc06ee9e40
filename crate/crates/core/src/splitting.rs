//! Opportunistic splitting baseline.
//!
//! Users transmit in a slot when their gain lies in the current window
//! `[lo, hi)`; the base station answers idle, success or collision. The
//! window is managed in CCDF space:
//!
//! * start with `hi = inf` and `lo` such that one user is expected above it
//!   (`ccdf(lo) = 1/n`);
//! * collision: remember the window's lower edge and move `lo` to the CCDF
//!   midpoint of `[lo, hi)`, keeping the upper half;
//! * idle after a collision: the colliding users sit below the idle upper
//!   half, so that half becomes the new ceiling and the remaining lower part
//!   is split again at its midpoint;
//! * idle with no collision yet: the ceiling drops to `lo` and `lo` is
//!   lowered so that `ccdf(lo)` doubles (capped at 1).
//!
//! Every user above `hi` is known to be absent, so a success always isolates
//! the strongest user.

use crate::analytics::TimingModel;
use crate::channel::{sample_gains, ChannelRealization, GainDistribution};
use crate::error::{invalid, Result};
use crate::montecarlo::{derive_seed, run_frames, Estimate, SPLITTING_STREAM};

/// Cited average slot count of the splitting algorithm.
pub const NOMINAL_BETA: f64 = 2.5;
/// Slot budget used when none is supplied.
pub const DEFAULT_MAX_SLOTS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingOutcome {
    /// Contention slots used (at least 1).
    pub beta: u32,
    pub selected_user: Option<usize>,
    /// `log2(1 + h)` of the selected user; 0 when unresolved.
    pub achieved_rate: f64,
    pub resolved: bool,
}

fn level(u: f64) -> f64 {
    GainDistribution::inv_ccdf(u.clamp(0.0, 1.0)).expect("clamped ccdf level")
}

/// Runs the splitting contention on one frame's gains with at most
/// `max_slots` slots.
pub fn run_splitting(gains: &ChannelRealization, max_slots: u32) -> SplittingOutcome {
    let n = gains.len();
    let h = gains.gains();

    // Window in CCDF coordinates: users with ccdf(h) in (u_hi, u_lo].
    let mut u_hi = 0.0_f64;
    let mut u_lo = (1.0 / n as f64).min(1.0);
    // CCDF of the lower edge of the last collided window, if any.
    let mut pending: Option<f64> = None;

    let max_slots = max_slots.max(1);
    for slot in 1..=max_slots {
        let (lo, hi) = (level(u_lo), level(u_hi));
        let mut in_window = h.iter().enumerate().filter(|(_, &g)| g >= lo && g < hi);
        let first = in_window.next();
        let second = in_window.next();
        match (first, second) {
            (Some((i, &g)), None) => {
                return SplittingOutcome {
                    beta: slot,
                    selected_user: Some(i),
                    achieved_rate: g.ln_1p() / std::f64::consts::LN_2,
                    resolved: true,
                };
            }
            (Some(_), Some(_)) => {
                pending = Some(u_lo);
                u_lo = 0.5 * (u_lo + u_hi);
            }
            (None, _) => match pending {
                Some(u_floor) => {
                    u_hi = u_lo;
                    u_lo = 0.5 * (u_floor + u_lo);
                }
                None => {
                    u_hi = u_lo;
                    u_lo = (2.0 * u_lo).min(1.0);
                }
            },
        }
    }
    SplittingOutcome {
        beta: max_slots,
        selected_user: None,
        achieved_rate: 0.0,
        resolved: false,
    }
}

/// Aggregate of repeated splitting trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingRun {
    pub beta: Estimate,
    pub resolved: Estimate,
    /// Fraction of resolved trials that picked the strongest user.
    pub best_selected: f64,
    pub rate: Estimate,
    /// Fraction of trials finishing in the first slot.
    pub single_slot: Estimate,
}

/// Runs `trials` independent splitting contentions among `n` users. Trial
/// `i` draws its gains from stream `i` of `derive_seed(master_seed,
/// SPLITTING_STREAM)`.
pub fn simulate_splitting(
    n: usize,
    trials: u64,
    max_slots: u32,
    master_seed: u64,
) -> Result<SplittingRun> {
    if n == 0 || trials == 0 {
        return Err(invalid("splitting needs n >= 1 and at least one trial"));
    }
    let outcomes = run_frames(
        trials,
        derive_seed(master_seed, SPLITTING_STREAM),
        |_, rng| {
            let gains = sample_gains(n, rng)?;
            let out = run_splitting(&gains, max_slots);
            Ok((out, out.selected_user == Some(gains.strongest())))
        },
    )
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let betas: Vec<f64> = outcomes.iter().map(|(o, _)| o.beta as f64).collect();
    let rates: Vec<f64> = outcomes.iter().map(|(o, _)| o.achieved_rate).collect();
    let resolved = outcomes.iter().filter(|(o, _)| o.resolved).count();
    let best = outcomes.iter().filter(|(o, b)| o.resolved && *b).count();
    Ok(SplittingRun {
        beta: Estimate::from_samples(&betas)?,
        resolved: Estimate::from_flags(outcomes.iter().map(|(o, _)| o.resolved))?,
        best_selected: if resolved == 0 {
            0.0
        } else {
            best as f64 / resolved as f64
        },
        rate: Estimate::from_samples(&rates)?,
        single_slot: Estimate::from_flags(outcomes.iter().map(|(o, _)| o.beta == 1))?,
    })
}

/// Reservation flavour of the baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineMode {
    /// Each slot carries an ID and a CQI as two real numbers.
    Analog,
    /// Each slot carries a `q`-bit CQI plus `ceil(log2 n)` ID bits.
    Digital { q: u32, n: usize },
}

/// Baseline reservation length in the slots of `timing`.
///
/// Analog: `beta (t + 2)`. Digital: `beta (t' + q + ceil(log2 n))`.
pub fn splitting_reservation_slots(beta: f64, timing: &TimingModel, mode: BaselineMode) -> f64 {
    let per_slot = match mode {
        BaselineMode::Analog => timing.t as f64 + 2.0,
        BaselineMode::Digital { q, n } => timing.t as f64 + q as f64 + id_bits(n) as f64,
    };
    beta * per_slot
}

/// Baseline reservation time `T_r` in seconds.
pub fn splitting_reservation_time(beta: f64, timing: &TimingModel, mode: BaselineMode) -> f64 {
    splitting_reservation_slots(beta, timing, mode) * timing.slot_seconds
}

/// Bits needed to address one of `n` users.
pub fn id_bits(n: usize) -> u32 {
    (n.max(1) as f64).log2().ceil() as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_gains;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lone_user_wins_first_slot() {
        let g = ChannelRealization::new(vec![0.3]).unwrap();
        let out = run_splitting(&g, DEFAULT_MAX_SLOTS);
        assert_eq!(out.beta, 1);
        assert!(out.resolved);
        assert_eq!(out.selected_user, Some(0));
    }

    #[test]
    fn resolved_trials_pick_the_strongest_user() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5000 {
            let g = sample_gains(100, &mut rng).unwrap();
            let out = run_splitting(&g, DEFAULT_MAX_SLOTS);
            assert!(out.resolved);
            assert_eq!(out.selected_user, Some(g.strongest()));
        }
    }

    #[test]
    fn budget_exhaustion_is_unresolved() {
        let g = ChannelRealization::new(vec![5.0, 5.0 + 1e-12, 0.1]).unwrap();
        let out = run_splitting(&g, 3);
        assert!(!out.resolved);
        assert_eq!(out.beta, 3);
        assert_eq!(out.achieved_rate, 0.0);
    }

    #[test]
    fn simulated_mean_beta_is_near_two_and_a_half() {
        let run = simulate_splitting(100, 20_000, DEFAULT_MAX_SLOTS, 3).unwrap();
        assert!((2.2..=2.8).contains(&run.beta.mean), "{:?}", run.beta);
        assert_eq!(run.resolved.mean, 1.0);
        assert_eq!(run.best_selected, 1.0);
        assert!(simulate_splitting(100, 0, 8, 3).is_err());
    }

    #[test]
    fn reservation_time_examples() {
        let ta = TimingModel::new(1e-9, 30e-6, 3.3334e-6).unwrap();
        assert_relative_eq!(
            splitting_reservation_slots(2.5, &ta, BaselineMode::Analog),
            8340.0
        );
        assert_relative_eq!(
            splitting_reservation_slots(1.0, &ta, BaselineMode::Analog),
            3336.0
        );
        assert_relative_eq!(
            splitting_reservation_time(2.5, &ta, BaselineMode::Analog),
            8340e-9,
            max_relative = 1e-12
        );
        let tb = TimingModel::new(1e-8, 30e-6, 3.3334e-6).unwrap();
        assert_relative_eq!(
            splitting_reservation_slots(2.5, &tb, BaselineMode::Digital { q: 8, n: 100 }),
            872.5
        );
        assert_eq!(id_bits(100), 7);
        assert_eq!(id_bits(128), 7);
    }
}
