mod common;

use csmac::analytics::max_order_rate_above;
use csmac::channel::GainDistribution;
use csmac::montecarlo::with_threads;
use csmac::protocol::analog::{empirical_analog_rate, simulate_analog, AnalogParams};
use csmac::protocol::digital::{empirical_digital_rate, simulate_digital, DigitalParams};
use csmac::protocol::Decoder;
use csmac::splitting::simulate_splitting;
use csmac::thresholds::{analog_threshold, digital_thresholds};

use common::*;

const FRAMES: u64 = 20_000;

#[test]
fn ideal_analog_rate_is_the_thresholded_order_statistic() {
    for s in [1, 3, 5] {
        let params = AnalogParams::new(100, s, 30, Decoder::Ideal);
        let run = empirical_analog_rate(&params, FRAMES, 11).unwrap();
        let zeta = analog_threshold(100, s).unwrap();
        let exact = max_order_rate_above(100, zeta).unwrap();
        assert!(
            run.rate.within(exact, 3.0),
            "s={s}: {:?} vs {exact}",
            run.rate
        );
        assert!((exact - order_statistic_rate_oracle(100, zeta)).abs() < 1e-6);
    }
}

#[test]
fn served_gain_follows_the_conditional_maximum() {
    let (n, s) = (100, 3);
    let params = AnalogParams::new(n, s, 30, Decoder::Ideal);
    let zeta = analog_threshold(n, s).unwrap();
    let mut served: Vec<f64> = simulate_analog(&params, FRAMES, 5)
        .unwrap()
        .iter()
        .filter_map(|f| f.served_gain)
        .collect();
    let d = ks_distance(&mut served, |x| conditional_order_statistic_cdf(x, n, zeta));
    // 1.63 / sqrt(N) is the 1% critical value.
    let critical = 1.63 / (served.len() as f64).sqrt();
    assert!(d < critical, "KS {d} >= {critical}");
}

#[test]
fn contention_probability_matches_threshold_loss() {
    for s in [1, 5] {
        let params = AnalogParams::new(100, s, 30, Decoder::Ideal);
        let run = empirical_analog_rate(&params, FRAMES, 3).unwrap();
        let expected = 1.0 - (1.0 - s as f64 / 100.0).powi(100);
        assert!(
            run.event_b.within(expected, 3.0),
            "s={s}: {:?} vs {expected}",
            run.event_b
        );
    }
}

#[test]
fn default_analog_decoder_recovers_nearly_every_frame() {
    let params = AnalogParams::new(100, 5, 40, Decoder::GreedyNonNegative);
    let run = empirical_analog_rate(&params, 5_000, 9).unwrap();
    assert!(run.event_a.mean > 0.99, "{:?}", run.event_a);
}

#[test]
fn digital_occupancy_and_selection_laws() {
    let (n, s, k) = (100, 1, 4);
    let params = DigitalParams::new(n, s, k, 12, Decoder::Ideal);
    let run = empirical_digital_rate(&params, FRAMES, 21).unwrap();
    let set = digital_thresholds(n, s, k).unwrap();
    for j in 0..k {
        let (lo, hi) = set.interval(j);
        let mass = GainDistribution::cdf(hi) - GainDistribution::cdf(lo);
        assert!(
            run.occupancy[j].within(n as f64 * mass, 3.5),
            "interval {j}: {:?}",
            run.occupancy[j]
        );
        let p = highest_interval_probability(n, s, k, j);
        assert!(
            run.chosen[j].within(p, 3.5),
            "interval {j}: {:?} vs {p}",
            run.chosen[j]
        );
    }
}

#[test]
fn early_stop_saves_slots_without_changing_the_rate() {
    let mut params = DigitalParams::new(100, 1, 4, 12, Decoder::BinaryL0);
    let full = empirical_digital_rate(&params, 2_000, 4).unwrap();
    params.early_stop = true;
    let early = empirical_digital_rate(&params, 2_000, 4).unwrap();
    assert_eq!(full.rate, early.rate);
    assert!(early.slots_used.mean < full.slots_used.mean);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let analog = AnalogParams::new(100, 5, 30, Decoder::GreedyNonNegative);
    let digital = DigitalParams::new(100, 2, 4, 10, Decoder::BinaryL0);
    let run = |threads| {
        with_threads(threads, || {
            (
                simulate_analog(&analog, 3_000, 8).unwrap(),
                simulate_digital(&digital, 3_000, 8).unwrap(),
                simulate_splitting(100, 3_000, 64, 8).unwrap(),
            )
        })
        .unwrap()
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn splitting_single_slot_probability() {
    for n in [10, 100] {
        let run = simulate_splitting(n, 50_000, 64, 2).unwrap();
        let expected = (1.0 - 1.0 / n as f64).powi(n as i32 - 1);
        assert!(
            run.single_slot.within(expected, 3.0),
            "n={n}: {:?} vs {expected}",
            run.single_slot
        );
        assert_eq!(run.best_selected, 1.0);
    }
}
