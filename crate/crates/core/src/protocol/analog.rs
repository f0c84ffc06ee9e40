//! Analog reservation round: strong users send their gain, the base station
//! recovers the sparse vector and reserves the frame for the largest
//! recovered value.

use crate::channel::{argmax, sample_gains, ChannelRealization};
use crate::error::{invalid, Result};
use crate::montecarlo::{run_frames, stream_rng, Estimate, MATRIX_STREAM};
use crate::sensing::{build_vector_analog, generate_bernoulli_matrix, measure, SensingMatrix};
use crate::thresholds::analog_threshold;

use super::{log2_1p, Decoder, DECODER_BUDGET_FACTOR};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalogParams {
    pub n: usize,
    /// Target number of contenders.
    pub s: usize,
    /// Reservation slots used for compressive sensing.
    pub r: usize,
    pub decoder: Decoder,
    /// Draw a fresh signature matrix every frame instead of one per run.
    pub regenerate_matrix: bool,
}

impl AnalogParams {
    pub fn new(n: usize, s: usize, r: usize, decoder: Decoder) -> Self {
        Self {
            n,
            s,
            r,
            decoder,
            regenerate_matrix: false,
        }
    }

    fn validate(&self) -> Result<f64> {
        if self.r == 0 {
            return Err(invalid("analog protocol needs r >= 1 measurement slots"));
        }
        analog_threshold(self.n, self.s)
    }

    pub fn decoder_budget(&self) -> usize {
        DECODER_BUDGET_FACTOR * self.s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogRoundOutcome {
    /// Users with `h >= zeta`, ascending.
    pub contenders: Vec<usize>,
    /// Support reported by the decoder, ascending.
    pub recovered: Vec<usize>,
    /// Recovered support equals the true contender set.
    pub event_a: bool,
    /// At least one user contended.
    pub event_b: bool,
    pub selected_user: Option<usize>,
    /// Selected user is the strongest contender, whether or not the full
    /// support was recovered.
    pub best_found: bool,
    /// `log2(1 + h_selected)` when both events hold, else 0.
    pub achieved_rate: f64,
    pub slots_used: usize,
}

/// Threshold, contend, measure, recover, refine, select.
pub fn run_analog_round(
    params: &AnalogParams,
    gains: &ChannelRealization,
    a: &SensingMatrix,
) -> Result<AnalogRoundOutcome> {
    let zeta = params.validate()?;
    if gains.len() != params.n || a.cols() != params.n {
        return Err(invalid(
            "gains, matrix and n disagree on the number of users",
        ));
    }
    let v = build_vector_analog(gains, zeta);
    let y = measure(a, &v.values)?;
    let rec = params
        .decoder
        .decode(&y, a, params.decoder_budget(), (&v.support, &v.values));

    let event_b = !v.support.is_empty();
    let event_a = rec.support == v.support;
    let selected_user = (!rec.support.is_empty()).then(|| rec.support[argmax(&rec.values)]);
    let best_found = match selected_user {
        Some(u) => v
            .support
            .iter()
            .all(|&i| gains.gains()[i] <= gains.gains()[u]),
        None => !event_b,
    };
    let achieved_rate = match selected_user {
        Some(u) if event_a && event_b => log2_1p(gains.gains()[u]),
        _ => 0.0,
    };
    Ok(AnalogRoundOutcome {
        contenders: v.support,
        recovered: rec.support,
        event_a,
        event_b,
        selected_user,
        best_found,
        achieved_rate,
        slots_used: a.rows(),
    })
}

/// Per-frame record kept by the Monte Carlo driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalogFrame {
    pub rate: f64,
    pub event_a: bool,
    pub event_b: bool,
    pub best_found: bool,
    pub contenders: usize,
    /// Gain of the selected user when the frame was served.
    pub served_gain: Option<f64>,
}

/// Runs `frames` independent analog rounds. Frame `i` draws its gains (and
/// its matrix, when regenerating) from the stream `(master_seed, i)`; the
/// shared matrix comes from the stream `(master_seed, MATRIX_STREAM)`.
pub fn simulate_analog(
    params: &AnalogParams,
    frames: u64,
    master_seed: u64,
) -> Result<Vec<AnalogFrame>> {
    params.validate()?;
    if frames == 0 {
        return Err(invalid("need at least one frame"));
    }
    let shared = generate_bernoulli_matrix(
        params.r,
        params.n,
        &mut stream_rng(master_seed, MATRIX_STREAM),
    )?;
    run_frames(frames, master_seed, |_, rng| {
        let gains = sample_gains(params.n, rng)?;
        let fresh;
        let a = if params.regenerate_matrix {
            fresh = generate_bernoulli_matrix(params.r, params.n, rng)?;
            &fresh
        } else {
            &shared
        };
        let out = run_analog_round(params, &gains, a)?;
        Ok(AnalogFrame {
            rate: out.achieved_rate,
            event_a: out.event_a,
            event_b: out.event_b,
            best_found: out.best_found,
            contenders: out.contenders.len(),
            served_gain: (out.achieved_rate > 0.0)
                .then(|| out.selected_user.map(|u| gains.gains()[u]))
                .flatten(),
        })
    })
    .into_iter()
    .collect()
}

/// Aggregate of an analog Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalogRun {
    /// Mean achieved rate, failed and silent frames counted as 0.
    pub rate: Estimate,
    pub event_a: Estimate,
    pub event_b: Estimate,
    pub best_found: Estimate,
    /// Fraction of frames with both events.
    pub a_and_b: f64,
    /// Mean rate over frames with both events (0 if there were none).
    pub rate_given_ab: f64,
}

impl AnalogRun {
    pub fn from_frames(frames: &[AnalogFrame]) -> Result<Self> {
        let rates: Vec<f64> = frames.iter().map(|f| f.rate).collect();
        let served: Vec<f64> = frames
            .iter()
            .filter(|f| f.event_a && f.event_b)
            .map(|f| f.rate)
            .collect();
        Ok(Self {
            rate: Estimate::from_samples(&rates)?,
            event_a: Estimate::from_flags(frames.iter().map(|f| f.event_a))?,
            event_b: Estimate::from_flags(frames.iter().map(|f| f.event_b))?,
            best_found: Estimate::from_flags(frames.iter().map(|f| f.best_found))?,
            a_and_b: served.len() as f64 / frames.len() as f64,
            rate_given_ab: Estimate::from_samples(&served)
                .map(|e| e.mean)
                .unwrap_or(0.0),
        })
    }
}

/// Mean analog rate over `frames` frames, deterministic in `master_seed`.
pub fn empirical_analog_rate(
    params: &AnalogParams,
    frames: u64,
    master_seed: u64,
) -> Result<AnalogRun> {
    AnalogRun::from_frames(&simulate_analog(params, frames, master_seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn matrix(r: usize, n: usize, seed: u64) -> SensingMatrix {
        generate_bernoulli_matrix(r, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn silent_frame() {
        let p = AnalogParams::new(10, 1, 6, Decoder::Greedy);
        let g = ChannelRealization::new(vec![0.5; 10]).unwrap();
        let out = run_analog_round(&p, &g, &matrix(6, 10, 1)).unwrap();
        assert!(!out.event_b);
        assert!(out.event_a);
        assert_eq!(out.selected_user, None);
        assert_eq!(out.achieved_rate, 0.0);
    }

    #[test]
    fn single_strong_user_is_served() {
        let p = AnalogParams::new(100, 1, 24, Decoder::MaxCorrelation);
        let mut gains = vec![0.2; 100];
        gains[37] = 5.5;
        let g = ChannelRealization::new(gains).unwrap();
        for seed in 0..20 {
            let out = run_analog_round(&p, &g, &matrix(24, 100, seed)).unwrap();
            assert!(out.event_a && out.event_b, "seed {seed}");
            assert_eq!(out.selected_user, Some(37));
            assert!((out.achieved_rate - 6.5f64.log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_zero_slots_and_frames() {
        let p = AnalogParams::new(100, 1, 0, Decoder::Greedy);
        assert!(empirical_analog_rate(&p, 10, 1).is_err());
        let p = AnalogParams::new(100, 1, 10, Decoder::Greedy);
        assert!(empirical_analog_rate(&p, 0, 1).is_err());
    }

    #[test]
    fn correct_selection_when_support_recovered() {
        let p = AnalogParams::new(100, 5, 40, Decoder::Greedy);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = matrix(40, 100, 99);
        let zeta = analog_threshold(100, 5).unwrap();
        for _ in 0..2000 {
            let g = sample_gains(100, &mut rng).unwrap();
            let out = run_analog_round(&p, &g, &a).unwrap();
            if out.event_a && out.event_b {
                assert_eq!(out.selected_user, Some(g.strongest()));
                assert!(g.gains()[g.strongest()] >= zeta);
            }
            if let Some(u) = out.selected_user {
                assert!(out.recovered.contains(&u));
            }
        }
    }

    #[test]
    fn rate_decomposes_into_conditional_mean_times_probability() {
        let p = AnalogParams::new(100, 3, 30, Decoder::Greedy);
        let run = empirical_analog_rate(&p, 4000, 8).unwrap();
        let recomposed = run.rate_given_ab * run.a_and_b;
        assert!((run.rate.mean - recomposed).abs() < 1e-12);
    }
}
