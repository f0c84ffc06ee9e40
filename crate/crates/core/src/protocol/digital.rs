//! Digital reservation round: users send a single bit in the threshold
//! interval containing their gain; the base station serves a random user
//! of the highest interval it finds active, at the rate of that interval's
//! lower threshold.

use rand::Rng;

use crate::channel::{sample_gains, ChannelRealization};
use crate::error::{invalid, Result};
use crate::montecarlo::{run_frames, stream_rng, Estimate, FrameRng, MATRIX_STREAM};
use crate::sensing::{build_vector_digital, generate_bernoulli_matrix, measure, SensingMatrix};
use crate::thresholds::{digital_thresholds, ThresholdSet};

use super::{log2_1p, Decoder, DECODER_BUDGET_FACTOR};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitalParams {
    pub n: usize,
    /// Target contenders per interval.
    pub s: usize,
    /// Number of thresholds.
    pub k: usize,
    /// Slots per interval.
    pub r: usize,
    pub decoder: Decoder,
    /// Draw fresh signatures every frame.
    pub regenerate_matrix: bool,
    /// Give every interval its own signature matrix instead of reusing one.
    pub matrix_per_interval: bool,
    /// Measure from the top interval down and stop at the first active one.
    /// Changes the slots spent, never the selection.
    pub early_stop: bool,
}

impl DigitalParams {
    pub fn new(n: usize, s: usize, k: usize, r: usize, decoder: Decoder) -> Self {
        Self {
            n,
            s,
            k,
            r,
            decoder,
            regenerate_matrix: false,
            matrix_per_interval: false,
            early_stop: false,
        }
    }

    fn validate(&self) -> Result<ThresholdSet> {
        if self.r == 0 {
            return Err(invalid("digital protocol needs r >= 1 slots per interval"));
        }
        digital_thresholds(self.n, self.s, self.k)
    }

    pub fn decoder_budget(&self) -> usize {
        DECODER_BUDGET_FACTOR * self.s
    }

    fn matrix_count(&self) -> usize {
        if self.matrix_per_interval {
            self.k
        } else {
            1
        }
    }

    fn draw_matrices<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<SensingMatrix>> {
        (0..self.matrix_count())
            .map(|_| generate_bernoulli_matrix(self.r, self.n, rng))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DigitalRoundOutcome {
    /// Intervals (0-based, ascending) holding at least one user.
    pub active_intervals: Vec<usize>,
    /// Intervals in which the decoder found at least one user.
    pub detected_intervals: Vec<usize>,
    /// Number of users in each interval.
    pub occupancy: Vec<usize>,
    pub chosen_interval: Option<usize>,
    pub selected_user: Option<usize>,
    /// `log2(1 + zeta_chosen)` when the round succeeded, else 0.
    pub achieved_rate: f64,
    pub slots_used: usize,
    /// The chosen interval is the highest occupied one and the selected user
    /// really lies in it (or nothing was occupied and nothing was chosen).
    pub event_a: bool,
    /// Some user has `h >= zeta_1`.
    pub event_b: bool,
}

/// Runs one digital round. Interval `j` uses `matrices[j % matrices.len()]`;
/// `rng` drives the uniform choice among detected users.
pub fn run_digital_round<R: Rng + ?Sized>(
    params: &DigitalParams,
    gains: &ChannelRealization,
    matrices: &[SensingMatrix],
    rng: &mut R,
) -> Result<DigitalRoundOutcome> {
    let thresholds = params.validate()?;
    if matrices.is_empty() {
        return Err(invalid("need at least one signature matrix"));
    }
    if gains.len() != params.n || matrices.iter().any(|a| a.cols() != params.n) {
        return Err(invalid(
            "gains, matrices and n disagree on the number of users",
        ));
    }
    let k = thresholds.k();

    let mut occupancy = vec![0usize; k];
    let mut detected: Vec<Option<Vec<usize>>> = vec![None; k];
    let mut slots_used = 0;
    for j in (0..k).rev() {
        let (lo, hi) = thresholds.interval(j);
        let v = build_vector_digital(gains, lo, hi)?;
        occupancy[j] = v.support.len();
        let a = &matrices[j % matrices.len()];
        let y = measure(a, &v.values)?;
        slots_used += a.rows();
        let rec = params
            .decoder
            .decode(&y, a, params.decoder_budget(), (&v.support, &v.values));
        let found = !rec.support.is_empty();
        detected[j] = Some(rec.support);
        if params.early_stop && found {
            // Remaining occupancy is still recorded for diagnostics.
            for (i, occ) in occupancy.iter_mut().enumerate().take(j) {
                let (lo, hi) = thresholds.interval(i);
                *occ = gains.gains().iter().filter(|&&h| h >= lo && h < hi).count();
            }
            break;
        }
    }

    let active_intervals: Vec<usize> = (0..k).filter(|&j| occupancy[j] > 0).collect();
    let detected_intervals: Vec<usize> = (0..k)
        .filter(|&j| detected[j].as_ref().is_some_and(|s| !s.is_empty()))
        .collect();
    let chosen_interval = detected_intervals.last().copied();
    let selected_user = chosen_interval.map(|j| {
        let users = detected[j].as_ref().expect("chosen interval was decoded");
        users[rng.random_range(0..users.len())]
    });

    let event_b = gains.gains().iter().any(|&h| h >= thresholds.levels()[0]);
    let event_a = match (chosen_interval, selected_user) {
        (Some(j), Some(u)) => {
            let (lo, hi) = thresholds.interval(j);
            let h = gains.gains()[u];
            active_intervals.last() == Some(&j) && h >= lo && h < hi
        }
        _ => active_intervals.is_empty(),
    };
    let achieved_rate = match chosen_interval {
        Some(j) if event_a => log2_1p(thresholds.levels()[j]),
        _ => 0.0,
    };
    Ok(DigitalRoundOutcome {
        active_intervals,
        detected_intervals,
        occupancy,
        chosen_interval,
        selected_user,
        achieved_rate,
        slots_used,
        event_a,
        event_b,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DigitalFrame {
    pub rate: f64,
    pub event_a: bool,
    pub event_b: bool,
    pub chosen_interval: Option<usize>,
    pub occupancy: Vec<usize>,
    pub slots_used: usize,
}

/// Runs `frames` independent digital rounds. Frame `i` uses stream
/// `(master_seed, i)` for its gains, then its matrices when regenerating,
/// then the selection draw.
pub fn simulate_digital(
    params: &DigitalParams,
    frames: u64,
    master_seed: u64,
) -> Result<Vec<DigitalFrame>> {
    params.validate()?;
    if frames == 0 {
        return Err(invalid("need at least one frame"));
    }
    let shared = params.draw_matrices(&mut stream_rng(master_seed, MATRIX_STREAM))?;
    run_frames(frames, master_seed, |_, rng: &mut FrameRng| {
        let gains = sample_gains(params.n, rng)?;
        let fresh;
        let matrices = if params.regenerate_matrix {
            fresh = params.draw_matrices(rng)?;
            &fresh
        } else {
            &shared
        };
        let out = run_digital_round(params, &gains, matrices, rng)?;
        Ok(DigitalFrame {
            rate: out.achieved_rate,
            event_a: out.event_a,
            event_b: out.event_b,
            chosen_interval: out.chosen_interval,
            occupancy: out.occupancy,
            slots_used: out.slots_used,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DigitalRun {
    pub rate: Estimate,
    pub event_a: Estimate,
    pub event_b: Estimate,
    /// Per interval: frequency with which it was chosen and served.
    pub chosen: Vec<Estimate>,
    /// Per interval: mean number of occupants.
    pub occupancy: Vec<Estimate>,
    pub slots_used: Estimate,
}

impl DigitalRun {
    pub fn from_frames(k: usize, frames: &[DigitalFrame]) -> Result<Self> {
        let rates: Vec<f64> = frames.iter().map(|f| f.rate).collect();
        let chosen = (0..k)
            .map(|j| {
                Estimate::from_flags(
                    frames
                        .iter()
                        .map(|f| f.chosen_interval == Some(j) && f.event_a),
                )
            })
            .collect::<Result<_>>()?;
        let occupancy = (0..k)
            .map(|j| {
                let xs: Vec<f64> = frames.iter().map(|f| f.occupancy[j] as f64).collect();
                Estimate::from_samples(&xs)
            })
            .collect::<Result<_>>()?;
        let slots: Vec<f64> = frames.iter().map(|f| f.slots_used as f64).collect();
        Ok(Self {
            rate: Estimate::from_samples(&rates)?,
            event_a: Estimate::from_flags(frames.iter().map(|f| f.event_a))?,
            event_b: Estimate::from_flags(frames.iter().map(|f| f.event_b))?,
            chosen,
            occupancy,
            slots_used: Estimate::from_samples(&slots)?,
        })
    }
}

/// Mean digital rate over `frames` frames, deterministic in `master_seed`.
pub fn empirical_digital_rate(
    params: &DigitalParams,
    frames: u64,
    master_seed: u64,
) -> Result<DigitalRun> {
    DigitalRun::from_frames(params.k, &simulate_digital(params, frames, master_seed)?)
}
