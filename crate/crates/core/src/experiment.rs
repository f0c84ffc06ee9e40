//! Single-point experiments and the comparison against the splitting
//! baseline.

use std::fmt;

use crate::analytics::{
    analog_rate_closed_form, break_even_beta, digital_rate_alternative, max_gain_rate,
    total_throughput, BreakEven, BreakEvenParams, ThroughputReport, TimingModel,
};
use crate::config::{BetaMode, Scheme, SystemConfig};
use crate::error::Result;
use crate::montecarlo::Estimate;
use crate::protocol::{empirical_analog_rate, empirical_digital_rate};
use crate::splitting::{simulate_splitting, splitting_reservation_slots, BaselineMode};

/// Scheme identifiers used in result rows.
pub const CS_ANALOG: &str = "cs-analog";
pub const CS_DIGITAL: &str = "cs-digital";
pub const BASELINE_ANALOG: &str = "qin-berry-analog";
pub const BASELINE_DIGITAL: &str = "qin-berry-digital";
pub const ZERO_RESERVATION: &str = "zero-reservation";

/// One result row. Fields that do not apply to a scheme are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: String,
    pub figure: Option<u8>,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub n: usize,
    pub s: Option<usize>,
    pub k: Option<usize>,
    pub c: Option<f64>,
    pub q: Option<u32>,
    pub slot_seconds: f64,
    pub r: Option<u64>,
    /// Reservation length in slots; fractional for the baseline's mean.
    pub m: f64,
    pub p: u64,
    pub efficiency: f64,
    pub rate_mean: f64,
    pub rate_stderr: f64,
    pub throughput: f64,
    pub infeasible: bool,
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub report: ThroughputReport,
    pub row: SweepRow,
    pub rate: Estimate,
    /// Recovery success frequency; `None` when the frame was infeasible.
    pub event_a: Option<Estimate>,
    /// Frequency of at least one contender.
    pub event_b: Option<Estimate>,
}

fn cs_timing(cfg: &SystemConfig, r: u64) -> Result<TimingModel> {
    let timing = cfg.timing()?;
    let m = match cfg.scheme {
        Scheme::Analog => r + timing.t,
        Scheme::Digital => cfg.k as u64 * r + timing.t,
    };
    Ok(TimingModel { m, ..timing })
}

/// Runs the configured protocol for `cfg.frames` frames and combines the
/// empirical rate with the frame timing. An over-full frame is not
/// simulated; its row is flagged with zero throughput.
pub fn run_experiment(cfg: &SystemConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let r = cfg.slot_budget()?;
    let timing = cs_timing(cfg, r)?;
    let (scheme, k) = match cfg.scheme {
        Scheme::Analog => (CS_ANALOG, None),
        Scheme::Digital => (CS_DIGITAL, Some(cfg.k)),
    };
    let (rate, event_a, event_b) = if !timing.is_feasible() {
        (
            Estimate {
                mean: 0.0,
                stderr: 0.0,
                samples: 0,
            },
            None,
            None,
        )
    } else {
        match cfg.scheme {
            Scheme::Analog => {
                let run =
                    empirical_analog_rate(&cfg.analog_params()?, cfg.frames, cfg.master_seed)?;
                (run.rate, Some(run.event_a), Some(run.event_b))
            }
            Scheme::Digital => {
                let run =
                    empirical_digital_rate(&cfg.digital_params()?, cfg.frames, cfg.master_seed)?;
                (run.rate, Some(run.event_a), Some(run.event_b))
            }
        }
    };
    let mut report =
        total_throughput(rate.mean, &timing).with_component("rate_stderr", rate.stderr);
    if let (Some(a), Some(b)) = (event_a, event_b) {
        report = report
            .with_component("p_event_a", a.mean)
            .with_component("p_event_b", b.mean);
    }
    let row = SweepRow {
        scheme: scheme.to_string(),
        figure: None,
        sweep_var: if cfg.r.is_some() { "r" } else { "c" }.to_string(),
        sweep_value: cfg.r.map_or(cfg.c, |r| r as f64),
        n: cfg.n,
        s: Some(cfg.s),
        k,
        c: cfg.r.is_none().then_some(cfg.c),
        q: None,
        slot_seconds: cfg.slot_seconds,
        r: Some(r),
        m: timing.m as f64,
        p: timing.p,
        efficiency: report.efficiency,
        rate_mean: rate.mean,
        rate_stderr: rate.stderr,
        throughput: report.throughput,
        infeasible: !timing.is_feasible(),
    };
    Ok(ExperimentOutcome {
        report,
        row,
        rate,
        event_a,
        event_b,
    })
}

/// Average baseline slot count per `cfg.beta_mode`, with its standard error
/// (zero for a fixed value).
pub fn baseline_beta(cfg: &SystemConfig) -> Result<Estimate> {
    match cfg.beta_mode {
        BetaMode::Fixed(beta) => Ok(Estimate {
            mean: beta,
            stderr: 0.0,
            samples: 0,
        }),
        BetaMode::Simulated => Ok(simulate_splitting(
            cfg.n,
            cfg.splitting_trials,
            cfg.splitting_max_slots,
            cfg.master_seed,
        )?
        .beta),
    }
}

fn baseline_mode(cfg: &SystemConfig, q: u32) -> BaselineMode {
    match cfg.scheme {
        Scheme::Analog => BaselineMode::Analog,
        Scheme::Digital => BaselineMode::Digital { q, n: cfg.n },
    }
}

/// Splitting-baseline row: best-user rate with the baseline's reservation
/// overhead for `beta` slots of CQI feedback.
pub fn baseline_row(cfg: &SystemConfig, q: u32, beta: f64) -> Result<SweepRow> {
    let timing = cfg.timing()?;
    let mode = baseline_mode(cfg, q);
    let slots = splitting_reservation_slots(beta, &timing, mode);
    let infeasible = slots > timing.p as f64;
    let efficiency = if infeasible {
        0.0
    } else {
        1.0 - slots / timing.p as f64
    };
    let rate = max_gain_rate(cfg.n)?;
    let (scheme, q) = match mode {
        BaselineMode::Analog => (BASELINE_ANALOG, None),
        BaselineMode::Digital { q, .. } => (BASELINE_DIGITAL, Some(q)),
    };
    Ok(SweepRow {
        scheme: scheme.to_string(),
        figure: None,
        sweep_var: "beta".to_string(),
        sweep_value: beta,
        n: cfg.n,
        s: None,
        k: None,
        c: None,
        q,
        slot_seconds: cfg.slot_seconds,
        r: None,
        m: slots,
        p: timing.p,
        efficiency,
        rate_mean: rate,
        rate_stderr: 0.0,
        throughput: efficiency * rate,
        infeasible,
    })
}

/// Upper reference: the best user served with no reservation overhead.
pub fn zero_reservation_row(cfg: &SystemConfig) -> Result<SweepRow> {
    let timing = cfg.timing()?;
    let rate = max_gain_rate(cfg.n)?;
    Ok(SweepRow {
        scheme: ZERO_RESERVATION.to_string(),
        figure: None,
        sweep_var: "none".to_string(),
        sweep_value: 0.0,
        n: cfg.n,
        s: None,
        k: None,
        c: None,
        q: None,
        slot_seconds: cfg.slot_seconds,
        r: None,
        m: 0.0,
        p: timing.p,
        efficiency: 1.0,
        rate_mean: rate,
        rate_stderr: 0.0,
        throughput: rate,
        infeasible: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The CS reservation is shorter at the baseline's slot count.
    CsWins,
    /// The baseline reservation is shorter.
    BaselineWins,
    /// Both reservations take the same time.
    Tie,
    /// The CS reservation is shorter for every slot count.
    CsAlwaysBetter,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::CsWins => "CS wins",
            Verdict::BaselineWins => "baseline wins",
            Verdict::Tie => "tie",
            Verdict::CsAlwaysBetter => "CS always better",
        })
    }
}

/// Reservation-time and throughput comparison at one operating point, using
/// closed-form rates for both schemes.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub scheme: Scheme,
    pub r: u64,
    pub cs_reservation_seconds: f64,
    pub baseline_reservation_seconds: f64,
    pub beta: Estimate,
    pub break_even: BreakEven,
    pub verdict: Verdict,
    pub cs_rate: f64,
    pub baseline_rate: f64,
    pub cs_throughput: f64,
    pub baseline_throughput: f64,
    pub cs_infeasible: bool,
}

const TIE_RELATIVE: f64 = 1e-12;

pub fn compare_schemes(cfg: &SystemConfig) -> Result<Comparison> {
    cfg.validate()?;
    let r = cfg.slot_budget()?;
    let timing = cs_timing(cfg, r)?;
    let beta = baseline_beta(cfg)?;
    let (cs_rate, params) = match cfg.scheme {
        Scheme::Analog => (
            analog_rate_closed_form(cfg.n, cfg.s)?.rate,
            BreakEvenParams::Analog { t: timing.t, r },
        ),
        Scheme::Digital => (
            digital_rate_alternative(cfg.n, cfg.s, cfg.k)?,
            BreakEvenParams::Digital {
                t: timing.t,
                k: cfg.k as u64,
                r,
                q: cfg.q,
                n: cfg.n,
            },
        ),
    };
    let break_even = break_even_beta(&params);
    let baseline = baseline_row(cfg, cfg.q, beta.mean)?;
    let cs_seconds = timing.m as f64 * timing.slot_seconds;
    let baseline_seconds = baseline.m * timing.slot_seconds;
    let verdict = match break_even {
        BreakEven::AlwaysBetter => Verdict::CsAlwaysBetter,
        BreakEven::Threshold(x) if (beta.mean - x).abs() <= TIE_RELATIVE * x => Verdict::Tie,
        BreakEven::Threshold(x) if beta.mean > x => Verdict::CsWins,
        BreakEven::Threshold(_) => Verdict::BaselineWins,
    };
    Ok(Comparison {
        scheme: cfg.scheme,
        r,
        cs_reservation_seconds: cs_seconds,
        baseline_reservation_seconds: baseline_seconds,
        beta,
        break_even,
        verdict,
        cs_rate,
        baseline_rate: baseline.rate_mean,
        cs_throughput: total_throughput(cs_rate, &timing).throughput,
        baseline_throughput: baseline.throughput,
        cs_infeasible: !timing.is_feasible(),
    })
}
