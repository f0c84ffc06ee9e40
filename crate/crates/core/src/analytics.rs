//! Closed-form throughput, reservation-time and break-even expressions.
//!
//! Slot budgets use the natural logarithm for the analog protocol
//! (`r = ceil(c s ln(n/s))`) and base 2 for the digital protocol
//! (`r = ceil(c log2 n)`).

use crate::channel::{conditional_max_pdf, GainDistribution};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Integral};
use crate::thresholds::{analog_threshold, digital_thresholds};

/// Absolute tolerance for the throughput integrals.
pub const QUADRATURE_TOL: f64 = 1e-9;
/// Integration window past the lower limit; the integrands decay like
/// `e^{-x}` so the tail beyond is below `1e-24` times a log factor.
pub const INTEGRATION_SPAN: f64 = 60.0;
const MAX_INTERVALS: usize = 2000;

/// Log base used for the analog slot budget.
pub const ANALOG_SLOT_LOG_BASE: f64 = std::f64::consts::E;
/// Log base used for the digital slot budget.
pub const DIGITAL_SLOT_LOG_BASE: f64 = 2.0;

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Upper bound on `int_L^inf scale * log2(1+x) e^{-(x - lo)} dx`.
fn tail_bound(scale: f64, lo: f64, upper: f64) -> f64 {
    scale
        * (-(upper - lo)).exp()
        * (log2_1p(upper) + 1.0 / ((1.0 + upper) * std::f64::consts::LN_2))
}

fn integrate_window<F: Fn(f64) -> f64>(f: F, lo: f64, tail_scale: f64) -> Result<Integral> {
    let hi = lo + INTEGRATION_SPAN;
    let tail = tail_bound(tail_scale, lo, hi);
    if tail > QUADRATURE_TOL {
        return Err(Error::Numerical(format!(
            "integration tail bound {tail:e} exceeds tolerance"
        )));
    }
    integrate(f, lo, hi, QUADRATURE_TOL, 0.0, MAX_INTERVALS)
}

/// Analog rate with its intermediate quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalogRate {
    /// `R_a = (1 - P(B^c)) E[log2(1 + gamma) | B]`.
    pub rate: f64,
    /// `P(B^c) = (1 - s/n)^n`, probability that nobody contends.
    pub prob_silent: f64,
    /// `E[log2(1 + gamma) | B]` with `gamma` the largest of `s` conditioned gains.
    pub conditional_mean: f64,
    pub quadrature_error: f64,
}

/// `E[log2(1 + gamma)]` for `gamma` the maximum of `s` gains conditioned
/// on exceeding `zeta = -ln(s/n)`, integrated against
/// [`conditional_max_pdf`].
pub fn conditional_max_expected_rate(n: usize, s: usize) -> Result<Integral> {
    let zeta = analog_threshold(n, s)?;
    integrate_window(
        |x| log2_1p(x) * conditional_max_pdf(x, s, zeta, n).unwrap_or(0.0),
        zeta,
        s as f64,
    )
}

/// Closed-form analog rate,
/// `(1 - (1 - s/n)^n) (n^s / s^{s-1}) int_zeta^inf log2(1+x) e^{-x} (s/n - e^{-x})^{s-1} dx`.
pub fn analog_rate_closed_form(n: usize, s: usize) -> Result<AnalogRate> {
    let integral = conditional_max_expected_rate(n, s)?;
    let prob_silent = (1.0 - s as f64 / n as f64).powi(n as i32);
    Ok(AnalogRate {
        rate: (1.0 - prob_silent) * integral.value,
        prob_silent,
        conditional_mean: integral.value,
        quadrature_error: integral.error,
    })
}

/// `E[log2(1 + max h) ; max h >= zeta]` over all `n` users, i.e.
/// `int_zeta^inf log2(1+x) d[F(x)^n]`.
///
/// This is the rate the analog protocol actually delivers under ideal
/// recovery, where the number of contenders is Binomial(n, s/n) rather than
/// exactly `s`. `zeta = 0` gives the zero-overhead best-user rate.
pub fn max_order_rate_above(n: usize, zeta: f64) -> Result<f64> {
    if n == 0 || zeta < 0.0 || !zeta.is_finite() {
        return Err(invalid(format!(
            "need n >= 1 and finite zeta >= 0, got n={n}, zeta={zeta}"
        )));
    }
    let nf = n as f64;
    let density = |x: f64| nf * (-x).exp() * GainDistribution::cdf(x).powi(n as i32 - 1);
    let start = zeta.max(0.0);
    // The density peaks near ln n; cover that and the decaying tail.
    let split = start.max(nf.ln());
    let head = if split > start {
        integrate(
            |x| log2_1p(x) * density(x),
            start,
            split,
            QUADRATURE_TOL,
            0.0,
            MAX_INTERVALS,
        )?
        .value
    } else {
        0.0
    };
    let tail = integrate_window(|x| log2_1p(x) * density(x), split, nf)?;
    Ok(head + tail.value)
}

/// Analog protocol rate with exact order statistics, threshold `-ln(s/n)`.
pub fn analog_rate_order_statistic(n: usize, s: usize) -> Result<f64> {
    max_order_rate_above(n, analog_threshold(n, s)?)
}

/// Rate of always serving the best of `n` users, `E[log2(1 + max h)]`.
pub fn max_gain_rate(n: usize) -> Result<f64> {
    max_order_rate_above(n, 0.0)
}

/// `log2(1 + ln n - ln ln n) (1 - 1/n)`: the analog lower bound with
/// `s = ln n`.
pub fn analog_asymptotic_bound(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(invalid("asymptotic bound needs n >= 3"));
    }
    let ln = (n as f64).ln();
    Ok(log2_1p(ln - ln.ln()) * (1.0 - 1.0 / n as f64))
}

/// `log2(1 + ln n)`, the centralized best-user rate.
pub fn centralized_optimum(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid("centralized optimum needs n >= 2"));
    }
    Ok(log2_1p((n as f64).ln()))
}

/// Contribution of one digital threshold interval `Q_i = [zeta_i, zeta_{i+1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalTerm {
    pub zeta: f64,
    /// `log2(1 + zeta_i)`.
    pub rate: f64,
    /// `P(Q_i) = F(zeta_{i+1}) - F(zeta_i)`.
    pub interval_probability: f64,
    /// `([F(zeta_{i+1})]^n - [F(zeta_i)]^n) / (F(zeta_{i+1}) - F(zeta_i))`.
    pub selection_probability: f64,
    /// `[F(zeta_{i+1})]^n - [F(zeta_i)]^n`: probability that `Q_i` is the
    /// highest occupied interval.
    pub highest_active_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DigitalRate {
    /// `(1 - [F(zeta_1)]^n) sum_i log2(1 + zeta_i) ([F(zeta_{i+1})]^n - [F(zeta_i)]^n)`.
    pub rate: f64,
    /// The same sum without the leading `(1 - [F(zeta_1)]^n)` factor; see
    /// [`digital_rate_alternative`].
    pub rate_alternative: f64,
    /// `[F(zeta_1)]^n = (1 - s k / n)^n`.
    pub prob_silent: f64,
    pub terms: Vec<IntervalTerm>,
}

/// Digital rate evaluated exactly as the closed form is written, with the
/// per-interval terms.
pub fn digital_rate_closed_form(n: usize, s: usize, k: usize) -> Result<DigitalRate> {
    let set = digital_thresholds(n, s, k)?;
    let power = |x: f64| GainDistribution::cdf(x).powi(n as i32);
    let terms: Vec<IntervalTerm> = (0..set.k())
        .map(|j| {
            let (lo, hi) = set.interval(j);
            let (f_lo, f_hi) = (GainDistribution::cdf(lo), GainDistribution::cdf(hi));
            let mass = power(hi) - power(lo);
            IntervalTerm {
                zeta: lo,
                rate: log2_1p(lo),
                interval_probability: f_hi - f_lo,
                selection_probability: mass / (f_hi - f_lo),
                highest_active_probability: mass,
            }
        })
        .collect();
    let prob_silent = power(set.levels()[0]);
    let sum: f64 = terms
        .iter()
        .map(|t| t.rate * t.highest_active_probability)
        .sum();
    Ok(DigitalRate {
        rate: (1.0 - prob_silent) * sum,
        rate_alternative: sum,
        prob_silent,
        terms,
    })
}

/// `sum_i log2(1 + zeta_i) ([F(zeta_{i+1})]^n - [F(zeta_i)]^n)`.
///
/// Each summand is already the unconditional probability that `Q_i` is the
/// highest occupied interval, so the sum is the expected rate including the
/// silent-frame loss. Monte Carlo of the protocol agrees with this reading.
pub fn digital_rate_alternative(n: usize, s: usize, k: usize) -> Result<f64> {
    Ok(digital_rate_closed_form(n, s, k)?.rate_alternative)
}

fn check_budget_constant(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!(
            "slot-budget constant c must be positive, got {c}"
        )));
    }
    Ok(())
}

/// `r = ceil(c s ln(n/s))`, at least 1.
pub fn reservation_slots_analog(c: f64, s: usize, n: usize) -> Result<u64> {
    check_budget_constant(c)?;
    if s == 0 || s >= n {
        return Err(invalid(format!("need 1 <= s < n, got s={s}, n={n}")));
    }
    let r = (c * s as f64 * (n as f64 / s as f64).ln()).ceil();
    Ok((r as u64).max(1))
}

/// `r = ceil(c log2 n)` per threshold interval, at least 1.
pub fn reservation_slots_digital(c: f64, n: usize) -> Result<u64> {
    check_budget_constant(c)?;
    if n < 2 {
        return Err(invalid("need n >= 2"));
    }
    Ok(((c * (n as f64).log2()).ceil() as u64).max(1))
}

/// Snaps `x` to the nearest integer when within a relative `1e-9`, so that
/// ratios like `30e-6 / 1e-9` are not pushed across an integer by rounding.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// Slot/frame bookkeeping for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingModel {
    /// Slot duration `T_s` (`T_a` analog, `T_b` digital).
    pub slot_seconds: f64,
    /// Coherence time `T_c`, equal to the frame length.
    pub coherence_seconds: f64,
    pub rtt_seconds: f64,
    /// `ceil(RTT / T_s)`.
    pub t: u64,
    /// `floor(T_c / T_s)`.
    pub p: u64,
    /// Reservation slots.
    pub m: u64,
}

impl TimingModel {
    pub fn new(slot_seconds: f64, coherence_seconds: f64, rtt_seconds: f64) -> Result<Self> {
        for (name, v) in [
            ("slot_seconds", slot_seconds),
            ("coherence_seconds", coherence_seconds),
            ("rtt_seconds", rtt_seconds),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            slot_seconds,
            coherence_seconds,
            rtt_seconds,
            t: snap(rtt_seconds / slot_seconds).ceil() as u64,
            p: snap(coherence_seconds / slot_seconds).floor() as u64,
            m: 0,
        })
    }

    /// Copy with `m` reservation slots; fails when `m > p`.
    pub fn with_reservation(&self, m: u64) -> Result<Self> {
        if m > self.p {
            return Err(Error::InfeasibleFrame {
                needed: m,
                available: self.p,
            });
        }
        Ok(Self { m, ..*self })
    }

    /// `T_r = m T_s`.
    pub fn reservation_seconds(&self) -> f64 {
        self.m as f64 * self.slot_seconds
    }

    /// `T_d = (p - m) T_s`.
    pub fn data_seconds(&self) -> f64 {
        self.p.saturating_sub(self.m) as f64 * self.slot_seconds
    }

    pub fn is_feasible(&self) -> bool {
        self.m <= self.p
    }

    /// `1 - m/p`, zero for an over-full frame.
    pub fn efficiency(&self) -> f64 {
        if !self.is_feasible() || self.p == 0 {
            0.0
        } else {
            1.0 - self.m as f64 / self.p as f64
        }
    }
}

/// Analog reservation: `m = r + t`, `T_r = (r + t) T_a`.
pub fn reservation_time_analog(r: u64, timing: &TimingModel) -> Result<TimingModel> {
    if r == 0 {
        return Err(invalid("analog reservation needs r >= 1"));
    }
    timing.with_reservation(r + timing.t)
}

/// Digital reservation: `m = k r + t'`, `T_r = (k r + t') T_b`.
pub fn reservation_time_digital(r: u64, k: u64, timing: &TimingModel) -> Result<TimingModel> {
    if r == 0 || k == 0 {
        return Err(invalid("digital reservation needs r >= 1 and k >= 1"));
    }
    timing.with_reservation(k * r + timing.t)
}

/// Inputs to the break-even comparison against the splitting baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BreakEvenParams {
    /// RTT `t` in slots and CS slots `r`.
    Analog { t: u64, r: u64 },
    /// RTT `t'` in bit slots, `k` intervals of `r` bits, `q` quantisation
    /// bits and `n` users.
    Digital {
        t: u64,
        k: u64,
        r: u64,
        q: u32,
        n: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BreakEven {
    /// The CS scheme reserves faster whenever `beta` exceeds this value.
    Threshold(f64),
    /// The CS scheme is faster for every `beta >= 1`.
    AlwaysBetter,
}

impl BreakEven {
    pub fn threshold(&self) -> Option<f64> {
        match self {
            BreakEven::Threshold(x) => Some(*x),
            BreakEven::AlwaysBetter => None,
        }
    }
}

/// Analog: `beta > (t + r) / (t + 2)`, always better for `r < 2`.
/// Digital: `beta > (t' + k r) / (t' + q + log2 n)`, always better for
/// `k r < q + log2 n`.
pub fn break_even_beta(params: &BreakEvenParams) -> BreakEven {
    match *params {
        BreakEvenParams::Analog { t, r } => {
            if r < 2 {
                BreakEven::AlwaysBetter
            } else {
                BreakEven::Threshold((t + r) as f64 / (t + 2) as f64)
            }
        }
        BreakEvenParams::Digital { t, k, r, q, n } => {
            let id_bits = (n as f64).log2();
            let kr = (k * r) as f64;
            if kr < q as f64 + id_bits {
                BreakEven::AlwaysBetter
            } else {
                BreakEven::Threshold((t as f64 + kr) / (t as f64 + q as f64 + id_bits))
            }
        }
    }
}

/// Rate, frame efficiency and their product.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub rate: f64,
    pub efficiency: f64,
    /// `C = (1 - m/p) R`.
    pub throughput: f64,
    pub components: Vec<(String, f64)>,
}

impl ThroughputReport {
    pub fn with_component(mut self, name: &str, value: f64) -> Self {
        self.components.push((name.to_string(), value));
        self
    }
}

/// `C = (1 - m/p) R`; zero when the reservation overflows the frame.
pub fn total_throughput(rate: f64, timing: &TimingModel) -> ThroughputReport {
    let efficiency = timing.efficiency();
    ThroughputReport {
        rate,
        efficiency,
        throughput: efficiency * rate,
        components: Vec::new(),
    }
}
