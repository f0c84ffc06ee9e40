//! Fading channel model.
//!
//! Channel power gains are i.i.d. unit-mean exponential (Rayleigh fading in
//! amplitude), so `P[h > x] = e^{-x}`.

use rand::Rng;

use crate::error::{invalid, Result};

/// Tolerance when checking that a caller-supplied threshold matches
/// `-ln(s/n)`.
const ZETA_MATCH_TOL: f64 = 1e-9;

/// Unit-mean exponential gain law.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GainDistribution;

impl GainDistribution {
    pub fn cdf(x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            1.0 - (-x).exp()
        }
    }

    pub fn ccdf(x: f64) -> f64 {
        if x < 0.0 {
            1.0
        } else {
            (-x).exp()
        }
    }

    pub fn pdf(x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            (-x).exp()
        }
    }

    /// Gain level exceeded with probability `u`; `u = 0` maps to `+inf`.
    pub fn inv_ccdf(u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(invalid(format!("ccdf level {u} outside [0, 1]")));
        }
        Ok(if u == 0.0 { f64::INFINITY } else { -u.ln() })
    }

    /// Inverse-CDF draw `-ln(1 - U)` with `U` uniform on `[0, 1)`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        -(-u).ln_1p()
    }
}

/// One frame's channel power gains, one per user.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    gains: Vec<f64>,
}

impl ChannelRealization {
    pub fn new(gains: Vec<f64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(invalid("channel realization needs at least one user"));
        }
        if let Some(g) = gains.iter().find(|g| !g.is_finite() || **g < 0.0) {
            return Err(invalid(format!(
                "channel gain {g} is not a finite non-negative value"
            )));
        }
        Ok(Self { gains })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Index of the strongest user (lowest index on ties).
    pub fn strongest(&self) -> usize {
        argmax(&self.gains)
    }
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

/// Draws `n` i.i.d. gains.
pub fn sample_gains<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ChannelRealization> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let gains = (0..n).map(|_| GainDistribution::sample(rng)).collect();
    Ok(ChannelRealization { gains })
}

fn check_order_stat_args(s: usize, n: usize) -> Result<f64> {
    if s == 0 || s > n {
        return Err(invalid(format!("need 1 <= s <= n, got s={s}, n={n}")));
    }
    Ok(-(s as f64 / n as f64).ln())
}

/// Density of the largest of `s` gains, each conditioned to lie above the
/// threshold `zeta = -ln(s/n)`:
///
/// `f(x) = s e^{-x} (s/n - e^{-x})^{s-1} / (s/n)^s` for `x >= zeta`.
///
/// Evaluated as `s w (1 - w)^{s-1}` with `w = e^{-(x - zeta)}`, which is the
/// same quantity without the `(s/n)^s` underflow.
pub fn conditional_max_pdf(x: f64, s: usize, zeta: f64, n: usize) -> Result<f64> {
    let expected = check_order_stat_args(s, n)?;
    if (zeta - expected).abs() > ZETA_MATCH_TOL {
        return Err(invalid(format!(
            "zeta {zeta} does not match -ln(s/n) = {expected}"
        )));
    }
    if x < zeta {
        return Ok(0.0);
    }
    let w = (-(x - zeta)).exp();
    let mut gap = -(-(x - zeta)).exp_m1();
    if gap.abs() < 1e-15 {
        gap = 0.0;
    }
    Ok(s as f64 * w * gap.powi(s as i32 - 1))
}

/// CDF matching [`conditional_max_pdf`]: `(1 - e^{-(x - zeta)})^s`.
pub fn conditional_max_cdf(x: f64, s: usize, n: usize) -> Result<f64> {
    let zeta = check_order_stat_args(s, n)?;
    if x < zeta {
        return Ok(0.0);
    }
    Ok((-(-(x - zeta)).exp_m1()).powi(s as i32))
}
