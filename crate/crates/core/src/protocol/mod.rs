//! One-frame reservation rounds and their Monte Carlo drivers.

pub mod analog;
pub mod digital;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::recovery::{
    binary_l0_recover, default_tolerance, greedy_recover, greedy_recover_nonnegative,
    max_correlation_recover, RecoveryResult,
};
use crate::sensing::SensingMatrix;

pub use analog::{
    empirical_analog_rate, run_analog_round, AnalogParams, AnalogRoundOutcome, AnalogRun,
};
pub use digital::{
    empirical_digital_rate, run_digital_round, DigitalParams, DigitalRoundOutcome, DigitalRun,
};

/// Decoder sparsity budget as a multiple of the target sparsity `s`.
pub const DECODER_BUDGET_FACTOR: usize = 4;

/// Support decoder used by the base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Decoder {
    /// Rank columns by `|a_j^T y|`, least squares on the top candidates,
    /// drop zero coefficients.
    MaxCorrelation,
    /// Orthogonal matching pursuit.
    #[default]
    Greedy,
    /// Orthogonal matching pursuit using the fact that contention vectors
    /// are non-negative.
    GreedyNonNegative,
    /// Exhaustive sparsest 0/1 solution; only meaningful for the digital
    /// scheme, whose contention vectors are binary.
    BinaryL0,
    /// Genie decoder that returns the true support: recovery always succeeds.
    Ideal,
}

impl Decoder {
    pub fn name(&self) -> &'static str {
        match self {
            Decoder::MaxCorrelation => "max-correlation",
            Decoder::Greedy => "greedy",
            Decoder::GreedyNonNegative => "greedy-nonneg",
            Decoder::BinaryL0 => "binary-l0",
            Decoder::Ideal => "ideal",
        }
    }

    /// Recovers the active users from `y`. `truth` is only read by
    /// [`Decoder::Ideal`].
    pub(crate) fn decode(
        &self,
        y: &[f64],
        a: &SensingMatrix,
        budget: usize,
        truth: (&[usize], &[f64]),
    ) -> RecoveryResult {
        let tol = default_tolerance(y);
        match self {
            Decoder::MaxCorrelation => max_correlation_recover(y, a, budget, tol),
            Decoder::Greedy => greedy_recover(y, a, budget, tol),
            Decoder::GreedyNonNegative => greedy_recover_nonnegative(y, a, budget, tol),
            Decoder::BinaryL0 => binary_l0_recover(y, a, budget, tol),
            Decoder::Ideal => RecoveryResult {
                support: truth.0.to_vec(),
                values: truth.0.iter().map(|&i| truth.1[i]).collect(),
                residual: 0.0,
                exact: true,
            },
        }
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max-correlation" | "max_correlation" | "maxcorr" => Ok(Decoder::MaxCorrelation),
            "greedy" | "omp" => Ok(Decoder::Greedy),
            "greedy-nonneg" | "nnomp" => Ok(Decoder::GreedyNonNegative),
            "binary-l0" => Ok(Decoder::BinaryL0),
            "ideal" | "oracle" => Ok(Decoder::Ideal),
            other => Err(Error::Config(format!("unknown decoder '{other}'"))),
        }
    }
}

pub(crate) fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}
