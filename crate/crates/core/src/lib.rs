//! Compressive-sensing based reservation for opportunistic R-ALOHA.
//!
//! Users whose channel gain clears a threshold transmit their gain (analog)
//! or a single bit (digital) spread by a ±1 signature. The base station
//! recovers the sparse contention vector from `r` superimposed slots and
//! reserves the frame for the strongest user. The crate contains:
//!
//! * the channel and threshold model ([`channel`], [`thresholds`]),
//! * the measurement model and sparse recovery ([`sensing`], [`recovery`]),
//! * one-frame protocol rounds ([`protocol`]) and the opportunistic
//!   splitting baseline ([`splitting`]),
//! * closed-form throughput and reservation-time analytics ([`analytics`]),
//! * the seeded Monte Carlo harness, figure sweeps and CSV output
//!   ([`config`], [`montecarlo`], [`experiment`], [`sweep`]).

pub mod analytics;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiment;
pub mod montecarlo;
pub mod protocol;
pub mod quadrature;
pub mod recovery;
pub mod sensing;
pub mod splitting;
pub mod sweep;
pub mod thresholds;

pub use error::{Error, Result};
