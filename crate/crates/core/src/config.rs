//! Flat `key = value` experiment configuration.
//!
//! Blank lines and text after `#` are ignored. Lists are comma separated.
//! Every key has a default, so an empty file is a valid configuration:
//!
//! ```text
//! scheme = digital        # analog | digital
//! n = 100
//! s = 1
//! k = 4
//! slot_seconds = 1e-8
//! decoder = auto          # auto | greedy | greedy-nonneg | binary-l0 | max-correlation | ideal
//! beta_mode = fixed-2.5   # simulated | fixed-<beta>
//! ```

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::analytics::{reservation_slots_analog, reservation_slots_digital, TimingModel};
use crate::error::{Error, Result};
use crate::protocol::{AnalogParams, Decoder, DigitalParams};
use crate::splitting::{DEFAULT_MAX_SLOTS, NOMINAL_BETA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Analog,
    Digital,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Analog => "analog",
            Scheme::Digital => "digital",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analog" => Ok(Scheme::Analog),
            "digital" => Ok(Scheme::Digital),
            other => Err(Error::Config(format!(
                "unknown scheme {other:?} (analog | digital)"
            ))),
        }
    }
}

/// Source of the baseline's average slot count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaMode {
    /// Mean of simulated splitting trials.
    Simulated,
    /// A fixed value, 2.5 by default.
    Fixed(f64),
}

impl Default for BetaMode {
    fn default() -> Self {
        BetaMode::Fixed(NOMINAL_BETA)
    }
}

impl fmt::Display for BetaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaMode::Simulated => f.write_str("simulated"),
            BetaMode::Fixed(b) => write!(f, "fixed-{b}"),
        }
    }
}

impl FromStr for BetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "simulated" {
            return Ok(BetaMode::Simulated);
        }
        if s == "fixed" {
            return Ok(BetaMode::Fixed(NOMINAL_BETA));
        }
        let value = s.strip_prefix("fixed-").ok_or_else(|| {
            Error::Config(format!(
                "unknown beta_mode {s:?} (simulated | fixed-<beta>)"
            ))
        })?;
        let beta: f64 = parse_value("beta_mode", value)?;
        if !(beta.is_finite() && beta >= 1.0) {
            return Err(Error::Config(format!(
                "fixed beta must be >= 1, got {beta}"
            )));
        }
        Ok(BetaMode::Fixed(beta))
    }
}

/// Optional replacements for the default figure grids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridOverrides {
    pub c_values: Option<Vec<f64>>,
    pub s_values: Option<Vec<usize>>,
    pub r_values: Option<Vec<usize>>,
    pub k_values: Option<Vec<usize>>,
    pub q_values: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub scheme: Scheme,
    pub n: usize,
    /// Contention sparsity (analog) or per-interval sparsity (digital).
    pub s: usize,
    /// Threshold count; ignored by the analog scheme.
    pub k: usize,
    /// Slot-budget constant.
    pub c: f64,
    /// Explicit slots per measurement, overriding the budget derived from `c`.
    pub r: Option<usize>,
    /// Baseline CQI quantization bits.
    pub q: u32,
    pub slot_seconds: f64,
    pub coherence_seconds: f64,
    pub rtt_seconds: f64,
    /// `None` picks per scheme: non-negative pursuit for analog, binary
    /// exhaustive search for digital.
    pub decoder: Option<Decoder>,
    pub frames: u64,
    pub master_seed: u64,
    pub beta_mode: BetaMode,
    pub splitting_trials: u64,
    pub splitting_max_slots: u32,
    pub regenerate_matrix: bool,
    pub matrix_per_interval: bool,
    pub early_stop: bool,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub grid: GridOverrides,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Analog,
            n: 100,
            s: 1,
            k: 1,
            c: 2.0,
            r: None,
            q: 8,
            slot_seconds: 1e-9,
            coherence_seconds: 30e-6,
            rtt_seconds: 3.3334e-6,
            decoder: None,
            frames: 10_000,
            master_seed: 1,
            beta_mode: BetaMode::default(),
            splitting_trials: 100_000,
            splitting_max_slots: DEFAULT_MAX_SLOTS,
            regenerate_matrix: false,
            matrix_per_interval: false,
            early_stop: false,
            threads: 0,
            grid: GridOverrides::default(),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {key} = {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key} expects true or false, got {value:?}"
        ))),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("{key} needs at least one value")));
    }
    Ok(items)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl SystemConfig {
    /// Keys accepted by [`SystemConfig::set`].
    pub const KEYS: &'static [&'static str] = &[
        "scheme",
        "n",
        "s",
        "k",
        "c",
        "r",
        "q",
        "slot_seconds",
        "coherence_seconds",
        "rtt_seconds",
        "decoder",
        "frames",
        "master_seed",
        "beta_mode",
        "splitting_trials",
        "splitting_max_slots",
        "regenerate_matrix",
        "matrix_per_interval",
        "early_stop",
        "threads",
        "c_values",
        "s_values",
        "r_values",
        "k_values",
        "q_values",
    ];

    /// Parses configuration text over the defaults and validates it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {key}",
                    lineno + 1
                )));
            }
            cfg.set(key, value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key from its text form without validating the whole config.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scheme" => self.scheme = value.parse()?,
            "n" => self.n = parse_value(key, value)?,
            "s" => self.s = parse_value(key, value)?,
            "k" => self.k = parse_value(key, value)?,
            "c" => self.c = parse_value(key, value)?,
            "r" => {
                self.r = match value {
                    "auto" | "" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "q" => self.q = parse_value(key, value)?,
            "slot_seconds" => self.slot_seconds = parse_value(key, value)?,
            "coherence_seconds" => self.coherence_seconds = parse_value(key, value)?,
            "rtt_seconds" => self.rtt_seconds = parse_value(key, value)?,
            "decoder" => {
                self.decoder = match value {
                    "auto" => None,
                    v => Some(v.parse()?),
                }
            }
            "frames" => self.frames = parse_value(key, value)?,
            "master_seed" | "seed" => self.master_seed = parse_value(key, value)?,
            "beta_mode" => self.beta_mode = value.parse()?,
            "splitting_trials" => self.splitting_trials = parse_value(key, value)?,
            "splitting_max_slots" => self.splitting_max_slots = parse_value(key, value)?,
            "regenerate_matrix" => self.regenerate_matrix = parse_bool(key, value)?,
            "matrix_per_interval" => self.matrix_per_interval = parse_bool(key, value)?,
            "early_stop" => self.early_stop = parse_bool(key, value)?,
            "threads" => self.threads = parse_value(key, value)?,
            "c_values" => self.grid.c_values = Some(parse_list(key, value)?),
            "s_values" => self.grid.s_values = Some(parse_list(key, value)?),
            "r_values" => self.grid.r_values = Some(parse_list(key, value)?),
            "k_values" => self.grid.k_values = Some(parse_list(key, value)?),
            "q_values" => self.grid.q_values = Some(parse_list(key, value)?),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n < 2 {
            return fail(format!("n must be >= 2, got {}", self.n));
        }
        if self.s == 0 {
            return fail("s must be >= 1".into());
        }
        match self.scheme {
            Scheme::Analog if self.s >= self.n => {
                return fail(format!(
                    "analog scheme needs s < n, got s={} n={}",
                    self.s, self.n
                ))
            }
            Scheme::Digital if self.k == 0 || self.s * self.k >= self.n => {
                return fail(format!(
                    "digital scheme needs 1 <= s*k < n, got s={} k={} n={}",
                    self.s, self.k, self.n
                ))
            }
            _ => {}
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return fail(format!("c must be positive, got {}", self.c));
        }
        if self.r == Some(0) {
            return fail("r must be >= 1".into());
        }
        if self.q == 0 {
            return fail("q must be >= 1".into());
        }
        for (name, v) in [
            ("slot_seconds", self.slot_seconds),
            ("coherence_seconds", self.coherence_seconds),
            ("rtt_seconds", self.rtt_seconds),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if self.frames == 0 {
            return fail("frames must be >= 1".into());
        }
        if self.beta_mode == BetaMode::Simulated && self.splitting_trials == 0 {
            return fail("splitting_trials must be >= 1 in simulated beta mode".into());
        }
        if self.splitting_max_slots == 0 {
            return fail("splitting_max_slots must be >= 1".into());
        }
        if let Some(cs) = &self.grid.c_values {
            if cs.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
                return fail("c_values must be positive".into());
            }
        }
        for (name, list) in [
            ("s_values", &self.grid.s_values),
            ("r_values", &self.grid.r_values),
            ("k_values", &self.grid.k_values),
        ] {
            if list.as_ref().is_some_and(|l| l.contains(&0)) {
                return fail(format!("{name} must be >= 1"));
            }
        }
        if self.grid.q_values.as_ref().is_some_and(|l| l.contains(&0)) {
            return fail("q_values must be >= 1".into());
        }
        Ok(())
    }

    /// Slots per measurement: the explicit `r`, else the budget from `c`.
    pub fn slot_budget(&self) -> Result<u64> {
        if let Some(r) = self.r {
            return Ok(r as u64);
        }
        match self.scheme {
            Scheme::Analog => reservation_slots_analog(self.c, self.s, self.n),
            Scheme::Digital => reservation_slots_digital(self.c, self.n),
        }
    }

    pub fn timing(&self) -> Result<TimingModel> {
        TimingModel::new(self.slot_seconds, self.coherence_seconds, self.rtt_seconds)
    }

    /// The configured decoder, or the scheme's default.
    pub fn resolved_decoder(&self) -> Decoder {
        self.decoder.unwrap_or(match self.scheme {
            Scheme::Analog => Decoder::GreedyNonNegative,
            Scheme::Digital => Decoder::BinaryL0,
        })
    }

    pub fn analog_params(&self) -> Result<AnalogParams> {
        let mut p = AnalogParams::new(
            self.n,
            self.s,
            self.slot_budget()? as usize,
            self.resolved_decoder(),
        );
        p.regenerate_matrix = self.regenerate_matrix;
        Ok(p)
    }

    pub fn digital_params(&self) -> Result<DigitalParams> {
        let mut p = DigitalParams::new(
            self.n,
            self.s,
            self.k,
            self.slot_budget()? as usize,
            self.resolved_decoder(),
        );
        p.regenerate_matrix = self.regenerate_matrix;
        p.matrix_per_interval = self.matrix_per_interval;
        p.early_stop = self.early_stop;
        Ok(p)
    }

    /// Renders the configuration in the form [`SystemConfig::parse`] reads.
    pub fn to_config_string(&self) -> String {
        let mut lines = vec![
            format!("scheme = {}", self.scheme.name()),
            format!("n = {}", self.n),
            format!("s = {}", self.s),
            format!("k = {}", self.k),
            format!("c = {}", self.c),
            format!(
                "r = {}",
                self.r.map_or("auto".to_string(), |r| r.to_string())
            ),
            format!("q = {}", self.q),
            format!("slot_seconds = {:e}", self.slot_seconds),
            format!("coherence_seconds = {:e}", self.coherence_seconds),
            format!("rtt_seconds = {:e}", self.rtt_seconds),
            format!(
                "decoder = {}",
                self.decoder.map_or("auto".to_string(), |d| d.to_string())
            ),
            format!("frames = {}", self.frames),
            format!("master_seed = {}", self.master_seed),
            format!("beta_mode = {}", self.beta_mode),
            format!("splitting_trials = {}", self.splitting_trials),
            format!("splitting_max_slots = {}", self.splitting_max_slots),
            format!("regenerate_matrix = {}", self.regenerate_matrix),
            format!("matrix_per_interval = {}", self.matrix_per_interval),
            format!("early_stop = {}", self.early_stop),
            format!("threads = {}", self.threads),
        ];
        let g = &self.grid;
        if let Some(v) = &g.c_values {
            lines.push(format!("c_values = {}", join(v)));
        }
        if let Some(v) = &g.s_values {
            lines.push(format!("s_values = {}", join(v)));
        }
        if let Some(v) = &g.r_values {
            lines.push(format!("r_values = {}", join(v)));
        }
        if let Some(v) = &g.k_values {
            lines.push(format!("k_values = {}", join(v)));
        }
        if let Some(v) = &g.q_values {
            lines.push(format!("q_values = {}", join(v)));
        }
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = SystemConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(cfg, SystemConfig::default());
        assert_eq!(cfg.slot_budget().unwrap(), 10);
    }

    #[test]
    fn parses_keys_comments_and_lists() {
        let cfg = SystemConfig::parse(
            "scheme = digital\nk = 4  # four levels\nr = 7\nslot_seconds = 1e-8\n\
             beta_mode = simulated\ndecoder = max-correlation\nk_values = 1, 2,4\nearly_stop = yes\n",
        )
        .unwrap();
        assert_eq!(cfg.scheme, Scheme::Digital);
        assert_eq!(cfg.k, 4);
        assert_eq!(cfg.r, Some(7));
        assert_eq!(cfg.beta_mode, BetaMode::Simulated);
        assert_eq!(cfg.decoder, Some(Decoder::MaxCorrelation));
        assert_eq!(cfg.grid.k_values, Some(vec![1, 2, 4]));
        assert!(cfg.early_stop);
        let t = cfg.timing().unwrap();
        assert_eq!((t.t, t.p), (334, 3000));
    }

    #[test]
    fn round_trips_through_text() {
        let mut cfg = SystemConfig::parse(
            "scheme = digital\nk = 2\nbeta_mode = fixed-3.25\nc_values = 0.5,1.5",
        )
        .unwrap();
        cfg.r = Some(9);
        cfg.master_seed = u64::MAX;
        let back = SystemConfig::parse(&cfg.to_config_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "n = 1",
            "s = 0",
            "s = 100",
            "scheme = digital\ns = 30\nk = 4",
            "frames = 0",
            "slot_seconds = -1e-9",
            "c = 0",
            "bogus = 3",
            "n 100",
            "n = 10\nn = 20",
            "decoder = magic",
            "beta_mode = fixed-0.5",
            "r = 0",
            "k_values = 1,0",
        ] {
            assert!(
                matches!(SystemConfig::parse(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn params_follow_the_config() {
        let cfg = SystemConfig::parse("s = 5\nc = 2\nregenerate_matrix = true").unwrap();
        let p = cfg.analog_params().unwrap();
        assert_eq!(p.r, 30);
        assert!(p.regenerate_matrix);
        assert_eq!(p.decoder, Decoder::GreedyNonNegative);
        let cfg = SystemConfig::parse("scheme = digital\nc = 1\nk = 2").unwrap();
        assert_eq!(cfg.digital_params().unwrap().r, 7);
        assert_eq!(cfg.digital_params().unwrap().decoder, Decoder::BinaryL0);
    }
}
