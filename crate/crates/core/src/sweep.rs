//! Figure sweeps and CSV output.
//!
//! | figure | scheme  | slot time | sweep                         |
//! |--------|---------|-----------|-------------------------------|
//! | 3, 4, 5 | analog | 1e-9, 1e-8, 1e-7 s | `c` for each `s`     |
//! | 6, 7, 8 | digital | 1e-9, 1e-8, 1e-7 s | `r` for each `k`    |
//!
//! Every sweep point also carries the splitting baseline (per `q` for the
//! digital figures) and the zero-reservation reference. All points share
//! the master seed, so curves are compared on common random numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::{Scheme, SystemConfig};
use crate::error::{invalid, Result};
use crate::experiment::{
    baseline_beta, baseline_row, run_experiment, zero_reservation_row, SweepRow,
};
use crate::montecarlo::RNG_ALGORITHM;

/// Version tag of the CSV layout, recorded in the run manifest.
pub const CSV_SCHEMA_VERSION: &str = "csmac-sweep-v1";
pub const CSV_HEADER: &str = "scheme,figure,sweep_var,sweep_value,n,s,k,c,q,slot_seconds,r,m,p,\
efficiency,rate_mean,rate_stderr,throughput,infeasible";

pub const DEFAULT_S_VALUES: [usize; 5] = [1, 2, 5, 10, 15];
pub const DEFAULT_K_VALUES: [usize; 4] = [1, 2, 4, 8];
pub const DEFAULT_Q_VALUES: [u32; 3] = [4, 8, 16];

/// `0.5, 0.75, ..., 4.0`.
pub fn default_c_values() -> Vec<f64> {
    (0..=14).map(|i| 0.5 + 0.25 * i as f64).collect()
}

pub fn default_r_values() -> Vec<usize> {
    (1..=20).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureSpec {
    pub id: u8,
    pub scheme: Scheme,
    pub slot_seconds: f64,
}

pub fn figure_spec(id: u8) -> Result<FigureSpec> {
    let (scheme, slot_seconds) = match id {
        3 => (Scheme::Analog, 1e-9),
        4 => (Scheme::Analog, 1e-8),
        5 => (Scheme::Analog, 1e-7),
        6 => (Scheme::Digital, 1e-9),
        7 => (Scheme::Digital, 1e-8),
        8 => (Scheme::Digital, 1e-7),
        _ => return Err(invalid(format!("figure must be 3..=8, got {id}"))),
    };
    Ok(FigureSpec {
        id,
        scheme,
        slot_seconds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub figure: u8,
    pub rows: Vec<SweepRow>,
}

/// Runs the grid of figure `figure`, taking everything except scheme and
/// slot time from `base` (grid overrides included).
pub fn sweep_figure(figure: u8, base: &SystemConfig) -> Result<SweepResult> {
    let spec = figure_spec(figure)?;
    let mut cfg = base.clone();
    cfg.scheme = spec.scheme;
    cfg.slot_seconds = spec.slot_seconds;
    if spec.scheme == Scheme::Analog {
        cfg.k = 1;
    }
    cfg.r = None;
    cfg.validate()?;

    let beta = baseline_beta(&cfg)?.mean;
    let zero = zero_reservation_row(&cfg)?;
    let mut rows = Vec::new();
    let push_references =
        |rows: &mut Vec<SweepRow>, var: &str, value: f64, qs: &[u32]| -> Result<()> {
            for &q in qs {
                let mut row = baseline_row(&cfg, q, beta)?;
                row.sweep_var = var.to_string();
                row.sweep_value = value;
                rows.push(row);
            }
            let mut row = zero.clone();
            row.sweep_var = var.to_string();
            row.sweep_value = value;
            rows.push(row);
            Ok(())
        };

    match spec.scheme {
        Scheme::Analog => {
            let cs = base.grid.c_values.clone().unwrap_or_else(default_c_values);
            let ss = base
                .grid
                .s_values
                .clone()
                .unwrap_or_else(|| DEFAULT_S_VALUES.to_vec());
            for &c in &cs {
                for &s in ss.iter().filter(|&&s| s < cfg.n) {
                    let point = SystemConfig {
                        s,
                        c,
                        ..cfg.clone()
                    };
                    rows.push(run_experiment(&point)?.row);
                }
                push_references(&mut rows, "c", c, &[cfg.q])?;
            }
        }
        Scheme::Digital => {
            let rs = base.grid.r_values.clone().unwrap_or_else(default_r_values);
            let ks = base
                .grid
                .k_values
                .clone()
                .unwrap_or_else(|| DEFAULT_K_VALUES.to_vec());
            let qs = base
                .grid
                .q_values
                .clone()
                .unwrap_or_else(|| DEFAULT_Q_VALUES.to_vec());
            for &r in &rs {
                for &k in ks.iter().filter(|&&k| cfg.s * k < cfg.n) {
                    let point = SystemConfig {
                        k,
                        r: Some(r),
                        ..cfg.clone()
                    };
                    rows.push(run_experiment(&point)?.row);
                }
                push_references(&mut rows, "r", r as f64, &qs)?;
            }
        }
    }
    for row in &mut rows {
        row.figure = Some(figure);
    }
    Ok(SweepResult { figure, rows })
}

/// Nine significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn csv_line(row: &SweepRow) -> String {
    [
        row.scheme.clone(),
        opt(row.figure),
        row.sweep_var.clone(),
        format_float(row.sweep_value),
        row.n.to_string(),
        opt(row.s),
        opt(row.k),
        row.c.map(format_float).unwrap_or_default(),
        opt(row.q),
        format_float(row.slot_seconds),
        opt(row.r),
        format_float(row.m),
        row.p.to_string(),
        format_float(row.efficiency),
        format_float(row.rate_mean),
        format_float(row.rate_stderr),
        format_float(row.throughput),
        row.infeasible.to_string(),
    ]
    .join(",")
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(160 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_line(row));
        out.push('\n');
    }
    out
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        to_csv(&self.rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Manifest text echoing the command, schema, generator and configuration.
pub fn manifest(command: &str, figure: Option<u8>, cfg: &SystemConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command = {command}");
    if let Some(f) = figure {
        let _ = writeln!(out, "figure = {f}");
    }
    let _ = writeln!(out, "csv_schema = {CSV_SCHEMA_VERSION}");
    let _ = writeln!(out, "rng = {RNG_ALGORITHM}");
    let _ = writeln!(out, "crate_version = {}", env!("CARGO_PKG_VERSION"));
    out.push_str(&cfg.to_config_string());
    out
}

/// Manifest path next to a CSV output: `out.csv` becomes
/// `out.manifest.txt`.
pub fn manifest_path(csv: &Path) -> std::path::PathBuf {
    csv.with_extension("manifest.txt")
}
