use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use csmac::analytics::{
    analog_asymptotic_bound, analog_rate_closed_form, analog_rate_order_statistic,
    centralized_optimum, digital_rate_closed_form, max_gain_rate, total_throughput, TimingModel,
};
use csmac::config::{Scheme, SystemConfig};
use csmac::experiment::{compare_schemes, run_experiment};
use csmac::montecarlo::with_threads;
use csmac::sweep::{manifest, manifest_path, sweep_figure, to_csv};
use csmac::thresholds::{analog_threshold, digital_thresholds};
use csmac::{Error, Result};

/// Compressive-sensing reservation for opportunistic R-ALOHA.
#[derive(Debug, Parser)]
#[command(name = "csmac", version)]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Monte Carlo frames per point.
    #[arg(long, global = true, value_name = "N")]
    frames: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Output file; a manifest is written next to it.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Extra configuration entry, e.g. `--set scheme=digital`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form timing, rates and throughput.
    Analyze,
    /// Monte Carlo run at a single operating point.
    Simulate,
    /// Reservation time, break-even and throughput against the splitting baseline.
    Compare,
    /// Reproduce one of the throughput figures as CSV.
    Sweep {
        #[arg(long, value_parser = clap::value_parser!(u8).range(3..=8))]
        figure: u8,
    },
}

fn load_config(cli: &Cli) -> Result<SystemConfig> {
    let mut cfg = match &cli.config {
        Some(path) => SystemConfig::load(path)?,
        None => SystemConfig::default(),
    };
    for entry in &cli.overrides {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {entry:?}")))?;
        cfg.set(key.trim(), value.trim())?;
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(frames) = cli.frames {
        cfg.frames = frames;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn timing_lines(out: &mut String, timing: &TimingModel) {
    let _ = writeln!(out, "slot_seconds      {:e}", timing.slot_seconds);
    let _ = writeln!(out, "t (rtt slots)     {}", timing.t);
    let _ = writeln!(out, "p (frame slots)   {}", timing.p);
    let _ = writeln!(out, "m (reservation)   {}", timing.m);
    let _ = writeln!(out, "feasible          {}", timing.is_feasible());
    let _ = writeln!(out, "efficiency        {:.6}", timing.efficiency());
}

fn analyze(cfg: &SystemConfig) -> Result<String> {
    let mut out = String::new();
    let r = cfg.slot_budget()?;
    let base = cfg.timing()?;
    let _ = writeln!(out, "scheme            {}", cfg.scheme.name());
    let _ = writeln!(out, "n                 {}", cfg.n);
    let _ = writeln!(out, "s                 {}", cfg.s);
    let best = max_gain_rate(cfg.n)?;
    match cfg.scheme {
        Scheme::Analog => {
            let timing = TimingModel {
                m: r + base.t,
                ..base
            };
            let rate = analog_rate_closed_form(cfg.n, cfg.s)?;
            let _ = writeln!(
                out,
                "threshold         {:.6}",
                analog_threshold(cfg.n, cfg.s)?
            );
            let _ = writeln!(out, "r                 {r}");
            timing_lines(&mut out, &timing);
            let _ = writeln!(out, "P(nobody above)   {:.6}", rate.prob_silent);
            let _ = writeln!(out, "rate (s strongest conditioned)  {:.6}", rate.rate);
            let _ = writeln!(
                out,
                "rate (exact order statistic)    {:.6}",
                analog_rate_order_statistic(cfg.n, cfg.s)?
            );
            let _ = writeln!(out, "best-user rate                  {best:.6}");
            let _ = writeln!(
                out,
                "centralized log2(1+ln n)        {:.6}",
                centralized_optimum(cfg.n)?
            );
            if cfg.n >= 3 {
                let _ = writeln!(
                    out,
                    "asymptotic bound                {:.6}",
                    analog_asymptotic_bound(cfg.n)?
                );
            }
            let _ = writeln!(
                out,
                "throughput                      {:.6}",
                total_throughput(rate.rate, &timing).throughput
            );
        }
        Scheme::Digital => {
            let timing = TimingModel {
                m: cfg.k as u64 * r + base.t,
                ..base
            };
            let set = digital_thresholds(cfg.n, cfg.s, cfg.k)?;
            let rate = digital_rate_closed_form(cfg.n, cfg.s, cfg.k)?;
            let _ = writeln!(out, "k                 {}", cfg.k);
            let _ = writeln!(out, "r per interval    {r}");
            timing_lines(&mut out, &timing);
            let _ = writeln!(
                out,
                "interval  threshold  log2(1+zeta)  P(highest occupied)"
            );
            for (j, term) in rate.terms.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:>8}  {:>9.5}  {:>12.6}  {:>19.6}",
                    j + 1,
                    set.levels()[j],
                    term.rate,
                    term.highest_active_probability
                );
            }
            let _ = writeln!(out, "P(nobody above)          {:.6}", rate.prob_silent);
            let _ = writeln!(out, "rate (with extra P(B))   {:.6}", rate.rate);
            let _ = writeln!(out, "rate (unconditional sum) {:.6}", rate.rate_alternative);
            let _ = writeln!(out, "best-user rate           {best:.6}");
            let _ = writeln!(
                out,
                "throughput               {:.6}",
                total_throughput(rate.rate_alternative, &timing).throughput
            );
        }
    }
    Ok(out)
}

fn simulate(cfg: &SystemConfig) -> Result<(String, String)> {
    let outcome = run_experiment(cfg)?;
    let mut out = String::new();
    let _ = writeln!(out, "scheme        {}", outcome.row.scheme);
    let _ = writeln!(out, "decoder       {}", cfg.resolved_decoder());
    let _ = writeln!(out, "frames        {}", cfg.frames);
    let _ = writeln!(out, "seed          {}", cfg.master_seed);
    let _ = writeln!(out, "r             {}", outcome.row.r.unwrap_or(0));
    let _ = writeln!(out, "m / p         {} / {}", outcome.row.m, outcome.row.p);
    if outcome.row.infeasible {
        let _ = writeln!(
            out,
            "infeasible: reservation exceeds the frame, throughput 0"
        );
    }
    let _ = writeln!(
        out,
        "rate          {:.6} +- {:.6}",
        outcome.rate.mean, outcome.rate.stderr
    );
    if let (Some(a), Some(b)) = (outcome.event_a, outcome.event_b) {
        let _ = writeln!(out, "P(recovered)  {:.6}", a.mean);
        let _ = writeln!(out, "P(contender)  {:.6}", b.mean);
    }
    let _ = writeln!(out, "efficiency    {:.6}", outcome.report.efficiency);
    let _ = writeln!(out, "throughput    {:.6}", outcome.report.throughput);
    Ok((out, to_csv(std::slice::from_ref(&outcome.row))))
}

fn compare(cfg: &SystemConfig) -> Result<String> {
    let cmp = compare_schemes(cfg)?;
    let mut out = String::new();
    let _ = writeln!(out, "scheme                    {}", cmp.scheme.name());
    let _ = writeln!(out, "r                         {}", cmp.r);
    let _ = writeln!(
        out,
        "beta                      {:.4} +- {:.4}",
        cmp.beta.mean, cmp.beta.stderr
    );
    let _ = writeln!(
        out,
        "CS reservation (s)        {:e}",
        cmp.cs_reservation_seconds
    );
    let _ = writeln!(
        out,
        "baseline reservation (s)  {:e}",
        cmp.baseline_reservation_seconds
    );
    match cmp.break_even.threshold() {
        Some(x) => {
            let _ = writeln!(out, "break-even beta           {x:.6}");
        }
        None => {
            let _ = writeln!(
                out,
                "break-even beta           none (CS shorter for every beta)"
            );
        }
    }
    let _ = writeln!(out, "verdict                   {}", cmp.verdict);
    let _ = writeln!(
        out,
        "CS rate / throughput      {:.6} / {:.6}",
        cmp.cs_rate, cmp.cs_throughput
    );
    let _ = writeln!(
        out,
        "baseline rate / throughput {:.6} / {:.6}",
        cmp.baseline_rate, cmp.baseline_throughput
    );
    if cmp.cs_infeasible {
        let _ = writeln!(out, "CS reservation exceeds the frame");
    }
    Ok(out)
}

fn write_output(
    path: &Path,
    body: &str,
    command: &str,
    figure: Option<u8>,
    cfg: &SystemConfig,
) -> Result<()> {
    fs::write(path, body)?;
    fs::write(manifest_path(path), manifest(command, figure, cfg))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    with_threads(cfg.threads, || -> Result<()> {
        match &cli.command {
            Command::Analyze => {
                let text = analyze(&cfg)?;
                print!("{text}");
                if let Some(path) = &cli.out {
                    write_output(path, &text, "analyze", None, &cfg)?;
                }
            }
            Command::Simulate => {
                let (text, csv) = simulate(&cfg)?;
                print!("{text}");
                if let Some(path) = &cli.out {
                    write_output(path, &csv, "simulate", None, &cfg)?;
                }
            }
            Command::Compare => {
                let text = compare(&cfg)?;
                print!("{text}");
                if let Some(path) = &cli.out {
                    write_output(path, &text, "compare", None, &cfg)?;
                }
            }
            Command::Sweep { figure } => {
                let result = sweep_figure(*figure, &cfg)?;
                let csv = result.to_csv();
                match &cli.out {
                    Some(path) => {
                        write_output(path, &csv, "sweep", Some(*figure), &cfg)?;
                        eprintln!("wrote {} rows to {}", result.rows.len(), path.display());
                    }
                    None => print!("{csv}"),
                }
            }
        }
        Ok(())
    })?
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::InfeasibleFrame { .. }
        | Error::OracleRefused(_) => 2,
        Error::Numerical(_) | Error::Singular(_) => 3,
        Error::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("csmac: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
