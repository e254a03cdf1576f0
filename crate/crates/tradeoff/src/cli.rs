//! Command-line front end.
//!
//! Exit codes: 0 on success (per-point failures are reported, not fatal),
//! 1 on output errors, 2 on usage or configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use sensing_tradeoff_core::montecarlo::{simulate_frame, Fidelity, FrameModel, SimConfig};
use sensing_tradeoff_core::traffic::FrameGeometry;

use crate::config::{self, CaseSelection, ConfigError, DEFAULT_FRAMES};
use crate::output;
use crate::sweep::{find_optimum, run_sweep, SweepPlan};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FidelityArg {
    Statistic,
    Sample,
}

#[derive(Debug, Parser)]
#[command(
    name = "sensing-tradeoff",
    version,
    about = "Sensing-throughput tradeoff sweep under dynamic PU traffic"
)]
pub struct Args {
    /// Scenario file (TOML)
    #[arg(long)]
    pub config: PathBuf,
    /// Sensing lengths in samples, inclusive start:stop:step
    #[arg(long, value_name = "START:STOP:STEP")]
    pub sweep_ls: Option<String>,
    /// Throughput curves to compute
    #[arg(long, value_parser = ["1", "2", "both"])]
    pub case: Option<String>,
    /// Monte Carlo validation at every sweep point
    #[arg(long, value_enum)]
    pub mc: Option<Switch>,
    /// Frames per Monte Carlo campaign
    #[arg(long)]
    pub frames: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if missing
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// How the simulated detection statistic is produced
    #[arg(long, value_enum)]
    pub fidelity: Option<FidelityArg>,
    /// Simulate full on/off renewal paths instead of at most one change
    #[arg(long)]
    pub renewal: bool,
    /// Dump per-frame traces for this sensing length (needs --mc on)
    #[arg(long, value_name = "L")]
    pub trace: Option<u32>,
    /// Frames written to the trace dump
    #[arg(long, default_value_t = 1000)]
    pub trace_frames: u64,
}

fn default_grid(frame_samples: u32) -> Vec<u32> {
    if frame_samples > 20 {
        (10..=frame_samples - 10).step_by(10).collect()
    } else {
        (1..frame_samples).collect()
    }
}

/// Assembles the plan and seed from the config file and the flags; flags win.
pub fn plan_from_args(args: &Args) -> Result<(SweepPlan, u64), ConfigError> {
    let cfg = config::load(&args.config)?;
    let sc = cfg.scenario;
    let grid = match (&args.sweep_ls, cfg.sweep.ls) {
        (Some(s), _) => config::parse_range(s)?,
        (None, Some(g)) => g,
        (None, None) => default_grid(sc.frame_samples),
    };
    config::check_grid(&grid, sc.frame_samples)?;
    let cases = args
        .case
        .as_deref()
        .and_then(CaseSelection::parse)
        .or(cfg.sweep.case)
        .unwrap_or(CaseSelection::Both);
    let mc_on = match args.mc {
        Some(s) => s == Switch::On,
        None => cfg.sweep.mc.unwrap_or(false),
    };
    let seed = args.seed.or(cfg.sweep.seed).unwrap_or(DEFAULT_SEED);
    let fidelity = match args.fidelity {
        Some(FidelityArg::Statistic) => Fidelity::StatisticLevel,
        Some(FidelityArg::Sample) => Fidelity::SampleLevel,
        None => cfg.sweep.fidelity.unwrap_or(Fidelity::StatisticLevel),
    };
    let frames = args.frames.or(cfg.sweep.frames).unwrap_or(DEFAULT_FRAMES);
    let mc = if mc_on {
        let mut sim = SimConfig::new(frames, seed, fidelity).map_err(|_| ConfigError::Invalid {
            path: args.config.display().to_string(),
            line: 0,
            key: "frames",
            message: "must be >= 1".into(),
        })?;
        sim.renewal = args.renewal || cfg.sweep.renewal.unwrap_or(false);
        Some(sim)
    } else {
        None
    };
    Ok((
        SweepPlan {
            scenario: sc,
            grid,
            cases,
            mc,
        },
        seed,
    ))
}

pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (plan, seed) = match plan_from_args(&args) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run(&args, &plan, seed) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(args: &Args, plan: &SweepPlan, seed: u64) -> std::io::Result<()> {
    let points = run_sweep(plan);
    for e in points.iter().filter_map(|p| p.as_ref().err()) {
        eprintln!("warning: {e}");
    }

    fs::create_dir_all(&args.out)?;
    let csv_file = BufWriter::new(fs::File::create(args.out.join("tradeoff.csv"))?);
    output::write_csv(csv_file, &points, plan.cases).map_err(std::io::Error::other)?;
    let summary = output::summary(plan, seed, &points);
    let mut json = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?;
    json.push('\n');
    fs::write(args.out.join("summary.json"), json)?;

    for (case, wanted) in [(1, plan.cases.case1()), (2, plan.cases.case2())] {
        if !wanted {
            continue;
        }
        match find_optimum(&points, case) {
            Ok(o) => println!(
                "case {case}: L* = {} ({} ms), R* = {:.6} bits/s/Hz",
                o.sensing_samples,
                o.sensing_time_s * 1e3,
                o.throughput
            ),
            Err(e) => eprintln!("warning: {e}"),
        }
    }

    if let Some(l) = args.trace {
        write_trace(args, plan, &points, l)?;
    }
    Ok(())
}

fn write_trace(
    args: &Args,
    plan: &SweepPlan,
    points: &[crate::sweep::PointOutcome],
    l: u32,
) -> std::io::Result<()> {
    let Some(sim) = plan.mc else {
        eprintln!("warning: --trace needs --mc on; no trace written");
        return Ok(());
    };
    let Some(point) = points.iter().flatten().find(|p| p.sensing_samples == l) else {
        eprintln!("warning: L = {l} is not a successful sweep point; no trace written");
        return Ok(());
    };
    let sc = &plan.scenario;
    let model = FrameModel {
        params: sc.params,
        geometry: FrameGeometry::new(sc.t_s, l, sc.frame_samples).map_err(std::io::Error::other)?,
        threshold: point.threshold,
        gamma_s: sc.gamma_s,
    };
    let frames: Vec<_> = (0..args.trace_frames.min(sim.n_frames))
        .map(|f| (f, simulate_frame(&model, &sim, f)))
        .collect();
    let file = BufWriter::new(fs::File::create(args.out.join(format!("trace_L{l}.tsv")))?);
    output::write_trace(file, &frames)
}
