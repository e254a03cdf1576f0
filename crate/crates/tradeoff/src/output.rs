//! `tradeoff.csv`, `summary.json` and frame trace dumps.

use std::io::Write;

use serde::Serialize;

use sensing_tradeoff_core::montecarlo::{Decision, Estimate, FrameTrace};

use crate::config::{CaseSelection, Scenario};
use crate::sweep::{find_optimum, PointOutcome, SweepPlan};

pub const SCHEMA_VERSION: u32 = 1;

/// Column order of `tradeoff.csv`. `t_s_ms` is the sensing time `L·t_s` in
/// milliseconds; `*_mc` throughputs are the factored estimators and
/// `*_realized` the per-frame means.
pub const CSV_HEADER: [&str; 24] = [
    "L",
    "t_s_ms",
    "eta",
    "pd",
    "pf",
    "r_case1",
    "r_case2",
    "pd_mc",
    "pf_mc",
    "r1_mc",
    "r2_mc",
    "pd_mc_lo",
    "pd_mc_hi",
    "pf_mc_lo",
    "pf_mc_hi",
    "r1_mc_lo",
    "r1_mc_hi",
    "r2_mc_lo",
    "r2_mc_hi",
    "r1_mc_realized",
    "r1_mc_realized_se",
    "r2_mc_realized",
    "r2_mc_realized_se",
    "error",
];

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

pub fn csv_row(outcome: &PointOutcome, cases: CaseSelection) -> Vec<String> {
    let mut row = vec![String::new(); CSV_HEADER.len()];
    let p = match outcome {
        Ok(p) => p,
        Err(e) => {
            row[0] = e.sensing_samples.to_string();
            row[CSV_HEADER.len() - 1] = e.source.to_string();
            return row;
        }
    };
    row[0] = p.sensing_samples.to_string();
    row[1] = num(p.sensing_time_s * 1e3);
    row[2] = num(p.threshold);
    row[3] = num(p.p_d);
    row[4] = num(p.p_f);
    row[5] = opt(p.r_case1);
    row[6] = opt(p.r_case2);
    if let Some(mc) = &p.mc {
        let keep = [cases.case1(), cases.case2()];
        let pick = |c: usize, e: &Estimate| keep[c].then_some(*e);
        let ests = [
            Some(mc.p_d),
            Some(mc.p_f),
            pick(0, &mc.factored[0]),
            pick(1, &mc.factored[1]),
        ];
        for (j, e) in ests.iter().enumerate() {
            row[7 + j] = opt(e.map(|e| e.value));
            row[11 + 2 * j] = opt(e.map(|e| e.lo));
            row[12 + 2 * j] = opt(e.map(|e| e.hi));
        }
        for c in 0..2 {
            let e = pick(c, &mc.realized[c]);
            row[19 + 2 * c] = opt(e.map(|e| e.value));
            row[20 + 2 * c] = opt(e.map(|e| e.std_err));
        }
    }
    row
}

pub fn write_csv<W: Write>(
    out: W,
    points: &[PointOutcome],
    cases: CaseSelection,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for p in points {
        w.write_record(csv_row(p, cases))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub tool: Tool,
    pub seed: u64,
    pub parameters: Parameters,
    pub sweep: SweepInfo,
    pub optima: Optima,
    pub errors: Vec<PointFailure>,
}

#[derive(Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Parameters {
    pub theta_alpha_s: f64,
    pub theta_beta_s: f64,
    pub n_pu: u32,
    pub t_s_s: f64,
    pub t_f_s: f64,
    pub frame_samples: u32,
    pub gamma_p_db: f64,
    pub gamma_s_db: f64,
    pub target_pd: f64,
    pub solver_tol: f64,
}

#[derive(Debug, Serialize)]
pub struct SweepInfo {
    pub grid: Vec<u32>,
    pub case: &'static str,
    pub mc: Option<McInfo>,
}

#[derive(Debug, Serialize)]
pub struct McInfo {
    pub frames: u64,
    pub fidelity: &'static str,
    pub renewal: bool,
}

#[derive(Debug, Default, Serialize)]
pub struct Optima {
    pub case1: Option<OptimumJson>,
    pub case2: Option<OptimumJson>,
}

#[derive(Debug, Serialize)]
pub struct OptimumJson {
    #[serde(rename = "L")]
    pub sensing_samples: u32,
    pub t_s_ms: f64,
    pub throughput: f64,
}

#[derive(Debug, Serialize)]
pub struct PointFailure {
    #[serde(rename = "L")]
    pub sensing_samples: u32,
    pub message: String,
}

fn parameters(sc: &Scenario) -> Parameters {
    Parameters {
        theta_alpha_s: sc.params.theta_alpha,
        theta_beta_s: sc.params.theta_beta,
        n_pu: sc.params.n_pu,
        t_s_s: sc.t_s,
        t_f_s: sc.t_f,
        frame_samples: sc.frame_samples,
        gamma_p_db: sc.gamma_p_db,
        gamma_s_db: sc.gamma_s_db,
        target_pd: sc.target_pd,
        solver_tol: sc.solver_tol,
    }
}

pub fn summary(plan: &SweepPlan, seed: u64, points: &[PointOutcome]) -> Summary {
    let optimum = |case: u8, wanted: bool| {
        wanted
            .then(|| find_optimum(points, case).ok())
            .flatten()
            .map(|o| OptimumJson {
                sensing_samples: o.sensing_samples,
                t_s_ms: o.sensing_time_s * 1e3,
                throughput: o.throughput,
            })
    };
    Summary {
        schema_version: SCHEMA_VERSION,
        tool: Tool {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        },
        seed,
        parameters: parameters(&plan.scenario),
        sweep: SweepInfo {
            grid: plan.grid.clone(),
            case: plan.cases.as_str(),
            mc: plan.mc.map(|m| McInfo {
                frames: m.n_frames,
                fidelity: match m.fidelity {
                    sensing_tradeoff_core::montecarlo::Fidelity::StatisticLevel => "statistic",
                    sensing_tradeoff_core::montecarlo::Fidelity::SampleLevel => "sample",
                },
                renewal: m.renewal,
            }),
        },
        optima: Optima {
            case1: optimum(1, plan.cases.case1()),
            case2: optimum(2, plan.cases.case2()),
        },
        errors: points
            .iter()
            .filter_map(|p| p.as_ref().err())
            .map(|e| PointFailure {
                sensing_samples: e.sensing_samples,
                message: e.source.to_string(),
            })
            .collect(),
    }
}

pub const TRACE_HEADER: &str =
    "frame\tbusy_start\tbusy_sense_end\tsense_occupied\ttx_interference\tstatistic\tdecision\toffered1\toffered2\tpus";

/// One tab-separated line per frame. The `pus` column lists each PU as its
/// initial state (`B` or `I`) followed by its toggle samples.
pub fn write_trace<W: Write>(mut out: W, frames: &[(u64, FrameTrace)]) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for (f, t) in frames {
        let pus: Vec<String> = t
            .pus
            .iter()
            .map(|p| {
                let mut s = String::from(if p.initially_busy { "B" } else { "I" });
                for j in &p.toggles {
                    s.push_str(&format!("@{j}"));
                }
                s
            })
            .collect();
        writeln!(
            out,
            "{f}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.busy_at_start,
            t.busy_at_sensing_end,
            t.sense_occupied,
            t.tx_interference,
            t.statistic,
            match t.decision {
                Decision::Busy => "busy",
                Decision::Idle => "idle",
            },
            t.offered[0],
            t.offered[1],
            pus.join(",")
        )?;
    }
    Ok(())
}
