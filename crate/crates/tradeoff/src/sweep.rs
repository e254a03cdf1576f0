//! Sensing-length sweep: threshold, error rates and throughput per `L`.

use rayon::prelude::*;
use thiserror::Error;

use sensing_tradeoff_core::detection::{solve_threshold, EnergyMixture};
use sensing_tradeoff_core::hypothesis::{hypothesis_weights_case1, hypothesis_weights_case2};
use sensing_tradeoff_core::montecarlo::{CampaignSummary, FrameModel, SimConfig};
use sensing_tradeoff_core::throughput::{throughput_case1, throughput_case2, ThroughputConfig};
use sensing_tradeoff_core::traffic::FrameGeometry;

use crate::campaign::run_campaign_parallel;
use crate::config::{CaseSelection, Scenario};

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub scenario: Scenario,
    pub grid: Vec<u32>,
    pub cases: CaseSelection,
    /// Monte Carlo settings; `None` skips simulation.
    pub mc: Option<SimConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub sensing_samples: u32,
    pub sensing_time_s: f64,
    pub threshold: f64,
    pub p_d: f64,
    pub p_f: f64,
    pub r_case1: Option<f64>,
    pub r_case2: Option<f64>,
    pub mc: Option<CampaignSummary>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("L = {sensing_samples}: {source}")]
pub struct PointError {
    pub sensing_samples: u32,
    pub source: sensing_tradeoff_core::Error,
}

pub type PointOutcome = Result<TradeoffPoint, PointError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OptimumError {
    #[error("no sweep point produced a case {0} throughput")]
    NoFeasiblePoint(u8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub sensing_samples: u32,
    pub sensing_time_s: f64,
    pub throughput: f64,
}

pub fn evaluate_point(
    scenario: &Scenario,
    cases: CaseSelection,
    mc: Option<&SimConfig>,
    l: u32,
) -> PointOutcome {
    evaluate(scenario, cases, mc, l).map_err(|source| PointError {
        sensing_samples: l,
        source,
    })
}

fn evaluate(
    sc: &Scenario,
    cases: CaseSelection,
    mc: Option<&SimConfig>,
    l: u32,
) -> sensing_tradeoff_core::Result<TradeoffPoint> {
    let gp = sc.params.gamma_p;
    let geom = FrameGeometry::new(sc.t_s, l, sc.frame_samples)?;
    let weights = if cases.case2() {
        hypothesis_weights_case2(&sc.params, &geom)?
    } else {
        hypothesis_weights_case1(&sc.params, &geom)?
    };
    let sol = solve_threshold(&weights, l, gp, sc.target_pd, sc.solver_tol)?;
    let p_f = EnergyMixture::new(&weights, l).prob_false_alarm(sol.threshold, gp)?;
    let cfg = ThroughputConfig::new(sc.gamma_s, geom)?;
    let r_case1 = cases
        .case1()
        .then(|| throughput_case1(&weights, sol.p_d, p_f, &cfg, gp).total);
    let r_case2 = if cases.case2() {
        Some(throughput_case2(&weights, sol.p_d, p_f, &cfg, gp)?.total)
    } else {
        None
    };
    let mc = mc
        .map(|sim| {
            let model = FrameModel {
                params: sc.params,
                geometry: geom,
                threshold: sol.threshold,
                gamma_s: sc.gamma_s,
            };
            run_campaign_parallel(&model, sim)
        })
        .transpose()?;
    Ok(TradeoffPoint {
        sensing_samples: l,
        sensing_time_s: geom.sensing_time(),
        threshold: sol.threshold,
        p_d: sol.p_d,
        p_f,
        r_case1,
        r_case2,
        mc,
    })
}

/// Evaluates every grid point in parallel; results come back in grid order
/// and a failing point does not stop the others.
pub fn run_sweep(plan: &SweepPlan) -> Vec<PointOutcome> {
    plan.grid
        .par_iter()
        .map(|&l| evaluate_point(&plan.scenario, plan.cases, plan.mc.as_ref(), l))
        .collect()
}

/// Grid point with the highest analytic throughput for `case` (1 or 2).
/// Ties go to the shorter sensing length.
pub fn find_optimum(points: &[PointOutcome], case: u8) -> Result<Optimum, OptimumError> {
    let mut best: Option<Optimum> = None;
    for p in points.iter().flatten() {
        let r = match case {
            1 => p.r_case1,
            _ => p.r_case2,
        };
        let Some(r) = r.filter(|r| r.is_finite()) else {
            continue;
        };
        if best.is_none_or(|b| r > b.throughput) {
            best = Some(Optimum {
                sensing_samples: p.sensing_samples,
                sensing_time_s: p.sensing_time_s,
                throughput: r,
            });
        }
    }
    best.ok_or(OptimumError::NoFeasiblePoint(case))
}
