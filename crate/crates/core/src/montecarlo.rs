//! Frame-level Monte Carlo simulator.
//!
//! Each PU starts busy with probability `p_b`, draws an exponential holding
//! time with the mean of its state, and flips after sample
//! `j = floor(holding / t_s)` if that falls inside the frame. By default it
//! then freezes; with `renewal` set it keeps alternating.
//!
//! Both traffic regimes are read off the same trajectory: Case I drops the
//! flips at or after sample `L`. Frame `f` draws from its own ChaCha stream
//! keyed by `(seed, f)`, so any partition of the frames into workers yields
//! the same per-frame results.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::throughput::{capacity_case1, capacity_case2};
use crate::traffic::{FrameGeometry, TrafficParams};
use crate::{ChangeRegime, Error, Result};

/// 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// How the detection statistic is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fidelity {
    /// Real Gaussian noise plus PU signal, squared and summed sample by sample.
    SampleLevel,
    /// The statistic drawn from its Gaussian law given the occupied-sample
    /// count.
    StatisticLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Busy,
    Idle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_frames: u64,
    pub seed: u64,
    pub fidelity: Fidelity,
    /// Simulate the alternating renewal process instead of at most one flip.
    pub renewal: bool,
}

impl SimConfig {
    pub fn new(n_frames: u64, seed: u64, fidelity: Fidelity) -> Result<Self> {
        if n_frames == 0 {
            return Err(Error::domain("n_frames", 0.0, "n_frames >= 1"));
        }
        Ok(Self {
            n_frames,
            seed,
            fidelity,
            renewal: false,
        })
    }
}

/// One PU over one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuTrajectory {
    pub initially_busy: bool,
    /// Samples after which the state flips, nondecreasing. A flip after sample
    /// `j` takes effect from sample index `j` on.
    pub toggles: Vec<u32>,
}

impl PuTrajectory {
    pub fn busy_at(&self, sample: u32) -> bool {
        let flips = self.toggles.iter().take_while(|&&j| j <= sample).count();
        self.initially_busy ^ (flips % 2 == 1)
    }

    /// Busy samples in `[from, to)`.
    pub fn occupied(&self, from: u32, to: u32) -> u32 {
        let mut busy = self.initially_busy;
        let mut start = 0;
        let mut count = 0;
        for &j in self.toggles.iter().chain(core::iter::once(&u32::MAX)) {
            if busy {
                count += j.min(to).saturating_sub(start.max(from));
            }
            start = j;
            busy = !busy;
        }
        count
    }

    /// The trajectory with every flip at or after `sample` removed.
    pub fn truncated(&self, sample: u32) -> Self {
        Self {
            initially_busy: self.initially_busy,
            toggles: self
                .toggles
                .iter()
                .copied()
                .filter(|&j| j < sample)
                .collect(),
        }
    }
}

/// Draws the `N` PU trajectories of one frame. The window is the sensing
/// period for [`ChangeRegime::SensingOnly`] and the whole frame otherwise.
pub fn sample_pu_trajectory<R: Rng + ?Sized>(
    params: &TrafficParams,
    geom: &FrameGeometry,
    rng: &mut R,
    regime: ChangeRegime,
    renewal: bool,
) -> Vec<PuTrajectory> {
    let window = match regime {
        ChangeRegime::SensingOnly => geom.n_sense,
        ChangeRegime::WholeFrame => geom.n_frame,
    };
    let p_busy = params.p_busy();
    (0..params.n_pu)
        .map(|_| {
            let initially_busy = rng.random::<f64>() < p_busy;
            let mut toggles = Vec::new();
            let mut busy = initially_busy;
            let mut elapsed = 0.0;
            loop {
                let mean = if busy {
                    params.theta_alpha
                } else {
                    params.theta_beta
                };
                let hold: f64 = rng.sample(Exp1);
                elapsed += mean * hold;
                let j = libm::floor(elapsed / geom.t_s);
                if j >= window as f64 {
                    break;
                }
                toggles.push(j as u32);
                if !renewal {
                    break;
                }
                busy = !busy;
            }
            PuTrajectory {
                initially_busy,
                toggles,
            }
        })
        .collect()
}

/// Draws the energy statistic `Λ` for the sensing window.
pub fn sensing_statistic<R: Rng + ?Sized>(
    pus: &[PuTrajectory],
    geom: &FrameGeometry,
    gamma_p: f64,
    rng: &mut R,
    fidelity: Fidelity,
) -> f64 {
    let l = geom.n_sense;
    match fidelity {
        Fidelity::StatisticLevel => {
            let occupied: u32 = pus.iter().map(|p| p.occupied(0, l)).sum();
            draw_gaussian_statistic(l, occupied, gamma_p, rng)
        }
        Fidelity::SampleLevel => (0..l)
            .map(|s| {
                let busy = pus.iter().filter(|p| p.busy_at(s)).count();
                let amplitude = libm::sqrt(busy as f64 * gamma_p);
                let noise: f64 = rng.sample(StandardNormal);
                let y = amplitude + noise;
                y * y
            })
            .sum(),
    }
}

/// `Λ ~ N(L + nγ_p, 2L + 4nγ_p)`.
pub fn draw_gaussian_statistic<R: Rng + ?Sized>(
    l: u32,
    occupied: u32,
    gamma_p: f64,
    rng: &mut R,
) -> f64 {
    let signal = occupied as f64 * gamma_p;
    let z: f64 = rng.sample(StandardNormal);
    l as f64 + signal + 2.0 * libm::sqrt(l as f64 / 2.0 + signal) * z
}

/// Declares busy when the statistic exceeds the threshold.
pub fn run_sensing<R: Rng + ?Sized>(
    pus: &[PuTrajectory],
    threshold: f64,
    gamma_p: f64,
    geom: &FrameGeometry,
    rng: &mut R,
    fidelity: Fidelity,
) -> (Decision, f64) {
    let stat = sensing_statistic(pus, geom, gamma_p, rng, fidelity);
    let decision = if stat > threshold {
        Decision::Busy
    } else {
        Decision::Idle
    };
    (decision, stat)
}

/// Everything a campaign needs besides the [`SimConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameModel {
    pub params: TrafficParams,
    pub geometry: FrameGeometry,
    /// Detection threshold; `-inf` forces a busy decision.
    pub threshold: f64,
    /// Linear SNR of the secondary link.
    pub gamma_s: f64,
}

/// Outcome of one simulated frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrace {
    /// Whole-frame trajectories; Case I uses them truncated at `L`.
    pub pus: Vec<PuTrajectory>,
    pub busy_at_start: u32,
    pub busy_at_sensing_end: u32,
    /// Occupied PU-samples during sensing.
    pub sense_occupied: u32,
    /// Case II interference numerator over the transmission period.
    pub tx_interference: u32,
    pub statistic: f64,
    pub decision: Decision,
    /// Duty-cycle-weighted capacity the frame would yield if the SU
    /// transmitted, Case I and Case II.
    pub offered: [f64; 2],
}

impl FrameTrace {
    /// Realized throughput: the offered capacity on an idle decision, zero
    /// otherwise.
    pub fn realized(&self) -> [f64; 2] {
        match self.decision {
            Decision::Busy => [0.0; 2],
            Decision::Idle => self.offered,
        }
    }
}

/// Per-frame RNG: the master seed with the frame index as stream id.
pub fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

pub fn simulate_frame(model: &FrameModel, sim: &SimConfig, frame: u64) -> FrameTrace {
    let mut rng = frame_rng(sim.seed, frame);
    let geom = &model.geometry;
    let gamma_p = model.params.gamma_p;
    let (l, s) = (geom.n_sense, geom.n_frame);
    let pus = sample_pu_trajectory(
        &model.params,
        geom,
        &mut rng,
        ChangeRegime::WholeFrame,
        sim.renewal,
    );
    let (decision, statistic) =
        run_sensing(&pus, model.threshold, gamma_p, geom, &mut rng, sim.fidelity);

    let busy_at_start = pus.iter().filter(|p| p.initially_busy).count() as u32;
    let busy_at_sensing_end = pus.iter().filter(|p| p.busy_at(l - 1)).count() as u32;
    let sense_occupied = pus.iter().map(|p| p.occupied(0, l)).sum();
    let tx_interference = pus.iter().map(|p| p.occupied(l, s)).sum();

    let duty = geom.duty_cycle();
    let c1 = capacity_case1(busy_at_sensing_end, model.gamma_s, gamma_p);
    let c2 = capacity_case2(tx_interference, geom, model.gamma_s, gamma_p).unwrap_or(0.0);

    FrameTrace {
        pus,
        busy_at_start,
        busy_at_sensing_end,
        sense_occupied,
        tx_interference,
        statistic,
        decision,
        offered: [duty * c1, duty * c2],
    }
}

/// Running sums over frames. Index 0 of each pair is Case I, index 1 Case II.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CampaignTally {
    pub frames: u64,
    /// Frames with at least one PU busy at the end of sensing.
    pub busy_frames: u64,
    pub detections: u64,
    pub idle_frames: u64,
    pub false_alarms: u64,
    /// Σ realized throughput and its square.
    pub realized_sum: [f64; 2],
    pub realized_sq_sum: [f64; 2],
    /// Σ offered throughput over busy frames.
    pub offered_busy: [f64; 2],
    /// Σ offered throughput over idle frames.
    pub offered_idle: [f64; 2],
}

impl CampaignTally {
    pub fn add(&mut self, t: &FrameTrace) {
        self.frames += 1;
        let busy_decision = t.decision == Decision::Busy;
        let offered = if t.busy_at_sensing_end > 0 {
            self.busy_frames += 1;
            self.detections += busy_decision as u64;
            &mut self.offered_busy
        } else {
            self.idle_frames += 1;
            self.false_alarms += busy_decision as u64;
            &mut self.offered_idle
        };
        let realized = t.realized();
        for c in 0..2 {
            offered[c] += t.offered[c];
            self.realized_sum[c] += realized[c];
            self.realized_sq_sum[c] += realized[c] * realized[c];
        }
    }

    /// Adds `other` into `self`. Merge order must be fixed for bit-identical
    /// floating-point totals.
    pub fn merge(&mut self, other: &CampaignTally) {
        self.frames += other.frames;
        self.busy_frames += other.busy_frames;
        self.detections += other.detections;
        self.idle_frames += other.idle_frames;
        self.false_alarms += other.false_alarms;
        for c in 0..2 {
            self.realized_sum[c] += other.realized_sum[c];
            self.realized_sq_sum[c] += other.realized_sq_sum[c];
            self.offered_busy[c] += other.offered_busy[c];
            self.offered_idle[c] += other.offered_idle[c];
        }
    }

    /// `(1 - P̂_d)·Ê[C·1{H_1}] + (1 - P̂_f)·Ê[C·1{H_0}]`: the throughput with
    /// the miss and correct-idle rates applied as common factors.
    pub fn factored_throughput(&self) -> [f64; 2] {
        let n = self.frames as f64;
        let mut out = [0.0; 2];
        for (c, slot) in out.iter_mut().enumerate() {
            if self.busy_frames > 0 {
                let miss = (self.busy_frames - self.detections) as f64 / self.busy_frames as f64;
                *slot += miss * self.offered_busy[c] / n;
            }
            if self.idle_frames > 0 {
                let pass = (self.idle_frames - self.false_alarms) as f64 / self.idle_frames as f64;
                *slot += pass * self.offered_idle[c] / n;
            }
        }
        out
    }
}

/// Point estimate with standard error and 95% interval. `NaN` everywhere
/// when no frame contributed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub lo: f64,
    pub hi: f64,
    pub samples: u64,
}

impl Estimate {
    /// Binomial proportion with a Wilson score interval.
    pub fn proportion(hits: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self::empty();
        }
        let n = trials as f64;
        let p = hits as f64 / n;
        let z2 = Z_95 * Z_95;
        let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = Z_95 / (1.0 + z2 / n) * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
        Self {
            value: p,
            std_err: libm::sqrt(p * (1.0 - p) / n),
            lo: centre - half,
            hi: centre + half,
            samples: trials,
        }
    }

    /// Sample mean with a normal interval.
    pub fn mean(sum: f64, sq_sum: f64, count: u64) -> Self {
        if count == 0 {
            return Self::empty();
        }
        let n = count as f64;
        let mean = sum / n;
        let var = if count > 1 {
            ((sq_sum - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self::normal(mean, libm::sqrt(var / n), count)
    }

    /// Estimate with a given standard error and a normal interval.
    pub fn normal(value: f64, std_err: f64, samples: u64) -> Self {
        Self {
            value,
            std_err,
            lo: value - Z_95 * std_err,
            hi: value + Z_95 * std_err,
            samples,
        }
    }

    fn empty() -> Self {
        Self {
            value: f64::NAN,
            std_err: f64::NAN,
            lo: f64::NAN,
            hi: f64::NAN,
            samples: 0,
        }
    }

    /// Whether `reference` lies within `sigmas` standard errors.
    pub fn within_sigmas(&self, reference: f64, sigmas: f64) -> bool {
        (self.value - reference).abs() <= sigmas * self.std_err
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignSummary {
    pub frames: u64,
    pub p_d: Estimate,
    pub p_f: Estimate,
    /// Mean realized throughput per frame, Case I and Case II.
    pub realized: [Estimate; 2],
    /// [`CampaignTally::factored_throughput`], with a batch-means standard
    /// error (`NaN` with fewer than two batches).
    pub factored: [Estimate; 2],
}

/// Upper bound on the number of frame batches in a campaign.
pub const CAMPAIGN_BATCHES: u64 = 64;

/// The contiguous frame ranges a campaign of `n_frames` is split into.
pub fn batch_ranges(n_frames: u64) -> Vec<core::ops::Range<u64>> {
    let batches = n_frames.min(CAMPAIGN_BATCHES);
    (0..batches)
        .map(|b| (b * n_frames / batches)..((b + 1) * n_frames / batches))
        .collect()
}

/// Combines per-batch tallies, in the given order, into a summary.
pub fn summarize(batches: &[CampaignTally]) -> CampaignSummary {
    let mut total = CampaignTally::default();
    for b in batches {
        total.merge(b);
    }
    let factored_total = total.factored_throughput();
    let mut factored = [Estimate::empty(); 2];
    for (c, slot) in factored.iter_mut().enumerate() {
        let k = batches.len() as f64;
        let std_err = if batches.len() > 1 {
            let per: Vec<f64> = batches.iter().map(|b| b.factored_throughput()[c]).collect();
            let mean = per.iter().sum::<f64>() / k;
            let var = per.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
            libm::sqrt(var / k)
        } else {
            f64::NAN
        };
        *slot = Estimate::normal(factored_total[c], std_err, total.frames);
    }
    CampaignSummary {
        frames: total.frames,
        p_d: Estimate::proportion(total.detections, total.busy_frames),
        p_f: Estimate::proportion(total.false_alarms, total.idle_frames),
        realized: [0, 1].map(|c| {
            Estimate::mean(
                total.realized_sum[c],
                total.realized_sq_sum[c],
                total.frames,
            )
        }),
        factored,
    }
}

/// Serial campaign over frames `0..n_frames`.
pub fn run_campaign(model: &FrameModel, sim: &SimConfig) -> Result<CampaignSummary> {
    if sim.n_frames == 0 {
        return Err(Error::domain("n_frames", 0.0, "n_frames >= 1"));
    }
    let batches: Vec<CampaignTally> = batch_ranges(sim.n_frames)
        .into_iter()
        .map(|r| tally_frames(model, sim, r))
        .collect();
    Ok(summarize(&batches))
}

/// Tally of a contiguous frame range, in index order.
pub fn tally_frames(
    model: &FrameModel,
    sim: &SimConfig,
    frames: core::ops::Range<u64>,
) -> CampaignTally {
    let mut tally = CampaignTally::default();
    for f in frames {
        tally.add(&simulate_frame(model, sim, f));
    }
    tally
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn traj(busy: bool, toggles: &[u32]) -> PuTrajectory {
        PuTrajectory {
            initially_busy: busy,
            toggles: toggles.to_vec(),
        }
    }

    #[test]
    fn occupancy_conventions() {
        // departure after sample d: d busy samples in the window
        let dep = traj(true, &[7]);
        assert_eq!(dep.occupied(0, 20), 7);
        assert!(dep.busy_at(6) && !dep.busy_at(7));
        // arrival after sample a: L - a busy samples
        let arr = traj(false, &[0]);
        assert_eq!(arr.occupied(0, 20), 20);
        let arr = traj(false, &[19]);
        assert_eq!(arr.occupied(0, 20), 1);
        // transmission window [L, S)
        let stay = traj(true, &[25]);
        assert_eq!(stay.occupied(20, 30), 5);
        let late = traj(false, &[25]);
        assert_eq!(late.occupied(20, 30), 5);
        assert_eq!(late.occupied(0, 20), 0);
        assert_eq!(traj(true, &[]).occupied(20, 30), 10);
        // renewal: busy [0,3), idle [3,5), busy [5,..)
        let r = traj(true, &[3, 5]);
        assert_eq!(r.occupied(0, 10), 8);
        assert_eq!(r.occupied(4, 10), 5);
        assert_eq!(r.occupied(0, 4), 3);
        assert_eq!(r.truncated(5), traj(true, &[3]));
    }

    #[test]
    fn occupied_matches_per_sample_count() {
        let cases = [
            traj(true, &[]),
            traj(false, &[4]),
            traj(true, &[2, 2, 9]),
            traj(false, &[0, 3, 8, 12]),
        ];
        for t in &cases {
            for from in 0..14 {
                for to in from..14 {
                    let want = (from..to).filter(|&s| t.busy_at(s)).count() as u32;
                    assert_eq!(t.occupied(from, to), want, "{t:?} [{from},{to})");
                }
            }
        }
    }

    fn model(theta: f64, n: u32, l: u32, threshold: f64) -> FrameModel {
        FrameModel {
            params: TrafficParams::new(theta, theta, n, 0.316).unwrap(),
            geometry: FrameGeometry::new(1e-4, l, 300).unwrap(),
            threshold,
            gamma_s: 10.0,
        }
    }

    #[test]
    fn frozen_traffic_never_toggles() {
        let m = model(1e9, 3, 50, 60.0);
        let mut rng = frame_rng(1, 0);
        for _ in 0..1000 {
            let pus = sample_pu_trajectory(
                &m.params,
                &m.geometry,
                &mut rng,
                ChangeRegime::WholeFrame,
                false,
            );
            assert!(pus.iter().all(|p| p.toggles.is_empty()));
        }
    }

    #[test]
    fn at_most_one_toggle_inside_window() {
        let m = model(0.002, 2, 50, 60.0);
        let mut rng = frame_rng(2, 0);
        for regime in [ChangeRegime::SensingOnly, ChangeRegime::WholeFrame] {
            let window = match regime {
                ChangeRegime::SensingOnly => 50,
                ChangeRegime::WholeFrame => 300,
            };
            for _ in 0..500 {
                for p in sample_pu_trajectory(&m.params, &m.geometry, &mut rng, regime, false) {
                    assert!(p.toggles.len() <= 1);
                    assert!(p.toggles.iter().all(|&j| j < window));
                }
            }
        }
        let renewals = (0..200)
            .flat_map(|_| {
                sample_pu_trajectory(
                    &m.params,
                    &m.geometry,
                    &mut rng,
                    ChangeRegime::WholeFrame,
                    true,
                )
            })
            .filter(|p| p.toggles.len() > 1)
            .count();
        assert!(renewals > 0);
    }

    #[test]
    fn forced_busy_decision_earns_nothing() {
        let m = model(0.02, 2, 50, f64::NEG_INFINITY);
        let sim = SimConfig::new(2000, 9, Fidelity::SampleLevel).unwrap();
        let s = run_campaign(&m, &sim).unwrap();
        assert_eq!(s.realized[0].value, 0.0);
        assert_eq!(s.realized[1].value, 0.0);
        assert_eq!(s.p_f.value, 1.0);
    }

    #[test]
    fn campaign_is_reproducible_and_splittable() {
        let m = model(0.02, 2, 40, 45.0);
        let sim = SimConfig::new(3000, 77, Fidelity::StatisticLevel).unwrap();
        let a = run_campaign(&m, &sim).unwrap();
        let b = run_campaign(&m, &sim).unwrap();
        assert_eq!(a, b);
        let mut split = tally_frames(&m, &sim, 0..1000);
        split.merge(&tally_frames(&m, &sim, 1000..3000));
        let whole = tally_frames(&m, &sim, 0..3000);
        assert_eq!(split.frames, whole.frames);
        assert_eq!(split.detections, whole.detections);
        assert_eq!(split.false_alarms, whole.false_alarms);
        assert!((split.realized_sum[0] - whole.realized_sum[0]).abs() < 1e-9);
        assert_eq!(batch_ranges(3000).len() as u64, CAMPAIGN_BATCHES);
        assert_eq!(batch_ranges(3000).last().unwrap().end, 3000);
        assert_eq!(batch_ranges(5), vec![0..1, 1..2, 2..3, 3..4, 4..5]);
    }

    #[test]
    fn zero_frames_rejected() {
        assert!(SimConfig::new(0, 1, Fidelity::StatisticLevel).is_err());
        let m = model(0.02, 1, 10, 10.0);
        let sim = SimConfig {
            n_frames: 0,
            seed: 0,
            fidelity: Fidelity::StatisticLevel,
            renewal: false,
        };
        assert!(run_campaign(&m, &sim).is_err());
    }

    #[test]
    fn estimates() {
        let e = Estimate::proportion(50, 100);
        assert_eq!(e.value, 0.5);
        assert!(e.lo < 0.5 && e.hi > 0.5);
        assert!((e.std_err - 0.05).abs() < 1e-15);
        let m = Estimate::mean(10.0, 30.0, 4);
        assert_eq!(m.value, 2.5);
        assert!(Estimate::proportion(0, 0).value.is_nan());
        let v = [1.0f64, 2.0, 3.0];
        let sq: f64 = v.iter().map(|x| x * x).sum();
        let m = Estimate::mean(6.0, sq, 3);
        assert!((m.std_err - libm::sqrt(1.0 / 3.0)).abs() < 1e-12);
    }
}
