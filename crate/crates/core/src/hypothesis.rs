//! Occupancy hypotheses `(i, m, k)` and their probabilities.
//!
//! `m` PUs are busy at frame start, `i` are busy at the end of sensing and
//! `k` of the initial `m` stay busy through the whole sensing window. The
//! remaining PUs split into `i - k` arrivals, `m - k` departures and
//! `N - (i - k) - m` PUs that stay idle through sensing.
//!
//! The nested sums over individual arrival/departure instants factor into
//! r-fold convolutions of one single-PU [`OffsetDistribution`], because the
//! PUs are exchangeable. Every weight therefore carries the exact
//! distribution of its accumulated occupied-sample count instead of a bare
//! probability.

use alloc::vec;
use alloc::vec::Vec;

use crate::traffic::{self, binomial, FrameGeometry, TrafficParams};
use crate::{ChangeRegime, Error, Result};

/// Nonnegative weights on a contiguous range of integer offsets starting at
/// `lo`. The weights need not sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetDistribution {
    lo: u32,
    mass: Vec<f64>,
}

impl OffsetDistribution {
    /// `mass[t]` is the weight of offset `lo + t`.
    pub fn new(lo: u32, mass: Vec<f64>) -> Self {
        debug_assert!(mass.iter().all(|&w| w >= 0.0), "negative mass");
        Self { lo, mass }
    }

    /// Unit mass at offset zero, the identity of [`convolve`].
    pub fn unit() -> Self {
        Self::point(0, 1.0)
    }

    pub fn point(at: u32, weight: f64) -> Self {
        Self::new(at, vec![weight])
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Smallest offset carried.
    pub fn lo(&self) -> u32 {
        self.lo
    }

    /// Largest offset carried (equal to `lo` when empty).
    pub fn hi(&self) -> u32 {
        self.lo + self.mass.len().saturating_sub(1) as u32
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn mass_at(&self, offset: u32) -> f64 {
        offset
            .checked_sub(self.lo)
            .and_then(|t| self.mass.get(t as usize))
            .copied()
            .unwrap_or(0.0)
    }

    /// `(offset, mass)` pairs in increasing offset order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        let lo = self.lo;
        self.mass
            .iter()
            .enumerate()
            .map(move |(t, &w)| (lo + t as u32, w))
    }

    /// `Σ mass(s)·f(s)`.
    pub fn expectation(&self, mut f: impl FnMut(u32) -> f64) -> f64 {
        self.iter().map(|(s, w)| w * f(s)).sum()
    }

    pub fn shifted(mut self, by: u32) -> Self {
        self.lo += by;
        self
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.mass.iter_mut().for_each(|w| *w *= factor);
        self
    }

    /// Rescaled to total one. Left untouched when the total is zero.
    pub fn normalized(self) -> Self {
        let total = self.total();
        if total > 0.0 {
            self.scaled(1.0 / total)
        } else {
            self
        }
    }

    /// Adds `other` into `self` pointwise, widening the support as needed.
    pub fn accumulate(&mut self, other: &OffsetDistribution) {
        if other.is_empty() {
            return;
        }
        if self.is_empty() {
            *self = other.clone();
            return;
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let mut mass = vec![0.0; (hi - lo + 1) as usize];
        for (s, w) in self.iter().chain(other.iter()) {
            mass[(s - lo) as usize] += w;
        }
        self.lo = lo;
        self.mass = mass;
    }

    /// Distribution of the sum of `r` independent copies.
    pub fn power(&self, r: u32) -> Self {
        (0..r).fold(Self::unit(), |acc, _| convolve(&acc, self))
    }
}

/// Distribution of the sum of two independent offsets. Totals multiply.
pub fn convolve(a: &OffsetDistribution, b: &OffsetDistribution) -> OffsetDistribution {
    if a.is_empty() || b.is_empty() {
        return OffsetDistribution::new(a.lo + b.lo, Vec::new());
    }
    let mut mass = vec![0.0; a.mass.len() + b.mass.len() - 1];
    for (s, &wa) in a.mass.iter().enumerate() {
        if wa == 0.0 {
            continue;
        }
        for (t, &wb) in b.mass.iter().enumerate() {
            mass[s + t] += wa * wb;
        }
    }
    OffsetDistribution::new(a.lo + b.lo, mass)
}

/// One `(i, m, k)` cell of the hypothesis grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupancyHypothesis {
    /// PUs busy at the end of sensing.
    pub i: u32,
    /// PUs busy at frame start.
    pub m: u32,
    /// PUs busy throughout sensing.
    pub k: u32,
}

impl OccupancyHypothesis {
    pub fn new(n_pu: u32, i: u32, m: u32, k: u32) -> Result<Self> {
        let (lo, hi) = k_range(n_pu, m, i)?;
        if k < lo || k > hi {
            return Err(Error::InvalidHypothesis { n_pu, m, i, k });
        }
        Ok(Self { i, m, k })
    }

    pub fn arrivals(&self) -> u32 {
        self.i - self.k
    }

    pub fn departures(&self) -> u32 {
        self.m - self.k
    }

    /// PUs idle throughout sensing, `N - (i - k) - m`.
    pub fn idle_throughout(&self, n_pu: u32) -> u32 {
        n_pu - self.arrivals() - self.m
    }
}

/// Admissible range of `k` for given `m` and `i`:
/// `max(0, m + i - N) ..= min(m, i)`.
pub fn k_range(n_pu: u32, m: u32, i: u32) -> Result<(u32, u32)> {
    for (name, v) in [("m", m), ("i", i)] {
        if v > n_pu {
            return Err(Error::OutOfRange {
                name,
                value: v as i64,
                lo: 0,
                hi: n_pu as i64,
            });
        }
    }
    let lo = (m + i).saturating_sub(n_pu);
    let hi = m.min(i);
    assert!(lo <= hi, "empty k range for valid m, i");
    Ok((lo, hi))
}

/// How the count of PU-identity assignments `M` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CombinatorialRule {
    /// `M = C(m, k)·C(N - m, i - k)`: which of the `m` busy PUs stay and which
    /// of the `N - m` idle PUs arrive. Makes the hypothesis grid sum to one.
    #[default]
    Exact,
    /// `M = C(N, N - k)` if `m = N`, `C(N, i)` if `m = 0`, else 1. Agrees with
    /// `Exact` whenever `m ∈ {0, N}` or `N <= 2`; undercounts otherwise.
    Printed,
}

/// The factor `M` of hypothesis `(i, m, k)` under `rule`.
pub fn combinatorial_factor(
    n_pu: u32,
    m: u32,
    i: u32,
    k: u32,
    rule: CombinatorialRule,
) -> Result<f64> {
    let h = OccupancyHypothesis::new(n_pu, i, m, k)?;
    Ok(match rule {
        CombinatorialRule::Exact => binomial(m, k) * binomial(n_pu - m, h.arrivals()),
        CombinatorialRule::Printed if m == n_pu => binomial(n_pu, n_pu - k),
        CombinatorialRule::Printed if m == 0 => binomial(n_pu, i),
        CombinatorialRule::Printed => 1.0,
    })
}

/// Occupied samples contributed by one PU arriving inside a window of
/// `horizon` samples: offset `horizon - a` with mass `p_β(a)`.
pub fn arrival_offset_dist(
    params: &TrafficParams,
    geom: &FrameGeometry,
    horizon: u32,
) -> Result<OffsetDistribution> {
    check_horizon(horizon)?;
    // offset 1 ↔ a = horizon-1, offset horizon ↔ a = 0
    let mut mass = Vec::with_capacity(horizon as usize);
    for offset in 1..=horizon {
        mass.push(traffic::pmf_idle_to_busy(
            params,
            geom,
            horizon - offset,
            horizon,
        )?);
    }
    Ok(OffsetDistribution::new(1, mass))
}

/// Occupied samples contributed by one PU departing inside a window of
/// `horizon` samples: offset `d` with mass `p_α(d)`.
pub fn departure_offset_dist(
    params: &TrafficParams,
    geom: &FrameGeometry,
    horizon: u32,
) -> Result<OffsetDistribution> {
    check_horizon(horizon)?;
    let mass = (0..horizon)
        .map(|d| traffic::pmf_busy_to_idle(params, geom, d, horizon))
        .collect::<Result<Vec<_>>>()?;
    Ok(OffsetDistribution::new(0, mass))
}

/// Transmission-period interference numerator of a PU busy through sensing:
/// offset `g - L` for a departure after sample `g ∈ [L, S)`, and `S - L` with
/// mass `1 - F_α(T_f)` when it stays busy to the end of the frame.
pub fn stay_busy_tx_dist(
    params: &TrafficParams,
    geom: &FrameGeometry,
) -> Result<OffsetDistribution> {
    let (l, s) = (geom.n_sense, geom.n_frame);
    let mut mass = Vec::with_capacity((s - l + 1) as usize);
    for g in l..s {
        mass.push(traffic::pmf_busy_to_idle(params, geom, g, s)?);
    }
    mass.push(params.survival_busy(geom.frame_time())?);
    Ok(OffsetDistribution::new(0, mass))
}

/// Transmission-period interference numerator of a PU idle through sensing:
/// offset `S - c` for an arrival after sample `c ∈ [L, S)`, and 0 with mass
/// `1 - F_β(T_f)` when it stays idle to the end of the frame.
pub fn stay_idle_tx_dist(
    params: &TrafficParams,
    geom: &FrameGeometry,
) -> Result<OffsetDistribution> {
    let (l, s) = (geom.n_sense, geom.n_frame);
    let mut mass = vec![0.0; (s - l + 1) as usize];
    mass[0] = params.survival_idle(geom.frame_time())?;
    for c in l..s {
        mass[(s - c) as usize] = traffic::pmf_idle_to_busy(params, geom, c, s)?;
    }
    Ok(OffsetDistribution::new(0, mass))
}

/// Probability mass of one hypothesis with the distributions it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisWeight {
    pub hyp: OccupancyHypothesis,
    /// `P(H_{1,i}, m, k)`.
    pub prob: f64,
    /// Total occupied-sample count during sensing, normalized.
    pub sense_energy: OffsetDistribution,
    /// Interference numerator over the transmission period, normalized.
    /// The interference in SNR units is `offset / (S - L) · γ_p`. Present only
    /// for [`ChangeRegime::WholeFrame`].
    pub tx_interference: Option<OffsetDistribution>,
}

/// Hypothesis grid for transitions confined to the sensing window.
pub fn hypothesis_weights_case1(
    params: &TrafficParams,
    geom: &FrameGeometry,
) -> Result<Vec<HypothesisWeight>> {
    hypothesis_weights(
        params,
        geom,
        ChangeRegime::SensingOnly,
        CombinatorialRule::Exact,
    )
}

/// Hypothesis grid for transitions anywhere in the frame. Requires `S > L`.
pub fn hypothesis_weights_case2(
    params: &TrafficParams,
    geom: &FrameGeometry,
) -> Result<Vec<HypothesisWeight>> {
    hypothesis_weights(
        params,
        geom,
        ChangeRegime::WholeFrame,
        CombinatorialRule::Exact,
    )
}

/// Full `(i, m, k)` grid, ordered by `i`, then `m`, then `k`.
pub fn hypothesis_weights(
    params: &TrafficParams,
    geom: &FrameGeometry,
    regime: ChangeRegime,
    rule: CombinatorialRule,
) -> Result<Vec<HypothesisWeight>> {
    let n = params.n_pu;
    let l = geom.n_sense;
    if regime == ChangeRegime::WholeFrame && geom.n_frame == l {
        return Err(Error::NoTransmissionPeriod { samples: l });
    }

    let arrival = arrival_offset_dist(params, geom, l)?;
    let departure = departure_offset_dist(params, geom, l)?;
    // sense[na][nd]: na arrivals and nd departures, normalized
    let sense = joint_table(&powers(&arrival, n), &departure, n);
    let tx = match regime {
        ChangeRegime::SensingOnly => None,
        ChangeRegime::WholeFrame => {
            let busy_tx = stay_busy_tx_dist(params, geom)?;
            let idle_tx = stay_idle_tx_dist(params, geom)?;
            // tx[ni][k]: ni PUs idle and k busy through sensing
            Some(joint_table(&powers(&idle_tx, n), &busy_tx, n))
        }
    };
    let stay_busy = params.survival_busy(geom.sensing_time())?;
    let stay_idle = params.survival_idle(geom.sensing_time())?;

    let mut out = Vec::new();
    for i in 0..=n {
        for m in 0..=n {
            let prior = traffic::prior_busy_count(params, m)?;
            let (k_lo, k_hi) = k_range(n, m, i)?;
            for k in k_lo..=k_hi {
                let hyp = OccupancyHypothesis { i, m, k };
                let (na, nd, ni) = (hyp.arrivals(), hyp.departures(), hyp.idle_throughout(n));
                let energy = &sense[na as usize][nd as usize];
                let base = combinatorial_factor(n, m, i, k, rule)? * prior * energy.total();

                let (prob, tx_interference) = match &tx {
                    None => (
                        base * libm::pow(stay_busy, k as f64) * libm::pow(stay_idle, ni as f64),
                        None,
                    ),
                    Some(table) => {
                        let dist = &table[ni as usize][k as usize];
                        (
                            base * dist.total(),
                            Some(dist.clone().shifted(na * geom.tx_samples()).normalized()),
                        )
                    }
                };
                let sense_energy = energy.clone().shifted(k * l).normalized();
                out.push(HypothesisWeight {
                    hyp,
                    prob,
                    sense_energy,
                    tx_interference,
                });
            }
        }
    }
    Ok(out)
}

/// Marginal hypothesis probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisSummary {
    /// `P(H_{1,i})` for `i = 0..=N`; entry 0 is `P(H_0)`.
    pub per_busy_count: Vec<f64>,
    pub p_h1: f64,
    pub p_h0: f64,
}

pub fn hypothesis_prob_aggregate(weights: &[HypothesisWeight]) -> HypothesisSummary {
    let n = weights.iter().map(|w| w.hyp.i).max().unwrap_or(0);
    let mut per_busy_count = vec![0.0; n as usize + 1];
    for w in weights {
        per_busy_count[w.hyp.i as usize] += w.prob;
    }
    let p_h0 = per_busy_count[0];
    let p_h1 = per_busy_count[1..].iter().sum();
    HypothesisSummary {
        per_busy_count,
        p_h1,
        p_h0,
    }
}

fn powers(base: &OffsetDistribution, n: u32) -> Vec<OffsetDistribution> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(OffsetDistribution::unit());
    for r in 1..=n as usize {
        let next = convolve(&out[r - 1], base);
        out.push(next);
    }
    out
}

/// `table[a][b]` = `first_powers[a]` convolved with `b` copies of `second`,
/// for `a + b <= n`.
fn joint_table(
    first_powers: &[OffsetDistribution],
    second: &OffsetDistribution,
    n: u32,
) -> Vec<Vec<OffsetDistribution>> {
    first_powers
        .iter()
        .take(n as usize + 1)
        .enumerate()
        .map(|(a, start)| {
            let mut row = Vec::with_capacity(n as usize + 1 - a);
            row.push(start.clone());
            for b in 1..=n as usize - a {
                let next = convolve(&row[b - 1], second);
                row.push(next);
            }
            row
        })
        .collect()
}

fn check_horizon(horizon: u32) -> Result<()> {
    if horizon == 0 {
        return Err(Error::domain("horizon", 0.0, "horizon >= 1"));
    }
    Ok(())
}
