//! Channel capacities and average achievable secondary throughput, in
//! bits/s/Hz weighted by the transmission duty cycle.

use crate::detection::detect_prob_given_energy;
use crate::hypothesis::{hypothesis_prob_aggregate, HypothesisWeight};
use crate::traffic::FrameGeometry;
use crate::{ChangeRegime, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputConfig {
    /// Linear SNR of the secondary link.
    pub gamma_s: f64,
    pub geometry: FrameGeometry,
}

impl ThroughputConfig {
    pub fn new(gamma_s: f64, geometry: FrameGeometry) -> Result<Self> {
        if !(gamma_s.is_finite() && gamma_s > 0.0) {
            return Err(Error::domain("gamma_s", gamma_s, "finite, > 0"));
        }
        Ok(Self { gamma_s, geometry })
    }
}

/// Capacity with `busy` PUs present for the whole transmission period.
pub fn capacity_case1(busy: u32, gamma_s: f64, gamma_p: f64) -> f64 {
    libm::log2(1.0 + gamma_s / (1.0 + busy as f64 * gamma_p))
}

/// Capacity with a transmission-period interference numerator `offset`
/// (PU-samples over the `S - L` transmission samples).
pub fn capacity_case2(
    offset: u32,
    geom: &FrameGeometry,
    gamma_s: f64,
    gamma_p: f64,
) -> Result<f64> {
    let tx = geom.tx_samples();
    if tx == 0 {
        return Err(Error::NoTransmissionPeriod {
            samples: geom.n_frame,
        });
    }
    Ok(capacity_offset(offset, tx as f64, gamma_s, gamma_p))
}

#[inline]
fn capacity_offset(offset: u32, tx: f64, gamma_s: f64, gamma_p: f64) -> f64 {
    libm::log2(1.0 + gamma_s / (1.0 + offset as f64 / tx * gamma_p))
}

/// Average throughput split by the true channel state at the end of sensing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughput {
    pub total: f64,
    /// Earned on miss-detections.
    pub busy: f64,
    /// Earned on correct idle decisions.
    pub idle: f64,
}

impl Throughput {
    fn new(busy: f64, idle: f64) -> Self {
        Self {
            total: busy + idle,
            busy,
            idle,
        }
    }
}

/// Case I throughput: PUs keep their end-of-sensing state while the SU
/// transmits.
pub fn throughput_case1(
    weights: &[HypothesisWeight],
    p_d: f64,
    p_f: f64,
    cfg: &ThroughputConfig,
    gamma_p: f64,
) -> Throughput {
    let summary = hypothesis_prob_aggregate(weights);
    let duty = cfg.geometry.duty_cycle();
    let busy_avg: f64 = summary
        .per_busy_count
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, p)| p * capacity_case1(i as u32, cfg.gamma_s, gamma_p))
        .sum();
    Throughput::new(
        (1.0 - p_d) * duty * busy_avg,
        (1.0 - p_f) * duty * summary.p_h0 * capacity_case1(0, cfg.gamma_s, gamma_p),
    )
}

/// Case II throughput: capacity averaged over the transmission-period
/// interference carried by each weight. `P_d` / `P_f` enter as common
/// factors, not per hypothesis.
pub fn throughput_case2(
    weights: &[HypothesisWeight],
    p_d: f64,
    p_f: f64,
    cfg: &ThroughputConfig,
    gamma_p: f64,
) -> Result<Throughput> {
    let geom = &cfg.geometry;
    let tx = geom.tx_samples();
    if tx == 0 {
        return Err(Error::NoTransmissionPeriod {
            samples: geom.n_frame,
        });
    }
    let tx = tx as f64;
    let (mut busy, mut idle) = (0.0, 0.0);
    for w in weights {
        let dist = w
            .tx_interference
            .as_ref()
            .ok_or(Error::MissingInterference)?;
        let c = w.prob * dist.expectation(|off| capacity_offset(off, tx, cfg.gamma_s, gamma_p));
        if w.hyp.i == 0 {
            idle += c;
        } else {
            busy += c;
        }
    }
    let duty = geom.duty_cycle();
    Ok(Throughput::new(
        (1.0 - p_d) * duty * busy,
        (1.0 - p_f) * duty * idle,
    ))
}

/// Throughput with each hypothesis weighted by its own miss (or correct-idle)
/// probability at `threshold`, instead of the common `P_d` / `P_f` factors.
/// This is the expectation a frame-by-frame simulation realizes.
pub fn throughput_conditional_miss(
    weights: &[HypothesisWeight],
    threshold: f64,
    cfg: &ThroughputConfig,
    gamma_p: f64,
    regime: ChangeRegime,
) -> Result<Throughput> {
    let geom = &cfg.geometry;
    let l = geom.n_sense;
    let tx = geom.tx_samples() as f64;
    let (mut busy, mut idle) = (0.0, 0.0);
    for w in weights {
        let declared_idle = 1.0
            - w.sense_energy.expectation(|n| {
                detect_prob_given_energy(threshold, l, n, gamma_p).unwrap_or(f64::NAN)
            });
        let capacity = match regime {
            ChangeRegime::SensingOnly => capacity_case1(w.hyp.i, cfg.gamma_s, gamma_p),
            ChangeRegime::WholeFrame => {
                if tx == 0.0 {
                    return Err(Error::NoTransmissionPeriod {
                        samples: geom.n_frame,
                    });
                }
                let dist = w
                    .tx_interference
                    .as_ref()
                    .ok_or(Error::MissingInterference)?;
                dist.expectation(|off| capacity_offset(off, tx, cfg.gamma_s, gamma_p))
            }
        };
        let c = w.prob * declared_idle * capacity;
        if w.hyp.i == 0 {
            idle += c;
        } else {
            busy += c;
        }
    }
    let duty = geom.duty_cycle();
    Ok(Throughput::new(duty * busy, duty * idle))
}
