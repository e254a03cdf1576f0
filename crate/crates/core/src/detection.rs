//! Energy-detector performance under the hypothesis mixture.
//!
//! Noise variance is fixed to one, so the threshold is in the same units as
//! the accumulated energy `Λ = Σ Y_j²`. With `n` occupied PU-samples in the
//! window the statistic is taken as Gaussian with mean `L + nγ_p` and
//! standard deviation `2·sqrt(L/2 + nγ_p)`.

use crate::hypothesis::{HypothesisWeight, OffsetDistribution};
use crate::{Error, Result};

/// Iteration cap of [`solve_threshold`].
pub const MAX_BISECTION_STEPS: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Detection threshold `η`.
    pub threshold: f64,
    /// Per-PU linear SNR.
    pub gamma_p: f64,
    /// Target detection probability used by the threshold solver.
    pub target_pd: f64,
}

impl DetectorConfig {
    pub fn new(threshold: f64, gamma_p: f64, target_pd: f64) -> Result<Self> {
        if !(threshold >= 0.0) {
            return Err(Error::domain("threshold", threshold, ">= 0"));
        }
        if !(gamma_p.is_finite() && gamma_p >= 0.0) {
            return Err(Error::domain("gamma_p", gamma_p, "finite, >= 0"));
        }
        check_target(target_pd)?;
        Ok(Self {
            threshold,
            gamma_p,
            target_pd,
        })
    }

    pub fn with_threshold(self, threshold: f64) -> Self {
        Self { threshold, ..self }
    }
}

/// Probability that the detector declares "busy" given `occupied` PU-samples
/// in an `l`-sample window.
pub fn detect_prob_given_energy(eta: f64, l: u32, occupied: u32, gamma_p: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::domain("L", 0.0, "L >= 1"));
    }
    Ok(detect_prob_unchecked(
        eta,
        l as f64,
        occupied as f64 * gamma_p,
    ))
}

#[inline]
fn detect_prob_unchecked(eta: f64, l: f64, signal: f64) -> f64 {
    let spread = 2.0 * core::f64::consts::SQRT_2 * libm::sqrt(l / 2.0 + signal);
    0.5 * libm::erfc((eta - l - signal) / spread)
}

/// Occupied-sample distributions of the busy and idle hypotheses, each
/// weighted by hypothesis probability.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMixture {
    /// Sensing window length `L`.
    pub sense_samples: u32,
    /// `Σ_{i>=1} P(H_{1,i},m,k)·sense_energy`; total is `P(H_1)`.
    pub busy: OffsetDistribution,
    /// Same over `i = 0`; total is `P(H_0)`.
    pub idle: OffsetDistribution,
}

impl EnergyMixture {
    pub fn new(weights: &[HypothesisWeight], sense_samples: u32) -> Self {
        let mut busy = OffsetDistribution::new(0, alloc::vec::Vec::new());
        let mut idle = busy.clone();
        for w in weights {
            let part = w.sense_energy.clone().scaled(w.prob);
            if w.hyp.i == 0 {
                idle.accumulate(&part);
            } else {
                busy.accumulate(&part);
            }
        }
        Self {
            sense_samples,
            busy,
            idle,
        }
    }

    /// `P_d(η)`: detection probability conditioned on at least one busy PU.
    pub fn prob_detection(&self, eta: f64, gamma_p: f64) -> Result<f64> {
        conditional(&self.busy, self.sense_samples, eta, gamma_p, "H1")
    }

    /// `P_f(η)`: declaring busy when no PU is busy at the end of sensing.
    pub fn prob_false_alarm(&self, eta: f64, gamma_p: f64) -> Result<f64> {
        conditional(&self.idle, self.sense_samples, eta, gamma_p, "H0")
    }
}

fn conditional(
    dist: &OffsetDistribution,
    l: u32,
    eta: f64,
    gamma_p: f64,
    event: &'static str,
) -> Result<f64> {
    if l == 0 {
        return Err(Error::domain("L", 0.0, "L >= 1"));
    }
    let total = dist.total();
    if !(total > 0.0) {
        return Err(Error::UndefinedConditional { event });
    }
    let lf = l as f64;
    let acc = dist.expectation(|n| detect_prob_unchecked(eta, lf, n as f64 * gamma_p));
    Ok((acc / total).clamp(0.0, 1.0))
}

/// Unconditional probability of detection.
pub fn prob_detection(
    weights: &[HypothesisWeight],
    sense_samples: u32,
    detector: &DetectorConfig,
) -> Result<f64> {
    EnergyMixture::new(weights, sense_samples).prob_detection(detector.threshold, detector.gamma_p)
}

/// Unconditional probability of false alarm.
pub fn prob_false_alarm(
    weights: &[HypothesisWeight],
    sense_samples: u32,
    detector: &DetectorConfig,
) -> Result<f64> {
    EnergyMixture::new(weights, sense_samples)
        .prob_false_alarm(detector.threshold, detector.gamma_p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSolution {
    pub threshold: f64,
    /// `P_d` re-evaluated at `threshold`.
    pub p_d: f64,
    pub iterations: u32,
}

/// Bisects `P_d(η) = target_pd` on `[0, L(1 + Nγ_p) + 20·sqrt(2L)]`.
///
/// `P_d` and `P_f` both fall monotonically in `η`, so the root is also the
/// threshold with the smallest false-alarm rate among those meeting the
/// detection target.
pub fn solve_threshold(
    weights: &[HypothesisWeight],
    sense_samples: u32,
    gamma_p: f64,
    target_pd: f64,
    tol: f64,
) -> Result<ThresholdSolution> {
    let mixture = EnergyMixture::new(weights, sense_samples);
    let n_pu = weights.iter().map(|w| w.hyp.i).max().unwrap_or(0);
    solve_threshold_mixture(&mixture, n_pu, gamma_p, target_pd, tol)
}

pub fn solve_threshold_mixture(
    mixture: &EnergyMixture,
    n_pu: u32,
    gamma_p: f64,
    target_pd: f64,
    tol: f64,
) -> Result<ThresholdSolution> {
    check_target(target_pd)?;
    if !(tol > 0.0) {
        return Err(Error::domain("tol", tol, "> 0"));
    }
    let l = mixture.sense_samples as f64;
    let (mut lo, mut hi) = (
        0.0,
        l * (1.0 + n_pu as f64 * gamma_p) + 20.0 * libm::sqrt(2.0 * l),
    );
    let pd = |eta: f64| mixture.prob_detection(eta, gamma_p);
    let (pd_lo, pd_hi) = (pd(lo)?, pd(hi)?);
    if pd_lo < target_pd || pd_hi > target_pd {
        return Err(Error::Bracket {
            target: target_pd,
            lo,
            hi,
            pd_lo,
            pd_hi,
        });
    }
    for iterations in 1..=MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let p = pd(mid)?;
        if (p - target_pd).abs() <= tol {
            return Ok(ThresholdSolution {
                threshold: mid,
                p_d: p,
                iterations,
            });
        }
        if p > target_pd {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_BISECTION_STEPS,
    })
}

fn check_target(target_pd: f64) -> Result<()> {
    if target_pd > 0.0 && target_pd < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("target_pd", target_pd, "0 < target_pd < 1"))
    }
}
