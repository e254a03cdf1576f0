//! Exponential on/off primary-user traffic.
//!
//! Holding times are in seconds. A PU in the busy state stays busy for an
//! exponential time of mean `theta_alpha`; idle spells have mean
//! `theta_beta`. The per-sample transition masses index the sample *after*
//! which the state flips: a flip at index `j` means the holding time ended in
//! `(j·t_s, (j+1)·t_s]`.

use crate::{Error, Result};

/// The stochastic environment shared by all primary users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficParams {
    /// Mean busy holding time, seconds.
    pub theta_alpha: f64,
    /// Mean idle holding time, seconds.
    pub theta_beta: f64,
    /// Number of primary users `N`.
    pub n_pu: u32,
    /// Per-PU linear SNR at the secondary receiver.
    pub gamma_p: f64,
}

impl TrafficParams {
    pub fn new(theta_alpha: f64, theta_beta: f64, n_pu: u32, gamma_p: f64) -> Result<Self> {
        positive_finite("theta_alpha", theta_alpha)?;
        positive_finite("theta_beta", theta_beta)?;
        if n_pu == 0 {
            return Err(Error::domain("n_pu", 0.0, "n_pu >= 1"));
        }
        if !(gamma_p.is_finite() && gamma_p >= 0.0) {
            return Err(Error::domain("gamma_p", gamma_p, "finite, >= 0"));
        }
        Ok(Self {
            theta_alpha,
            theta_beta,
            n_pu,
            gamma_p,
        })
    }

    /// Stationary probability that a PU is busy.
    pub fn p_busy(&self) -> f64 {
        self.theta_alpha / (self.theta_alpha + self.theta_beta)
    }

    /// Stationary probability that a PU is idle.
    pub fn p_idle(&self) -> f64 {
        self.theta_beta / (self.theta_alpha + self.theta_beta)
    }

    /// CDF of the busy holding time.
    pub fn cdf_busy(&self, x: f64) -> Result<f64> {
        exp_cdf(self.theta_alpha, x)
    }

    /// CDF of the idle holding time.
    pub fn cdf_idle(&self, x: f64) -> Result<f64> {
        exp_cdf(self.theta_beta, x)
    }

    /// `1 - cdf_busy(x)`, evaluated without cancellation.
    pub fn survival_busy(&self, x: f64) -> Result<f64> {
        exp_survival(self.theta_alpha, x)
    }

    /// `1 - cdf_idle(x)`, evaluated without cancellation.
    pub fn survival_idle(&self, x: f64) -> Result<f64> {
        exp_survival(self.theta_beta, x)
    }
}

/// Time discretization of one secondary-user frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameGeometry {
    /// Sampling interval, seconds.
    pub t_s: f64,
    /// Sensing samples `L`.
    pub n_sense: u32,
    /// Frame samples `S`.
    pub n_frame: u32,
}

impl FrameGeometry {
    pub fn new(t_s: f64, n_sense: u32, n_frame: u32) -> Result<Self> {
        positive_finite("t_s", t_s)?;
        if n_sense == 0 {
            return Err(Error::domain("n_sense", 0.0, "n_sense >= 1"));
        }
        if n_frame < n_sense {
            return Err(Error::OutOfRange {
                name: "n_frame",
                value: n_frame as i64,
                lo: n_sense as i64,
                hi: u32::MAX as i64,
            });
        }
        Ok(Self {
            t_s,
            n_sense,
            n_frame,
        })
    }

    /// Sensing duration `T_s = L·t_s`.
    pub fn sensing_time(&self) -> f64 {
        self.n_sense as f64 * self.t_s
    }

    /// Frame duration `T_f = S·t_s`.
    pub fn frame_time(&self) -> f64 {
        self.n_frame as f64 * self.t_s
    }

    /// Fraction of the frame left for transmission, `(T_f - T_s) / T_f`.
    pub fn duty_cycle(&self) -> f64 {
        (self.n_frame - self.n_sense) as f64 / self.n_frame as f64
    }

    /// Samples in the transmission period, `S - L`.
    pub fn tx_samples(&self) -> u32 {
        self.n_frame - self.n_sense
    }
}

/// Mass of an idle-to-busy flip after sample `j`, for `0 <= j < horizon`.
pub fn pmf_idle_to_busy(
    params: &TrafficParams,
    geom: &FrameGeometry,
    j: u32,
    horizon: u32,
) -> Result<f64> {
    check_index(j, horizon)?;
    Ok(exp_interval_mass(params.theta_beta, geom.t_s, j))
}

/// Mass of a busy-to-idle flip after sample `j`, for `0 <= j < horizon`.
pub fn pmf_busy_to_idle(
    params: &TrafficParams,
    geom: &FrameGeometry,
    j: u32,
    horizon: u32,
) -> Result<f64> {
    check_index(j, horizon)?;
    Ok(exp_interval_mass(params.theta_alpha, geom.t_s, j))
}

/// Prior probability that exactly `m` of the `N` PUs are busy at frame start.
pub fn prior_busy_count(params: &TrafficParams, m: u32) -> Result<f64> {
    let n = params.n_pu;
    if m > n {
        return Err(Error::OutOfRange {
            name: "m",
            value: m as i64,
            lo: 0,
            hi: n as i64,
        });
    }
    Ok(binomial(n, m)
        * libm::pow(params.p_busy(), m as f64)
        * libm::pow(params.p_idle(), (n - m) as f64))
}

/// Binomial coefficient as a float (exact for every `n` this crate handles).
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for t in 0..k {
        acc = acc * (n - t) as f64 / (t + 1) as f64;
    }
    libm::round(acc)
}

fn exp_cdf(theta: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain("x", x, "x >= 0"));
    }
    Ok(-libm::expm1(-x / theta))
}

fn exp_survival(theta: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain("x", x, "x >= 0"));
    }
    Ok(libm::exp(-x / theta))
}

// F((j+1)t) - F(jt) = e^{-jt/θ} (1 - e^{-t/θ})
fn exp_interval_mass(theta: f64, t_s: f64, j: u32) -> f64 {
    libm::exp(-(j as f64) * t_s / theta) * -libm::expm1(-t_s / theta)
}

fn check_index(j: u32, horizon: u32) -> Result<()> {
    if horizon == 0 || j >= horizon {
        return Err(Error::OutOfRange {
            name: "j",
            value: j as i64,
            lo: 0,
            hi: horizon as i64 - 1,
        });
    }
    Ok(())
}

fn positive_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(name, v, "finite, > 0"))
    }
}
