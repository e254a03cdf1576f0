//! TOML scenario files.
//!
//! Times are in seconds and SNRs in dB at this boundary; everything is
//! converted once to the linear quantities the core works with.
//!
//! ```toml
//! theta_alpha_s = 0.02   # mean busy holding time
//! theta_beta_s  = 0.02   # mean idle holding time
//! n_pu          = 2
//! t_s_s         = 1e-4   # sampling interval
//! t_f_s         = 0.03   # frame period
//! gamma_p_db    = -5.0
//! gamma_s_db    = 10.0
//! target_pd     = 0.9
//! solver_tol    = 1e-9   # optional
//!
//! [sweep]                # optional, every key overridable on the CLI
//! ls       = "10:290:10"
//! case     = "both"      # "1", "2" or "both"
//! mc       = false
//! frames   = 100000
//! seed     = 1
//! fidelity = "statistic" # or "sample"
//! renewal  = false
//! ```

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use sensing_tradeoff_core::db_to_linear;
use sensing_tradeoff_core::montecarlo::Fidelity;
use sensing_tradeoff_core::traffic::TrafficParams;

pub const DEFAULT_SOLVER_TOL: f64 = 1e-9;
pub const DEFAULT_FRAMES: u64 = 100_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}:{line}: invalid `{key}`: {message}")]
    Invalid {
        path: String,
        line: usize,
        key: &'static str,
        message: String,
    },
    #[error(
        "invalid sweep range `{0}`: expected start:stop:step with 1 <= start <= stop, step >= 1"
    )]
    Range(String),
    #[error("sweep grid value L = {value} must satisfy 1 <= L < S = {frame_samples}")]
    GridOutOfFrame { value: u32, frame_samples: u32 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    theta_alpha_s: f64,
    theta_beta_s: f64,
    n_pu: u32,
    t_s_s: f64,
    t_f_s: f64,
    gamma_p_db: f64,
    gamma_s_db: f64,
    target_pd: f64,
    #[serde(default = "default_tol")]
    solver_tol: f64,
    #[serde(default)]
    sweep: RawSweep,
}

fn default_tol() -> f64 {
    DEFAULT_SOLVER_TOL
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    ls: Option<String>,
    case: Option<String>,
    mc: Option<bool>,
    frames: Option<u64>,
    seed: Option<u64>,
    fidelity: Option<String>,
    renewal: Option<bool>,
}

/// Physical scenario shared by every sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: TrafficParams,
    pub t_s: f64,
    pub t_f: f64,
    /// Frame length in samples, `S = T_f / t_s`.
    pub frame_samples: u32,
    pub gamma_s: f64,
    pub target_pd: f64,
    pub solver_tol: f64,
    /// The dB values as given, for reporting.
    pub gamma_p_db: f64,
    pub gamma_s_db: f64,
}

/// Which throughput curves to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseSelection {
    One,
    Two,
    Both,
}

impl CaseSelection {
    pub fn case1(self) -> bool {
        matches!(self, CaseSelection::One | CaseSelection::Both)
    }

    pub fn case2(self) -> bool {
        matches!(self, CaseSelection::Two | CaseSelection::Both)
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "1" => Some(CaseSelection::One),
            "2" => Some(CaseSelection::Two),
            "both" => Some(CaseSelection::Both),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseSelection::One => "1",
            CaseSelection::Two => "2",
            CaseSelection::Both => "both",
        }
    }
}

/// Sweep settings as read from the `[sweep]` table, before CLI overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepDefaults {
    pub ls: Option<Vec<u32>>,
    pub case: Option<CaseSelection>,
    pub mc: Option<bool>,
    pub frames: Option<u64>,
    pub seed: Option<u64>,
    pub fidelity: Option<Fidelity>,
    pub renewal: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub scenario: Scenario,
    pub sweep: SweepDefaults,
}

pub fn load(path: &Path) -> Result<ConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text, &path.display().to_string())
}

/// Parses and validates a scenario. `origin` names the source in diagnostics.
pub fn parse(text: &str, origin: &str) -> Result<ConfigFile, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| line_col(text, span.start))
            .unwrap_or((1, 1));
        ConfigError::Parse {
            path: origin.to_string(),
            line,
            column,
            message: e.message().to_string(),
        }
    })?;

    let invalid = |key: &'static str, message: String| ConfigError::Invalid {
        path: origin.to_string(),
        line: key_line(text, key),
        key,
        message,
    };

    let gamma_p = db_to_linear(raw.gamma_p_db);
    let params = TrafficParams::new(raw.theta_alpha_s, raw.theta_beta_s, raw.n_pu, gamma_p)
        .map_err(|e| {
            let key = match &e {
                sensing_tradeoff_core::Error::Domain { name, .. } => match *name {
                    "theta_alpha" => "theta_alpha_s",
                    "theta_beta" => "theta_beta_s",
                    "n_pu" => "n_pu",
                    _ => "gamma_p_db",
                },
                _ => "n_pu",
            };
            invalid(key, e.to_string())
        })?;
    if !(raw.t_s_s.is_finite() && raw.t_s_s > 0.0) {
        return Err(invalid("t_s_s", "must be finite and > 0".into()));
    }
    let ratio = raw.t_f_s / raw.t_s_s;
    let frame_samples = ratio.round();
    if !(ratio.is_finite() && frame_samples >= 2.0 && (ratio - frame_samples).abs() <= 1e-6 * ratio)
    {
        return Err(invalid(
            "t_f_s",
            format!("must be an integer multiple (>= 2) of t_s_s; got {ratio} samples"),
        ));
    }
    if frame_samples > u32::MAX as f64 {
        return Err(invalid("t_f_s", "frame too long".into()));
    }
    if !raw.gamma_s_db.is_finite() {
        return Err(invalid("gamma_s_db", "must be finite".into()));
    }
    if !(raw.target_pd > 0.0 && raw.target_pd < 1.0) {
        return Err(invalid("target_pd", "must lie in (0, 1)".into()));
    }
    if !(raw.solver_tol > 0.0) {
        return Err(invalid("solver_tol", "must be > 0".into()));
    }

    let s = &raw.sweep;
    let sweep = SweepDefaults {
        ls: s
            .ls
            .as_deref()
            .map(parse_range)
            .transpose()
            .map_err(|e| invalid("ls", e.to_string()))?,
        case: s
            .case
            .as_deref()
            .map(|c| {
                CaseSelection::parse(c)
                    .ok_or_else(|| invalid("case", format!("expected 1, 2 or both, got `{c}`")))
            })
            .transpose()?,
        mc: s.mc,
        frames: s.frames,
        seed: s.seed,
        fidelity: s
            .fidelity
            .as_deref()
            .map(|f| {
                parse_fidelity(f).ok_or_else(|| {
                    invalid(
                        "fidelity",
                        format!("expected statistic or sample, got `{f}`"),
                    )
                })
            })
            .transpose()?,
        renewal: s.renewal,
    };
    if sweep.frames == Some(0) {
        return Err(invalid("frames", "must be >= 1".into()));
    }

    Ok(ConfigFile {
        scenario: Scenario {
            params,
            t_s: raw.t_s_s,
            t_f: raw.t_f_s,
            frame_samples: frame_samples as u32,
            gamma_s: db_to_linear(raw.gamma_s_db),
            target_pd: raw.target_pd,
            solver_tol: raw.solver_tol,
            gamma_p_db: raw.gamma_p_db,
            gamma_s_db: raw.gamma_s_db,
        },
        sweep,
    })
}

pub fn parse_fidelity(s: &str) -> Option<Fidelity> {
    match s {
        "statistic" => Some(Fidelity::StatisticLevel),
        "sample" => Some(Fidelity::SampleLevel),
        _ => None,
    }
}

/// Inclusive `start:stop:step` range of sensing lengths.
pub fn parse_range(s: &str) -> Result<Vec<u32>, ConfigError> {
    let err = || ConfigError::Range(s.to_string());
    let parts: Vec<u32> = s
        .split(':')
        .map(|p| p.trim().parse::<u32>().map_err(|_| err()))
        .collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(err());
    };
    if start == 0 || stop < start || step == 0 {
        return Err(err());
    }
    Ok((start..=stop).step_by(step as usize).collect())
}

/// Checks `1 <= L < S` for every grid value.
pub fn check_grid(grid: &[u32], frame_samples: u32) -> Result<(), ConfigError> {
    for &value in grid {
        if value == 0 || value >= frame_samples {
            return Err(ConfigError::GridOutOfFrame {
                value,
                frame_samples,
            });
        }
    }
    Ok(())
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn key_line(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            l.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(1, |i| i + 1)
}
