use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("index {name} = {value} out of range [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: i64,
        lo: i64,
        hi: i64,
    },
    #[error("invalid hypothesis (n_pu = {n_pu}, m = {m}, i = {i}, k = {k})")]
    InvalidHypothesis { n_pu: u32, m: u32, i: u32, k: u32 },
    #[error("conditional probability undefined: P({event}) = 0")]
    UndefinedConditional { event: &'static str },
    #[error("target P_d = {target} not bracketed: P_d({lo}) = {pd_lo}, P_d({hi}) = {pd_hi}")]
    Bracket {
        target: f64,
        lo: f64,
        hi: f64,
        pd_lo: f64,
        pd_hi: f64,
    },
    #[error("threshold solver did not converge in {iterations} iterations")]
    NoConvergence { iterations: u32 },
    #[error("no transmission period: frame and sensing both span {samples} samples")]
    NoTransmissionPeriod { samples: u32 },
    #[error("hypothesis weights carry no transmission-period interference distribution")]
    MissingInterference,
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}
