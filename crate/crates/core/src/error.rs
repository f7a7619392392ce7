use thiserror::Error;

/// Errors produced by the spectral engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid point ω = {omega:e} rad/s lies outside |ω| < ω₀/10 = {limit:e} rad/s")]
    GridOutOfBand { omega: f64, limit: f64 },

    #[error("frequency grid must be strictly increasing (violated at index {index})")]
    GridNotIncreasing { index: usize },

    #[error("zero optical power gives infinite imprecision")]
    ZeroPower,

    #[error("homodyne phase θ = {theta} leaves no position transduction (sin θ = 0)")]
    NoTransduction { theta: f64 },

    #[error("detuning Δ = 0 is degenerate for heterodyne detection; use the homodyne spectrum")]
    DegenerateDetuning,

    #[error("simulation diverged at step {step} (non-finite state)")]
    Divergence { step: u64 },

    #[error("stream length mismatch: {what} has {got} samples, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("Welch request needs {needed} samples but the trace has {available}")]
    SegmentTooLong { needed: usize, available: usize },

    #[error("fit window [{lo:e}, {hi:e}] is not covered by the spectrum grid")]
    WindowOutsideGrid { lo: f64, hi: f64 },

    #[error("fit window holds {bins} spectral bins, need at least {needed}")]
    TooFewBins { bins: usize, needed: usize },

    #[error("least-squares fit did not converge after {iterations} iterations")]
    FitDidNotConverge { iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
