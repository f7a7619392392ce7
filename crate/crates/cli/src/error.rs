use std::fmt;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Regime(Vec<String>),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Regime(_) => 4,
            Self::Io(_) => 1,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "invalid configuration: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Regime(w) => write!(f, "regime violation (--strict): {}", w.join("; ")),
            Self::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

impl From<sideband::Error> for CliError {
    fn from(e: sideband::Error) -> Self {
        use sideband::Error as E;
        match e {
            E::InvalidParameter { .. }
            | E::GridOutOfBand { .. }
            | E::GridNotIncreasing { .. }
            | E::ZeroPower
            | E::NoTransduction { .. }
            | E::DegenerateDetuning => Self::Config(e.to_string()),
            E::Divergence { .. }
            | E::FitDidNotConverge { .. }
            | E::LengthMismatch { .. }
            | E::SegmentTooLong { .. }
            | E::WindowOutsideGrid { .. }
            | E::TooFewBins { .. } => Self::Numerical(e.to_string()),
        }
    }
}
