use thiserror::Error;

/// Errors raised anywhere in the simulator.
///
/// Each variant belongs to one of two families: configuration problems
/// (bad input files, values outside a type's invariants) and numerical
/// problems (non-convergence, geometry outside the validated model). The
/// command runner maps these families onto distinct exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("TLE line {line}: checksum mismatch (expected {expected}, computed {computed})")]
    Checksum { line: u8, expected: u32, computed: u32 },

    #[error("TLE line {line}: {message}")]
    Format { line: u8, message: String },

    #[error("{what} = {value} outside [{min}, {max}]")]
    Range { what: &'static str, value: f64, min: f64, max: f64 },

    #[error("propagation {offset_days:.3} days from epoch exceeds the {limit_days}-day accuracy guard")]
    PropagationWindow { offset_days: f64, limit_days: f64 },

    #[error("empty search interval: t1 ({t1}) must exceed t0 ({t0})")]
    EmptySearch { t0: f64, t1: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge after {levels} refinement levels")]
    Convergence { levels: u32 },

    #[error("elevation {elevation_deg:.3} deg below the {min_deg:.3} deg link minimum")]
    BelowHorizon { elevation_deg: f64, min_deg: f64 },

    #[error("intensity schedule covers {covered} of {needed} samples")]
    ScheduleGap { covered: usize, needed: usize },

    #[error("cannot partition an empty window")]
    EmptyWindow,

    #[error("both channel transmittances are zero")]
    DegenerateChannel,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid configuration: {0}")]
    Invariant(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by the user's inputs rather than the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Checksum { .. }
                | Error::Format { .. }
                | Error::Range { .. }
                | Error::PropagationWindow { .. }
                | Error::EmptySearch { .. }
                | Error::Parse(_)
                | Error::Schema(_)
                | Error::Invariant(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
