use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is outside the open interval (0, 1/2)")]
    Domain { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "energy ordering is ambiguous: lattice points ({a1}, {b1}) and ({a2}, {b2}) differ by {gap:e}, \
         inside the guard band; use commensurate mode or higher precision"
    )]
    Ambiguous {
        a1: i64,
        b1: i64,
        a2: i64,
        b2: i64,
        gap: f64,
    },

    #[error("comparison mode commensurate({m}) requires h = 2J/{m}, got h = {h}, 2J/{m} = {expected}")]
    ModeMismatch { m: u32, h: f64, expected: f64 },

    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sequence of length {n} exceeds the brute-force limit of {max}")]
    TooLarge { n: usize, max: usize },

    #[error("field ({h}) lies on a regime boundary h = 2J/{m}")]
    OnBoundary { h: f64, m: u32 },

    #[error("regime mismatch: requested m = {requested}, couplings classify as m = {actual}")]
    RegimeMismatch { requested: u32, actual: u32 },

    #[error("recursion visited more than {budget} distinct field states")]
    StateBudget { budget: usize },

    #[error("recursion left the recurrent set at state ({n1}, {n2})")]
    UnexpectedState { n1: i64, n2: i8 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("q = {q}, epsilon = {epsilon}, trial {trial}: {source}")]
    Trial {
        q: f64,
        epsilon: f64,
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Process exit code: 1 for bad input, 3 for numeric or ambiguity failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain { .. }
            | Error::InvalidArgument(_)
            | Error::ModeMismatch { .. }
            | Error::LengthMismatch { .. }
            | Error::TooLarge { .. }
            | Error::OnBoundary { .. }
            | Error::RegimeMismatch { .. } => 1,
            Error::Trial { source, .. } => source.exit_code(),
            Error::Ambiguous { .. } | Error::StateBudget { .. } | Error::UnexpectedState { .. } | Error::Numeric(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
