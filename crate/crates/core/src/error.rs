use thiserror::Error;

use crate::geometry::lp::LpError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// No ellipsoid with eigenvalues above the floor fits in the polytope.
    #[error("version space is empty or degenerate: {0}")]
    InfeasibleOrDegenerate(String),
    #[error("LP failure: {0}")]
    LpFailure(#[from] LpError),
    /// A realizable-only learner received labels no hypothesis explains.
    #[error("non-realizable stream at round {round}: {reason}")]
    NonRealizable { round: u64, reason: String },
    #[error("feature map violates its declared specification: {0}")]
    SpecViolation(String),
    #[error("no cover by at most {k} pieces exists for {m} points")]
    ErmInfeasible { k: usize, m: usize },
    #[error("invalid action distribution: {0}")]
    InvalidDistribution(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    /// Wraps an error with the round at which it surfaced.
    #[error("round {round}: {source}")]
    AtRound {
        round: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_round(self, round: u64) -> Self {
        match self {
            e @ Error::AtRound { .. } => e,
            e => Error::AtRound {
                round,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, skipping round annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtRound { source, .. } => source.root(),
            e => e,
        }
    }

    /// Variant name of the innermost error.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::InfeasibleOrDegenerate(_) => "InfeasibleOrDegenerate",
            Error::LpFailure(_) => "LpFailure",
            Error::NonRealizable { .. } => "NonRealizable",
            Error::SpecViolation(_) => "SpecViolation",
            Error::ErmInfeasible { .. } => "ErmInfeasible",
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
            Error::AtRound { .. } => unreachable!("root is never a round annotation"),
        }
    }

    /// Round at which the error surfaced, if known.
    pub fn round(&self) -> Option<u64> {
        match self {
            Error::AtRound { round, .. } | Error::NonRealizable { round, .. } => Some(*round),
            _ => None,
        }
    }

    /// Whether this is a learner/data failure (as opposed to configuration or I/O).
    pub fn is_runtime(&self) -> bool {
        !matches!(self.root(), Error::Config(_) | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
