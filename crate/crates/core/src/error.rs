use crate::bits::BitString;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every module.
///
/// Each variant maps onto a distinct exit code in the command-line front end,
/// see [`Error::kind`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("missing capability: {0}")]
    Capability(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("event is not monotone: holds at {lower} but not at {upper}")]
    Monotonicity { lower: BitString, upper: BitString },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Budget(_) => "budget",
            Error::Capability(_) => "capability",
            Error::Precondition(_) => "precondition",
            Error::Monotonicity { .. } => "monotonicity",
            Error::Invariant(_) => "invariant",
            Error::Parse(_) => "parse",
        }
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn budget(what: &str, requested: impl std::fmt::Display, limit: impl std::fmt::Display) -> Self {
        Error::Budget(format!("{what}: requested {requested}, limit {limit}"))
    }
}

/// Rejects enumeration of `2^log2` items when it exceeds `2^limit`.
pub(crate) fn check_log2_budget(what: &str, log2: usize, limit: u32) -> Result<()> {
    if log2 > limit as usize {
        Err(Error::budget(what, format_args!("2^{log2}"), format_args!("2^{limit}")))
    } else {
        Ok(())
    }
}
