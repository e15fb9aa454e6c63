use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the documented domain.
    Parameter(&'static str),
    /// A mathematical function was evaluated outside its domain.
    Domain(&'static str),
    /// The computation would exceed the supported size or integer range.
    Resource {
        what: &'static str,
        /// Largest admissible value of the offending quantity, when known.
        limit: Option<u64>,
    },
    /// The input has probability zero under the measure (e.g. an index seen
    /// with two different bits).
    ImpossibleEvent,
    /// A decoder ran out of input or met an invalid field.
    Decode(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Resource { what, limit: Some(limit) } => {
                write!(f, "resource limit exceeded: {what} (limit {limit})")
            }
            Error::Resource { what, limit: None } => write!(f, "resource limit exceeded: {what}"),
            Error::ImpossibleEvent => f.write_str("sequence has probability zero"),
            Error::Decode(msg) => write!(f, "decode error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
