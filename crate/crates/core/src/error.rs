use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The economy document is not well-formed JSON of the expected shape.
    #[error("parse error: {0}")]
    Parse(String),

    /// The document parsed but breaks a model invariant.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("unknown good index {0}")]
    UnknownGood(usize),

    #[error("unknown type index {0}")]
    UnknownType(usize),

    #[error("good `{0}` is not assigned to any type by the target rule")]
    NotInImage(String),

    #[error("good `{good}` is assigned at two different prices ({first} and {second})")]
    AmbiguousPrice {
        good: String,
        first: f64,
        second: f64,
    },

    #[error("every type is assigned the null bundle")]
    NoActiveTypes,

    #[error(
        "exponential enumeration over {types} types refused (limit {limit}); pass --force to run anyway"
    )]
    EnumerationGuard { types: usize, limit: usize },

    #[error("search space too large: {candidates} candidates exceed the limit of {limit}; {hint}")]
    SearchSpace {
        candidates: u128,
        limit: u128,
        hint: String,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported query: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
