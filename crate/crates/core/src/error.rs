use thiserror::Error;

/// Everything that can go wrong while building or evaluating an approximant.
///
/// Most variants are recoverable at the pipeline level: an order that fails
/// to build is marked unavailable and the neighbours fill the gap.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no solution at this order: {0}")]
    NoSolution(String),

    #[error("degenerate nodes: {0}")]
    DegenerateNodes(String),

    #[error("order {order} unavailable: {reason}")]
    OrderUnavailable { order: usize, reason: String },

    #[error("beta series is degenerate (zero prefactor exponent and vanishing a1)")]
    BetaDegenerate,

    #[error("pole or branch point at g = {g}")]
    PoleOrBranch { g: f64 },

    #[error("depth {depth} unavailable: {reason}")]
    DepthUnavailable { depth: usize, reason: String },

    #[error("approximant is not real at g = {g}")]
    NonReal { g: f64 },

    #[error("branch violation at g = {g}")]
    BranchViolation { g: f64 },

    #[error("no real positive omega at any even order")]
    OmegaUnavailable,

    #[error("fewer than two usable orders")]
    InsufficientOrders,

    #[error("invalid input at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
