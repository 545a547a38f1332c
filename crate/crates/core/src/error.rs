use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the domain where the field is smooth (zero fiber,
    /// point outside the chart, stencil crossing the origin).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported derivative order {0}: at most 1 in x and 5 in y")]
    UnsupportedOrder(String),

    #[error("evaluation produced a non-finite value for order {order}")]
    Evaluation { order: String },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("strong convexity fails: {0}")]
    StrongConvexity(String),

    #[error("alignment vector lies in a subbundle: {0}")]
    Alignment(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate denominator L1*L2 - 2*L*L12 = {0}")]
    DegenerateDenominator(f64),

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("sample {index}: {source}")]
    AtSample {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_sample(self, index: usize) -> Error {
        Error::AtSample {
            index,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping sample wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtSample { source, .. } => source.root(),
            e => e,
        }
    }
}
