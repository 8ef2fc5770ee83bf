use thiserror::Error;

/// Errors produced by formula construction, parsing, counting and solving.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable index must be at least 1")]
    ZeroVariable,

    #[error("variable x{var} exceeds declared scope {scope}")]
    VarOutOfScope { var: u32, scope: u32 },

    #[error("assignment has {found} values but the formula scope is {expected}")]
    ScopeMismatch { expected: usize, found: usize },

    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("DIMACS line {line}: {message}")]
    Dimacs { line: usize, message: String },

    #[error("scope {scope} exceeds the enumeration limit of {limit} variables")]
    LimitExceeded { scope: usize, limit: usize },

    /// A numeric argument violated its documented bound.
    #[error("{what} = {value} violates bound {bound}")]
    Range {
        what: &'static str,
        value: String,
        bound: String,
    },

    #[error("operand {index} has scope {found}, expected {expected}")]
    Arity {
        index: usize,
        expected: u32,
        found: u32,
    },

    #[error("block declaration: {0}")]
    Blocks(String),

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
