use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::syntax::ModuleName;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{position}: expected {}, found {found}", .expected.join(" or "))]
    Unexpected {
        position: Position,
        expected: Vec<String>,
        found: String,
    },
    #[error("{position}: {message}")]
    Invalid { position: Position, message: String },
    #[error("{position}: duplicate module header `/{name} =`")]
    DuplicateHeader { position: Position, name: String },
}

impl ParseError {
    pub fn position(&self) -> Position {
        match self {
            ParseError::Unexpected { position, .. }
            | ParseError::Invalid { position, .. }
            | ParseError::DuplicateHeader { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{0}` is not a valid name")]
pub struct NameError(pub String);

fn render_chain(names: &[ModuleName]) -> String {
    names
        .iter()
        .map(|m| format!("/{m}"))
        .collect::<Vec<_>>()
        .join(" -> ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("module /{name} not found (searched: {})", .searched.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", "))]
    ModuleNotFound {
        name: ModuleName,
        searched: Vec<PathBuf>,
    },
    #[error("{}: header declares /{declared}, expected /{expected}", .file.display())]
    HeaderMismatch {
        file: PathBuf,
        declared: String,
        expected: ModuleName,
    },
    #[error("cyclic import: {}", render_chain(.chain))]
    CyclicImport { chain: Vec<ModuleName> },
    #[error("{}: {message}", .file.display())]
    Io { file: PathBuf, message: String },
    #[error("{}:{error}", .file.display())]
    Parse { file: PathBuf, error: ParseError },
}

/// Errors that abort evaluation. Unlike an absent derivation these are never
/// recovered from by trying another clause.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("depth limit {limit} exceeded at {call}")]
    DepthExceeded { limit: usize, call: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("type error: {op} applied to {args}")]
    TypeError { op: String, args: String },
    #[error("division by zero in {op}")]
    DivisionByZero { op: String },
    #[error("module query {query} has non-ground arguments")]
    MqNonGround { query: String },
    #[error("cyclic module query: {}", .chain.join(" -> "))]
    QueryCycle { chain: Vec<String> },
    #[error("module query chain exceeds {limit} hops")]
    QueryDepthExceeded { limit: usize },
    #[error("module query {query} has no derivation")]
    QueryFailed { query: String },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

impl EvalError {
    /// The evaluation rule that was being applied when the error arose.
    pub fn rule_context(&self) -> &'static str {
        match self {
            EvalError::DepthExceeded { .. } => "rule 7 (switch to backchaining)",
            EvalError::UnboundVariable(_) => "rule 6 (constants); no rule evaluates a variable",
            EvalError::TypeError { .. } | EvalError::DivisionByZero { .. } => {
                "rule 7 (builtin fallback)"
            }
            EvalError::MqNonGround { .. }
            | EvalError::QueryCycle { .. }
            | EvalError::QueryDepthExceeded { .. }
            | EvalError::QueryFailed { .. } => "rule 11 (module query)",
            EvalError::Registry(_) => "rule 10 (module import)",
        }
    }

    /// Errors caused by module loading rather than by evaluation proper.
    pub fn is_registry_error(&self) -> bool {
        matches!(self, EvalError::Registry(_))
    }
}
