use super::ast::Span;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontendErrorKind {
    #[error("bad token `{0}`")]
    BadToken(String),
    #[error("unexpected end of input")]
    UnexpectedEof,
    #[error("unexpected {found}, expected {expected}")]
    Unexpected { found: String, expected: String },
    #[error("trailing input after the program expression")]
    TrailingInput,
    #[error("`{0}` is a reserved word and cannot be used here")]
    ReservedWord(String),
    #[error("observe datum must be a constant")]
    NonConstantDatum,
    #[error("comparison `{0}` may only appear as an if guard")]
    MisplacedComparison(String),
    #[error("non-analytic or unknown primitive `{0}`")]
    UnknownPrimitive(String),
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
    #[error("`{op}` expects {expected} argument(s), got {got}")]
    Arity {
        op: String,
        expected: String,
        got: usize,
    },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("pow exponent must be a constant")]
    NonConstantExponent,
    #[error("`{0}` applied to the constant zero")]
    ZeroArgument(String),
}

/// A lexing, parsing or validation failure together with its location.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{span}: {kind}")]
pub struct FrontendError {
    pub kind: FrontendErrorKind,
    pub span: Span,
}

impl FrontendError {
    pub fn new(kind: FrontendErrorKind, span: Span) -> Self {
        FrontendError { kind, span }
    }

    /// Single-line `file:line:col: message` diagnostic.
    pub fn diagnostic(&self, file: &str) -> String {
        format!(
            "{file}:{}:{}: {}",
            self.span.line, self.span.column, self.kind
        )
    }
}
