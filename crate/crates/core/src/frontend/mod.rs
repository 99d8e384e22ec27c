//! Source text to checked syntax tree.

mod ast;
mod error;
mod lexer;
mod parser;
mod validate;

pub use ast::{DistExpr, Expr, ExprKind, Span};
pub use error::{FrontendError, FrontendErrorKind};
pub use lexer::{is_identifier, is_number_literal};
pub use parser::{is_reserved, parse, RESERVED_WORDS};
pub use validate::{validate, validate_with, Constants, DistKind, PrimOp};

/// `parse` followed by `validate_with`.
pub fn parse_checked(source: &str, constants: &Constants) -> Result<Expr, FrontendError> {
    validate_with(parse(source)?, constants)
}
