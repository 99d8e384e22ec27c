use super::ast::Span;
use super::error::{FrontendError, FrontendErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Number(f64),
    Symbol(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub token: Token,
    pub span: Span,
}

pub const OPERATOR_SYMBOLS: [&str; 8] = ["+", "-", "*", "/", "<", ">", "<=", ">="];

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | ';')
}

/// Decimal or scientific literal: `[+-]? (d+ (. d*)? | . d+) ([eE] [+-]? d+)?`.
pub fn is_number_literal(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let int_digits = i - int_start;
    let mut frac_digits = 0;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        frac_digits = i - frac_start;
    }
    if int_digits + frac_digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

/// ASCII letters, digits, `-` and `_`, not starting with a digit.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '-' || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

pub fn tokenize(source: &str) -> Result<Vec<Spanned>, FrontendError> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut iter = source.char_indices().peekable();

    while let Some(&(start, c)) = iter.peek() {
        if c == '\n' {
            iter.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            iter.next();
            column += 1;
            continue;
        }
        if c == ';' {
            // comment to end of line
            while let Some(&(_, c)) = iter.peek() {
                if c == '\n' {
                    break;
                }
                iter.next();
            }
            continue;
        }
        let single = match c {
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            '[' => Some(Token::LBracket),
            ']' => Some(Token::RBracket),
            _ => None,
        };
        if let Some(token) = single {
            iter.next();
            tokens.push(Spanned {
                token,
                span: Span::new(start, start + 1, line, column),
            });
            column += 1;
            continue;
        }

        let (tok_line, tok_col) = (line, column);
        let mut end = start;
        while let Some(&(i, c)) = iter.peek() {
            if is_delimiter(c) {
                break;
            }
            end = i + c.len_utf8();
            column += 1;
            iter.next();
        }
        let text = &source[start..end];
        let span = Span::new(start, end, tok_line, tok_col);
        let token = if is_number_literal(text) {
            let value: f64 = text.parse().map_err(|_| {
                FrontendError::new(FrontendErrorKind::BadToken(text.to_string()), span)
            })?;
            if !value.is_finite() {
                return Err(FrontendError::new(
                    FrontendErrorKind::BadToken(text.to_string()),
                    span,
                ));
            }
            Token::Number(value)
        } else if is_identifier(text) || OPERATOR_SYMBOLS.contains(&text) {
            Token::Symbol(text.to_string())
        } else {
            return Err(FrontendError::new(
                FrontendErrorKind::BadToken(text.to_string()),
                span,
            ));
        };
        tokens.push(Spanned { token, span });
    }
    Ok(tokens)
}
