//! Recursive descent parser for the s-expression surface syntax.
//!
//! Comparisons are only legal as `if` guards and are normalised on the way
//! in: every comparison becomes the sign of `left - right`, with the branches
//! swapped for `>` and `>=`. A zero difference therefore always takes the
//! `>=` side, which is the `I(p >= 0)` half of the density's indicator split.

use super::ast::{DistExpr, Expr, ExprKind, Span};
use super::error::{FrontendError, FrontendErrorKind};
use super::lexer::{tokenize, Spanned, Token, OPERATOR_SYMBOLS};

pub const RESERVED_WORDS: [&str; 4] = ["let", "if", "sample", "observe"];

pub fn is_reserved(name: &str) -> bool {
    RESERVED_WORDS.contains(&name) || OPERATOR_SYMBOLS.contains(&name)
}

/// Parse and desugar a program. Does not check primitive or distribution
/// names; see [`super::validate`].
pub fn parse(source: &str) -> Result<Expr, FrontendError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        eof: eof_span(source),
    };
    let expr = parser.expr()?;
    if let Some(t) = parser.tokens.get(parser.pos) {
        return Err(FrontendError::new(FrontendErrorKind::TrailingInput, t.span));
    }
    Ok(expr)
}

fn eof_span(source: &str) -> Span {
    let line = source.matches('\n').count() + 1;
    let column = source.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Span::new(source.len(), source.len(), line, column)
}

fn describe(token: &Token) -> String {
    match token {
        Token::LParen => "`(`".into(),
        Token::RParen => "`)`".into(),
        Token::LBracket => "`[`".into(),
        Token::RBracket => "`]`".into(),
        Token::Number(v) => format!("number {v:?}"),
        Token::Symbol(s) => format!("`{s}`"),
    }
}

#[derive(Clone, Copy)]
enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "<" => Comparison::Lt,
            "<=" => Comparison::Le,
            ">" => Comparison::Gt,
            ">=" => Comparison::Ge,
            _ => return None,
        })
    }

    fn swaps_branches(self) -> bool {
        matches!(self, Comparison::Gt | Comparison::Ge)
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    eof: Span,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Spanned, FrontendError> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| FrontendError::new(FrontendErrorKind::UnexpectedEof, self.eof))?;
        self.pos += 1;
        Ok(t)
    }

    fn unexpected(t: &Spanned, expected: &str) -> FrontendError {
        FrontendError::new(
            FrontendErrorKind::Unexpected {
                found: describe(&t.token),
                expected: expected.to_string(),
            },
            t.span,
        )
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<Span, FrontendError> {
        let t = self.next()?;
        if t.token == want {
            Ok(t.span)
        } else {
            Err(Self::unexpected(&t, what))
        }
    }

    fn symbol(&mut self, what: &str) -> Result<(String, Span), FrontendError> {
        let t = self.next()?;
        match t.token {
            Token::Symbol(s) => Ok((s, t.span)),
            _ => Err(Self::unexpected(&t, what)),
        }
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        let t = self.next()?;
        match t.token {
            Token::Number(v) => Ok(Expr::new(ExprKind::Const(v), t.span)),
            Token::Symbol(ref name) => {
                if is_reserved(name) {
                    return Err(FrontendError::new(
                        FrontendErrorKind::ReservedWord(name.clone()),
                        t.span,
                    ));
                }
                Ok(Expr::new(ExprKind::Var(name.clone()), t.span))
            }
            Token::LParen => self.form(t.span),
            _ => Err(Self::unexpected(&t, "an expression")),
        }
    }

    /// Everything after an opening parenthesis.
    fn form(&mut self, open: Span) -> Result<Expr, FrontendError> {
        let (head, head_span) = self.symbol("a form name or primitive")?;
        match head.as_str() {
            "let" => self.let_form(open),
            "if" => self.if_form(open),
            "sample" => {
                let dist = self.dist()?;
                let close = self.expect(Token::RParen, "`)` closing sample")?;
                Ok(Expr::new(ExprKind::Sample(dist), open.to(close)))
            }
            "observe" => {
                let dist = self.dist()?;
                let datum_tok = self.next()?;
                let datum = match datum_tok.token {
                    Token::Number(v) => v,
                    Token::RParen => {
                        return Err(Self::unexpected(&datum_tok, "an observed constant"))
                    }
                    _ => {
                        return Err(FrontendError::new(
                            FrontendErrorKind::NonConstantDatum,
                            datum_tok.span,
                        ))
                    }
                };
                let close = self.expect(Token::RParen, "`)` closing observe")?;
                Ok(Expr::new(ExprKind::Observe { dist, datum }, open.to(close)))
            }
            _ if Comparison::from_symbol(&head).is_some() => Err(FrontendError::new(
                FrontendErrorKind::MisplacedComparison(head),
                head_span,
            )),
            _ => {
                let mut args = Vec::new();
                loop {
                    match self.peek() {
                        Some(Spanned {
                            token: Token::RParen,
                            span,
                        }) => {
                            let close = *span;
                            self.pos += 1;
                            return Ok(Expr::new(
                                ExprKind::PrimApp { op: head, args },
                                open.to(close),
                            ));
                        }
                        Some(_) => args.push(self.expr()?),
                        None => {
                            return Err(FrontendError::new(
                                FrontendErrorKind::UnexpectedEof,
                                self.eof,
                            ))
                        }
                    }
                }
            }
        }
    }

    fn let_form(&mut self, open: Span) -> Result<Expr, FrontendError> {
        self.expect(Token::LBracket, "`[` after let")?;
        let (binder, binder_span) = self.symbol("a binder name")?;
        if is_reserved(&binder) {
            return Err(FrontendError::new(
                FrontendErrorKind::ReservedWord(binder),
                binder_span,
            ));
        }
        let bound = self.expr()?;
        self.expect(Token::RBracket, "`]` closing the let binding")?;
        let body = self.expr()?;
        let close = self.expect(Token::RParen, "`)` closing let")?;
        Ok(Expr::new(
            ExprKind::Let {
                binder,
                bound: Box::new(bound),
                body: Box::new(body),
            },
            open.to(close),
        ))
    }

    fn if_form(&mut self, open: Span) -> Result<Expr, FrontendError> {
        let cmp_open = self.expect(Token::LParen, "a comparison `(< e e)` as the if guard")?;
        let (op, op_span) = self.symbol("a comparison operator")?;
        let cmp = Comparison::from_symbol(&op).ok_or_else(|| {
            FrontendError::new(
                FrontendErrorKind::Unexpected {
                    found: format!("`{op}`"),
                    expected: "one of <, <=, >, >=".into(),
                },
                op_span,
            )
        })?;
        let lhs = self.expr()?;
        let rhs = self.expr()?;
        let cmp_close = self.expect(Token::RParen, "`)` closing the comparison")?;
        let guard_span = cmp_open.to(cmp_close);
        let guard = match rhs.kind {
            ExprKind::Const(0.0) => lhs,
            _ => Expr::new(
                ExprKind::PrimApp {
                    op: "-".into(),
                    args: vec![lhs, rhs],
                },
                guard_span,
            ),
        };
        let a = self.expr()?;
        let b = self.expr()?;
        let close = self.expect(Token::RParen, "`)` closing if")?;
        let (then, otherwise) = if cmp.swaps_branches() { (b, a) } else { (a, b) };
        Ok(Expr::new(
            ExprKind::If {
                guard: Box::new(guard),
                then: Box::new(then),
                otherwise: Box::new(otherwise),
            },
            open.to(close),
        ))
    }

    fn dist(&mut self) -> Result<DistExpr, FrontendError> {
        let open = self.expect(Token::LParen, "a distribution `(d e ...)`")?;
        let (kind, kind_span) = self.symbol("a distribution name")?;
        if is_reserved(&kind) {
            return Err(FrontendError::new(
                FrontendErrorKind::ReservedWord(kind),
                kind_span,
            ));
        }
        let mut params = Vec::new();
        loop {
            match self.peek() {
                Some(Spanned {
                    token: Token::RParen,
                    span,
                }) => {
                    let close = *span;
                    self.pos += 1;
                    return Ok(DistExpr {
                        kind,
                        params,
                        span: open.to(close),
                    });
                }
                Some(_) => params.push(self.expr()?),
                None => {
                    return Err(FrontendError::new(
                        FrontendErrorKind::UnexpectedEof,
                        self.eof,
                    ))
                }
            }
        }
    }
}
