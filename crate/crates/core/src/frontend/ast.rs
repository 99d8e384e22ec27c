use std::fmt;

/// Location of a node in the source text.
///
/// Offsets are byte offsets into the UTF-8 source; `line` and `column` are
/// 1-based and count characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl Span {
    pub fn new(start: usize, end: usize, line: usize, column: usize) -> Self {
        debug_assert!(start <= end);
        Span {
            start,
            end,
            line,
            column,
        }
    }

    /// Smallest span covering both `self` and `other`; line/column come from
    /// whichever starts first.
    pub fn to(self, other: Span) -> Span {
        let (first, _) = if self.start <= other.start {
            (self, other)
        } else {
            (other, self)
        };
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
            line: first.line,
            column: first.column,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// An expression node. Equality ignores spans, so two parses of differently
/// formatted but equivalent sources compare equal.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Var(String),
    Const(f64),
    PrimApp {
        op: String,
        args: Vec<Expr>,
    },
    /// `then` runs when `guard < 0`, `otherwise` when `guard >= 0`.
    If {
        guard: Box<Expr>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
    Let {
        binder: String,
        bound: Box<Expr>,
        body: Box<Expr>,
    },
    Sample(DistExpr),
    Observe {
        dist: DistExpr,
        datum: f64,
    },
}

/// A distribution application `(d e ... e)`. The kind is checked against the
/// whitelist during validation, not parsing.
#[derive(Debug, Clone)]
pub struct DistExpr {
    pub kind: String,
    pub params: Vec<Expr>,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl PartialEq for DistExpr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.params == other.params
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn constant(value: f64) -> Self {
        Expr::new(ExprKind::Const(value), Span::default())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::new(ExprKind::Var(name.into()), Span::default())
    }

    pub fn prim(op: impl Into<String>, args: Vec<Expr>) -> Self {
        Expr::new(
            ExprKind::PrimApp {
                op: op.into(),
                args,
            },
            Span::default(),
        )
    }

    pub fn sample(kind: impl Into<String>, params: Vec<Expr>) -> Self {
        Expr::new(
            ExprKind::Sample(DistExpr {
                kind: kind.into(),
                params,
                span: Span::default(),
            }),
            Span::default(),
        )
    }

    pub fn observe(kind: impl Into<String>, params: Vec<Expr>, datum: f64) -> Self {
        Expr::new(
            ExprKind::Observe {
                dist: DistExpr {
                    kind: kind.into(),
                    params,
                    span: Span::default(),
                },
                datum,
            },
            Span::default(),
        )
    }

    pub fn if_neg(guard: Expr, then: Expr, otherwise: Expr) -> Self {
        Expr::new(
            ExprKind::If {
                guard: Box::new(guard),
                then: Box::new(then),
                otherwise: Box::new(otherwise),
            },
            Span::default(),
        )
    }

    pub fn let_in(binder: impl Into<String>, bound: Expr, body: Expr) -> Self {
        Expr::new(
            ExprKind::Let {
                binder: binder.into(),
                bound: Box::new(bound),
                body: Box::new(body),
            },
            Span::default(),
        )
    }

    /// Number of `sample` plus `observe` forms in the tree.
    pub fn random_statement_count(&self) -> usize {
        match &self.kind {
            ExprKind::Var(_) | ExprKind::Const(_) => 0,
            ExprKind::PrimApp { args, .. } => args.iter().map(Expr::random_statement_count).sum(),
            ExprKind::If {
                guard,
                then,
                otherwise,
            } => {
                guard.random_statement_count()
                    + then.random_statement_count()
                    + otherwise.random_statement_count()
            }
            ExprKind::Let { bound, body, .. } => {
                bound.random_statement_count() + body.random_statement_count()
            }
            ExprKind::Sample(d) => {
                1 + d
                    .params
                    .iter()
                    .map(Expr::random_statement_count)
                    .sum::<usize>()
            }
            ExprKind::Observe { dist, .. } => {
                1 + dist
                    .params
                    .iter()
                    .map(Expr::random_statement_count)
                    .sum::<usize>()
            }
        }
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // Debug formatting is the shortest representation that round-trips.
    write!(f, "{v:?}")
}

impl fmt::Display for DistExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.kind)?;
        for p in &self.params {
            write!(f, " {p}")?;
        }
        write!(f, ")")
    }
}

/// Canonical s-expression form of the desugared tree. Guards print as
/// `(< e 0)`, which the parser maps back to the same guard.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Var(name) => write!(f, "{name}"),
            ExprKind::Const(v) => write_number(f, *v),
            ExprKind::PrimApp { op, args } => {
                write!(f, "({op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            ExprKind::If {
                guard,
                then,
                otherwise,
            } => write!(f, "(if (< {guard} 0) {then} {otherwise})"),
            ExprKind::Let {
                binder,
                bound,
                body,
            } => write!(f, "(let [{binder} {bound}] {body})"),
            ExprKind::Sample(d) => write!(f, "(sample {d})"),
            ExprKind::Observe { dist, datum } => {
                write!(f, "(observe {dist} ")?;
                write_number(f, *datum)?;
                write!(f, ")")
            }
        }
    }
}
