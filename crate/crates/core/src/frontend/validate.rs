use std::collections::BTreeMap;

use super::ast::{DistExpr, Expr, ExprKind};
use super::error::{FrontendError, FrontendErrorKind};

/// Model-level constants, substituted by name during compilation.
pub type Constants = BTreeMap<String, f64>;

/// Analytic primitives accepted in expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimOp {
    Add,
    /// Binary subtraction, or negation when applied to a single argument.
    Sub,
    Mul,
    Div,
    Exp,
    Log,
    /// `pow` with a constant exponent.
    Pow,
    Identity,
}

impl PrimOp {
    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "+" => PrimOp::Add,
            "-" => PrimOp::Sub,
            "*" => PrimOp::Mul,
            "/" => PrimOp::Div,
            "exp" => PrimOp::Exp,
            "log" => PrimOp::Log,
            "pow" => PrimOp::Pow,
            "identity" => PrimOp::Identity,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            PrimOp::Add => "+",
            PrimOp::Sub => "-",
            PrimOp::Mul => "*",
            PrimOp::Div => "/",
            PrimOp::Exp => "exp",
            PrimOp::Log => "log",
            PrimOp::Pow => "pow",
            PrimOp::Identity => "identity",
        }
    }

    fn arity_ok(self, n: usize) -> (bool, &'static str) {
        match self {
            PrimOp::Add | PrimOp::Sub | PrimOp::Mul => (n >= 1, "at least 1"),
            PrimOp::Div | PrimOp::Pow => (n == 2, "2"),
            PrimOp::Exp | PrimOp::Log | PrimOp::Identity => (n == 1, "1"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistKind {
    Normal,
    Uniform,
}

impl DistKind {
    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "normal" => Some(DistKind::Normal),
            "uniform" => Some(DistKind::Uniform),
            _ => None,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            DistKind::Normal => "normal",
            DistKind::Uniform => "uniform",
        }
    }

    pub fn arity(self) -> usize {
        2
    }
}

/// Check a parsed program against the language restrictions with no
/// model-level constants in scope.
pub fn validate(ast: Expr) -> Result<Expr, FrontendError> {
    validate_with(ast, &Constants::new())
}

pub fn validate_with(ast: Expr, constants: &Constants) -> Result<Expr, FrontendError> {
    let mut scope: Vec<&str> = Vec::new();
    check(&ast, &mut scope, constants)?;
    Ok(ast)
}

fn is_zero(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Const(c) if c == 0.0)
}

fn check<'a>(
    e: &'a Expr,
    scope: &mut Vec<&'a str>,
    constants: &Constants,
) -> Result<(), FrontendError> {
    match &e.kind {
        ExprKind::Const(_) => Ok(()),
        ExprKind::Var(name) => {
            if scope.iter().any(|s| s == name) || constants.contains_key(name) {
                Ok(())
            } else {
                Err(FrontendError::new(
                    FrontendErrorKind::UnboundVariable(name.clone()),
                    e.span,
                ))
            }
        }
        ExprKind::PrimApp { op, args } => {
            let prim = PrimOp::from_symbol(op).ok_or_else(|| {
                FrontendError::new(FrontendErrorKind::UnknownPrimitive(op.clone()), e.span)
            })?;
            let (ok, expected) = prim.arity_ok(args.len());
            if !ok {
                return Err(FrontendError::new(
                    FrontendErrorKind::Arity {
                        op: op.clone(),
                        expected: expected.into(),
                        got: args.len(),
                    },
                    e.span,
                ));
            }
            match prim {
                PrimOp::Pow if !matches!(args[1].kind, ExprKind::Const(_)) => {
                    return Err(FrontendError::new(
                        FrontendErrorKind::NonConstantExponent,
                        args[1].span,
                    ));
                }
                PrimOp::Div if is_zero(&args[1]) => {
                    return Err(FrontendError::new(
                        FrontendErrorKind::ZeroArgument(op.clone()),
                        args[1].span,
                    ));
                }
                PrimOp::Log if is_zero(&args[0]) => {
                    return Err(FrontendError::new(
                        FrontendErrorKind::ZeroArgument(op.clone()),
                        args[0].span,
                    ));
                }
                _ => {}
            }
            args.iter().try_for_each(|a| check(a, scope, constants))
        }
        ExprKind::If {
            guard,
            then,
            otherwise,
        } => {
            check(guard, scope, constants)?;
            check(then, scope, constants)?;
            check(otherwise, scope, constants)
        }
        ExprKind::Let {
            binder,
            bound,
            body,
        } => {
            check(bound, scope, constants)?;
            scope.push(binder);
            let r = check(body, scope, constants);
            scope.pop();
            r
        }
        ExprKind::Sample(dist) => check_dist(dist, scope, constants),
        ExprKind::Observe { dist, .. } => check_dist(dist, scope, constants),
    }
}

fn check_dist<'a>(
    d: &'a DistExpr,
    scope: &mut Vec<&'a str>,
    constants: &Constants,
) -> Result<(), FrontendError> {
    let kind = DistKind::from_symbol(&d.kind).ok_or_else(|| {
        FrontendError::new(
            FrontendErrorKind::UnknownDistribution(d.kind.clone()),
            d.span,
        )
    })?;
    if d.params.len() != kind.arity() {
        return Err(FrontendError::new(
            FrontendErrorKind::Arity {
                op: d.kind.clone(),
                expected: kind.arity().to_string(),
                got: d.params.len(),
            },
            d.span,
        ));
    }
    d.params.iter().try_for_each(|p| check(p, scope, constants))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn run(src: &str) -> Result<Expr, FrontendError> {
        validate(parse(src).unwrap())
    }

    #[test]
    fn whitelisted_primitive_passes_unchanged() {
        let ast = parse("(let [x (sample (normal 0 1))] (exp x))").unwrap();
        assert_eq!(validate(ast.clone()).unwrap(), ast);
    }

    #[test]
    fn floor_is_rejected() {
        let err = run("(let [x (sample (normal 0 1))] (floor x))").unwrap_err();
        assert_eq!(
            err.kind,
            FrontendErrorKind::UnknownPrimitive("floor".into())
        );
    }

    #[test]
    fn free_variable_is_rejected_with_span() {
        let err = run("(sample (normal z 1))").unwrap_err();
        assert_eq!(err.kind, FrontendErrorKind::UnboundVariable("z".into()));
        assert_eq!((err.span.line, err.span.column), (1, 17));
        assert_eq!(err.to_string(), "1:17: unbound variable z");
    }

    #[test]
    fn model_constant_is_in_scope() {
        let ast = parse("(sample (uniform 0 q))").unwrap();
        let consts = Constants::from([("q".to_string(), 0.3)]);
        assert!(validate_with(ast.clone(), &consts).is_ok());
        assert!(validate(ast).is_err());
    }

    #[test]
    fn scoping_is_lexical() {
        assert!(run("(let [x 1] (let [x (+ x 1)] x))").is_ok());
        assert!(run("(+ (let [x 1] x) x)").is_err());
    }

    #[test]
    fn distribution_checks() {
        assert_eq!(
            run("(sample (gamma 1 1))").unwrap_err().kind,
            FrontendErrorKind::UnknownDistribution("gamma".into())
        );
        assert!(matches!(
            run("(sample (normal 1))").unwrap_err().kind,
            FrontendErrorKind::Arity { .. }
        ));
    }

    #[test]
    fn primitive_shape_checks() {
        assert!(run("(let [x 2] (pow x 3))").is_ok());
        assert_eq!(
            run("(let [x 2] (pow 3 x))").unwrap_err().kind,
            FrontendErrorKind::NonConstantExponent
        );
        assert!(matches!(
            run("(/ 1 0)").unwrap_err().kind,
            FrontendErrorKind::ZeroArgument(_)
        ));
        assert!(matches!(
            run("(log 0.0)").unwrap_err().kind,
            FrontendErrorKind::ZeroArgument(_)
        ));
        assert!(matches!(
            run("(exp 1 2)").unwrap_err().kind,
            FrontendErrorKind::Arity { .. }
        ));
        assert!(run("(- 1)").is_ok());
    }
}
