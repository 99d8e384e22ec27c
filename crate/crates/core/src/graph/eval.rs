use super::model::Term;
use crate::frontend::PrimOp;

pub fn apply_prim(op: PrimOp, args: &[f64]) -> f64 {
    match op {
        PrimOp::Add => args.iter().sum(),
        PrimOp::Sub => match args {
            [a] => -a,
            [first, rest @ ..] => rest.iter().fold(*first, |acc, v| acc - v),
            [] => f64::NAN,
        },
        PrimOp::Mul => args.iter().product(),
        PrimOp::Div => args[0] / args[1],
        PrimOp::Exp => args[0].exp(),
        PrimOp::Log => args[0].ln(),
        PrimOp::Pow => args[0].powf(args[1]),
        PrimOp::Identity => args[0],
    }
}

/// Evaluate a term with no variables or conditionals. Anything else is NaN.
pub fn eval_closed(t: &Term) -> f64 {
    match t {
        Term::Const(v) => *v,
        Term::Var(_) | Term::Cond { .. } => f64::NAN,
        Term::Prim(op, args) => {
            let vals: Vec<f64> = args.iter().map(eval_closed).collect();
            apply_prim(*op, &vals)
        }
    }
}
