use std::collections::HashMap;

use super::error::DensityError;
use crate::frontend::PrimOp;
use crate::graph::{apply_prim, Polarity, Term};

/// A [`Term`] with variable names replaced by coordinate indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Coord(usize),
    Prim(PrimOp, Vec<Node>),
    Cond(usize, Box<Node>, Box<Node>),
}

impl Node {
    pub fn from_term(t: &Term, coords: &HashMap<&str, usize>) -> Result<Node, DensityError> {
        Ok(match t {
            Term::Const(v) => Node::Const(*v),
            Term::Var(name) => Node::Coord(
                *coords
                    .get(name.as_str())
                    .ok_or_else(|| DensityError::UnknownVariable(name.clone()))?,
            ),
            Term::Prim(op, args) => {
                let args = args
                    .iter()
                    .map(|a| Node::from_term(a, coords))
                    .collect::<Result<Vec<_>, _>>()?;
                if *op == PrimOp::Pow && !matches!(args.get(1), Some(Node::Const(_))) {
                    return Err(DensityError::Malformed(
                        "pow exponent must be a constant".into(),
                    ));
                }
                Node::Prim(*op, args)
            }
            Term::Cond {
                pred,
                then,
                otherwise,
            } => Node::Cond(
                pred.0,
                Box::new(Node::from_term(then, coords)?),
                Box::new(Node::from_term(otherwise, coords)?),
            ),
        })
    }

    /// Evaluate with conditionals resolved by `polarity(pred)`.
    pub fn eval_with(&self, x: &[f64], polarity: &mut impl FnMut(usize) -> Polarity) -> f64 {
        match self {
            Node::Const(v) => *v,
            Node::Coord(i) => x[*i],
            Node::Prim(op, args) => match args.as_slice() {
                [a] => apply_prim(*op, &[a.eval_with(x, polarity)]),
                [a, b] => apply_prim(*op, &[a.eval_with(x, polarity), b.eval_with(x, polarity)]),
                _ => {
                    let vals: Vec<f64> = args.iter().map(|a| a.eval_with(x, polarity)).collect();
                    apply_prim(*op, &vals)
                }
            },
            Node::Cond(p, a, b) => match polarity(*p) {
                Polarity::Neg => a.eval_with(x, polarity),
                Polarity::Nonneg => b.eval_with(x, polarity),
            },
        }
    }

    /// Evaluate directly, computing any predicate a conditional needs from
    /// `predicates`.
    pub fn eval_direct(&self, x: &[f64], predicates: &[Node]) -> f64 {
        self.eval_with(x, &mut |p| {
            Polarity::of(predicates[p].eval_direct(x, predicates))
        })
    }
}
