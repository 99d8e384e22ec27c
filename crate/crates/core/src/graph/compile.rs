use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use super::eval::eval_closed;
use super::model::{
    Dist, GraphModel, GuardLiteral, Polarity, PredId, Predicate, Term, Vertex, VertexKind,
};
use crate::frontend::{Constants, DistExpr, DistKind, Expr, ExprKind, PrimOp, Span};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileErrorKind {
    #[error("sample/observe may not appear inside an if guard")]
    RandomInGuard,
    #[error("constant guard evaluates to a non-finite value")]
    NonFiniteGuard,
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("unknown primitive `{0}`")]
    UnknownPrimitive(String),
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{span}: {kind}")]
pub struct CompileError {
    pub kind: CompileErrorKind,
    pub span: Span,
}

impl CompileError {
    pub fn diagnostic(&self, file: &str) -> String {
        format!(
            "{file}:{}:{}: {}",
            self.span.line, self.span.column, self.kind
        )
    }
}

/// Non-fatal compiler note, e.g. a guard that folded to a constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Warning {
    pub message: String,
    pub span: Span,
}

/// Compile a validated program with no model-level constants.
pub fn compile(ast: &Expr) -> Result<GraphModel, CompileError> {
    compile_with(ast, &Constants::new()).map(|(m, _)| m)
}

/// Compile a validated program. Returns the classified model and any
/// warnings raised along the way.
pub fn compile_with(
    ast: &Expr,
    constants: &Constants,
) -> Result<(GraphModel, Vec<Warning>), CompileError> {
    let mut c = Compiler {
        constants,
        vertices: Vec::new(),
        predicates: Vec::new(),
        warnings: Vec::new(),
        counters: HashMap::new(),
        used: HashSet::new(),
        context: Vec::new(),
        env: Vec::new(),
    };
    c.eval(ast, None, false)?;

    let arcs = arcs(&c.vertices, &c.predicates);
    let mut model = GraphModel {
        vertices: c.vertices,
        arcs,
        predicates: c.predicates,
        coord_class: Default::default(),
    };
    model.classify();
    Ok((model, c.warnings))
}

struct Compiler<'a> {
    constants: &'a Constants,
    vertices: Vec<Vertex>,
    predicates: Vec<Predicate>,
    warnings: Vec<Warning>,
    counters: HashMap<String, usize>,
    used: HashSet<String>,
    context: Vec<GuardLiteral>,
    env: Vec<(String, Term)>,
}

impl Compiler<'_> {
    fn fresh_name(&mut self, prefix: &str) -> String {
        let mut base = prefix.to_string();
        if base.ends_with(|c: char| c.is_ascii_digit()) {
            base.push('_');
        }
        let counter = self.counters.entry(base.clone()).or_insert(0);
        loop {
            *counter += 1;
            let name = format!("{base}{counter}");
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    fn eval(&mut self, e: &Expr, hint: Option<&str>, pure: bool) -> Result<Term, CompileError> {
        let err = |kind| CompileError { kind, span: e.span };
        match &e.kind {
            ExprKind::Const(v) => Ok(Term::Const(*v)),
            ExprKind::Var(name) => {
                if let Some((_, t)) = self.env.iter().rev().find(|(n, _)| n == name) {
                    Ok(t.clone())
                } else if let Some(v) = self.constants.get(name) {
                    Ok(Term::Const(*v))
                } else {
                    Err(err(CompileErrorKind::UnboundVariable(name.clone())))
                }
            }
            ExprKind::PrimApp { op, args } => {
                let prim = PrimOp::from_symbol(op)
                    .ok_or_else(|| err(CompileErrorKind::UnknownPrimitive(op.clone())))?;
                let args = args
                    .iter()
                    .map(|a| self.eval(a, None, pure))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Term::Prim(prim, args))
            }
            ExprKind::Let {
                binder,
                bound,
                body,
            } => {
                let direct_sample = matches!(bound.kind, ExprKind::Sample(_));
                let value = self.eval(bound, direct_sample.then_some(binder.as_str()), pure)?;
                self.env.push((binder.clone(), value));
                let r = self.eval(body, None, pure);
                self.env.pop();
                r
            }
            ExprKind::If {
                guard,
                then,
                otherwise,
            } => {
                let g = self.eval(guard, None, true)?;
                if g.is_closed_constant() {
                    let value = eval_closed(&g);
                    if !value.is_finite() {
                        return Err(CompileError {
                            kind: CompileErrorKind::NonFiniteGuard,
                            span: guard.span,
                        });
                    }
                    let taken = Polarity::of(value);
                    self.warnings.push(Warning {
                        message: format!(
                            "guard has no latent variables and always takes the {} branch; the other branch is dropped",
                            if taken == Polarity::Neg { "then" } else { "else" }
                        ),
                        span: guard.span,
                    });
                    return match taken {
                        Polarity::Neg => self.eval(then, None, pure),
                        Polarity::Nonneg => self.eval(otherwise, None, pure),
                    };
                }
                let id = PredId(self.predicates.len());
                let mut free_vars = BTreeSet::new();
                g.free_vars(&mut free_vars);
                self.predicates.push(Predicate {
                    id,
                    expr: g,
                    free_vars,
                });

                self.context.push(GuardLiteral::new(id, Polarity::Neg));
                let a = self.eval(then, None, pure);
                self.context.pop();
                let a = a?;
                self.context.push(GuardLiteral::new(id, Polarity::Nonneg));
                let b = self.eval(otherwise, None, pure);
                self.context.pop();
                let b = b?;
                Ok(if a == b {
                    a
                } else {
                    Term::Cond {
                        pred: id,
                        then: Box::new(a),
                        otherwise: Box::new(b),
                    }
                })
            }
            ExprKind::Sample(d) => {
                if pure {
                    return Err(err(CompileErrorKind::RandomInGuard));
                }
                let dist = self.dist(d)?;
                let name = self.fresh_name(hint.unwrap_or("x"));
                self.vertices.push(Vertex {
                    name: name.clone(),
                    kind: VertexKind::Latent,
                    dist,
                    datum: None,
                    guard: self.context.clone(),
                });
                Ok(Term::Var(name))
            }
            ExprKind::Observe { dist, datum } => {
                if pure {
                    return Err(err(CompileErrorKind::RandomInGuard));
                }
                let dist = self.dist(dist)?;
                let name = self.fresh_name("y");
                self.vertices.push(Vertex {
                    name,
                    kind: VertexKind::Observed,
                    dist,
                    datum: Some(*datum),
                    guard: self.context.clone(),
                });
                Ok(Term::Const(*datum))
            }
        }
    }

    fn dist(&mut self, d: &DistExpr) -> Result<Dist, CompileError> {
        let kind = DistKind::from_symbol(&d.kind).ok_or_else(|| CompileError {
            kind: CompileErrorKind::UnknownDistribution(d.kind.clone()),
            span: d.span,
        })?;
        let params = d
            .params
            .iter()
            .map(|p| self.eval(p, None, false))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Dist { kind, params })
    }
}

/// Variables a term depends on, including through the predicates that
/// select between conditional arms.
fn term_dependencies(t: &Term, predicates: &[Predicate], out: &mut BTreeSet<String>) {
    t.free_vars(out);
    let mut preds = BTreeSet::new();
    t.predicates(&mut preds);
    for p in preds {
        let pred = &predicates[p.0];
        out.extend(pred.free_vars.iter().cloned());
        term_dependencies(&pred.expr, predicates, out);
    }
}

fn arcs(vertices: &[Vertex], predicates: &[Predicate]) -> BTreeSet<(String, String)> {
    let mut arcs = BTreeSet::new();
    for v in vertices {
        let mut parents = BTreeSet::new();
        for p in &v.dist.params {
            term_dependencies(p, predicates, &mut parents);
        }
        for lit in &v.guard {
            let pred = &predicates[lit.pred.0];
            term_dependencies(&pred.expr, predicates, &mut parents);
        }
        for parent in parents {
            arcs.insert((parent, v.name.clone()));
        }
    }
    arcs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, validate};
    use crate::graph::CoordClass;

    fn build(src: &str) -> GraphModel {
        compile(&validate(parse(src).unwrap()).unwrap()).unwrap()
    }

    const THRESHOLD_PROGRAM: &str = "(let [x (sample (uniform 0 1))] \
        (if (< x 0.3) (observe (normal 0 1) 0.2) (observe (normal 1 1) 0.2)))";

    #[test]
    fn threshold_program_lowering() {
        let m = build(THRESHOLD_PROGRAM);
        let names: Vec<_> = m.vertices.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["x1", "y1", "y2"]);
        assert_eq!(m.vertices[0].kind, VertexKind::Latent);
        assert_eq!(m.vertices[0].dist.kind, DistKind::Uniform);
        assert!(m.vertices[0].guard.is_empty());
        let y1 = &m.vertices[1];
        assert_eq!(y1.datum, Some(0.2));
        assert_eq!(y1.dist.params, vec![Term::Const(0.0), Term::Const(1.0)]);
        assert_eq!(y1.guard, vec![GuardLiteral::new(PredId(0), Polarity::Neg)]);
        let y2 = &m.vertices[2];
        assert_eq!(y2.dist.params, vec![Term::Const(1.0), Term::Const(1.0)]);
        assert_eq!(
            y2.guard,
            vec![GuardLiteral::new(PredId(0), Polarity::Nonneg)]
        );
        assert_eq!(m.predicates.len(), 1);
        assert_eq!(m.predicates[0].id.to_string(), "φ1");
        assert_eq!(
            m.predicates[0].expr,
            Term::Prim(PrimOp::Sub, vec![Term::Var("x1".into()), Term::Const(0.3)])
        );
        assert_eq!(m.coord_class.get("x1"), Some(&CoordClass::Discontinuous));
        assert!(m.arcs.contains(&("x1".into(), "y1".into())));
        assert!(m.arcs.contains(&("x1".into(), "y2".into())));
        assert_eq!(m.arcs.len(), 2);
    }

    #[test]
    fn single_sample() {
        let m = build("(sample (normal 0 1))");
        assert_eq!(m.vertices.len(), 1);
        assert!(m.predicates.is_empty());
        assert!(m.arcs.is_empty());
        assert_eq!(m.coord_class.get("x1"), Some(&CoordClass::Continuous));
    }

    #[test]
    fn sample_in_guard_is_rejected() {
        let ast = validate(parse("(if (< (sample (normal 0 1)) 0) 1 2)").unwrap()).unwrap();
        let err = compile(&ast).unwrap_err();
        assert_eq!(err.kind, CompileErrorKind::RandomInGuard);
        assert_eq!(err.span.column, 8);
    }

    #[test]
    fn constant_guard_folds_with_warning() {
        let ast = validate(
            parse("(let [a 2] (if (< a 1) (observe (normal 0 1) 0) (observe (normal 1 1) 0)))")
                .unwrap(),
        )
        .unwrap();
        let (m, warnings) = compile_with(&ast, &Constants::new()).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(m.predicates.is_empty());
        assert_eq!(m.vertices.len(), 1);
        assert_eq!(m.vertices[0].dist.params[0], Term::Const(1.0));
    }

    #[test]
    fn value_if_becomes_conditional_term() {
        let m = build("(let [x (sample (uniform 0 1))] (sample (normal (if (< x 0.3) 0 1) 1)))");
        assert_eq!(m.latent_names(), ["x1", "x2"]);
        let mean = &m.vertices[1].dist.params[0];
        assert!(matches!(
            mean,
            Term::Cond {
                pred: PredId(0),
                ..
            }
        ));
        assert!(m.arcs.contains(&("x1".into(), "x2".into())));
        assert_eq!(m.coord_class["x2"], CoordClass::Continuous);
        assert_eq!(m.coord_class["x1"], CoordClass::Discontinuous);
    }

    #[test]
    fn naming_is_stable_and_unique() {
        let m = build(
            "(let [mu1 (sample (normal 0 1))] (let [mu1 (sample (normal mu1 1))] \
             (let [x1 (sample (normal 0 1))] (let [x (sample (normal 0 1))] (sample (normal x 1))))))",
        );
        assert_eq!(m.latent_names(), ["mu1_1", "mu1_2", "x1_1", "x1", "x2"]);
    }

    #[test]
    fn nested_guards_accumulate() {
        let m = build(
            "(let [u (sample (uniform 0 1))] \
             (if (< u 0.3) (observe (normal 0 1) 1) \
               (if (< u 0.6) (observe (normal 1 1) 1) (observe (normal 2 1) 1))))",
        );
        assert_eq!(m.predicates.len(), 2);
        assert_eq!(
            m.vertices[3].guard,
            vec![
                GuardLiteral::new(PredId(0), Polarity::Nonneg),
                GuardLiteral::new(PredId(1), Polarity::Nonneg)
            ]
        );
    }
}
