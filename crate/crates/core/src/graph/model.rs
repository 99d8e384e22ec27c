use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::frontend::{DistKind, PrimOp};

/// Index of an extracted `if` predicate. Displayed as `φ1`, `φ2`, ... in
/// program order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredId(pub usize);

impl PredId {
    pub fn index(self) -> usize {
        self.0
    }

    pub fn parse(s: &str) -> Option<PredId> {
        let n: usize = s.strip_prefix('φ')?.parse().ok()?;
        n.checked_sub(1).map(PredId)
    }
}

impl fmt::Display for PredId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "φ{}", self.0 + 1)
    }
}

/// Which side of a predicate a branch lives on. The predicate is `expr < 0`,
/// so the `then` branch is `Neg` and the `else` branch is `Nonneg`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Neg,
    Nonneg,
}

impl Polarity {
    /// Polarity of a predicate value; zero is `Nonneg`.
    pub fn of(value: f64) -> Polarity {
        if value < 0.0 {
            Polarity::Neg
        } else {
            Polarity::Nonneg
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Neg => "neg",
            Polarity::Nonneg => "nonneg",
        }
    }

    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Neg => Polarity::Nonneg,
            Polarity::Nonneg => Polarity::Neg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GuardLiteral {
    pub pred: PredId,
    pub polarity: Polarity,
}

impl GuardLiteral {
    pub fn new(pred: PredId, polarity: Polarity) -> Self {
        GuardLiteral { pred, polarity }
    }
}

/// A closed expression over vertex names, produced by let-substitution.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Const(f64),
    Var(String),
    Prim(PrimOp, Vec<Term>),
    /// Value of an `if` whose branches produced different values.
    Cond {
        pred: PredId,
        then: Box<Term>,
        otherwise: Box<Term>,
    },
}

impl Term {
    pub fn is_closed_constant(&self) -> bool {
        match self {
            Term::Const(_) => true,
            Term::Var(_) | Term::Cond { .. } => false,
            Term::Prim(_, args) => args.iter().all(Term::is_closed_constant),
        }
    }

    /// Variables that occur syntactically, including both arms of every
    /// conditional.
    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Prim(_, args) => args.iter().for_each(|a| a.free_vars(out)),
            Term::Cond {
                then, otherwise, ..
            } => {
                then.free_vars(out);
                otherwise.free_vars(out);
            }
        }
    }

    pub fn predicates(&self, out: &mut BTreeSet<PredId>) {
        match self {
            Term::Const(_) | Term::Var(_) => {}
            Term::Prim(_, args) => args.iter().for_each(|a| a.predicates(out)),
            Term::Cond {
                pred,
                then,
                otherwise,
            } => {
                out.insert(*pred);
                then.predicates(out);
                otherwise.predicates(out);
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(v) => write!(f, "{v:?}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::Prim(op, args) => {
                write!(f, "({}", op.symbol())?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Term::Cond {
                pred,
                then,
                otherwise,
            } => write!(f, "(if {pred} {then} {otherwise})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    pub kind: DistKind,
    pub params: Vec<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Latent,
    Observed,
}

impl VertexKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VertexKind::Latent => "latent",
            VertexKind::Observed => "observed",
        }
    }
}

/// One `sample` or `observe` statement.
///
/// `guard` is the branch context the statement was compiled under. An
/// observed vertex contributes its likelihood only when every literal holds.
/// A latent vertex always contributes its prior: a draw in an untaken branch
/// is never used, so keeping its prior leaves the program's distribution
/// unchanged and keeps the joint density proper in that coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub name: String,
    pub kind: VertexKind,
    pub dist: Dist,
    pub datum: Option<f64>,
    pub guard: Vec<GuardLiteral>,
}

impl Vertex {
    pub fn is_latent(&self) -> bool {
        self.kind == VertexKind::Latent
    }
}

/// An extracted `if` guard, read as `expr < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub id: PredId,
    pub expr: Term,
    pub free_vars: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoordClass {
    Continuous,
    Discontinuous,
}

impl CoordClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CoordClass::Continuous => "continuous",
            CoordClass::Discontinuous => "discontinuous",
        }
    }
}

/// The static graphical model of a program.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphModel {
    pub vertices: Vec<Vertex>,
    pub arcs: BTreeSet<(String, String)>,
    pub predicates: Vec<Predicate>,
    pub coord_class: BTreeMap<String, CoordClass>,
}

impl GraphModel {
    pub fn latents(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(|v| v.is_latent())
    }

    pub fn latent_names(&self) -> Vec<String> {
        self.latents().map(|v| v.name.clone()).collect()
    }

    pub fn vertex(&self, name: &str) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.name == name)
    }

    pub fn predicate(&self, id: PredId) -> &Predicate {
        &self.predicates[id.0]
    }
}

/// Mark each latent discontinuous iff it occurs free in some predicate.
pub fn classify_coordinates(model: &GraphModel) -> BTreeMap<String, CoordClass> {
    let guarded: BTreeSet<&String> = model
        .predicates
        .iter()
        .flat_map(|p| p.free_vars.iter())
        .collect();
    model
        .latents()
        .map(|v| {
            let class = if guarded.contains(&v.name) {
                CoordClass::Discontinuous
            } else {
                CoordClass::Continuous
            };
            (v.name.clone(), class)
        })
        .collect()
}

impl GraphModel {
    /// Recompute and store the coordinate classification.
    pub fn classify(&mut self) -> &BTreeMap<String, CoordClass> {
        self.coord_class = classify_coordinates(self);
        &self.coord_class
    }
}
