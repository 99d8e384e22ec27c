//! Canonical JSON form of a [`GraphModel`].
//!
//! Objects are emitted with sorted keys, so identical models produce
//! byte-identical text. Expressions are prefix s-expressions as nested
//! arrays: numbers for constants, strings for variables, `[op, args...]` for
//! primitives and `["if", "φk", then, else]` for conditionals.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};
use thiserror::Error;

use super::model::{
    CoordClass, Dist, GraphModel, GuardLiteral, Polarity, PredId, Predicate, Term, Vertex,
    VertexKind,
};
use crate::frontend::{DistKind, PrimOp};

#[derive(Debug, Error)]
pub enum GraphJsonError {
    #[error("invalid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("malformed graph: {0}")]
    Shape(String),
}

fn shape(msg: impl Into<String>) -> GraphJsonError {
    GraphJsonError::Shape(msg.into())
}

pub fn term_to_json(t: &Term) -> Value {
    match t {
        Term::Const(v) => json!(v),
        Term::Var(name) => json!(name),
        Term::Prim(op, args) => {
            let mut arr = vec![json!(op.symbol())];
            arr.extend(args.iter().map(term_to_json));
            Value::Array(arr)
        }
        Term::Cond {
            pred,
            then,
            otherwise,
        } => json!([
            "if",
            pred.to_string(),
            term_to_json(then),
            term_to_json(otherwise)
        ]),
    }
}

pub fn graph_to_json(model: &GraphModel) -> Value {
    let vertices: Vec<Value> = model
        .vertices
        .iter()
        .map(|v| {
            let mut obj = Map::new();
            obj.insert("name".into(), json!(v.name));
            obj.insert("kind".into(), json!(v.kind.as_str()));
            obj.insert(
                "dist".into(),
                json!({
                    "kind": v.dist.kind.symbol(),
                    "params": v.dist.params.iter().map(term_to_json).collect::<Vec<_>>(),
                }),
            );
            if let Some(d) = v.datum {
                obj.insert("datum".into(), json!(d));
            }
            obj.insert(
                "guard".into(),
                Value::Array(
                    v.guard
                        .iter()
                        .map(|g| json!([g.pred.to_string(), g.polarity.as_str()]))
                        .collect(),
                ),
            );
            Value::Object(obj)
        })
        .collect();
    let arcs: Vec<Value> = model.arcs.iter().map(|(a, b)| json!([a, b])).collect();
    let predicates: Vec<Value> = model
        .predicates
        .iter()
        .map(|p| {
            json!({
                "id": p.id.to_string(),
                "expr": term_to_json(&p.expr),
                "free_vars": p.free_vars.iter().collect::<Vec<_>>(),
            })
        })
        .collect();
    let coord_class: Map<String, Value> = model
        .coord_class
        .iter()
        .map(|(k, c)| (k.clone(), json!(c.as_str())))
        .collect();
    json!({
        "vertices": vertices,
        "arcs": arcs,
        "predicates": predicates,
        "coord_class": coord_class,
    })
}

/// Serialize to the canonical pretty-printed form, newline terminated.
pub fn emit_graph(model: &GraphModel) -> String {
    let mut s = serde_json::to_string_pretty(&graph_to_json(model))
        .expect("graph JSON is always serializable");
    s.push('\n');
    s
}

pub fn term_from_json(v: &Value) -> Result<Term, GraphJsonError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .map(Term::Const)
            .ok_or_else(|| shape("non-finite number")),
        Value::String(s) => Ok(Term::Var(s.clone())),
        Value::Array(items) => {
            let (head, rest) = items
                .split_first()
                .ok_or_else(|| shape("empty expression array"))?;
            let head = head
                .as_str()
                .ok_or_else(|| shape("expression head must be a string"))?;
            if head == "if" {
                let [pred, then, otherwise] = rest else {
                    return Err(shape("conditional needs predicate and two arms"));
                };
                let pred = pred
                    .as_str()
                    .and_then(PredId::parse)
                    .ok_or_else(|| shape("bad predicate id in conditional"))?;
                return Ok(Term::Cond {
                    pred,
                    then: Box::new(term_from_json(then)?),
                    otherwise: Box::new(term_from_json(otherwise)?),
                });
            }
            let op = PrimOp::from_symbol(head)
                .ok_or_else(|| shape(format!("unknown primitive `{head}`")))?;
            let args = rest.iter().map(term_from_json).collect::<Result<_, _>>()?;
            Ok(Term::Prim(op, args))
        }
        _ => Err(shape("expression must be number, string or array")),
    }
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value, GraphJsonError> {
    obj.get(key)
        .ok_or_else(|| shape(format!("missing field `{key}`")))
}

fn str_field<'a>(obj: &'a Value, key: &str) -> Result<&'a str, GraphJsonError> {
    field(obj, key)?
        .as_str()
        .ok_or_else(|| shape(format!("field `{key}` must be a string")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, GraphJsonError> {
    v.as_array()
        .ok_or_else(|| shape(format!("`{what}` must be an array")))
}

fn guard_literal(v: &Value) -> Result<GuardLiteral, GraphJsonError> {
    let pair = array(v, "guard entry")?;
    let [id, pol] = pair.as_slice() else {
        return Err(shape("guard entry must be [id, polarity]"));
    };
    let pred = id
        .as_str()
        .and_then(PredId::parse)
        .ok_or_else(|| shape("bad predicate id"))?;
    let polarity = match pol.as_str() {
        Some("neg") => Polarity::Neg,
        Some("nonneg") => Polarity::Nonneg,
        _ => return Err(shape("polarity must be \"neg\" or \"nonneg\"")),
    };
    Ok(GuardLiteral::new(pred, polarity))
}

pub fn graph_from_json(value: &Value) -> Result<GraphModel, GraphJsonError> {
    let mut vertices = Vec::new();
    for v in array(field(value, "vertices")?, "vertices")? {
        let kind = match str_field(v, "kind")? {
            "latent" => VertexKind::Latent,
            "observed" => VertexKind::Observed,
            other => return Err(shape(format!("unknown vertex kind `{other}`"))),
        };
        let dist = field(v, "dist")?;
        let dist_kind = DistKind::from_symbol(str_field(dist, "kind")?)
            .ok_or_else(|| shape("unknown distribution"))?;
        let params = array(field(dist, "params")?, "params")?
            .iter()
            .map(term_from_json)
            .collect::<Result<_, _>>()?;
        let datum = match v.get("datum") {
            Some(d) => Some(d.as_f64().ok_or_else(|| shape("datum must be a number"))?),
            None => None,
        };
        if (kind == VertexKind::Observed) != datum.is_some() {
            return Err(shape(
                "observed vertices carry a datum and latent ones do not",
            ));
        }
        let guard = array(field(v, "guard")?, "guard")?
            .iter()
            .map(guard_literal)
            .collect::<Result<_, _>>()?;
        vertices.push(Vertex {
            name: str_field(v, "name")?.to_string(),
            kind,
            dist: Dist {
                kind: dist_kind,
                params,
            },
            datum,
            guard,
        });
    }

    let mut arcs = BTreeSet::new();
    for a in array(field(value, "arcs")?, "arcs")? {
        let pair = array(a, "arc")?;
        match pair.as_slice() {
            [Value::String(p), Value::String(c)] => {
                arcs.insert((p.clone(), c.clone()));
            }
            _ => return Err(shape("arc must be [parent, child]")),
        }
    }

    let mut predicates = Vec::new();
    for (i, p) in array(field(value, "predicates")?, "predicates")?
        .iter()
        .enumerate()
    {
        let id = PredId::parse(str_field(p, "id")?).ok_or_else(|| shape("bad predicate id"))?;
        if id.0 != i {
            return Err(shape("predicate ids must be φ1, φ2, ... in order"));
        }
        let free_vars = array(field(p, "free_vars")?, "free_vars")?
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| shape("free var must be a string"))
            })
            .collect::<Result<_, _>>()?;
        predicates.push(Predicate {
            id,
            expr: term_from_json(field(p, "expr")?)?,
            free_vars,
        });
    }

    let mut coord_class = BTreeMap::new();
    let classes = field(value, "coord_class")?
        .as_object()
        .ok_or_else(|| shape("`coord_class` must be an object"))?;
    for (k, c) in classes {
        let class = match c.as_str() {
            Some("continuous") => CoordClass::Continuous,
            Some("discontinuous") => CoordClass::Discontinuous,
            _ => return Err(shape("unknown coordinate class")),
        };
        coord_class.insert(k.clone(), class);
    }

    for v in &vertices {
        if v.guard.iter().any(|g| g.pred.0 >= predicates.len()) {
            return Err(shape(format!(
                "vertex {} references an unknown predicate",
                v.name
            )));
        }
    }

    Ok(GraphModel {
        vertices,
        arcs,
        predicates,
        coord_class,
    })
}

pub fn parse_graph(text: &str) -> Result<GraphModel, GraphJsonError> {
    graph_from_json(&serde_json::from_str(text)?)
}
