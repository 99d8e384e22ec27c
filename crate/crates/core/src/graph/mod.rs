//! Lowering of checked programs to static graphical models.

mod compile;
mod eval;
mod json;
mod model;

pub use compile::{compile, compile_with, CompileError, CompileErrorKind, Warning};
pub use eval::{apply_prim, eval_closed};
pub use json::{
    emit_graph, graph_from_json, graph_to_json, parse_graph, term_from_json, term_to_json,
    GraphJsonError,
};
pub use model::{
    classify_coordinates, CoordClass, Dist, GraphModel, GuardLiteral, Polarity, PredId, Predicate,
    Term, Vertex, VertexKind,
};
