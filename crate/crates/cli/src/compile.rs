use std::fs;
use std::path::Path;

use sppl::frontend::{parse_checked, Constants};
use sppl::graph::{compile_with, emit_graph, GraphModel};

use crate::args::CompileArgs;
use crate::error::{CliError, CliResult};

pub fn constants(pairs: &[(String, f64)]) -> Constants {
    pairs.iter().cloned().collect()
}

/// A compiled program plus the text it came from.
pub struct Loaded {
    pub source: String,
    pub model: GraphModel,
}

/// parse, validate, compile and classify. Warnings go to stderr.
pub fn load(path: &Path, constants: &Constants) -> CliResult<Loaded> {
    let source = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file = path.display().to_string();
    let ast =
        parse_checked(&source, constants).map_err(|e| CliError::Input(e.diagnostic(&file)))?;
    let (model, warnings) =
        compile_with(&ast, constants).map_err(|e| CliError::Input(e.diagnostic(&file)))?;
    for w in warnings {
        eprintln!(
            "{file}:{}:{}: warning: {}",
            w.span.line, w.span.column, w.message
        );
    }
    Ok(Loaded { source, model })
}

pub fn run(args: &CompileArgs) -> CliResult {
    let loaded = load(&args.source, &constants(&args.constants))?;
    let json = emit_graph(&loaded.model);
    match &args.out {
        Some(path) => fs::write(path, json).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}
