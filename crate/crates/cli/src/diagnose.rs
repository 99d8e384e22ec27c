use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sppl::oracle::{
    aggregate_traces, gmm_exact, log_grid, mse_trace, recognize_gmm, Functional, GmmLayout,
    TraceBand,
};
use sppl::samplers::{read_csv, read_jsonl, CsvTable};

use crate::args::DiagnoseArgs;
use crate::compile::{constants, load};
use crate::error::{CliError, CliResult};
use crate::manifest::recorded_engine;

fn read_table(path: &Path) -> CliResult<CsvTable> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let jsonl = path.extension().is_some_and(|e| e == "jsonl");
    let table = if jsonl {
        read_jsonl(&text)
    } else {
        read_csv(&text)
    };
    table.map_err(|m| CliError::Input(format!("{}: {m}", path.display())))
}

/// Functional value at every row of one sample file.
fn functional_values(
    table: &CsvTable,
    layout: &GmmLayout,
    functional: Functional,
    path: &Path,
) -> CliResult<Vec<f64>> {
    let idx =
        layout
            .mean_coords
            .iter()
            .map(|name| {
                table.header.iter().position(|h| h == name).ok_or_else(|| {
                    CliError::Input(format!("{}: no column `{name}`", path.display()))
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
    let mut means = vec![0.0; idx.len()];
    Ok(table
        .rows
        .iter()
        .map(|row| {
            for (m, &i) in means.iter_mut().zip(&idx) {
                *m = row[i];
            }
            functional.at(&means, &layout.spec.p0)
        })
        .collect())
}

/// The output table. An engine column leads when there is more than one
/// engine.
pub fn render(bands: &BTreeMap<String, Vec<TraceBand>>) -> String {
    let with_engine = bands.len() > 1;
    let mut out = String::new();
    if with_engine {
        out.push_str("engine,");
    }
    out.push_str("n,median_mse,q20,q80\n");
    for (engine, rows) in bands {
        for b in rows {
            if with_engine {
                out.push_str(engine);
                out.push(',');
            }
            let _ = writeln!(out, "{},{:?},{:?},{:?}", b.n, b.median, b.q20, b.q80);
        }
    }
    out
}

pub fn run(args: &DiagnoseArgs) -> CliResult {
    let loaded = load(&args.model, &constants(&args.constants))?;
    let no_oracle = |why: String| {
        CliError::Usage(format!(
            "no oracle available for {}: {why}",
            args.model.display()
        ))
    };
    let layout = recognize_gmm(&loaded.model)
        .ok_or_else(|| no_oracle("the model is not a recognized Gaussian mixture".into()))?;
    let posterior = gmm_exact(&layout.spec).map_err(|e| no_oracle(e.to_string()))?;
    let truth = args.functional.truth(&posterior);

    let mut groups: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for path in &args.files {
        let table = read_table(path)?;
        let values = functional_values(&table, &layout, args.functional, path)?;
        if values.is_empty() {
            return Err(CliError::Input(format!("{}: no samples", path.display())));
        }
        let engine = recorded_engine(path).unwrap_or_else(|| "unknown".into());
        groups.entry(engine).or_default().push(values);
    }

    let bands: BTreeMap<String, Vec<TraceBand>> = groups
        .into_iter()
        .map(|(engine, runs)| {
            let n = runs.iter().map(Vec::len).min().unwrap_or(0);
            let grid = log_grid(n, args.grid_start, args.grid_points);
            let traces: Vec<_> = runs.iter().map(|v| mse_trace(v, truth, &grid)).collect();
            (engine, aggregate_traces(&traces))
        })
        .collect();

    let csv = render(&bands);
    match &args.out {
        Some(path) => fs::write(path, csv).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band(n: usize, v: f64) -> TraceBand {
        TraceBand {
            n,
            median: v,
            q20: v,
            q80: v,
        }
    }

    #[test]
    fn single_engine_has_four_columns() {
        let bands = BTreeMap::from([("dhmc".to_string(), vec![band(10, 0.5), band(20, 0.25)])]);
        assert_eq!(
            render(&bands),
            "n,median_mse,q20,q80\n10,0.5,0.5,0.5\n20,0.25,0.25,0.25\n"
        );
    }

    #[test]
    fn several_engines_add_a_column() {
        let bands = BTreeMap::from([
            ("dhmc".to_string(), vec![band(10, 0.5)]),
            ("mwg".to_string(), vec![band(10, 1.0)]),
        ]);
        assert_eq!(
            render(&bands),
            "engine,n,median_mse,q20,q80\ndhmc,10,0.5,0.5,0.5\nmwg,10,1.0,1.0,1.0\n"
        );
    }
}
