use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use sppl::density::build_density;
use sppl::graph::emit_graph;
use sppl::samplers::{
    run_chain_indexed, run_chains, write_csv, write_jsonl, ChainResult, SamplerConfig, SamplerError,
};

use crate::args::{Format, SampleArgs};
use crate::compile::{constants, load};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

fn config(args: &SampleArgs) -> SamplerConfig {
    SamplerConfig {
        engine: args.engine,
        step_size: args.step_size,
        leapfrog_steps: args.leapfrog,
        mass: args.mass.clone(),
        num_samples: args.samples,
        burn_in: args.burnin,
        seed: args.seed,
        permute_discontinuous: !args.no_permute,
        step_size_jitter: args.step_jitter,
    }
}

/// Output path for one chain. With several chains `-c<i>` goes before the
/// extension.
pub fn output_path(args: &SampleArgs, chain: u64) -> PathBuf {
    let ext = args.format.extension();
    let base = args.out.clone().unwrap_or_else(|| {
        let stem = args
            .source
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "samples".into());
        PathBuf::from(format!("{stem}-{}-seed{}.{ext}", args.engine, args.seed))
    });
    if args.chains == 1 {
        return base;
    }
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = base
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| ext.to_string());
    base.with_file_name(format!("{stem}-c{chain}.{ext}"))
}

fn sampler_error(e: SamplerError) -> CliError {
    match e {
        SamplerError::InvalidConfig(m) => CliError::Usage(m),
        other => CliError::Input(other.to_string()),
    }
}

fn write_samples(chain: &ChainResult, format: Format, path: &Path) -> CliResult {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        Format::Csv => write_csv(chain, &mut w),
        Format::Jsonl => write_jsonl(chain, &mut w),
    }
    .and_then(|_| w.flush())
    .map_err(|e| CliError::io(path, e))
}

pub fn run(args: &SampleArgs) -> CliResult {
    let consts = constants(&args.constants);
    let loaded = load(&args.source, &consts)?;
    let pd = build_density(&loaded.model).map_err(|e| CliError::Input(e.to_string()))?;
    let cfg = config(args);
    cfg.validate(pd.dim()).map_err(sampler_error)?;

    let start = Instant::now();
    let chains = if args.chains == 1 {
        vec![run_chain_indexed(&pd, &cfg, 0).map_err(sampler_error)?]
    } else {
        run_chains(&pd, &cfg, args.chains as usize).map_err(sampler_error)?
    };
    let wall = start.elapsed().as_secs_f64();

    let graph_json = emit_graph(&loaded.model);
    for (i, chain) in chains.iter().enumerate() {
        let path = output_path(args, i as u64);
        write_samples(chain, args.format, &path)?;
        let manifest = RunManifest {
            source_path: &args.source,
            source_text: &loaded.source,
            graph_json: &graph_json,
            constants: &consts,
            config: &cfg,
            chain: i as u64,
            chains: args.chains,
            format: args.format.extension(),
            coords: &chain.coords,
            wall_time_secs: wall,
            density_evals: chain.density_evals,
            acceptance_rate: chain.acceptance_rate(),
        };
        let mpath = manifest.write(&path).map_err(|e| CliError::io(&path, e))?;
        eprintln!(
            "wrote {} ({} samples, acceptance {:.3}) and {}",
            path.display(),
            chain.samples.len(),
            chain.acceptance_rate(),
            mpath.display()
        );
    }
    Ok(())
}
