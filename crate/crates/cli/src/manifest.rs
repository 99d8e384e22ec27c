//! Run manifests written next to every sample file.
//!
//! A manifest records everything `sample` needs to reproduce its output
//! byte for byte with the same binary: the source, constants, the full
//! sampler configuration and the chain index. Wall time and evaluation
//! counts are informational.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use sppl::frontend::Constants;
use sppl::samplers::SamplerConfig;

pub const MANIFEST_VERSION: u64 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `<file>.manifest.json`.
pub fn manifest_path(sample_file: &Path) -> PathBuf {
    let mut s = sample_file.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn config_json(cfg: &SamplerConfig) -> Value {
    json!({
        "engine": cfg.engine.as_str(),
        "step_size": cfg.step_size,
        "leapfrog_steps": cfg.leapfrog_steps,
        "mass": cfg.mass,
        "num_samples": cfg.num_samples,
        "burn_in": cfg.burn_in,
        "seed": cfg.seed,
        "permute_discontinuous": cfg.permute_discontinuous,
        "step_size_jitter": cfg.step_size_jitter,
    })
}

pub struct RunManifest<'a> {
    pub source_path: &'a Path,
    pub source_text: &'a str,
    pub graph_json: &'a str,
    pub constants: &'a Constants,
    pub config: &'a SamplerConfig,
    pub chain: u64,
    pub chains: u64,
    pub format: &'a str,
    pub coords: &'a [String],
    pub wall_time_secs: f64,
    pub density_evals: u64,
    pub acceptance_rate: f64,
}

impl RunManifest<'_> {
    pub fn to_json(&self) -> Value {
        json!({
            "manifest_version": MANIFEST_VERSION,
            "tool": env!("CARGO_PKG_NAME"),
            "tool_version": env!("CARGO_PKG_VERSION"),
            "source": self.source_path.display().to_string(),
            "source_sha256": sha256_hex(self.source_text.as_bytes()),
            "graph_hash": sha256_hex(self.graph_json.as_bytes()),
            "constants": self.constants,
            "engine": self.config.engine.as_str(),
            "config": config_json(self.config),
            "chain": self.chain,
            "chains": self.chains,
            "format": self.format,
            "coords": self.coords,
            "wall_time_secs": self.wall_time_secs,
            "density_evals": self.density_evals,
            "acceptance_rate": self.acceptance_rate,
        })
    }

    pub fn write(&self, sample_file: &Path) -> std::io::Result<PathBuf> {
        let path = manifest_path(sample_file);
        let mut text = serde_json::to_string_pretty(&self.to_json())?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// The engine named in a sample file's manifest, if there is one.
pub fn recorded_engine(sample_file: &Path) -> Option<String> {
    let text = fs::read_to_string(manifest_path(sample_file)).ok()?;
    let v: Value = serde_json::from_str(&text).ok()?;
    v.get("engine")?.as_str().map(str::to_string)
}
