//! Run manifests: every command records its resolved flags, input hashes,
//! seed, timing and cache statistics. Identical manifests (timing aside)
//! mean byte-identical data outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use shapsets::fingerprint::fnv1a;
use shapsets::models::CacheStats;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub flags: serde_json::Value,
    /// Content hash per input file (fnv1a over the raw bytes).
    pub inputs: BTreeMap<String, String>,
    pub wall_clock_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache: Option<CacheStats>,
    #[serde(skip)]
    started: Instant,
    #[serde(skip)]
    out_path: PathBuf,
}

impl RunManifest {
    pub fn start(command: &str, out_dir: &Path) -> Self {
        RunManifest {
            tool: "shapsets",
            version: crate::TOOL_VERSION,
            command: command.to_string(),
            seed: None,
            flags: serde_json::Value::Null,
            inputs: BTreeMap::new(),
            wall_clock_ms: 0,
            cache: None,
            started: Instant::now(),
            out_path: out_dir.join(format!("{command}_manifest.json")),
        }
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.seed = Some(seed);
        self
    }

    pub fn flags(&mut self, flags: serde_json::Value) -> &mut Self {
        self.flags = flags;
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("hashing input {}", path.display()))?;
        self.inputs.insert(
            path.display().to_string(),
            format!("fnv1a:{:016x}", fnv1a(&bytes)),
        );
        Ok(self)
    }

    pub fn cache_stats(&mut self, stats: CacheStats) -> &mut Self {
        self.cache = Some(stats);
        self
    }

    /// Write the manifest next to the command outputs.
    pub fn finish(&mut self) -> Result<PathBuf> {
        self.wall_clock_ms = self.started.elapsed().as_millis();
        let body = serde_json::to_string_pretty(self)?;
        std::fs::write(&self.out_path, body + "\n")
            .with_context(|| format!("writing {}", self.out_path.display()))?;
        Ok(self.out_path.clone())
    }
}
