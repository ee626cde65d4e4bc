//! Command implementations behind the `shapsets` binary.
//!
//! Every command resolves its inputs, runs the corresponding library
//! operations, writes its outputs plus a run manifest into the output
//! directory, and is callable directly from tests. Outputs are JSON for
//! structured reports and CSV for anything a plotting tool consumes.

pub mod commands;
mod manifest;

pub use manifest::RunManifest;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};

use shapsets::dataset::{load_csv, partition_blocks, partition_category, partition_quantiles};
use shapsets::{BaselinePolicy, Dataset, ModelSpec, Partition};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where the subset assignment comes from.
#[derive(Debug, Clone)]
pub enum PartitionSource {
    File(PathBuf),
    Blocks(usize),
    Quantiles { column: String, k: usize },
    Category { column: String },
}

impl PartitionSource {
    pub fn describe(&self) -> String {
        match self {
            PartitionSource::File(p) => format!("file:{}", p.display()),
            PartitionSource::Blocks(k) => format!("blocks:{k}"),
            PartitionSource::Quantiles { column, k } => format!("quantiles:{column}:{k}"),
            PartitionSource::Category { column } => format!("category:{column}"),
        }
    }

    pub fn resolve(&self, ds: &Dataset) -> Result<Partition> {
        let p = match self {
            PartitionSource::File(path) => Partition::read_csv(path, ds)
                .with_context(|| format!("reading partition {}", path.display()))?,
            PartitionSource::Blocks(k) => partition_blocks(ds, *k)?,
            PartitionSource::Quantiles { column, k } => partition_quantiles(ds, column, *k)?,
            PartitionSource::Category { column } => partition_category(ds, column)?,
        };
        Ok(p)
    }
}

/// Shared dataset-loading flags.
#[derive(Debug, Clone)]
pub struct DataArgs {
    pub train: PathBuf,
    pub test: Option<PathBuf>,
    pub response: String,
    pub features: Option<Vec<String>>,
    pub aux: Option<Vec<String>>,
}

impl DataArgs {
    pub fn load_train(&self) -> Result<Arc<Dataset>> {
        let ds = load_csv(
            &self.train,
            &self.response,
            self.features.as_deref(),
            self.aux.as_deref(),
        )
        .with_context(|| format!("loading training data {}", self.train.display()))?;
        Ok(Arc::new(ds))
    }

    pub fn load_test(&self) -> Result<Arc<Dataset>> {
        let path = self
            .test
            .as_ref()
            .ok_or_else(|| anyhow!("--test is required for this command"))?;
        let ds = load_csv(
            path,
            &self.response,
            self.features.as_deref(),
            self.aux.as_deref(),
        )
        .with_context(|| format!("loading test data {}", path.display()))?;
        Ok(Arc::new(ds))
    }
}

/// Parse `zero`, `mean`, or `const:<c>`.
pub fn parse_baseline(s: &str) -> Result<BaselinePolicy> {
    match s {
        "zero" => Ok(BaselinePolicy::Zero),
        "mean" => Ok(BaselinePolicy::TrainingMean),
        other => {
            if let Some(value) = other.strip_prefix("const:") {
                let c: f64 = value
                    .parse()
                    .with_context(|| format!("bad baseline constant '{value}'"))?;
                Ok(BaselinePolicy::Constant { c })
            } else {
                bail!("unknown baseline '{other}' (expected zero | mean | const:<c>)")
            }
        }
    }
}

pub fn parse_model(s: &str) -> Result<ModelSpec> {
    ModelSpec::from_json(s).with_context(|| format!("bad model spec '{s}'"))
}

/// Row index of a 1-based row id within a dataset.
pub fn row_of_id(ds: &Dataset, id: u64) -> Result<usize> {
    ds.row_index_of_id(id)
        .ok_or_else(|| anyhow!("row id {id} not found"))
}

pub fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let body = serde_json::to_string_pretty(value)?;
    std::fs::write(path, body + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Install a global rayon pool with the requested worker count. Call once,
/// before any parallel work; later calls are ignored (rayon keeps the first
/// pool), which is fine for a CLI process.
pub fn configure_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}
