use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use shapsets_cli::commands::{
    cmd_acquire, cmd_check, cmd_combined, cmd_curve, cmd_exact, cmd_explain, cmd_features,
    cmd_generate, AcquireArgs, CheckArgs, CombinedArgs, CurveArgs, ExactArgs, ExplainArgs,
    FeaturesArgs, GenerateArgs, GenerateKind,
};
use shapsets_cli::{configure_jobs, DataArgs, PartitionSource};

/// Explain regression predictions by the Shapley values of training-data
/// subsets: sampling and exact estimators, error attribution, acquisition
/// planning and learning curves.
#[derive(Parser)]
#[command(name = "shapsets", version, about)]
struct Cli {
    /// Worker threads for retraining and sampling (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory for reports and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataFlags {
    /// Training data CSV (header row required).
    #[arg(long)]
    train: PathBuf,

    /// Test data CSV with the same schema.
    #[arg(long)]
    test: Option<PathBuf>,

    /// Response column name.
    #[arg(long)]
    response: String,

    /// Feature columns (comma separated); defaults to all non-response,
    /// non-aux columns in header order.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,

    /// Auxiliary columns kept out of the feature matrix (e.g. a sensitive
    /// attribute used only for partitioning).
    #[arg(long, value_delimiter = ',')]
    aux: Option<Vec<String>>,
}

impl DataFlags {
    fn into_args(self) -> DataArgs {
        DataArgs {
            train: self.train,
            test: self.test,
            response: self.response,
            features: self.features,
            aux: self.aux,
        }
    }
}

#[derive(Args, Clone)]
struct PartitionFlags {
    /// Partition CSV (row_id, subset, label).
    #[arg(long, conflicts_with_all = ["blocks", "quantiles", "category"])]
    partition: Option<PathBuf>,

    /// Split into K contiguous chronological blocks.
    #[arg(long)]
    blocks: Option<usize>,

    /// Sort by a feature and split into K blocks: <column>:<K>.
    #[arg(long, conflicts_with = "blocks")]
    quantiles: Option<String>,

    /// One subset per distinct value of a column.
    #[arg(long, conflicts_with_all = ["blocks", "quantiles"])]
    category: Option<String>,
}

impl PartitionFlags {
    fn into_source(self) -> Result<PartitionSource> {
        if let Some(path) = self.partition {
            return Ok(PartitionSource::File(path));
        }
        if let Some(k) = self.blocks {
            return Ok(PartitionSource::Blocks(k));
        }
        if let Some(spec) = self.quantiles {
            let (column, k) = spec
                .rsplit_once(':')
                .ok_or_else(|| anyhow::anyhow!("--quantiles expects <column>:<K>"))?;
            return Ok(PartitionSource::Quantiles {
                column: column.to_string(),
                k: k.parse()?,
            });
        }
        if let Some(column) = self.category {
            return Ok(PartitionSource::Category { column });
        }
        anyhow::bail!("one of --partition, --blocks, --quantiles, --category is required")
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset (train/test/partition CSVs).
    Generate {
        /// Which generator: sinusoid | bias.
        kind: String,
        /// Generator config as a JSON file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Bias scenario override: a | b | c.
        #[arg(long)]
        scenario: Option<String>,
    },

    /// Monte Carlo subset-importance explanations for test points.
    Explain {
        #[command(flatten)]
        data: DataFlags,
        #[command(flatten)]
        partition: PartitionFlags,
        /// Model spec JSON, e.g. '{"kind":"knn","k":10}'.
        #[arg(long)]
        model: String,
        /// prediction | sqerr | mse.
        #[arg(long, default_value = "prediction")]
        game: String,
        /// zero | mean | const:<c>.
        #[arg(long, default_value = "zero")]
        baseline: String,
        #[arg(long, default_value_t = 250)]
        iterations: usize,
        /// per-subset | telescoping.
        #[arg(long, default_value = "per-subset")]
        mode: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Test row ids to explain (comma separated); all rows when omitted.
        #[arg(long, value_delimiter = ',')]
        points: Option<Vec<u64>>,
        /// Emit the convergence trace CSV (M x K values per point).
        #[arg(long)]
        trace: bool,
        /// Retrain for every draw instead of using the coalition cache.
        #[arg(long)]
        no_cache: bool,
    },

    /// Exact Shapley values from the full 2^K coalition table.
    Exact {
        #[command(flatten)]
        data: DataFlags,
        #[command(flatten)]
        partition: PartitionFlags,
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "prediction")]
        game: String,
        #[arg(long, default_value = "zero")]
        baseline: String,
        /// permutation | weighted | harsanyi | all.
        #[arg(long, default_value = "weighted")]
        method: String,
        /// Test row id for the prediction and squared-error games.
        #[arg(long)]
        point: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for cached value tables (also SHAPSETS_CACHE_DIR).
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },

    /// Feature-importance Shapley values of the full-data model.
    Features {
        #[command(flatten)]
        data: DataFlags,
        #[arg(long)]
        model: String,
        #[arg(long)]
        point: u64,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Combined feature x subset importance matrix.
    Combined {
        #[command(flatten)]
        data: DataFlags,
        #[command(flatten)]
        partition: PartitionFlags,
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "zero")]
        baseline: String,
        #[arg(long)]
        point: u64,
        #[arg(long, default_value_t = 500)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        no_cache: bool,
    },

    /// Compare acquisition strategies under a budget.
    Acquire {
        /// Pool CSV to acquire from.
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        response: String,
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        aux: Option<Vec<String>>,
        #[command(flatten)]
        partition: PartitionFlags,
        #[arg(long)]
        test: PathBuf,
        /// Partition CSV assigning each test row to its origin subset.
        #[arg(long)]
        test_partition: PathBuf,
        #[arg(long)]
        budget: usize,
        /// equal | one:<subset> | max:<L> (comma separated).
        #[arg(long, value_delimiter = ',')]
        strategy: Vec<String>,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        model: String,
        /// Iterations for the max strategy's Shapley weights; 0 = exact.
        #[arg(long, default_value_t = 0)]
        shapley_iterations: usize,
        /// prediction | response.
        #[arg(long, default_value = "prediction")]
        rank_by: String,
    },

    /// Extended learning curve from a run's retrained coalitions.
    Curve {
        #[command(flatten)]
        data: DataFlags,
        #[command(flatten)]
        partition: PartitionFlags,
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "prediction")]
        game: String,
        #[arg(long, default_value = "zero")]
        baseline: String,
        /// Enumerate the full 2^K table instead of sampling.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        #[arg(long, default_value = "per-subset")]
        mode: String,
        #[arg(long)]
        point: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Check the Shapley axioms; exits nonzero when one fails.
    Check {
        #[command(flatten)]
        data: DataFlags,
        #[command(flatten)]
        partition: PartitionFlags,
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "prediction")]
        game: String,
        #[arg(long, default_value = "zero")]
        baseline: String,
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value = "weighted")]
        method: String,
        #[arg(long, default_value_t = 250)]
        iterations: usize,
        #[arg(long, default_value = "per-subset")]
        mode: String,
        #[arg(long)]
        point: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_jobs(cli.jobs);
    let out = cli.out;
    match cli.command {
        Command::Generate {
            kind,
            config,
            seed,
            scenario,
        } => {
            let kind = match kind.as_str() {
                "sinusoid" => GenerateKind::Sinusoid,
                "bias" => GenerateKind::Bias,
                other => anyhow::bail!("unknown generator '{other}' (expected sinusoid | bias)"),
            };
            cmd_generate(&GenerateArgs {
                kind,
                config,
                seed,
                scenario,
                out,
            })?;
        }
        Command::Explain {
            data,
            partition,
            model,
            game,
            baseline,
            iterations,
            mode,
            seed,
            points,
            trace,
            no_cache,
        } => {
            cmd_explain(&ExplainArgs {
                data: data.into_args(),
                partition: partition.into_source()?,
                model,
                game,
                baseline,
                iterations,
                mode,
                seed,
                points: points.unwrap_or_default(),
                trace,
                no_cache,
                out,
            })?;
        }
        Command::Exact {
            data,
            partition,
            model,
            game,
            baseline,
            method,
            point,
            seed,
            cache_dir,
        } => {
            cmd_exact(&ExactArgs {
                data: data.into_args(),
                partition: partition.into_source()?,
                model,
                game,
                baseline,
                method,
                point,
                seed,
                cache_dir,
                out,
            })?;
        }
        Command::Features {
            data,
            model,
            point,
            iterations,
            seed,
        } => {
            cmd_features(&FeaturesArgs {
                data: data.into_args(),
                model,
                point,
                iterations,
                seed,
                out,
            })?;
        }
        Command::Combined {
            data,
            partition,
            model,
            baseline,
            point,
            iterations,
            seed,
            no_cache,
        } => {
            cmd_combined(&CombinedArgs {
                data: data.into_args(),
                partition: partition.into_source()?,
                model,
                baseline,
                point,
                iterations,
                seed,
                no_cache,
                out,
            })?;
        }
        Command::Acquire {
            pool,
            response,
            features,
            aux,
            partition,
            test,
            test_partition,
            budget,
            strategy,
            repeats,
            seed,
            model,
            shapley_iterations,
            rank_by,
        } => {
            cmd_acquire(&AcquireArgs {
                pool,
                response,
                features,
                aux,
                pool_partition: partition.into_source()?,
                test,
                test_partition,
                budget,
                strategies: strategy,
                repeats,
                seed,
                model,
                shapley_iterations: if shapley_iterations == 0 {
                    None
                } else {
                    Some(shapley_iterations)
                },
                rank_by,
                out,
            })?;
        }
        Command::Curve {
            data,
            partition,
            model,
            game,
            baseline,
            exact,
            iterations,
            mode,
            point,
            seed,
        } => {
            cmd_curve(&CurveArgs {
                data: data.into_args(),
                partition: partition.into_source()?,
                model,
                game,
                baseline,
                exact,
                iterations,
                mode,
                point,
                seed,
                out,
            })?;
        }
        Command::Check {
            data,
            partition,
            model,
            game,
            baseline,
            exact,
            method,
            iterations,
            mode,
            point,
            seed,
            cache_dir,
        } => {
            let report = cmd_check(&CheckArgs {
                data: data.into_args(),
                partition: partition.into_source()?,
                model,
                game,
                baseline,
                exact,
                method,
                iterations,
                mode,
                point,
                seed,
                cache_dir,
                out,
            })?;
            for check in &report.checks {
                eprintln!(
                    "{}: {} (residual {:.3e}, tolerance {:.3e})",
                    check.axiom,
                    if check.pass { "pass" } else { "FAIL" },
                    check.residual,
                    check.tolerance
                );
            }
            if !report.all_pass {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
