//! One function per subcommand. Each resolves inputs, runs the library,
//! writes outputs + a manifest into the output directory.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use shapsets::acquisition::{
    evaluate_strategies, EvaluationConfig, RankBy, ShapleyEngine, StrategySpec,
};
use shapsets::dataset::{write_csv, Dataset, Partition};
use shapsets::diagnostics::{
    check_axioms, collect_curve, summarize_curve, AxiomTolerances, PropertyReport, ShapleyResult,
};
use shapsets::generate::{generate_bias, generate_sinusoid, BiasScenario, ScenarioTag, SinusoidConfig};
use shapsets::rng::{streams, subseed};
use shapsets::shapley::exact::{build_value_table, exact_shapley, ExactMethod, ExactShapley};
use shapsets::shapley::feature::{combined_shapley_mc, feature_shapley_mc};
use shapsets::shapley::{estimate_mc, McConfig, SamplingMode, ShapleyEstimate};
use shapsets::{
    dataset::detect_identical_subsets, fingerprint::Fingerprint, models::train, BaselinePolicy,
    CoalitionCache, Game, ModelSpec,
};

use crate::manifest::RunManifest;
use crate::{ensure_out_dir, parse_baseline, parse_model, row_of_id, write_json, DataArgs, PartitionSource};

// ---------------------------------------------------------------- generate

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenerateKind {
    Sinusoid,
    Bias,
}

#[derive(Debug)]
pub struct GenerateArgs {
    pub kind: GenerateKind,
    /// JSON config file; defaults apply when absent.
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Scenario override for bias (a | b | c).
    pub scenario: Option<String>,
    pub out: PathBuf,
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = RunManifest::start("generate", &args.out);
    if let Some(cfg) = &args.config {
        manifest.input(cfg)?;
    }

    let (train, train_part, test, test_part, flags) = match args.kind {
        GenerateKind::Sinusoid => {
            let mut cfg: SinusoidConfig = match &args.config {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)
                    .with_context(|| format!("parsing {}", path.display()))?,
                None => SinusoidConfig::default(),
            };
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            manifest.seed(cfg.seed);
            let (ds, p) = generate_sinusoid(&cfg)?;
            // the reference experiment evaluates on the training data itself
            let flags = json!({"kind": "sinusoid", "config": cfg});
            (ds.clone(), p.clone(), ds, p, flags)
        }
        GenerateKind::Bias => {
            let mut cfg: BiasScenario = match &args.config {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)
                    .with_context(|| format!("parsing {}", path.display()))?,
                None => BiasScenario::default(),
            };
            if let Some(tag) = &args.scenario {
                cfg.scenario = match tag.as_str() {
                    "a" => ScenarioTag::A,
                    "b" => ScenarioTag::B,
                    "c" => ScenarioTag::C,
                    other => bail!("unknown scenario '{other}' (expected a | b | c)"),
                };
            }
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            manifest.seed(cfg.seed);
            let (train, train_part) = generate_bias(&cfg)?;
            // held-out test draw from a derived seed
            let test_cfg = BiasScenario {
                seed: subseed(cfg.seed, streams::GENERATOR_TEST, 0),
                ..cfg.clone()
            };
            let (test, test_part) = generate_bias(&test_cfg)?;
            let flags = json!({"kind": "bias", "config": cfg});
            (train, train_part, test, test_part, flags)
        }
    };

    write_csv(&train, args.out.join("train.csv"))?;
    write_csv(&test, args.out.join("test.csv"))?;
    train_part.write_csv(&train, args.out.join("partition.csv"))?;
    test_part.write_csv(&test, args.out.join("test_partition.csv"))?;
    manifest.flags(flags);
    manifest.finish()?;
    Ok(())
}

// ------------------------------------------------------------------ shared

pub fn parse_mode(s: &str) -> Result<SamplingMode> {
    match s {
        "per-subset" | "per_subset" => Ok(SamplingMode::PerSubset),
        "telescoping" => Ok(SamplingMode::Telescoping),
        other => bail!("unknown mode '{other}' (expected per-subset | telescoping)"),
    }
}

fn parse_method(s: &str) -> Result<Vec<ExactMethod>> {
    Ok(match s {
        "permutation" => vec![ExactMethod::Permutation],
        "weighted" => vec![ExactMethod::Weighted],
        "harsanyi" => vec![ExactMethod::Harsanyi],
        "all" => ExactMethod::ALL.to_vec(),
        other => bail!("unknown method '{other}' (expected permutation | weighted | harsanyi | all)"),
    })
}

/// Build the selected game at one test point (prediction, sqerr) or over the
/// whole test set (mse).
fn build_game(
    kind: &str,
    train: Arc<Dataset>,
    partition: Arc<Partition>,
    model: ModelSpec,
    baseline: BaselinePolicy,
    test: &Arc<Dataset>,
    point: Option<u64>,
) -> Result<Game> {
    let game = match kind {
        "prediction" => {
            let id = point.ok_or_else(|| anyhow!("the prediction game needs --point"))?;
            let row = row_of_id(test, id)?;
            Game::prediction(train, partition, model, baseline, test.row(row).to_vec())?
        }
        "sqerr" | "squared_error" => {
            let id = point.ok_or_else(|| anyhow!("the squared-error game needs --point"))?;
            let row = row_of_id(test, id)?;
            Game::squared_error(
                train,
                partition,
                model,
                baseline,
                test.row(row).to_vec(),
                test.response()[row],
            )?
        }
        "mse" => Game::mse(train, partition, model, baseline, Arc::clone(test))?,
        other => bail!("unknown game '{other}' (expected prediction | sqerr | mse)"),
    };
    Ok(game)
}

// ----------------------------------------------------------------- explain

#[derive(Debug)]
pub struct ExplainArgs {
    pub data: DataArgs,
    pub partition: PartitionSource,
    pub model: String,
    pub game: String,
    pub baseline: String,
    pub iterations: usize,
    pub mode: String,
    pub seed: u64,
    /// Test row ids to explain; all test rows when empty.
    pub points: Vec<u64>,
    pub trace: bool,
    pub no_cache: bool,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct PointReport {
    point: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prediction: Option<f64>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    estimate: Option<ShapleyEstimate>,
}

pub fn cmd_explain(args: &ExplainArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = RunManifest::start("explain", &args.out);
    manifest.seed(args.seed).input(&args.data.train)?;
    if let Some(test) = &args.data.test {
        manifest.input(test)?;
    }
    if let PartitionSource::File(path) = &args.partition {
        manifest.input(path)?;
    }

    let train_ds = args.data.load_train()?;
    let test_ds = args.data.load_test()?;
    let partition = Arc::new(args.partition.resolve(&train_ds)?);
    let model = parse_model(&args.model)?;
    let baseline = parse_baseline(&args.baseline)?;
    let mode = parse_mode(&args.mode)?;
    let cache = if args.no_cache {
        CoalitionCache::disabled()
    } else {
        CoalitionCache::new()
    };
    let cfg = McConfig::new(args.iterations, args.seed, mode);

    let grand_model = train(&model, &train_ds);
    let points: Vec<u64> = if args.game == "mse" {
        Vec::new()
    } else if args.points.is_empty() {
        test_ds.row_ids().to_vec()
    } else {
        args.points.clone()
    };

    let mut reports: Vec<PointReport> = Vec::new();
    if args.game == "mse" {
        let game = build_game(
            &args.game,
            Arc::clone(&train_ds),
            Arc::clone(&partition),
            model.clone(),
            baseline,
            &test_ds,
            None,
        )?;
        let estimate = estimate_mc(&game, &cache, &cfg)?;
        reports.push(PointReport {
            point: "mse".into(),
            error: None,
            prediction: None,
            estimate: Some(strip_trace(estimate, args.trace)),
        });
    } else {
        for &id in &points {
            let outcome = build_game(
                &args.game,
                Arc::clone(&train_ds),
                Arc::clone(&partition),
                model.clone(),
                baseline,
                &test_ds,
                Some(id),
            )
            .and_then(|game| Ok(estimate_mc(&game, &cache, &cfg)?));
            match outcome {
                Ok(estimate) => {
                    let row = row_of_id(&test_ds, id)?;
                    reports.push(PointReport {
                        point: id.to_string(),
                        error: None,
                        prediction: Some(grand_model.predict(test_ds.row(row))?),
                        estimate: Some(strip_trace(estimate, args.trace)),
                    });
                }
                // a bad point must not abort the batch
                Err(err) => reports.push(PointReport {
                    point: id.to_string(),
                    error: Some(format!("{err:#}")),
                    prediction: None,
                    estimate: None,
                }),
            }
        }
    }

    write_json(&args.out.join("explain.json"), &reports)?;
    write_bars_csv(&args.out.join("explain_bars.csv"), &reports, &partition)?;
    if args.trace {
        write_trace_csv(&args.out.join("explain_trace.csv"), &reports)?;
    }

    manifest.flags(json!({
        "train": args.data.train, "test": args.data.test, "response": args.data.response,
        "partition": args.partition.describe(), "model": model, "game": args.game,
        "baseline": args.baseline, "iterations": args.iterations, "mode": mode,
        "points": points, "trace": args.trace, "no_cache": args.no_cache,
    }));
    manifest.cache_stats(cache.stats());
    manifest.finish()?;
    Ok(())
}

fn strip_trace(estimate: ShapleyEstimate, keep: bool) -> ShapleyEstimate {
    if keep {
        estimate
    } else {
        estimate.without_trace()
    }
}

fn write_bars_csv(path: &Path, reports: &[PointReport], partition: &Partition) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["point", "subset", "label", "phi"])?;
    for report in reports {
        if let Some(est) = &report.estimate {
            for (i, phi) in est.phi.iter().enumerate() {
                w.write_record([
                    report.point.clone(),
                    (i + 1).to_string(),
                    partition.labels()[i].clone(),
                    phi.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_trace_csv(path: &Path, reports: &[PointReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["point", "iteration", "subset", "running_mean"])?;
    for report in reports {
        if let Some(est) = &report.estimate {
            if let Some(trace) = &est.trace {
                for (it, row) in trace.iter().enumerate() {
                    for (subset, value) in row.iter().enumerate() {
                        w.write_record([
                            report.point.clone(),
                            (it + 1).to_string(),
                            (subset + 1).to_string(),
                            value.to_string(),
                        ])?;
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

// ------------------------------------------------------------------- exact

#[derive(Debug)]
pub struct ExactArgs {
    pub data: DataArgs,
    pub partition: PartitionSource,
    pub model: String,
    pub game: String,
    pub baseline: String,
    pub method: String,
    pub point: Option<u64>,
    pub seed: u64,
    /// On-disk value-table cache directory (also via SHAPSETS_CACHE_DIR).
    pub cache_dir: Option<PathBuf>,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ExactReport {
    k: usize,
    labels: Vec<String>,
    game: String,
    baseline: String,
    point: Option<u64>,
    phi0: f64,
    methods: Vec<MethodPhi>,
    table: Vec<f64>,
}

#[derive(Serialize)]
struct MethodPhi {
    method: ExactMethod,
    phi: Vec<f64>,
}

/// Cache key covering everything the table depends on.
fn table_cache_key(game: &Game, test: &Dataset, point: Option<u64>) -> u64 {
    let mut fp = Fingerprint::new();
    fp.write_u64(game.data_fingerprint());
    fp.write_str(&game.model_spec().to_json());
    fp.write_str(game.kind().tag());
    fp.write_f64(game.baseline_constant());
    fp.write_u64(test.fingerprint());
    fp.write_u64(point.unwrap_or(0));
    fp.finish()
}

fn cache_dir_from(args_dir: &Option<PathBuf>) -> Option<PathBuf> {
    args_dir
        .clone()
        .or_else(|| std::env::var_os("SHAPSETS_CACHE_DIR").map(PathBuf::from))
}

fn load_or_build_table(
    game: &Game,
    cache: &CoalitionCache,
    dir: &Option<PathBuf>,
    key: u64,
) -> Result<Vec<f64>> {
    if let Some(dir) = dir {
        let path = dir.join(format!("table_{key:016x}.json"));
        if path.exists() {
            let table: Vec<f64> = serde_json::from_str(&std::fs::read_to_string(&path)?)
                .with_context(|| format!("parsing cached table {}", path.display()))?;
            if table.len() == 1usize << game.k() {
                return Ok(table);
            }
        }
    }
    let table = build_value_table(game, cache)?;
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("table_{key:016x}.json"));
        std::fs::write(&path, serde_json::to_string(&table)?)?;
    }
    Ok(table)
}

pub fn cmd_exact(args: &ExactArgs) -> Result<PropertyReport> {
    ensure_out_dir(&args.out)?;
    let mut manifest = RunManifest::start("exact", &args.out);
    manifest.seed(args.seed).input(&args.data.train)?;

    let train_ds = args.data.load_train()?;
    let test_ds = match &args.data.test {
        Some(_) => args.data.load_test()?,
        None => Arc::clone(&train_ds),
    };
    let partition = Arc::new(args.partition.resolve(&train_ds)?);
    let model = parse_model(&args.model)?;
    let baseline = parse_baseline(&args.baseline)?;
    let methods = parse_method(&args.method)?;

    let game = build_game(
        &args.game,
        Arc::clone(&train_ds),
        Arc::clone(&partition),
        model.clone(),
        baseline,
        &test_ds,
        args.point,
    )?;
    let cache = CoalitionCache::new();
    let disk = cache_dir_from(&args.cache_dir);
    let key = table_cache_key(&game, &test_ds, args.point);
    let table = load_or_build_table(&game, &cache, &disk, key)?;

    let mut methods_out = Vec::new();
    let mut first: Option<ExactShapley> = None;
    for method in methods {
        let solution = exact_shapley(&table, method)?;
        methods_out.push(MethodPhi {
            method,
            phi: solution.phi.clone(),
        });
        if first.is_none() {
            first = Some(solution);
        }
    }
    let first = first.expect("at least one method");

    let pairs = detect_identical_subsets(&train_ds, &partition);
    let grand = table[table.len() - 1] - table[0];
    let report = check_axioms(
        &ShapleyResult::Exact(&first),
        grand,
        &pairs,
        AxiomTolerances::default(),
        args.seed,
    );

    write_json(
        &args.out.join("exact.json"),
        &ExactReport {
            k: partition.k(),
            labels: partition.labels().to_vec(),
            game: args.game.clone(),
            baseline: args.baseline.clone(),
            point: args.point,
            phi0: game.phi0(),
            methods: methods_out,
            table,
        },
    )?;
    write_json(&args.out.join("exact_axioms.json"), &report)?;

    manifest.flags(json!({
        "train": args.data.train, "test": args.data.test, "response": args.data.response,
        "partition": args.partition.describe(), "model": model, "game": args.game,
        "baseline": args.baseline, "method": args.method, "point": args.point,
        "cache_dir": disk,
    }));
    manifest.cache_stats(cache.stats());
    manifest.finish()?;
    Ok(report)
}

// ------------------------------------------------------- features/combined

#[derive(Debug)]
pub struct FeaturesArgs {
    pub data: DataArgs,
    pub model: String,
    pub point: u64,
    pub iterations: usize,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn cmd_features(args: &FeaturesArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = RunManifest::start("features", &args.out);
    manifest.seed(args.seed).input(&args.data.train)?;

    let train_ds = args.data.load_train()?;
    let test_ds = args.data.load_test()?;
    let model = parse_model(&args.model)?;
    let fitted = train(&model, &train_ds);
    let row = row_of_id(&test_ds, args.point)?;
    let x = test_ds.row(row).to_vec();
    let result = feature_shapley_mc(&fitted, &train_ds, &x, args.iterations, args.seed)?;

    write_json(
        &args.out.join("features.json"),
        &json!({
            "point": args.point,
            "feature_names": train_ds.feature_names(),
            "prediction": fitted.predict(&x)?,
            "phi": result.phi,
            "se": result.se,
            "M": result.iterations,
            "seed": result.seed,
        }),
    )?;
    manifest.flags(json!({
        "train": args.data.train, "test": args.data.test, "response": args.data.response,
        "model": model, "point": args.point, "iterations": args.iterations,
    }));
    manifest.finish()?;
    Ok(())
}

#[derive(Debug)]
pub struct CombinedArgs {
    pub data: DataArgs,
    pub partition: PartitionSource,
    pub model: String,
    pub baseline: String,
    pub point: u64,
    pub iterations: usize,
    pub seed: u64,
    pub no_cache: bool,
    pub out: PathBuf,
}

pub fn cmd_combined(args: &CombinedArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = RunManifest::start("combined", &args.out);
    manifest.seed(args.seed).input(&args.data.train)?;

    let train_ds = args.data.load_train()?;
    let test_ds = args.data.load_test()?;
    let partition = Arc::new(args.partition.resolve(&train_ds)?);
    let model = parse_model(&args.model)?;
    let baseline = parse_baseline(&args.baseline)?;
    let row = row_of_id(&test_ds, args.point)?;
    let game = Game::prediction(
        Arc::clone(&train_ds),
        Arc::clone(&partition),
        model.clone(),
        baseline,
        test_ds.row(row).to_vec(),
    )?;
    let cache = if args.no_cache {
        CoalitionCache::disabled()
    } else {
        CoalitionCache::new()
    };
    let result = combined_shapley_mc(&game, &train_ds, args.iterations, args.seed, &cache)?;

    write_json(
        &args.out.join("combined.json"),
        &json!({
            "point": args.point,
            "subset_labels": partition.labels(),
            "feature_names": train_ds.feature_names(),
            "phi": result.phi,
            "se": result.se,
            "M": result.iterations,
            "seed": result.seed,
        }),
    )?;
    manifest.flags(json!({
        "train": args.data.train, "test": args.data.test,
        "partition": args.partition.describe(), "model": model,
        "baseline": args.baseline, "point": args.point, "iterations": args.iterations,
    }));
    manifest.cache_stats(cache.stats());
    manifest.finish()?;
    Ok(())
}

// ----------------------------------------------------------------- acquire

#[derive(Debug)]
pub struct AcquireArgs {
    pub pool: PathBuf,
    pub response: String,
    pub features: Option<Vec<String>>,
    pub aux: Option<Vec<String>>,
    pub pool_partition: PartitionSource,
    pub test: PathBuf,
    pub test_partition: PathBuf,
    pub budget: usize,
    pub strategies: Vec<String>,
    pub repeats: usize,
    pub seed: u64,
    pub model: String,
    /// None runs exact value tables for the max weights; Some(m) samples.
    pub shapley_iterations: Option<usize>,
    pub rank_by: String,
    pub out: PathBuf,
}

fn parse_strategy(s: &str) -> Result<StrategySpec> {
    if s == "equal" {
        return Ok(StrategySpec::Equal);
    }
    if let Some(k) = s.strip_prefix("one:") {
        let origin: usize = k.parse().with_context(|| format!("bad origin '{k}'"))?;
        if origin == 0 {
            bail!("subset indices are 1-based");
        }
        return Ok(StrategySpec::One { origin: origin - 1 });
    }
    if let Some(l) = s.strip_prefix("max:") {
        let top_l: usize = l.parse().with_context(|| format!("bad L '{l}'"))?;
        return Ok(StrategySpec::Max { top_l });
    }
    bail!("unknown strategy '{s}' (expected equal | one:<subset> | max:<L>)")
}

pub fn cmd_acquire(args: &AcquireArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = RunManifest::start("acquire", &args.out);
    manifest
        .seed(args.seed)
        .input(&args.pool)?
        .input(&args.test)?
        .input(&args.test_partition)?;

    let pool = Arc::new(
        shapsets::dataset::load_csv(
            &args.pool,
            &args.response,
            args.features.as_deref(),
            args.aux.as_deref(),
        )
        .with_context(|| format!("loading pool {}", args.pool.display()))?,
    );
    let pool_partition = Arc::new(args.pool_partition.resolve(&pool)?);
    let test = shapsets::dataset::load_csv(
        &args.test,
        &args.response,
        args.features.as_deref(),
        args.aux.as_deref(),
    )
    .with_context(|| format!("loading test {}", args.test.display()))?;
    let test_partition = Partition::read_csv(&args.test_partition, &test)?;
    let origins: Vec<usize> = test_partition.assignment().to_vec();

    let strategies: Vec<StrategySpec> = args
        .strategies
        .iter()
        .map(|s| parse_strategy(s))
        .collect::<Result<Vec<_>>>()?;
    let model = parse_model(&args.model)?;
    let mut cfg = EvaluationConfig::new(args.budget, args.repeats, args.seed);
    cfg.engine = match args.shapley_iterations {
        None | Some(0) => ShapleyEngine::Exact,
        Some(m) => ShapleyEngine::Mc { iterations: m },
    };
    cfg.rank_by = match args.rank_by.as_str() {
        "prediction" => RankBy::Prediction,
        "response" => RankBy::Response,
        other => bail!("unknown rank metric '{other}' (expected prediction | response)"),
    };

    let results = evaluate_strategies(
        &pool,
        &pool_partition,
        &test,
        &origins,
        &strategies,
        &model,
        &cfg,
    )?;

    let mut w = csv::Writer::from_path(args.out.join("acquire_strategies.csv"))?;
    w.write_record(["strategy", "repeat", "mse", "relative_mse"])?;
    for r in &results {
        for (rep, (mse, rel)) in r
            .per_repeat_mse
            .iter()
            .zip(&r.per_repeat_relative)
            .enumerate()
        {
            w.write_record([
                r.strategy.clone(),
                (rep + 1).to_string(),
                mse.to_string(),
                rel.to_string(),
            ])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(args.out.join("acquire_summary.csv"))?;
    w.write_record(["strategy", "mean_mse", "mean_relative_mse", "error"])?;
    for r in &results {
        w.write_record([
            r.strategy.clone(),
            r.mean_mse.to_string(),
            r.mean_relative.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(args.out.join("acquire_per_subset.csv"))?;
    w.write_record(["strategy", "subset", "label", "mse"])?;
    for r in &results {
        for (subset, mse) in r.per_subset_mse.iter().enumerate() {
            w.write_record([
                r.strategy.clone(),
                (subset + 1).to_string(),
                pool_partition.labels()[subset].clone(),
                mse.to_string(),
            ])?;
        }
    }
    w.flush()?;

    write_json(&args.out.join("acquire_plans.json"), &results)?;

    manifest.flags(json!({
        "pool": args.pool, "test": args.test, "response": args.response,
        "pool_partition": args.pool_partition.describe(),
        "test_partition": args.test_partition,
        "budget": args.budget, "strategies": args.strategies,
        "repeats": args.repeats, "model": model,
        "shapley_iterations": args.shapley_iterations, "rank_by": args.rank_by,
    }));
    manifest.finish()?;
    Ok(())
}

// -------------------------------------------------------------- curve/check

#[derive(Debug)]
pub struct CurveArgs {
    pub data: DataArgs,
    pub partition: PartitionSource,
    pub model: String,
    pub game: String,
    pub baseline: String,
    /// Build the full 2^K table; otherwise run the sampling estimator.
    pub exact: bool,
    pub iterations: usize,
    pub mode: String,
    pub point: Option<u64>,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn cmd_curve(args: &CurveArgs) -> Result<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = RunManifest::start("curve", &args.out);
    manifest.seed(args.seed).input(&args.data.train)?;

    let train_ds = args.data.load_train()?;
    let test_ds = match &args.data.test {
        Some(_) => args.data.load_test()?,
        None => Arc::clone(&train_ds),
    };
    let partition = Arc::new(args.partition.resolve(&train_ds)?);
    let model = parse_model(&args.model)?;
    let baseline = parse_baseline(&args.baseline)?;
    let game = build_game(
        &args.game,
        Arc::clone(&train_ds),
        Arc::clone(&partition),
        model.clone(),
        baseline,
        &test_ds,
        args.point,
    )?;

    // the curve is harvested from the run's cache, so caching stays on
    let cache = CoalitionCache::new();
    if args.exact {
        build_value_table(&game, &cache)?;
    } else {
        estimate_mc(
            &game,
            &cache,
            &McConfig::new(args.iterations, args.seed, parse_mode(&args.mode)?),
        )?;
    }
    let points = collect_curve(&game, &cache, &test_ds)?;
    let summary = summarize_curve(&points, partition.k())?;

    let mut w = csv::Writer::from_path(args.out.join("curve.csv"))?;
    w.write_record(["coalition_bitmask", "size", "excluded_list", "mse"])?;
    for p in &points {
        let excluded = p
            .excluded
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            p.coalition.to_string(),
            p.size.to_string(),
            excluded,
            p.mse.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(args.out.join("curve_by_size.csv"))?;
    w.write_record(["size", "mean_mse", "points"])?;
    for s in &summary.per_size {
        w.write_record([s.size.to_string(), s.mean_mse.to_string(), s.points.to_string()])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(args.out.join("curve_by_excluded.csv"))?;
    w.write_record(["excluded_subset", "mean_mse", "points"])?;
    for s in &summary.per_excluded {
        w.write_record([
            s.subset.to_string(),
            s.mean_mse.to_string(),
            s.points.to_string(),
        ])?;
    }
    w.flush()?;

    manifest.flags(json!({
        "train": args.data.train, "test": args.data.test,
        "partition": args.partition.describe(), "model": model, "game": args.game,
        "baseline": args.baseline, "exact": args.exact, "iterations": args.iterations,
        "point": args.point,
    }));
    manifest.cache_stats(cache.stats());
    manifest.finish()?;
    Ok(())
}

#[derive(Debug)]
pub struct CheckArgs {
    pub data: DataArgs,
    pub partition: PartitionSource,
    pub model: String,
    pub game: String,
    pub baseline: String,
    pub exact: bool,
    pub method: String,
    pub iterations: usize,
    pub mode: String,
    pub point: Option<u64>,
    pub seed: u64,
    pub cache_dir: Option<PathBuf>,
    pub out: PathBuf,
}

/// Returns the report; the binary exits nonzero when an axiom fails.
pub fn cmd_check(args: &CheckArgs) -> Result<PropertyReport> {
    ensure_out_dir(&args.out)?;
    let mut manifest = RunManifest::start("check", &args.out);
    manifest.seed(args.seed).input(&args.data.train)?;

    let train_ds = args.data.load_train()?;
    let test_ds = match &args.data.test {
        Some(_) => args.data.load_test()?,
        None => Arc::clone(&train_ds),
    };
    let partition = Arc::new(args.partition.resolve(&train_ds)?);
    let model = parse_model(&args.model)?;
    let baseline = parse_baseline(&args.baseline)?;
    let game = build_game(
        &args.game,
        Arc::clone(&train_ds),
        Arc::clone(&partition),
        model.clone(),
        baseline,
        &test_ds,
        args.point,
    )?;
    let cache = CoalitionCache::new();
    let pairs = detect_identical_subsets(&train_ds, &partition);

    let report = if args.exact {
        let method = parse_method(&args.method)?[0];
        let disk = cache_dir_from(&args.cache_dir);
        let key = table_cache_key(&game, &test_ds, args.point);
        let table = load_or_build_table(&game, &cache, &disk, key)?;
        let solution = exact_shapley(&table, method)?;
        let grand = table[table.len() - 1] - table[0];
        check_axioms(
            &ShapleyResult::Exact(&solution),
            grand,
            &pairs,
            AxiomTolerances::default(),
            args.seed,
        )
    } else {
        let estimate = estimate_mc(
            &game,
            &cache,
            &McConfig::new(args.iterations, args.seed, parse_mode(&args.mode)?),
        )?;
        let grand = game.grand_value(&cache)?;
        check_axioms(
            &ShapleyResult::Estimate(&estimate),
            grand,
            &pairs,
            AxiomTolerances::default(),
            args.seed,
        )
    };

    write_json(&args.out.join("check.json"), &report)?;
    manifest.flags(json!({
        "train": args.data.train, "test": args.data.test,
        "partition": args.partition.describe(), "model": model, "game": args.game,
        "baseline": args.baseline, "exact": args.exact, "method": args.method,
        "iterations": args.iterations, "point": args.point,
    }));
    manifest.cache_stats(cache.stats());
    manifest.finish()?;
    Ok(report)
}
