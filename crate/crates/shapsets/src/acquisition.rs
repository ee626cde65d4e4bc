//! Shapley-guided training-data acquisition: plan how many points to draw
//! from each subset under a budget, and compare strategies by the test error
//! of models trained on the acquired data.
//!
//! Three strategies: `equal` spreads the budget evenly, `one` takes the
//! whole budget from the test point's own subset (one model per origin),
//! and `max` apportions the budget proportionally to the average Shapley
//! importance of the subsets for the top-L predictions.

use rand::Rng;
use serde::Serialize;

use crate::dataset::{Dataset, Partition};
use crate::error::{Error, Result};
use crate::games::{BaselinePolicy, Game};
use crate::models::{train, CoalitionCache, ModelSpec, TrainedModel};
use crate::par;
use crate::rng::{stream_rng, streams};
use crate::shapley::exact::{build_value_table, exact_shapley, ExactMethod, MAX_TABLE_SUBSETS};
use crate::shapley::{estimate_mc, McConfig, SamplingMode};
use std::sync::Arc;

/// How the `max` strategy's importance weights are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapleyEngine {
    /// Full 2^K value tables per explained point (K ≤ 20).
    Exact,
    /// Per-subset sampling with this many iterations.
    Mc { iterations: usize },
}

/// Ranking metric for selecting the L points whose explanations feed the
/// `max` weights. The reference procedure ranks by predicted value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankBy {
    Prediction,
    Response,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategySpec {
    Equal,
    One { origin: usize },
    Max { top_l: usize },
}

impl StrategySpec {
    pub fn label(&self) -> String {
        match self {
            StrategySpec::Equal => "equal".into(),
            StrategySpec::One { origin } => format!("one:{}", origin + 1),
            StrategySpec::Max { top_l } => format!("max:{top_l}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcquisitionPlan {
    /// Points to draw per subset; sums to the budget.
    pub counts: Vec<usize>,
    pub budget: usize,
    pub strategy: String,
}

fn check_feasible(counts: &[usize], pool_sizes: &[usize], strategy: &str) -> Result<()> {
    for (subset, (&want, &have)) in counts.iter().zip(pool_sizes).enumerate() {
        if want > have {
            return Err(Error::Infeasible(format!(
                "strategy {strategy}: subset {} holds {have} points, plan needs {want} \
                 (short {})",
                subset + 1,
                want - have
            )));
        }
    }
    Ok(())
}

/// ⌊N/K⌋ from each subset, remainder to the lowest-index subsets.
pub fn plan_equal(pool: &Partition, budget: usize) -> Result<AcquisitionPlan> {
    let k = pool.k();
    if budget < k {
        return Err(Error::Argument(format!(
            "budget {budget} is below the subset count {k}"
        )));
    }
    let base = budget / k;
    let remainder = budget % k;
    let counts: Vec<usize> = (0..k)
        .map(|s| base + usize::from(s < remainder))
        .collect();
    check_feasible(&counts, &pool.subset_sizes(), "equal")?;
    Ok(AcquisitionPlan {
        counts,
        budget,
        strategy: "equal".into(),
    })
}

/// The whole budget from one origin subset.
pub fn plan_one(pool: &Partition, origin: usize, budget: usize) -> Result<AcquisitionPlan> {
    let k = pool.k();
    if origin >= k {
        return Err(Error::Argument(format!(
            "origin subset {} out of range 1..={k}",
            origin + 1
        )));
    }
    let mut counts = vec![0usize; k];
    counts[origin] = budget;
    let strategy = format!("one:{}", origin + 1);
    check_feasible(&counts, &pool.subset_sizes(), &strategy)?;
    Ok(AcquisitionPlan {
        counts,
        budget,
        strategy,
    })
}

/// Budget apportioned proportionally to the (clamped) importance weights by
/// largest remainder. Negative weights clamp to zero; an all-nonpositive
/// vector is an error the caller may resolve by falling back to `equal`.
pub fn plan_max(pool: &Partition, avg_phi: &[f64], budget: usize) -> Result<AcquisitionPlan> {
    let k = pool.k();
    if avg_phi.len() != k {
        return Err(Error::Argument(format!(
            "{} importance weights for {k} subsets",
            avg_phi.len()
        )));
    }
    let clamped: Vec<f64> = avg_phi.iter().map(|w| w.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::Degenerate(
            "no subset has positive average importance; consider the equal strategy".into(),
        ));
    }

    // largest-remainder apportionment, ties to the lowest index
    let quotas: Vec<f64> = clamped
        .iter()
        .map(|w| budget as f64 * w / total)
        .collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &subset in order.iter().take(budget - assigned) {
        counts[subset] += 1;
    }

    check_feasible(&counts, &pool.subset_sizes(), "max")?;
    Ok(AcquisitionPlan {
        counts,
        budget,
        strategy: "max".into(),
    })
}

/// Mean Shapley vector over the L points with the largest score, negated:
/// the inputs are squared-error Shapley values where negative means "reduces
/// error", so the negation turns them into importance weights.
pub fn average_top_l_shapley(
    per_point: &[Vec<f64>],
    scores: &[f64],
    top_l: usize,
) -> Result<Vec<f64>> {
    if top_l < 1 {
        return Err(Error::Argument("L must be at least 1".into()));
    }
    if per_point.len() != scores.len() {
        return Err(Error::Argument(format!(
            "{} Shapley vectors but {} scores",
            per_point.len(),
            scores.len()
        )));
    }
    if top_l > per_point.len() {
        return Err(Error::Argument(format!(
            "L = {top_l} exceeds the {} explained points",
            per_point.len()
        )));
    }
    let k = per_point[0].len();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let mut mean = vec![0.0f64; k];
    for &idx in order.iter().take(top_l) {
        if per_point[idx].len() != k {
            return Err(Error::Argument(
                "per-point Shapley vectors have mixed subset counts".into(),
            ));
        }
        for (m, v) in mean.iter_mut().zip(&per_point[idx]) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m = -*m / top_l as f64;
    }
    Ok(mean)
}

#[derive(Debug, Clone)]
pub struct EvaluationConfig {
    pub budget: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Engine for the max strategy's importance weights.
    pub engine: ShapleyEngine,
    pub rank_by: RankBy,
}

impl EvaluationConfig {
    pub fn new(budget: usize, repeats: usize, seed: u64) -> Self {
        EvaluationConfig {
            budget,
            repeats,
            seed,
            engine: ShapleyEngine::Exact,
            rank_by: RankBy::Prediction,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyEvaluation {
    pub strategy: String,
    /// Present when the strategy could not be evaluated; other strategies
    /// still run.
    pub error: Option<String>,
    pub plan: Option<AcquisitionPlan>,
    pub per_repeat_mse: Vec<f64>,
    /// Per-repeat MSE divided by the equal strategy's MSE of the same
    /// repeat.
    pub per_repeat_relative: Vec<f64>,
    pub mean_mse: f64,
    pub mean_relative: f64,
    /// Mean MSE per test-origin subset, across repeats.
    pub per_subset_mse: Vec<f64>,
}

/// Compare acquisition strategies. `test_origins` gives each test row's
/// 0-based origin subset (used by the `one` strategy and the per-subset
/// breakdown). The equal strategy is always evaluated: it normalizes the
/// relative errors, so its own relative MSE is 1 by construction.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_strategies(
    pool: &Arc<Dataset>,
    pool_partition: &Arc<Partition>,
    test: &Dataset,
    test_origins: &[usize],
    strategies: &[StrategySpec],
    model: &ModelSpec,
    cfg: &EvaluationConfig,
) -> Result<Vec<StrategyEvaluation>> {
    model.validate()?;
    let k = pool_partition.k();
    if pool_partition.n() != pool.n() {
        return Err(Error::Argument("pool partition does not cover the pool".into()));
    }
    if test.n() == 0 {
        return Err(Error::EmptyInput("no test rows".into()));
    }
    if test.j() != pool.j() {
        return Err(Error::Argument("test and pool feature counts differ".into()));
    }
    if test_origins.len() != test.n() || test_origins.iter().any(|&o| o >= k) {
        return Err(Error::Argument("bad test origin vector".into()));
    }
    if cfg.repeats < 1 {
        return Err(Error::Argument("repeats must be at least 1".into()));
    }

    let mut ordered: Vec<StrategySpec> = vec![StrategySpec::Equal];
    ordered.extend(strategies.iter().copied().filter(|s| *s != StrategySpec::Equal));

    // resolve plans (or record per-strategy failures)
    let mut planned: Vec<(StrategySpec, std::result::Result<PlanSet, String>)> = Vec::new();
    for spec in &ordered {
        let plan = match spec {
            StrategySpec::Equal => plan_equal(pool_partition, cfg.budget).map(PlanSet::Single),
            StrategySpec::Max { top_l } => max_importance_weights(
                pool,
                pool_partition,
                test,
                model,
                *top_l,
                cfg,
            )
            .and_then(|weights| plan_max(pool_partition, &weights, cfg.budget))
            .map(PlanSet::Single),
            StrategySpec::One { .. } => {
                // one plan per origin that actually appears in the test set
                let mut origins: Vec<usize> = test_origins.to_vec();
                origins.sort_unstable();
                origins.dedup();
                origins
                    .iter()
                    .map(|&o| plan_one(pool_partition, o, cfg.budget).map(|p| (o, p)))
                    .collect::<Result<Vec<_>>>()
                    .map(PlanSet::PerOrigin)
            }
        };
        planned.push((*spec, plan.map_err(|e| e.to_string())));
    }

    // evaluate repeats; each repeat draws from (seed, repeat index)
    let repeat_indices: Vec<usize> = (0..cfg.repeats).collect();
    let mut results: Vec<StrategyEvaluation> = Vec::new();
    let mut equal_mse: Vec<f64> = Vec::new();
    for (spec, plan) in &planned {
        match plan {
            Err(message) => results.push(StrategyEvaluation {
                strategy: spec.label(),
                error: Some(message.clone()),
                plan: None,
                per_repeat_mse: Vec::new(),
                per_repeat_relative: Vec::new(),
                mean_mse: f64::NAN,
                mean_relative: f64::NAN,
                per_subset_mse: vec![f64::NAN; k],
            }),
            Ok(plan_set) => {
                let per_repeat: Vec<(f64, Vec<f64>)> = par::map_collect(&repeat_indices, |&rep| {
                    evaluate_repeat(
                        pool,
                        pool_partition,
                        test,
                        test_origins,
                        model,
                        plan_set,
                        cfg.seed,
                        rep,
                    )
                });
                let per_repeat_mse: Vec<f64> = per_repeat.iter().map(|(m, _)| *m).collect();
                if *spec == StrategySpec::Equal {
                    equal_mse = per_repeat_mse.clone();
                }
                let per_repeat_relative: Vec<f64> = if equal_mse.len() == per_repeat_mse.len() {
                    per_repeat_mse.iter().zip(&equal_mse).map(|(m, e)| m / e).collect()
                } else {
                    vec![f64::NAN; per_repeat_mse.len()]
                };
                let mean_mse = per_repeat_mse.iter().sum::<f64>() / cfg.repeats as f64;
                let mean_relative =
                    per_repeat_relative.iter().sum::<f64>() / cfg.repeats as f64;
                let mut per_subset = vec![0.0f64; k];
                for (_, subset_mse) in &per_repeat {
                    for (acc, v) in per_subset.iter_mut().zip(subset_mse) {
                        *acc += v;
                    }
                }
                for acc in &mut per_subset {
                    *acc /= cfg.repeats as f64;
                }
                results.push(StrategyEvaluation {
                    strategy: spec.label(),
                    error: None,
                    plan: match (spec, plan_set) {
                        (_, PlanSet::Single(p)) => Some(p.clone()),
                        (StrategySpec::One { origin }, PlanSet::PerOrigin(plans)) => plans
                            .iter()
                            .find(|(o, _)| o == origin)
                            .map(|(_, p)| p.clone()),
                        _ => None,
                    },
                    per_repeat_mse,
                    per_repeat_relative,
                    mean_mse,
                    mean_relative,
                    per_subset_mse: per_subset,
                });
            }
        }
    }
    Ok(results)
}

enum PlanSet {
    Single(AcquisitionPlan),
    /// (origin, plan) pairs for the one strategy.
    PerOrigin(Vec<(usize, AcquisitionPlan)>),
}

/// Stratified draw without replacement, exactly per plan counts, seeded by
/// (seed, repeat, salt). Subsets are sampled in index order.
fn sample_plan(
    pool: &Dataset,
    partition: &Partition,
    plan: &AcquisitionPlan,
    seed: u64,
    repeat: usize,
    salt: u64,
) -> Dataset {
    let mut rng = stream_rng(
        seed,
        streams::ACQUISITION,
        (repeat as u64) << 16 | salt,
    );
    let mut chosen: Vec<usize> = Vec::with_capacity(plan.budget);
    for (subset, &count) in plan.counts.iter().enumerate() {
        let mut rows = partition.subset_rows(subset);
        // partial Fisher-Yates: the first `count` entries are the draw
        for i in 0..count {
            let pick = rng.random_range(i..rows.len());
            rows.swap(i, pick);
        }
        chosen.extend_from_slice(&rows[..count]);
    }
    chosen.sort_unstable();
    pool.select_rows(&chosen)
}

#[allow(clippy::too_many_arguments)]
fn evaluate_repeat(
    pool: &Dataset,
    partition: &Partition,
    test: &Dataset,
    test_origins: &[usize],
    model: &ModelSpec,
    plan_set: &PlanSet,
    seed: u64,
    repeat: usize,
) -> (f64, Vec<f64>) {
    let k = partition.k();
    let predictions: Vec<f64> = match plan_set {
        PlanSet::Single(plan) => {
            let data = sample_plan(pool, partition, plan, seed, repeat, 0);
            let fitted = train(model, &data);
            (0..test.n()).map(|t| fitted.predict_raw(test.row(t))).collect()
        }
        PlanSet::PerOrigin(plans) => {
            let mut by_origin: Vec<Option<TrainedModel>> = (0..k).map(|_| None).collect();
            for (origin, plan) in plans {
                let data = sample_plan(pool, partition, plan, seed, repeat, 1 + *origin as u64);
                by_origin[*origin] = Some(train(model, &data));
            }
            (0..test.n())
                .map(|t| {
                    by_origin[test_origins[t]]
                        .as_ref()
                        .expect("model fitted for every test origin")
                        .predict_raw(test.row(t))
                })
                .collect()
        }
    };
    let mut total = 0.0f64;
    let mut subset_sum = vec![0.0f64; k];
    let mut subset_count = vec![0usize; k];
    for (t, pred) in predictions.iter().enumerate() {
        let err = (test.response()[t] - pred).powi(2);
        total += err;
        subset_sum[test_origins[t]] += err;
        subset_count[test_origins[t]] += 1;
    }
    let per_subset: Vec<f64> = subset_sum
        .iter()
        .zip(&subset_count)
        .map(|(s, &c)| if c == 0 { f64::NAN } else { s / c as f64 })
        .collect();
    (total / test.n() as f64, per_subset)
}

/// Squared-error Shapley importance averaged over the L highest-ranked test
/// points, negated into acquisition weights.
fn max_importance_weights(
    pool: &Arc<Dataset>,
    partition: &Arc<Partition>,
    test: &Dataset,
    model: &ModelSpec,
    top_l: usize,
    cfg: &EvaluationConfig,
) -> Result<Vec<f64>> {
    let cache = CoalitionCache::new();
    let grand = train(model, pool);
    let scores: Vec<f64> = match cfg.rank_by {
        RankBy::Prediction => (0..test.n()).map(|t| grand.predict_raw(test.row(t))).collect(),
        RankBy::Response => test.response().to_vec(),
    };
    // explanations are only needed for the top-L points
    let mut order: Vec<usize> = (0..test.n()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    if top_l > order.len() {
        return Err(Error::Argument(format!(
            "L = {top_l} exceeds the {} test points",
            order.len()
        )));
    }
    let selected = &order[..top_l];

    let phis: Vec<Vec<f64>> = selected
        .iter()
        .map(|&t| {
            let game = Game::squared_error(
                Arc::clone(pool),
                Arc::clone(partition),
                model.clone(),
                BaselinePolicy::Zero,
                test.row(t).to_vec(),
                test.response()[t],
            )?;
            match cfg.engine {
                ShapleyEngine::Exact => {
                    if partition.k() > MAX_TABLE_SUBSETS {
                        return Err(Error::Capacity(format!(
                            "exact max-strategy weights need K <= {MAX_TABLE_SUBSETS}"
                        )));
                    }
                    let table = build_value_table(&game, &cache)?;
                    Ok(exact_shapley(&table, ExactMethod::Weighted)?.phi)
                }
                ShapleyEngine::Mc { iterations } => Ok(estimate_mc(
                    &game,
                    &cache,
                    &McConfig::new(iterations, cfg.seed, SamplingMode::PerSubset),
                )?
                .phi),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let sub_scores: Vec<f64> = selected.iter().map(|&t| scores[t]).collect();
    average_top_l_shapley(&phis, &sub_scores, top_l)
}
