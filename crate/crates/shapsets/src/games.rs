//! The coalition games the Shapley engine plays.
//!
//! A [`Game`] binds training data, a partition, a model spec and a baseline
//! policy to one of three value functions:
//!
//! * prediction — v(S) = f_S(x) − f_∅(x), how a coalition moves the
//!   prediction at a point;
//! * squared error — v(S) = (y − f_S(x))² − (y − f_∅(x))², how it moves the
//!   error (negative is good);
//! * mse — the squared-error game averaged over a test set.
//!
//! All three are shifted so v(∅) = 0 holds for every baseline, and reduce to
//! the unshifted forms when the baseline is zero. The quantity the shift
//! removes is reported separately as the non-distributed gain φ₀, so
//! φ₀ + Σφ_k recovers the raw grand-coalition payout.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coalition::{Coalition, MAX_SUBSETS};
use crate::dataset::{coalition_data, Dataset, Partition};
use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::models::{train, CoalitionCache, ModelSpec, TrainedModel};

/// What a model "trained on no data" predicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselinePolicy {
    /// f_∅ ≡ 0, the default.
    Zero,
    /// f_∅ ≡ mean of the training responses.
    TrainingMean,
    /// f_∅ ≡ a user constant.
    Constant { c: f64 },
}

impl BaselinePolicy {
    pub fn resolve(&self, train: &Dataset) -> f64 {
        match self {
            BaselinePolicy::Zero => 0.0,
            BaselinePolicy::TrainingMean => train.response_mean(),
            BaselinePolicy::Constant { c } => *c,
        }
    }
}

#[derive(Debug, Clone)]
pub enum GameKind {
    Prediction { x: Vec<f64> },
    SquaredError { x: Vec<f64>, y: f64 },
    Mse { test: Arc<Dataset> },
}

impl GameKind {
    pub fn tag(&self) -> &'static str {
        match self {
            GameKind::Prediction { .. } => "prediction",
            GameKind::SquaredError { .. } => "squared_error",
            GameKind::Mse { .. } => "mse",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Game {
    train: Arc<Dataset>,
    partition: Arc<Partition>,
    model: ModelSpec,
    kind: GameKind,
    baseline_policy: BaselinePolicy,
    baseline: f64,
    fingerprint: u64,
}

impl Game {
    pub fn new(
        train: Arc<Dataset>,
        partition: Arc<Partition>,
        model: ModelSpec,
        baseline: BaselinePolicy,
        kind: GameKind,
    ) -> Result<Self> {
        model.validate()?;
        if partition.n() != train.n() {
            return Err(Error::Argument(format!(
                "partition covers {} rows, dataset has {}",
                partition.n(),
                train.n()
            )));
        }
        if partition.k() > MAX_SUBSETS {
            return Err(Error::Capacity(format!(
                "{} subsets exceed the coalition bitmask bound of {}",
                partition.k(),
                MAX_SUBSETS
            )));
        }
        match &kind {
            GameKind::Prediction { x } | GameKind::SquaredError { x, .. } => {
                if x.len() != train.j() {
                    return Err(Error::Argument(format!(
                        "point has {} features, training data has {}",
                        x.len(),
                        train.j()
                    )));
                }
            }
            GameKind::Mse { test } => {
                if test.j() != train.j() {
                    return Err(Error::Argument(format!(
                        "test data has {} features, training data has {}",
                        test.j(),
                        train.j()
                    )));
                }
                if test.n() == 0 {
                    return Err(Error::EmptyInput("mse game needs test rows".into()));
                }
            }
        }
        let baseline_value = baseline.resolve(&train);
        let fingerprint = Fingerprint::new()
            .write_u64(train.fingerprint())
            .write_u64(partition.fingerprint())
            .finish();
        Ok(Game {
            train,
            partition,
            model,
            kind,
            baseline_policy: baseline,
            baseline: baseline_value,
            fingerprint,
        })
    }

    pub fn prediction(
        train: Arc<Dataset>,
        partition: Arc<Partition>,
        model: ModelSpec,
        baseline: BaselinePolicy,
        x: Vec<f64>,
    ) -> Result<Self> {
        Game::new(train, partition, model, baseline, GameKind::Prediction { x })
    }

    pub fn squared_error(
        train: Arc<Dataset>,
        partition: Arc<Partition>,
        model: ModelSpec,
        baseline: BaselinePolicy,
        x: Vec<f64>,
        y: f64,
    ) -> Result<Self> {
        Game::new(
            train,
            partition,
            model,
            baseline,
            GameKind::SquaredError { x, y },
        )
    }

    pub fn mse(
        train: Arc<Dataset>,
        partition: Arc<Partition>,
        model: ModelSpec,
        baseline: BaselinePolicy,
        test: Arc<Dataset>,
    ) -> Result<Self> {
        Game::new(train, partition, model, baseline, GameKind::Mse { test })
    }

    pub fn k(&self) -> usize {
        self.partition.k()
    }

    pub fn kind(&self) -> &GameKind {
        &self.kind
    }

    pub fn model_spec(&self) -> &ModelSpec {
        &self.model
    }

    pub fn baseline_policy(&self) -> BaselinePolicy {
        self.baseline_policy
    }

    /// The resolved baseline prediction f_∅(x).
    pub fn baseline_constant(&self) -> f64 {
        self.baseline
    }

    pub fn train_data(&self) -> &Arc<Dataset> {
        &self.train
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    /// Cache namespace for this (training data, partition) pair.
    pub fn data_fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Fitted model for a coalition, via the cache. The empty coalition is
    /// stored as the constant-zero model per the empty-training contract;
    /// game arithmetic uses the baseline constant for f_∅ instead.
    pub fn model_for(&self, coalition: Coalition, cache: &CoalitionCache) -> Result<Arc<TrainedModel>> {
        self.check_coalition(coalition)?;
        if coalition.is_empty() {
            return Ok(cache.get_or_train(&self.model, self.fingerprint, coalition, || {
                TrainedModel::Constant {
                    value: 0.0,
                    trained_on: 0,
                }
            }));
        }
        let data = coalition_data(&self.train, &self.partition, coalition)?;
        Ok(cache.get_or_train(&self.model, self.fingerprint, coalition, || {
            train(&self.model, &data)
        }))
    }

    /// f_S(x): the coalition model's prediction, or the baseline constant
    /// for the empty coalition.
    pub fn predict_coalition(
        &self,
        coalition: Coalition,
        x: &[f64],
        cache: &CoalitionCache,
    ) -> Result<f64> {
        if coalition.is_empty() {
            self.check_coalition(coalition)?;
            // register the empty coalition so curve collection sees it
            let _ = self.model_for(coalition, cache)?;
            return Ok(self.baseline);
        }
        Ok(self.model_for(coalition, cache)?.predict_raw(x))
    }

    fn check_coalition(&self, coalition: Coalition) -> Result<()> {
        if !coalition.fits(self.k()) {
            return Err(Error::Argument(format!(
                "coalition {} has members outside 1..={}",
                coalition,
                self.k()
            )));
        }
        Ok(())
    }

    /// The shifted game value; v(∅) = 0 exactly for every kind and baseline.
    pub fn value(&self, coalition: Coalition, cache: &CoalitionCache) -> Result<f64> {
        self.check_coalition(coalition)?;
        if coalition.is_empty() {
            let _ = self.model_for(coalition, cache)?;
            return Ok(0.0);
        }
        match &self.kind {
            GameKind::Prediction { x } => {
                Ok(self.predict_coalition(coalition, x, cache)? - self.baseline)
            }
            GameKind::SquaredError { x, y } => {
                let p = self.predict_coalition(coalition, x, cache)?;
                Ok((y - p).powi(2) - (y - self.baseline).powi(2))
            }
            GameKind::Mse { test } => {
                let model = self.model_for(coalition, cache)?;
                let mut sum = 0.0;
                for t in 0..test.n() {
                    let p = model.predict_raw(test.row(t));
                    let y = test.response()[t];
                    sum += (y - p).powi(2) - (y - self.baseline).powi(2);
                }
                Ok(sum / test.n() as f64)
            }
        }
    }

    /// Value of the grand coalition.
    pub fn grand_value(&self, cache: &CoalitionCache) -> Result<f64> {
        self.value(Coalition::grand(self.k()), cache)
    }

    /// The non-distributed gain φ₀ = raw v(∅) of the unshifted game:
    /// the baseline prediction for the prediction game, and the baseline's
    /// error relative to y² for the error games. Zero under the zero
    /// baseline.
    pub fn phi0(&self) -> f64 {
        match &self.kind {
            GameKind::Prediction { .. } => self.baseline,
            GameKind::SquaredError { y, .. } => (y - self.baseline).powi(2) - y * y,
            GameKind::Mse { test } => {
                let sum: f64 = test
                    .response()
                    .iter()
                    .map(|y| (y - self.baseline).powi(2) - y * y)
                    .sum();
                sum / test.n() as f64
            }
        }
    }
}
