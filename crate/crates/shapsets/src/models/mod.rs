//! Trainable-model abstraction and the built-in regressors.
//!
//! Every model retrains deterministically: training the same spec on the
//! same data twice yields bit-identical predictions. Nearest-neighbour,
//! mean and linear models are additionally invariant to the order of the
//! training rows (internally they iterate rows sorted by row id, and
//! neighbour distance ties break on the smallest row id — duplicated
//! subsets make exact ties common, so the rule matters).

mod cache;
mod forest;

pub use cache::{CacheStats, CoalitionCache};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Which regressor to fit. Serialized as e.g. `{"kind":"knn","k":10}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Predicts 0 everywhere regardless of the data.
    Zero,
    /// Single nearest neighbour by Euclidean distance over the features.
    OneNn,
    /// Mean response of the k nearest neighbours; falls back to all
    /// available rows when the coalition is smaller than k.
    Knn { k: usize },
    /// Mean of all training responses.
    AllMean,
    /// Least squares with intercept; ridge fallback on singularity.
    Linear,
    /// Bagged CART regression trees, best-first growth capped at
    /// `max_leaf_nodes` terminal nodes.
    Forest {
        n_trees: usize,
        max_leaf_nodes: usize,
        seed: u64,
    },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Knn { k } if *k < 1 => {
                Err(Error::Argument("knn requires k >= 1".into()))
            }
            ModelSpec::Forest {
                n_trees,
                max_leaf_nodes,
                ..
            } => {
                if *n_trees < 1 {
                    Err(Error::Argument("forest requires n_trees >= 1".into()))
                } else if *max_leaf_nodes < 2 {
                    Err(Error::Argument("forest requires max_leaf_nodes >= 2".into()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model spec serializes")
    }
}

/// An immutable fitted model.
#[derive(Debug, Clone)]
pub enum TrainedModel {
    Constant {
        value: f64,
        trained_on: usize,
    },
    Nearest {
        k: usize,
        j: usize,
        /// Row-major features, rows sorted by original row id.
        features: Vec<f64>,
        response: Vec<f64>,
    },
    Linear {
        intercept: f64,
        coefficients: Vec<f64>,
        trained_on: usize,
    },
    Forest {
        trees: Vec<forest::Tree>,
        j: usize,
        trained_on: usize,
    },
}

impl TrainedModel {
    /// Number of training rows the model was fitted on.
    pub fn trained_on(&self) -> usize {
        match self {
            TrainedModel::Constant { trained_on, .. } => *trained_on,
            TrainedModel::Nearest { response, .. } => response.len(),
            TrainedModel::Linear { trained_on, .. } => *trained_on,
            TrainedModel::Forest { trained_on, .. } => *trained_on,
        }
    }

    /// Feature count the model expects, when it cares.
    fn expected_j(&self) -> Option<usize> {
        match self {
            TrainedModel::Constant { .. } => None,
            TrainedModel::Nearest { j, .. } => Some(*j),
            TrainedModel::Linear { coefficients, .. } => Some(coefficients.len()),
            TrainedModel::Forest { j, .. } => Some(*j),
        }
    }

    /// Checked prediction.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if let Some(j) = self.expected_j() {
            if x.len() != j {
                return Err(Error::Argument(format!(
                    "point has {} features, model expects {}",
                    x.len(),
                    j
                )));
            }
        }
        Ok(self.predict_raw(x))
    }

    /// Unchecked prediction for validated hot paths.
    pub(crate) fn predict_raw(&self, x: &[f64]) -> f64 {
        match self {
            TrainedModel::Constant { value, .. } => *value,
            TrainedModel::Nearest {
                k,
                j,
                features,
                response,
            } => predict_nearest(*k, *j, features, response, x),
            TrainedModel::Linear {
                intercept,
                coefficients,
                ..
            } => intercept + coefficients.iter().zip(x).map(|(c, v)| c * v).sum::<f64>(),
            TrainedModel::Forest { trees, .. } => {
                let sum: f64 = trees.iter().map(|t| t.predict(x)).sum();
                sum / trees.len() as f64
            }
        }
    }
}

/// Fit a model. Never fails: an empty dataset yields the constant-zero
/// model (the prediction of a model trained on no data), and degenerate
/// linear systems fall back to a tiny ridge.
pub fn train(spec: &ModelSpec, ds: &Dataset) -> TrainedModel {
    let n = ds.n();
    if n == 0 {
        return TrainedModel::Constant {
            value: 0.0,
            trained_on: 0,
        };
    }
    match spec {
        ModelSpec::Zero => TrainedModel::Constant {
            value: 0.0,
            trained_on: n,
        },
        ModelSpec::AllMean => {
            let order = id_sorted_rows(ds);
            let sum: f64 = order.iter().map(|&i| ds.response()[i]).sum();
            TrainedModel::Constant {
                value: sum / n as f64,
                trained_on: n,
            }
        }
        ModelSpec::OneNn => fit_nearest(ds, 1),
        ModelSpec::Knn { k } => fit_nearest(ds, *k),
        ModelSpec::Linear => fit_linear(ds),
        ModelSpec::Forest {
            n_trees,
            max_leaf_nodes,
            seed,
        } => TrainedModel::Forest {
            trees: forest::train_forest(ds, *n_trees, *max_leaf_nodes, *seed),
            j: ds.j(),
            trained_on: n,
        },
    }
}

fn id_sorted_rows(ds: &Dataset) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ds.n()).collect();
    order.sort_by_key(|&i| ds.row_ids()[i]);
    order
}

fn fit_nearest(ds: &Dataset, k: usize) -> TrainedModel {
    let order = id_sorted_rows(ds);
    let j = ds.j();
    let mut features = Vec::with_capacity(ds.n() * j);
    let mut response = Vec::with_capacity(ds.n());
    for &i in &order {
        features.extend_from_slice(ds.row(i));
        response.push(ds.response()[i]);
    }
    TrainedModel::Nearest {
        k,
        j,
        features,
        response,
    }
}

fn predict_nearest(k: usize, j: usize, features: &[f64], response: &[f64], x: &[f64]) -> f64 {
    let n = response.len();
    let k = k.min(n);
    // (squared distance, id-order index); ties resolve to the smallest row id
    let mut scored: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let row = &features[i * j..(i + 1) * j];
            let d2: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, i)
        })
        .collect();
    scored.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let sum: f64 = scored[..k].iter().map(|&(_, i)| response[i]).sum();
    sum / k as f64
}

fn fit_linear(ds: &Dataset) -> TrainedModel {
    let order = id_sorted_rows(ds);
    let j = ds.j();
    let p = j + 1; // intercept first
    let mut gram = vec![0.0f64; p * p];
    let mut moment = vec![0.0f64; p];
    let mut aug = vec![0.0f64; p];
    for &i in &order {
        aug[0] = 1.0;
        aug[1..].copy_from_slice(ds.row(i));
        let y = ds.response()[i];
        for a in 0..p {
            moment[a] += aug[a] * y;
            for b in 0..p {
                gram[a * p + b] += aug[a] * aug[b];
            }
        }
    }
    let solution = cholesky_solve(&gram, &moment, p).unwrap_or_else(|| {
        let trace: f64 = (0..p).map(|a| gram[a * p + a]).sum();
        let lambda = 1e-10 * trace.max(1.0);
        let mut ridged = gram.clone();
        for a in 0..p {
            ridged[a * p + a] += lambda;
        }
        cholesky_solve(&ridged, &moment, p).expect("ridged normal equations are positive definite")
    });
    TrainedModel::Linear {
        intercept: solution[0],
        coefficients: solution[1..].to_vec(),
        trained_on: ds.n(),
    }
}

/// Solve `g x = b` for symmetric positive-definite `g`; `None` when a pivot
/// degenerates.
fn cholesky_solve(g: &[f64], b: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0f64; p * p];
    for i in 0..p {
        for k in 0..=i {
            let mut sum = g[i * p + k];
            for m in 0..k {
                sum -= l[i * p + m] * l[k * p + m];
            }
            if i == k {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i * p + k] = sum.sqrt();
            } else {
                l[i * p + k] = sum / l[k * p + k];
            }
        }
    }
    // forward then back substitution
    let mut y = vec![0.0f64; p];
    for i in 0..p {
        let mut sum = b[i];
        for m in 0..i {
            sum -= l[i * p + m] * y[m];
        }
        y[i] = sum / l[i * p + i];
    }
    let mut x = vec![0.0f64; p];
    for i in (0..p).rev() {
        let mut sum = y[i];
        for m in i + 1..p {
            sum -= l[m * p + i] * x[m];
        }
        x[i] = sum / l[i * p + i];
    }
    Some(x)
}
