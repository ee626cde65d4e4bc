//! Sampling estimators for feature importance and for the combined
//! feature×subset game.
//!
//! Feature importance holds the model fixed and marginalizes absent features
//! over a background dataset (features treated as mutually independent):
//! each sample draws a feature permutation and a background row, builds the
//! chain of composite points, and credits every feature the prediction
//! difference its arrival causes.
//!
//! The combined estimator additionally draws a subset permutation and
//! retrains along its prefixes (through the coalition cache). The marginal
//! it averages for (subset k, feature j) is the rectangle difference
//!
//! ```text
//! [f⁺(τ⁺) − f⁺(τ⁻)] − [f⁻(τ⁺) − f⁻(τ⁻)]
//! ```
//!
//! with f⁺/f⁻ the models with and without k, τ⁺/τ⁻ the composites with and
//! without j. Summed over all (k, j) this telescopes to f_N(x) − f_N(z) per
//! sample, and for K = 1 the row collapses to the plain feature estimator
//! sample for sample.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::coalition::Coalition;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::games::{Game, GameKind};
use crate::models::{CoalitionCache, TrainedModel};
use crate::par;
use crate::rng::{draw_permutation, stream_rng, streams};

#[derive(Debug, Clone, Serialize)]
pub struct FeatureShapley {
    pub phi: Vec<f64>,
    pub se: Vec<f64>,
    #[serde(rename = "M")]
    pub iterations: usize,
    pub seed: u64,
}

/// Per-feature Shapley values of a fixed model at `x`, absent features
/// resampled from `background`.
pub fn feature_shapley_mc(
    model: &TrainedModel,
    background: &Dataset,
    x: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<FeatureShapley> {
    if background.n() == 0 {
        return Err(Error::EmptyInput("background dataset is empty".into()));
    }
    let j = background.j();
    if x.len() != j {
        return Err(Error::Argument(format!(
            "point has {} features, background has {}",
            x.len(),
            j
        )));
    }
    if iterations < 1 {
        return Err(Error::Argument("iterations must be at least 1".into()));
    }
    model.predict(x)?; // dimension check against the model

    let mut rng = stream_rng(seed, streams::FEATURE_MC, 0);
    let draws: Vec<(Vec<usize>, usize)> = (0..iterations)
        .map(|_| {
            let order = draw_permutation(&mut rng, j);
            let z_row = rng.random_range(0..background.n());
            (order, z_row)
        })
        .collect();

    let per_sample: Vec<Vec<f64>> = par::map_collect(&draws, |(order, z_row)| {
        let mut composite = background.row(*z_row).to_vec();
        let mut contributions = vec![0.0f64; j];
        let mut previous = model.predict_raw(&composite);
        for &feature in order {
            composite[feature] = x[feature];
            let next = model.predict_raw(&composite);
            contributions[feature] = next - previous;
            previous = next;
        }
        contributions
    });

    let (phi, se) = aggregate(&per_sample, j, iterations);
    Ok(FeatureShapley {
        phi,
        se,
        iterations,
        seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CombinedShapley {
    /// `phi[k][j]`: subset k × feature j.
    pub phi: Vec<Vec<f64>>,
    pub se: Vec<Vec<f64>>,
    #[serde(rename = "M")]
    pub iterations: usize,
    pub seed: u64,
}

struct CombinedDraw {
    subset_order: Vec<usize>,
    feature_order: Vec<usize>,
    z_row: usize,
}

/// Combined feature×subset importance of the prediction game at the game's
/// point. The most expensive estimator here: retraining happens inside the
/// feature loop, bounded by the coalition cache.
pub fn combined_shapley_mc(
    game: &Game,
    background: &Dataset,
    iterations: usize,
    seed: u64,
    cache: &CoalitionCache,
) -> Result<CombinedShapley> {
    let GameKind::Prediction { x } = game.kind() else {
        return Err(Error::Argument(
            "combined importance plays the prediction game".into(),
        ));
    };
    if background.n() == 0 {
        return Err(Error::EmptyInput("background dataset is empty".into()));
    }
    let j = background.j();
    if j != game.train_data().j() {
        return Err(Error::Argument(format!(
            "background has {} features, training data has {}",
            j,
            game.train_data().j()
        )));
    }
    if iterations < 1 {
        return Err(Error::Argument("iterations must be at least 1".into()));
    }
    let k = game.k();

    // Same stream tag and draw order as the feature estimator; a length-1
    // subset shuffle consumes nothing, so K = 1 runs consume identical draws.
    let mut rng = stream_rng(seed, streams::FEATURE_MC, 0);
    let draws: Vec<CombinedDraw> = (0..iterations)
        .map(|_| CombinedDraw {
            subset_order: draw_permutation(&mut rng, k),
            feature_order: draw_permutation(&mut rng, j),
            z_row: rng.random_range(0..background.n()),
        })
        .collect();

    let baseline = game.baseline_constant();
    let per_sample: Vec<Vec<f64>> = par::try_map_collect(&draws, |draw| {
        let mut models: Vec<Option<Arc<TrainedModel>>> = Vec::with_capacity(k + 1);
        models.push(None); // empty prefix plays the baseline constant
        let mut prefix = Coalition::EMPTY;
        for &s in &draw.subset_order {
            prefix = prefix.with(s);
            models.push(Some(game.model_for(prefix, cache)?));
        }

        // prediction grid over feature-prefix (rows) x subset-prefix (cols)
        let mut grid = vec![vec![0.0f64; k + 1]; j + 1];
        let mut composite = background.row(draw.z_row).to_vec();
        for (p, row) in grid.iter_mut().enumerate() {
            if p > 0 {
                let feature = draw.feature_order[p - 1];
                composite[feature] = x[feature];
            }
            for (q, model) in models.iter().enumerate() {
                row[q] = match model {
                    None => baseline,
                    Some(m) => m.predict_raw(&composite),
                };
            }
        }

        let mut out = vec![0.0f64; k * j];
        for (q, &subset) in draw.subset_order.iter().enumerate() {
            for (p, &feature) in draw.feature_order.iter().enumerate() {
                out[subset * j + feature] = grid[p + 1][q + 1] - grid[p][q + 1]
                    - grid[p + 1][q]
                    + grid[p][q];
            }
        }
        Ok(out)
    })?;

    let (flat_phi, flat_se) = aggregate(&per_sample, k * j, iterations);
    let phi = flat_phi.chunks(j).map(<[f64]>::to_vec).collect();
    let se = flat_se.chunks(j).map(<[f64]>::to_vec).collect();
    Ok(CombinedShapley {
        phi,
        se,
        iterations,
        seed,
    })
}

fn aggregate(per_sample: &[Vec<f64>], width: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut phi = vec![0.0f64; width];
    for sample in per_sample {
        for (acc, v) in phi.iter_mut().zip(sample) {
            *acc += v;
        }
    }
    for acc in &mut phi {
        *acc /= m as f64;
    }
    let mut se = vec![0.0f64; width];
    if m > 1 {
        for (idx, entry) in se.iter_mut().enumerate() {
            let mean = phi[idx];
            let var: f64 = per_sample
                .iter()
                .map(|s| (s[idx] - mean) * (s[idx] - mean))
                .sum::<f64>()
                / (m - 1) as f64;
            *entry = (var / m as f64).sqrt();
        }
    }
    (phi, se)
}
