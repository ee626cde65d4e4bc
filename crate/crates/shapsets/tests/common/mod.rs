//! Shared fixtures and independent brute-force oracles.
//!
//! The oracles here deliberately avoid the library's exact engines: they
//! enumerate permutations recursively and evaluate the value closure on raw
//! prefixes, so agreement with the library is evidence, not tautology.

// each test binary uses a different slice of this module
#![allow(dead_code)]

use std::sync::Arc;

use shapsets::dataset::partition_blocks;
use shapsets::models::TrainedModel;
use shapsets::{Coalition, Dataset, Game, Partition};

/// The three-point reference dataset: x = 1/8, 6/8, 7/8 with y = x, one
/// point per subset, evaluated at x_new = 2/8.
pub fn toy_dataset() -> (Arc<Dataset>, Arc<Partition>) {
    let ds = Dataset::from_rows(
        &["x"],
        &[
            (vec![1.0 / 8.0], 1.0 / 8.0),
            (vec![6.0 / 8.0], 6.0 / 8.0),
            (vec![7.0 / 8.0], 7.0 / 8.0),
        ],
    )
    .unwrap();
    let p = partition_blocks(&ds, 3).unwrap();
    (Arc::new(ds), Arc::new(p))
}

pub const TOY_POINT: f64 = 2.0 / 8.0;
pub const TOY_ONE_NN_PHI: [f64; 3] = [-19.0 / 48.0, 11.0 / 48.0, 14.0 / 48.0];
pub const TOY_ALL_NN_PHI: [f64; 3] = [-43.0 / 288.0, 92.0 / 288.0, 119.0 / 288.0];

/// Recursive enumeration of all permutations of 0..k.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: &mut Vec<usize>, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining.is_empty() {
            out.push(current.clone());
            return;
        }
        for i in 0..remaining.len() {
            let item = remaining.remove(i);
            current.push(item);
            rec(remaining, current, out);
            current.pop();
            remaining.insert(i, item);
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..k).collect(), &mut Vec::new(), &mut out);
    out
}

/// Brute-force Shapley values: average marginal contribution of each player
/// over every permutation, evaluating the value closure directly.
pub fn brute_shapley<F: Fn(Coalition) -> f64>(k: usize, value: F) -> Vec<f64> {
    let orders = permutations(k);
    let mut sums = vec![0.0f64; k];
    for order in &orders {
        let mut prefix = Coalition::EMPTY;
        for &player in order {
            let with = prefix.with(player);
            sums[player] += value(with) - value(prefix);
            prefix = with;
        }
    }
    sums.iter().map(|s| s / orders.len() as f64).collect()
}

/// Brute-force feature importance: the full J!-permutation,
/// all-background-rows expectation of the sampling estimator's contribution.
pub fn brute_feature_shapley(model: &TrainedModel, background: &Dataset, x: &[f64]) -> Vec<f64> {
    let j = background.j();
    let orders = permutations(j);
    let mut sums = vec![0.0f64; j];
    let mut count = 0usize;
    for order in &orders {
        for row in 0..background.n() {
            let mut composite = background.row(row).to_vec();
            let mut previous = model.predict(&composite).unwrap();
            for &feature in order {
                composite[feature] = x[feature];
                let next = model.predict(&composite).unwrap();
                sums[feature] += next - previous;
                previous = next;
            }
            count += 1;
        }
    }
    sums.iter().map(|s| s / count as f64).collect()
}

/// Brute-force combined feature×subset importance: the exact expectation of
/// the rectangle marginal over all subset permutations, feature permutations
/// and background rows.
pub fn brute_combined(
    game: &Game,
    background: &Dataset,
    x: &[f64],
    cache: &shapsets::CoalitionCache,
) -> Vec<Vec<f64>> {
    let k = game.k();
    let j = background.j();
    let c = game.baseline_constant();
    let subset_orders = permutations(k);
    let feature_orders = permutations(j);
    let mut sums = vec![vec![0.0f64; j]; k];
    let mut count = 0usize;
    for subset_order in &subset_orders {
        // models along the subset prefixes; index q = prefix size
        let mut models: Vec<Option<Arc<TrainedModel>>> = vec![None];
        let mut prefix = Coalition::EMPTY;
        for &s in subset_order {
            prefix = prefix.with(s);
            models.push(Some(game.model_for(prefix, cache).unwrap()));
        }
        for feature_order in &feature_orders {
            for row in 0..background.n() {
                let mut grid = vec![vec![0.0f64; k + 1]; j + 1];
                let mut composite = background.row(row).to_vec();
                for p in 0..=j {
                    if p > 0 {
                        let f = feature_order[p - 1];
                        composite[f] = x[f];
                    }
                    for (q, model) in models.iter().enumerate() {
                        grid[p][q] = match model {
                            None => c,
                            Some(m) => m.predict(&composite).unwrap(),
                        };
                    }
                }
                for (q, &subset) in subset_order.iter().enumerate() {
                    for (p, &feature) in feature_order.iter().enumerate() {
                        sums[subset][feature] += grid[p + 1][q + 1] - grid[p][q + 1]
                            - grid[p + 1][q]
                            + grid[p][q];
                    }
                }
                count += 1;
            }
        }
    }
    sums.iter()
        .map(|row| row.iter().map(|s| s / count as f64).collect())
        .collect()
}

pub fn assert_vec_close(actual: &[f64], expected: &[f64], tol: f64, what: &str) {
    assert_eq!(actual.len(), expected.len(), "{what}: length");
    for (i, (a, e)) in actual.iter().zip(expected).enumerate() {
        assert!(
            (a - e).abs() <= tol,
            "{what}[{i}]: {a} vs {e} (tol {tol})"
        );
    }
}
