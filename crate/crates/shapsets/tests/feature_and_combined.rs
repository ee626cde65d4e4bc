//! Feature and combined feature×subset estimators against brute-force
//! enumeration of their defining expectations.

mod common;

use std::sync::Arc;

use common::{assert_vec_close, brute_combined, brute_feature_shapley};
use shapsets::dataset::partition_blocks;
use shapsets::shapley::feature::{combined_shapley_mc, feature_shapley_mc};
use shapsets::{BaselinePolicy, CoalitionCache, Dataset, Game, ModelSpec};

fn fixture(j: usize, n: usize) -> Dataset {
    let rows: Vec<(Vec<f64>, f64)> = (0..n)
        .map(|i| {
            let x: Vec<f64> = (0..j)
                .map(|f| ((i * (f + 3)) as f64 * 0.7).sin())
                .collect();
            let y = x
                .iter()
                .enumerate()
                .map(|(f, v)| (f as f64 + 1.0) * v)
                .sum::<f64>()
                + 0.5;
            (x, y)
        })
        .collect();
    let names: Vec<String> = (1..=j).map(|f| format!("x{f}")).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Dataset::from_rows(&name_refs, &rows).unwrap()
}

#[test]
fn feature_estimate_converges_to_the_enumerated_expectation() {
    let ds = fixture(3, 8);
    let model = shapsets::models::train(&ModelSpec::Knn { k: 3 }, &ds);
    let x = vec![0.9, -0.3, 0.5];
    let expected = brute_feature_shapley(&model, &ds, &x);
    let fs = feature_shapley_mc(&model, &ds, &x, 4000, 2).unwrap();
    for ((phi, se), e) in fs.phi.iter().zip(&fs.se).zip(&expected) {
        assert!(
            (phi - e).abs() <= 3.0 * se.max(1e-9),
            "phi {phi} vs {e} (se {se})"
        );
    }
}

#[test]
fn feature_values_telescope_to_full_minus_background_mean() {
    let ds = fixture(4, 10);
    let model = shapsets::models::train(&ModelSpec::Linear, &ds);
    let x = vec![0.2, 0.4, -0.6, 0.8];
    let expected = brute_feature_shapley(&model, &ds, &x);
    let f_x = model.predict(&x).unwrap();
    let mean_f_z: f64 = (0..ds.n())
        .map(|i| model.predict(ds.row(i)).unwrap())
        .sum::<f64>()
        / ds.n() as f64;
    let total: f64 = expected.iter().sum();
    assert!((total - (f_x - mean_f_z)).abs() <= 1e-10);
}

#[test]
fn combined_estimate_matches_the_brute_forced_double_permutation() {
    let ds = Arc::new(fixture(2, 6));
    let p = Arc::new(partition_blocks(&ds, 2).unwrap());
    let x = vec![0.7, -0.1];
    let game = Game::prediction(
        Arc::clone(&ds),
        Arc::clone(&p),
        ModelSpec::Linear,
        BaselinePolicy::Zero,
        x.clone(),
    )
    .unwrap();
    let cache = CoalitionCache::new();
    let expected = brute_combined(&game, &ds, &x, &cache);
    let m = 5000;
    let est = combined_shapley_mc(&game, &ds, m, 4, &cache).unwrap();
    for (k, expected_row) in expected.iter().enumerate() {
        for (j, e) in expected_row.iter().enumerate() {
            let tol = 3.0 * est.se[k][j].max(1e-9);
            assert!(
                (est.phi[k][j] - e).abs() <= tol,
                "({k},{j}): {} vs {e} (tol {tol})",
                est.phi[k][j],
            );
        }
    }
    // product-game efficiency: totals match within sampling error
    let est_total: f64 = est.phi.iter().flatten().sum();
    let expect_total: f64 = expected.iter().flatten().sum();
    let se_total: f64 = est
        .se
        .iter()
        .flatten()
        .map(|s| s * s)
        .sum::<f64>()
        .sqrt();
    assert!((est_total - expect_total).abs() <= 3.0 * se_total.max(1e-9));
}

#[test]
fn combined_row_equals_feature_estimate_when_k_is_one() {
    let ds = Arc::new(fixture(3, 9));
    let p = Arc::new(partition_blocks(&ds, 1).unwrap());
    let x = vec![0.25, 0.5, -0.75];
    let game = Game::prediction(
        Arc::clone(&ds),
        Arc::clone(&p),
        ModelSpec::Knn { k: 2 },
        BaselinePolicy::Zero,
        x.clone(),
    )
    .unwrap();
    let cache = CoalitionCache::new();
    let combined = combined_shapley_mc(&game, &ds, 300, 17, &cache).unwrap();
    let full = game
        .model_for(shapsets::Coalition::grand(1), &cache)
        .unwrap();
    let features = feature_shapley_mc(&full, &ds, &x, 300, 17).unwrap();
    assert_vec_close(&combined.phi[0], &features.phi, 1e-12, "K=1 reduction");
    assert_vec_close(&combined.se[0], &features.se, 1e-12, "K=1 standard errors");
}
