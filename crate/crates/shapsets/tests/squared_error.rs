//! Squared-error explanations: sign conventions on small exact fixtures,
//! error-source detection, and the mean-of-individual-values identity for
//! the global MSE game.

mod common;

use std::sync::Arc;

use common::brute_shapley;
use shapsets::dataset::{corrupt_response, partition_blocks};
use shapsets::shapley::exact::{build_value_table, exact_shapley};
use shapsets::shapley::{estimate_mc, global_mse_shapley, McConfig, SamplingMode};
use shapsets::{
    BaselinePolicy, CoalitionCache, Dataset, ExactMethod, Game, ModelSpec, Partition,
};

/// Three singleton subsets, y = x, squared-error game at a training point.
#[test]
fn own_subset_reduces_the_error_when_train_equals_test() {
    let ds = Arc::new(
        Dataset::from_rows(
            &["x"],
            &[(vec![0.0], 0.0), (vec![1.0], 1.0), (vec![2.0], 2.0)],
        )
        .unwrap(),
    );
    let p = Arc::new(partition_blocks(&ds, 3).unwrap());
    let game = Game::squared_error(
        Arc::clone(&ds),
        p,
        ModelSpec::OneNn,
        BaselinePolicy::Zero,
        vec![1.0],
        1.0,
    )
    .unwrap();
    let cache = CoalitionCache::new();
    let table = build_value_table(&game, &cache).unwrap();
    let phi = exact_shapley(&table, ExactMethod::Weighted).unwrap().phi;
    // including subset 2 always zeroes the error (exact self-match); the
    // other subsets never change it
    assert!((phi[1] - (-1.0)).abs() <= 1e-12, "{phi:?}");
    assert!(phi[0].abs() <= 1e-12);
    assert!(phi[2].abs() <= 1e-12);
}

#[test]
fn zero_model_plays_a_constant_error_game() {
    let ds = Arc::new(
        Dataset::from_rows(&["x"], &[(vec![0.0], 1.0), (vec![2.0], 3.0)]).unwrap(),
    );
    let p = Arc::new(partition_blocks(&ds, 2).unwrap());
    let game = Game::squared_error(
        Arc::clone(&ds),
        p,
        ModelSpec::Zero,
        BaselinePolicy::Zero,
        vec![1.0],
        2.0,
    )
    .unwrap();
    let cache = CoalitionCache::new();
    let table = build_value_table(&game, &cache).unwrap();
    let phi = exact_shapley(&table, ExactMethod::Harsanyi).unwrap().phi;
    assert_eq!(phi, vec![0.0, 0.0]);
}

/// Six points, K = 3, one response corrupted: the subset holding the
/// corrupted duplicate of the test point must get a positive (and dominant)
/// squared-error value under 1-NN.
#[test]
fn corrupted_subset_is_blamed_for_the_error() {
    let clean = Dataset::from_rows(
        &["x"],
        &[
            (vec![0.0], 0.0),
            (vec![1.0], 1.0),
            (vec![2.0], 2.0),
            (vec![3.0], 3.0),
            (vec![4.0], 4.0),
            (vec![5.0], 5.0),
        ],
    )
    .unwrap();
    let corrupted = Arc::new(corrupt_response(&clean, &[3], &[50.0]).unwrap());
    let p = Arc::new(partition_blocks(&corrupted, 3).unwrap());
    // explain the clean observation at the corrupted location
    let game = Game::squared_error(
        Arc::clone(&corrupted),
        Arc::clone(&p),
        ModelSpec::OneNn,
        BaselinePolicy::Zero,
        vec![2.0],
        2.0,
    )
    .unwrap();
    let cache = CoalitionCache::new();
    let table = build_value_table(&game, &cache).unwrap();
    let phi = exact_shapley(&table, ExactMethod::Weighted).unwrap().phi;
    assert!(phi[1] > 0.0, "{phi:?}");
    let max = phi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(max, phi[1], "corrupted subset is the unique maximum: {phi:?}");
    assert!(phi.iter().enumerate().all(|(i, &v)| i == 1 || v < max));
    // the oracle agrees
    let oracle = brute_shapley(3, |c| game.value(c, &cache).unwrap());
    common::assert_vec_close(&phi, &oracle, 1e-12, "corrupted fixture");
}

fn proposition_fixture() -> (Arc<Dataset>, Arc<Partition>, Arc<Dataset>) {
    let rows: Vec<(Vec<f64>, f64)> = (0..24)
        .map(|i| {
            let x = i as f64 * 0.4;
            (vec![x.sin(), (0.5 * x).cos()], x.sin() * 2.0 - 0.7)
        })
        .collect();
    let train = Arc::new(Dataset::from_rows(&["a", "b"], &rows).unwrap());
    let partition = Arc::new(partition_blocks(&train, 4).unwrap());
    let test = Arc::new(train.select_rows(&(0..12).collect::<Vec<_>>()));
    (train, partition, test)
}

/// The global MSE-game Shapley equals the mean of the per-point
/// squared-error Shapley values — exactly for exact engines.
#[test]
fn global_mse_equals_mean_of_individual_values_exactly() {
    let (train, partition, test) = proposition_fixture();
    let spec = ModelSpec::Knn { k: 2 };
    let cache = CoalitionCache::new();

    let per_point: Vec<Vec<f64>> = (0..test.n())
        .map(|t| {
            let game = Game::squared_error(
                Arc::clone(&train),
                Arc::clone(&partition),
                spec.clone(),
                BaselinePolicy::Zero,
                test.row(t).to_vec(),
                test.response()[t],
            )
            .unwrap();
            let table = build_value_table(&game, &cache).unwrap();
            exact_shapley(&table, ExactMethod::Weighted).unwrap().phi
        })
        .collect();
    let mean = global_mse_shapley(&per_point).unwrap();

    let mse_game = Game::mse(
        Arc::clone(&train),
        Arc::clone(&partition),
        spec,
        BaselinePolicy::Zero,
        Arc::clone(&test),
    )
    .unwrap();
    let table = build_value_table(&mse_game, &cache).unwrap();
    let direct = exact_shapley(&table, ExactMethod::Weighted).unwrap().phi;

    for (m, d) in mean.iter().zip(&direct) {
        let scale = m.abs().max(d.abs()).max(1e-30);
        assert!((m - d).abs() / scale <= 1e-12, "{mean:?} vs {direct:?}");
    }
}

/// The same identity holds for the sampling estimator when every run shares
/// the permutation stream (same seed, M, mode).
#[test]
fn global_mse_equals_mean_of_individual_estimates_with_shared_streams() {
    let (train, partition, test) = proposition_fixture();
    let spec = ModelSpec::Knn { k: 2 };
    let cache = CoalitionCache::new();
    let cfg = McConfig::new(60, 21, SamplingMode::PerSubset);

    let per_point: Vec<Vec<f64>> = (0..test.n())
        .map(|t| {
            let game = Game::squared_error(
                Arc::clone(&train),
                Arc::clone(&partition),
                spec.clone(),
                BaselinePolicy::Zero,
                test.row(t).to_vec(),
                test.response()[t],
            )
            .unwrap();
            estimate_mc(&game, &cache, &cfg).unwrap().phi
        })
        .collect();
    let mean = global_mse_shapley(&per_point).unwrap();

    let mse_game = Game::mse(
        Arc::clone(&train),
        Arc::clone(&partition),
        spec,
        BaselinePolicy::Zero,
        Arc::clone(&test),
    )
    .unwrap();
    let direct = estimate_mc(&mse_game, &cache, &cfg).unwrap().phi;

    for (m, d) in mean.iter().zip(&direct) {
        let scale = m.abs().max(d.abs()).max(1e-30);
        assert!((m - d).abs() / scale <= 1e-12, "{mean:?} vs {direct:?}");
    }
    // identical test points average to themselves
    let twice = vec![per_point[0].clone(), per_point[0].clone()];
    assert_eq!(global_mse_shapley(&twice).unwrap(), per_point[0]);
}

/// Negative squared-error values mean the subset helps; corrupting a subset
/// flips its sign on affected points. Directional end-to-end check with the
/// sampling estimator.
#[test]
fn sampling_estimator_agrees_on_the_sign_of_the_corruption() {
    let clean_rows: Vec<(Vec<f64>, f64)> = (0..21).map(|i| (vec![i as f64], i as f64)).collect();
    let clean = Dataset::from_rows(&["x"], &clean_rows).unwrap();
    let corrupted = Arc::new(corrupt_response(&clean, &[10], &[60.0]).unwrap());
    let p = Arc::new(partition_blocks(&corrupted, 3).unwrap());
    let game = Game::squared_error(
        Arc::clone(&corrupted),
        p,
        ModelSpec::OneNn,
        BaselinePolicy::Zero,
        vec![9.0],
        9.0,
    )
    .unwrap();
    let cache = CoalitionCache::new();
    let est = estimate_mc(&game, &cache, &McConfig::new(200, 3, SamplingMode::PerSubset)).unwrap();
    assert!(est.phi[1] > 0.0, "{:?}", est.phi);
    assert!(est.phi[1] > est.phi[0] && est.phi[1] > est.phi[2]);
}
