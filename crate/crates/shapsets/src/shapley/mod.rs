//! Shapley values for training-data subset importance.
//!
//! [`estimate_mc`] is the sampling estimator. Two modes:
//!
//! * `PerSubset` — for each subset k and iteration m an independent uniform
//!   permutation is drawn and the marginal v(Pre∪{k}) − v(Pre) recorded.
//!   This is the reference sampling scheme, unbiased entry by entry.
//! * `Telescoping` — one permutation per iteration credits every subset its
//!   marginal along that permutation; still unbiased, and the estimates sum
//!   to v(N) − v(∅) exactly per run.
//!
//! Permutation streams are drawn sequentially from the run seed before any
//! parallel work and depend only on (seed, K, M, mode), never on the game:
//! per-point squared-error runs and a global MSE run with the same seed
//! consume identical permutations, which is what makes the mean of the
//! former equal the latter (Proposition-style equality) to float rounding.
//!
//! Exact engines (all K! permutations, the factorial-weighted subset sum,
//! and Harsanyi dividends) live in [`exact`]; feature and combined
//! feature×subset estimators in [`feature`].

pub mod exact;
pub mod feature;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::games::Game;
use crate::models::CoalitionCache;
use crate::par;
use crate::rng::{draw_permutation, stream_rng, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    PerSubset,
    Telescoping,
}

#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub iterations: usize,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl McConfig {
    pub fn new(iterations: usize, seed: u64, mode: SamplingMode) -> Self {
        McConfig {
            iterations,
            seed,
            mode,
        }
    }
}

/// A Monte Carlo estimate of the per-subset Shapley values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapleyEstimate {
    pub phi: Vec<f64>,
    /// Non-distributed gain: the raw payout of the empty coalition.
    pub phi0: f64,
    /// Standard error of each phi entry, from the sample variance of the
    /// per-iteration marginal contributions.
    pub se: Vec<f64>,
    #[serde(rename = "M")]
    pub iterations: usize,
    pub seed: u64,
    pub mode: SamplingMode,
    /// Running means after each iteration (row m = mean of the first m
    /// contributions per subset); the last row equals `phi` bit for bit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Vec<f64>>>,
}

impl ShapleyEstimate {
    /// Drop the convergence trace (it is M×K values).
    pub fn without_trace(mut self) -> Self {
        self.trace = None;
        self
    }
}

/// Index into the flat contribution layout: subset-major, iteration-minor.
#[inline]
fn slot(subset: usize, iteration: usize, m: usize) -> usize {
    subset * m + iteration
}

/// Sampling-based Shapley estimate for the game's subsets.
pub fn estimate_mc(game: &Game, cache: &CoalitionCache, cfg: &McConfig) -> Result<ShapleyEstimate> {
    let k = game.k();
    let m = cfg.iterations;
    if m < 1 {
        return Err(Error::Argument("iterations must be at least 1".into()));
    }

    // 1. draw every permutation up front, sequentially
    let mut rng = stream_rng(cfg.seed, streams::SUBSET_MC, 0);
    let mut pairs: Vec<(Coalition, Coalition)> = vec![(Coalition::EMPTY, Coalition::EMPTY); k * m];
    match cfg.mode {
        SamplingMode::PerSubset => {
            for subset in 0..k {
                for it in 0..m {
                    let order = draw_permutation(&mut rng, k);
                    let mut prefix = Coalition::EMPTY;
                    for &s in &order {
                        if s == subset {
                            break;
                        }
                        prefix = prefix.with(s);
                    }
                    pairs[slot(subset, it, m)] = (prefix.with(subset), prefix);
                }
            }
        }
        SamplingMode::Telescoping => {
            for it in 0..m {
                let order = draw_permutation(&mut rng, k);
                let mut prefix = Coalition::EMPTY;
                for &s in &order {
                    let next = prefix.with(s);
                    pairs[slot(s, it, m)] = (next, prefix);
                    prefix = next;
                }
            }
        }
    }

    // 2. evaluate coalition values; with the cache on, each distinct
    //    coalition is valued once
    let contributions: Vec<f64> = if cache.is_enabled() {
        let mut distinct: Vec<Coalition> =
            pairs.iter().flat_map(|&(plus, minus)| [plus, minus]).collect();
        distinct.sort_unstable();
        distinct.dedup();
        let values = par::try_map_collect(&distinct, |c| game.value(*c, cache))?;
        let table: HashMap<u64, f64> = distinct
            .iter()
            .map(|c| c.bits())
            .zip(values)
            .collect();
        pairs
            .iter()
            .map(|(plus, minus)| table[&plus.bits()] - table[&minus.bits()])
            .collect()
    } else {
        par::try_map_collect(&pairs, |&(plus, minus)| {
            Ok(game.value(plus, cache)? - game.value(minus, cache)?)
        })?
    };

    // 3. aggregate; contributions are stored by (subset, iteration) so the
    //    reduction order never depends on scheduling
    let mut phi = vec![0.0f64; k];
    let mut se = vec![0.0f64; k];
    let mut trace = vec![vec![0.0f64; k]; m];
    for subset in 0..k {
        let slice = &contributions[subset * m..(subset + 1) * m];
        let mut running = 0.0;
        for (it, contribution) in slice.iter().enumerate() {
            running += contribution;
            trace[it][subset] = running / (it + 1) as f64;
        }
        let mean = running / m as f64;
        phi[subset] = mean;
        if m > 1 {
            let var: f64 =
                slice.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (m - 1) as f64;
            se[subset] = (var / m as f64).sqrt();
        }
    }

    Ok(ShapleyEstimate {
        phi,
        phi0: game.phi0(),
        se,
        iterations: m,
        seed: cfg.seed,
        mode: cfg.mode,
        trace: Some(trace),
    })
}

/// Mean of per-point Shapley vectors. With exact inputs, or MC inputs that
/// share the permutation stream, this equals the MSE-game Shapley computed
/// directly.
pub fn global_mse_shapley(per_point: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = per_point
        .first()
        .ok_or_else(|| Error::EmptyInput("no per-point Shapley vectors".into()))?;
    let k = first.len();
    if per_point.iter().any(|phi| phi.len() != k) {
        return Err(Error::Argument(
            "per-point Shapley vectors have mixed subset counts".into(),
        ));
    }
    let mut mean = vec![0.0f64; k];
    for phi in per_point {
        for (m, v) in mean.iter_mut().zip(phi) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= per_point.len() as f64;
    }
    Ok(mean)
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupAverage {
    pub label: String,
    pub phi: Vec<f64>,
    pub count: usize,
}

/// Mean Shapley vector per test-point group, groups ordered by label.
/// Labels with no points simply do not appear.
pub fn average_group_shapley(
    per_point: &[Vec<f64>],
    labels: &[String],
) -> Result<Vec<GroupAverage>> {
    if per_point.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} Shapley vectors but {} group labels",
            per_point.len(),
            labels.len()
        )));
    }
    let first = per_point
        .first()
        .ok_or_else(|| Error::EmptyInput("no per-point Shapley vectors".into()))?;
    let k = first.len();
    if per_point.iter().any(|phi| phi.len() != k) {
        return Err(Error::Argument(
            "per-point Shapley vectors have mixed subset counts".into(),
        ));
    }
    let mut groups: Vec<String> = labels.to_vec();
    groups.sort();
    groups.dedup();
    let mut out = Vec::with_capacity(groups.len());
    for label in groups {
        let members: Vec<&Vec<f64>> = per_point
            .iter()
            .zip(labels)
            .filter(|(_, l)| **l == label)
            .map(|(phi, _)| phi)
            .collect();
        let mut mean = vec![0.0f64; k];
        for phi in &members {
            for (m, v) in mean.iter_mut().zip(phi.iter()) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= members.len() as f64;
        }
        out.push(GroupAverage {
            label,
            phi: mean,
            count: members.len(),
        });
    }
    Ok(out)
}
