//! Axiom checkers and extended learning curves.
//!
//! A Shapley computation retrains the model on many coalitions as a side
//! effect; [`collect_curve`] harvests one test-MSE point per distinct
//! trained coalition, which plotted against coalition size is a learning
//! curve annotated by which subsets are missing. [`check_axioms`] turns the
//! defining properties of the Shapley value (efficiency, symmetry, null
//! player, linearity) into measured residuals with pass/fail verdicts.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::games::Game;
use crate::models::CoalitionCache;
use crate::rng::{stream_rng, streams};
use crate::shapley::exact::{exact_shapley, ExactShapley};
use crate::shapley::ShapleyEstimate;
use rand::Rng;

/// One point of an extended learning curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    /// Coalition bitmask (bit i = subset i+1 present).
    pub coalition: u64,
    pub size: usize,
    /// 1-based subset indices missing from the training data.
    pub excluded: Vec<usize>,
    /// MSE on the designated test set.
    pub mse: f64,
    /// Enumeration index over the cache's coalitions.
    pub iteration: usize,
}

/// One curve point per distinct coalition the cache trained for this game,
/// ordered by bitmask. The empty coalition scores the baseline constant.
pub fn collect_curve(
    game: &Game,
    cache: &CoalitionCache,
    test: &Dataset,
) -> Result<Vec<CurvePoint>> {
    if test.n() == 0 {
        return Err(Error::EmptyInput("no test rows for the curve metric".into()));
    }
    if test.j() != game.train_data().j() {
        return Err(Error::Argument(
            "test and training feature counts differ".into(),
        ));
    }
    let k = game.k();
    let coalitions = cache.coalitions(game.model_spec(), game.data_fingerprint());
    let mut points = Vec::with_capacity(coalitions.len());
    for (iteration, &coalition) in coalitions.iter().enumerate() {
        let mse = if coalition.is_empty() {
            let c = game.baseline_constant();
            test.response().iter().map(|y| (y - c) * (y - c)).sum::<f64>() / test.n() as f64
        } else {
            let model = game.model_for(coalition, cache)?;
            (0..test.n())
                .map(|t| {
                    let d = test.response()[t] - model.predict_raw(test.row(t));
                    d * d
                })
                .sum::<f64>()
                / test.n() as f64
        };
        points.push(CurvePoint {
            coalition: coalition.bits(),
            size: coalition.size(),
            excluded: coalition.excluded(k).iter().map(|s| s + 1).collect(),
            mse,
            iteration,
        });
    }
    Ok(points)
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeSummary {
    pub size: usize,
    pub mean_mse: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExcludedSummary {
    /// 1-based subset index that is missing.
    pub subset: usize,
    pub mean_mse: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSummary {
    pub per_size: Vec<SizeSummary>,
    pub per_excluded: Vec<ExcludedSummary>,
}

/// Mean metric per coalition size, plus the mean over all points missing a
/// given subset (the color semantics of the curve plots).
pub fn summarize_curve(points: &[CurvePoint], k: usize) -> Result<CurveSummary> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no curve points".into()));
    }
    let mut per_size = Vec::new();
    for size in 0..=k {
        let member: Vec<&CurvePoint> = points.iter().filter(|p| p.size == size).collect();
        if member.is_empty() {
            continue;
        }
        per_size.push(SizeSummary {
            size,
            mean_mse: member.iter().map(|p| p.mse).sum::<f64>() / member.len() as f64,
            points: member.len(),
        });
    }
    let mut per_excluded = Vec::new();
    for subset in 1..=k {
        let member: Vec<&CurvePoint> = points
            .iter()
            .filter(|p| p.excluded.contains(&subset))
            .collect();
        if member.is_empty() {
            continue;
        }
        per_excluded.push(ExcludedSummary {
            subset,
            mean_mse: member.iter().map(|p| p.mse).sum::<f64>() / member.len() as f64,
            points: member.len(),
        });
    }
    Ok(CurveSummary {
        per_size,
        per_excluded,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// What the residual was measured over, for the report reader.
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub checks: Vec<AxiomCheck>,
    pub all_pass: bool,
}

impl PropertyReport {
    fn push(&mut self, axiom: &str, residual: f64, tolerance: f64, detail: String) {
        let pass = residual <= tolerance;
        self.all_pass &= pass;
        self.checks.push(AxiomCheck {
            axiom: axiom.into(),
            residual,
            tolerance,
            pass,
            detail,
        });
    }
}

/// Tolerances for the axiom checks. Exact runs default to 1e-10 everywhere;
/// sampling runs derive the efficiency and symmetry tolerances from the
/// reported standard errors.
#[derive(Debug, Clone, Copy)]
pub struct AxiomTolerances {
    pub exact: f64,
}

impl Default for AxiomTolerances {
    fn default() -> Self {
        AxiomTolerances { exact: 1e-10 }
    }
}

/// The result under test: an exact solution with its value table, or a
/// sampling estimate with standard errors.
pub enum ShapleyResult<'a> {
    Exact(&'a ExactShapley),
    Estimate(&'a ShapleyEstimate),
}

/// Check the Shapley axioms on a computed result.
///
/// * efficiency — |Σφ − (v(N) − v(∅))|; for estimates the tolerance is
///   3·√(ΣSE²) (telescoping runs satisfy it to float precision).
/// * symmetry — max |φ_i − φ_j| over the caller-identified identical-subset
///   pairs; for estimates the tolerance is 3·√(SE_i² + SE_j²) per pair.
/// * null player — max |φ| over subsets whose inclusion never changes the
///   table value (exact runs only; detected from the table).
/// * linearity — exact runs only: φ(a·v + w) compared against a·φ(v) + φ(w)
///   entry-wise on a synthetic table w drawn from `seed`.
pub fn check_axioms(
    result: &ShapleyResult,
    grand_minus_empty: f64,
    symmetric_pairs: &[(usize, usize)],
    tol: AxiomTolerances,
    seed: u64,
) -> PropertyReport {
    let mut report = PropertyReport {
        checks: Vec::new(),
        all_pass: true,
    };
    match result {
        ShapleyResult::Exact(exact) => {
            let phi = &exact.phi;
            let k = phi.len();
            let sum: f64 = phi.iter().sum();
            report.push(
                "efficiency",
                (sum - grand_minus_empty).abs(),
                tol.exact,
                format!("sum(phi) = {sum} vs v(N) - v(empty) = {grand_minus_empty}"),
            );

            let mut sym_residual = 0.0f64;
            for &(a, b) in symmetric_pairs {
                sym_residual = sym_residual.max((phi[a] - phi[b]).abs());
            }
            if !symmetric_pairs.is_empty() {
                report.push(
                    "symmetry",
                    sym_residual,
                    tol.exact,
                    format!("max gap over pairs {symmetric_pairs:?}"),
                );
            }

            let nulls = null_players(&exact.table, k);
            if !nulls.is_empty() {
                let residual = nulls.iter().map(|&i| phi[i].abs()).fold(0.0, f64::max);
                report.push(
                    "null_player",
                    residual,
                    tol.exact,
                    format!(
                        "max |phi| over null subsets {:?}",
                        nulls.iter().map(|i| i + 1).collect::<Vec<_>>()
                    ),
                );
            }

            // linearity on a synthetic companion table
            let mut rng = stream_rng(seed, streams::LINEARITY, 0);
            let companion: Vec<f64> = (0..exact.table.len())
                .map(|m| if m == 0 { 0.0 } else { rng.random_range(-1.0..1.0) })
                .collect();
            let scale: f64 = rng.random_range(0.5..2.0);
            let combined: Vec<f64> = exact
                .table
                .iter()
                .zip(&companion)
                .map(|(v, w)| scale * v + w)
                .collect();
            let method = exact.method;
            let phi_w = exact_shapley(&companion, method).expect("companion table is valid");
            let phi_c = exact_shapley(&combined, method).expect("combined table is valid");
            let residual = phi_c
                .phi
                .iter()
                .zip(phi.iter().zip(&phi_w.phi))
                .map(|(c, (v, w))| (c - (scale * v + w)).abs())
                .fold(0.0, f64::max);
            report.push(
                "linearity",
                residual,
                tol.exact,
                format!("phi({scale}*v + w) vs {scale}*phi(v) + phi(w)"),
            );
        }
        ShapleyResult::Estimate(est) => {
            let phi = &est.phi;
            let sum: f64 = phi.iter().sum();
            let se_sq: f64 = est.se.iter().map(|s| s * s).sum();
            let tolerance = (3.0 * se_sq.sqrt()).max(1e-12);
            report.push(
                "efficiency",
                (sum - grand_minus_empty).abs(),
                tolerance,
                format!(
                    "sum(phi) = {sum} vs v(N) - v(empty) = {grand_minus_empty}, 3*sqrt(sum SE^2)"
                ),
            );
            for &(a, b) in symmetric_pairs {
                let tolerance = 3.0 * (est.se[a] * est.se[a] + est.se[b] * est.se[b]).sqrt();
                report.push(
                    "symmetry",
                    (phi[a] - phi[b]).abs(),
                    tolerance.max(1e-12),
                    format!("subsets {} and {}", a + 1, b + 1),
                );
            }
        }
    }
    report
}

/// Subsets whose inclusion never changes the value table.
fn null_players(table: &[f64], k: usize) -> Vec<usize> {
    let mut nulls = Vec::new();
    for i in 0..k {
        let bit = 1usize << i;
        let is_null = (0..table.len())
            .filter(|mask| mask & bit == 0)
            .all(|mask| table[mask | bit] == table[mask]);
        if is_null {
            nulls.push(i);
        }
    }
    nulls
}

/// Convenience: v(N) − v(∅) for a game (v(∅) is zero by construction).
pub fn grand_minus_empty(game: &Game, cache: &CoalitionCache) -> Result<f64> {
    game.grand_value(cache)
}
