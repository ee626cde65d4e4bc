//! Explain individual predictions of retrainable regression models by the
//! Shapley values of training-data subsets.
//!
//! The training data is divided into K disjoint subsets which act as players
//! in a coalitional game: the payout of a coalition is what a model trained
//! on exactly those subsets predicts (or how it errs). The Shapley value of
//! a subset is then its fair share of the prediction — how much that part of
//! the training data pushed the prediction up or down.
//!
//! Module map:
//!
//! * [`dataset`] — data model, CSV ingestion, partitioners, coalition
//!   extraction; [`generate`] — synthetic reference experiments.
//! * [`models`] — built-in regressors (nearest neighbour, mean, linear,
//!   bagged trees) and the coalition-keyed model cache that bounds
//!   retraining at 2^K jobs per run.
//! * [`games`] — the value functions: prediction, squared error, test MSE.
//! * [`shapley`] — the Monte Carlo estimator, three exact engines, Harsanyi
//!   dividends, feature importance and the combined feature×subset game.
//! * [`acquisition`] — Shapley-guided training-data acquisition strategies.
//! * [`diagnostics`] — axiom checkers and extended learning curves.
//!
//! The `parallel` feature (on by default) runs retraining and sampling
//! loops on rayon; disabling it yields a dependency-light sequential build
//! with identical results.

pub mod acquisition;
pub mod coalition;
pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod fingerprint;
pub mod games;
pub mod generate;
pub mod models;
mod par;
pub mod rng;
pub mod shapley;

pub use coalition::Coalition;
pub use dataset::{Dataset, Partition};
pub use error::{Error, Result};
pub use games::{BaselinePolicy, Game, GameKind};
pub use models::{CoalitionCache, ModelSpec, TrainedModel};
pub use shapley::exact::{ExactMethod, ExactShapley, HarsanyiDividends};
pub use shapley::{McConfig, SamplingMode, ShapleyEstimate};
