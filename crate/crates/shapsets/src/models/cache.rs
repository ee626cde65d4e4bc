//! Coalition-keyed model cache.
//!
//! Retraining cost dominates every estimator in this crate, but an M-iteration
//! run over K subsets only ever touches at most 2^K distinct coalitions, so
//! trained models are memoized under (model spec, partition fingerprint,
//! coalition bitmask). Lookups are single-flight: concurrent misses on one key
//! cause exactly one training job and the other threads wait for it.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::coalition::Coalition;
use crate::models::{ModelSpec, TrainedModel};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    spec: ModelSpec,
    partition_fp: u64,
    mask: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    /// Training jobs actually executed (equals misses when caching is on;
    /// counts every call when it is off).
    pub trainings: u64,
}

#[derive(Debug)]
pub struct CoalitionCache {
    enabled: bool,
    slots: Mutex<HashMap<CacheKey, Arc<OnceLock<Arc<TrainedModel>>>>>,
    hits: AtomicU64,
    misses: AtomicU64,
    trainings: AtomicU64,
}

impl CoalitionCache {
    pub fn new() -> Self {
        Self::with_enabled(true)
    }

    /// A cache that never stores anything; every lookup trains afresh.
    /// Useful to measure what the cache saves and to cross-check results.
    pub fn disabled() -> Self {
        Self::with_enabled(false)
    }

    fn with_enabled(enabled: bool) -> Self {
        CoalitionCache {
            enabled,
            slots: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            trainings: AtomicU64::new(0),
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    /// Look up the model for a coalition, training and storing it on a miss.
    pub fn get_or_train<F>(
        &self,
        spec: &ModelSpec,
        partition_fp: u64,
        coalition: Coalition,
        trainer: F,
    ) -> Arc<TrainedModel>
    where
        F: FnOnce() -> TrainedModel,
    {
        if !self.enabled {
            self.misses.fetch_add(1, Ordering::Relaxed);
            self.trainings.fetch_add(1, Ordering::Relaxed);
            return Arc::new(trainer());
        }
        let key = CacheKey {
            spec: spec.clone(),
            partition_fp,
            mask: coalition.bits(),
        };
        let cell = {
            let mut slots = self.slots.lock().expect("cache lock");
            Arc::clone(slots.entry(key).or_default())
        };
        let mut trained_here = false;
        let model = cell.get_or_init(|| {
            trained_here = true;
            Arc::new(trainer())
        });
        if trained_here {
            self.misses.fetch_add(1, Ordering::Relaxed);
            self.trainings.fetch_add(1, Ordering::Relaxed);
        } else {
            self.hits.fetch_add(1, Ordering::Relaxed);
        }
        Arc::clone(model)
    }

    /// Cached model without training; `None` on a miss.
    pub fn peek(&self, spec: &ModelSpec, partition_fp: u64, coalition: Coalition) -> Option<Arc<TrainedModel>> {
        let key = CacheKey {
            spec: spec.clone(),
            partition_fp,
            mask: coalition.bits(),
        };
        let slots = self.slots.lock().expect("cache lock");
        slots.get(&key).and_then(|cell| cell.get().cloned())
    }

    /// Distinct coalitions stored for one (spec, partition), ascending by
    /// bitmask.
    pub fn coalitions(&self, spec: &ModelSpec, partition_fp: u64) -> Vec<Coalition> {
        let slots = self.slots.lock().expect("cache lock");
        let mut masks: Vec<u64> = slots
            .iter()
            .filter(|(k, cell)| {
                k.spec == *spec && k.partition_fp == partition_fp && cell.get().is_some()
            })
            .map(|(k, _)| k.mask)
            .collect();
        masks.sort_unstable();
        masks.into_iter().map(Coalition::from_bits).collect()
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            trainings: self.trainings.load(Ordering::Relaxed),
        }
    }
}

impl Default for CoalitionCache {
    fn default() -> Self {
        Self::new()
    }
}
