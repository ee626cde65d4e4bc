//! Exact Shapley values from a full coalition value table, by three routes
//! that must agree: averaging marginals over all K! permutations, the
//! factorial-weighted sum over coalitions, and equal division of Harsanyi
//! dividends.

use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::games::Game;
use crate::models::CoalitionCache;
use crate::par;

/// Weighted and Harsanyi routes hold a 2^K table.
pub const MAX_TABLE_SUBSETS: usize = 20;
/// The permutation route walks K! orders.
pub const MAX_PERMUTATION_SUBSETS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMethod {
    Permutation,
    Weighted,
    Harsanyi,
}

impl ExactMethod {
    pub const ALL: [ExactMethod; 3] = [
        ExactMethod::Permutation,
        ExactMethod::Weighted,
        ExactMethod::Harsanyi,
    ];
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactShapley {
    pub phi: Vec<f64>,
    pub method: ExactMethod,
    /// Coalition values indexed by bitmask.
    pub table: Vec<f64>,
}

fn table_subsets(table: &[f64]) -> Result<usize> {
    let len = table.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Argument(format!(
            "value table length {len} is not 2^K for K >= 1"
        )));
    }
    let k = len.trailing_zeros() as usize;
    if k > MAX_TABLE_SUBSETS {
        return Err(Error::Capacity(format!(
            "{k} subsets exceed the exact-table limit of {MAX_TABLE_SUBSETS}"
        )));
    }
    Ok(k)
}

/// Exact per-subset Shapley values of a coalition value table.
pub fn exact_shapley(table: &[f64], method: ExactMethod) -> Result<ExactShapley> {
    let k = table_subsets(table)?;
    let phi = match method {
        ExactMethod::Permutation => {
            if k > MAX_PERMUTATION_SUBSETS {
                return Err(Error::Capacity(format!(
                    "{k} subsets exceed the permutation-method limit of \
                     {MAX_PERMUTATION_SUBSETS} (K! orders); use weighted or harsanyi"
                )));
            }
            permutation_shapley(table, k)
        }
        ExactMethod::Weighted => weighted_shapley(table, k),
        ExactMethod::Harsanyi => {
            let dividends = harsanyi(table)?;
            dividends.shapley()
        }
    };
    Ok(ExactShapley {
        phi,
        method,
        table: table.to_vec(),
    })
}

/// Average of marginal contributions over all K! permutations.
fn permutation_shapley(table: &[f64], k: usize) -> Vec<f64> {
    let mut sums = vec![0.0f64; k];
    let mut count = 0u64;
    for_each_permutation(k, |order| {
        let mut mask = 0usize;
        for &s in order {
            let next = mask | (1 << s);
            sums[s] += table[next] - table[mask];
            mask = next;
        }
        count += 1;
    });
    sums.iter().map(|s| s / count as f64).collect()
}

/// Heap's algorithm; calls `f` with each permutation of 0..k.
fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize])) {
    let mut items: Vec<usize> = (0..k).collect();
    let mut counters = vec![0usize; k];
    f(&items);
    let mut i = 0;
    while i < k {
        if counters[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(counters[i], i);
            }
            f(&items);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

/// Direct evaluation with the |S|! (K−|S|−1)! / K! coalition weights.
fn weighted_shapley(table: &[f64], k: usize) -> Vec<f64> {
    let factorial: Vec<f64> = {
        let mut f = vec![1.0f64; k + 1];
        for i in 1..=k {
            f[i] = f[i - 1] * i as f64;
        }
        f
    };
    let len = table.len();
    let mut phi = vec![0.0f64; k];
    for (i, entry) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut sum = 0.0;
        for mask in 0..len {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let weight = factorial[s] * factorial[k - s - 1] / factorial[k];
            sum += weight * (table[mask | bit] - table[mask]);
        }
        *entry = sum;
    }
    phi
}

/// Harsanyi dividends of a value table: the surplus each coalition creates
/// beyond all of its sub-coalitions.
#[derive(Debug, Clone, Serialize)]
pub struct HarsanyiDividends {
    k: usize,
    /// Dividend per coalition bitmask; index 0 carries v(∅).
    dividends: Vec<f64>,
}

impl HarsanyiDividends {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, coalition: Coalition) -> f64 {
        self.dividends[coalition.bits() as usize]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.dividends
    }

    /// Σ_{T ⊆ S} d(T): reconstructs v(S).
    pub fn reconstruct(&self, coalition: Coalition) -> f64 {
        let s = coalition.bits() as usize;
        let mut sum = self.dividends[0];
        let mut t = s;
        while t > 0 {
            sum += self.dividends[t];
            t = (t - 1) & s;
        }
        sum
    }

    /// Equal division of each dividend among its members.
    pub fn shapley(&self) -> Vec<f64> {
        let mut phi = vec![0.0f64; self.k];
        for (mask, d) in self.dividends.iter().enumerate().skip(1) {
            let size = mask.count_ones() as f64;
            let share = d / size;
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                phi[i] += share;
                bits &= bits - 1;
            }
        }
        phi
    }
}

/// Dividends via the subset Möbius transform of the value table, equivalent
/// to the size-ordered recursion d(S) = v(S) − Σ_{T ⊊ S} d(T).
pub fn harsanyi(table: &[f64]) -> Result<HarsanyiDividends> {
    let k = table_subsets(table)?;
    let mut dividends = table.to_vec();
    for i in 0..k {
        let bit = 1usize << i;
        for mask in 0..dividends.len() {
            if mask & bit != 0 {
                dividends[mask] -= dividends[mask ^ bit];
            }
        }
    }
    Ok(HarsanyiDividends { k, dividends })
}

/// Evaluate the game on all 2^K coalitions. Trains up to 2^K models; the
/// empty coalition's entry is exactly zero.
pub fn build_value_table(game: &Game, cache: &CoalitionCache) -> Result<Vec<f64>> {
    let k = game.k();
    if k > MAX_TABLE_SUBSETS {
        return Err(Error::Capacity(format!(
            "{k} subsets exceed the exact-table limit of {MAX_TABLE_SUBSETS} (2^K models)"
        )));
    }
    par::try_map_collect(
        &(0..1u64 << k).collect::<Vec<u64>>(),
        |&mask| game.value(Coalition::from_bits(mask), cache),
    )
}
