//! Synthetic dataset generators reproducing the library's reference
//! experiments: a noisy sinusoid time series with a duplicated subset, and
//! three bias scenarios where a sensitive attribute may leak into the data.
//!
//! Generators are pure functions of their config including the seed.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Partition};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};

/// Config for the sinusoid time series: x_j(t) = sin(w_j t) + noise for four
/// driver signals, response y = x1*x2 + x3*x4 + noise. The training data is
/// split into `n_subsets` chronological blocks and the last block is then
/// duplicated as an extra subset, so K = n_subsets + 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SinusoidConfig {
    /// Points per subset before duplication.
    pub n_points: usize,
    /// Chronological subsets before duplication.
    pub n_subsets: usize,
    /// Standard deviation of both the signal noise and the response noise.
    pub noise_sd: f64,
    /// Angular frequencies are drawn uniformly from this range.
    pub omega_range: [f64; 2],
    pub seed: u64,
}

impl Default for SinusoidConfig {
    fn default() -> Self {
        SinusoidConfig {
            n_points: 100,
            n_subsets: 4,
            noise_sd: 0.1,
            omega_range: [2.0 * std::f64::consts::PI, 40.0 * std::f64::consts::PI],
            seed: 0,
        }
    }
}

impl SinusoidConfig {
    fn validate(&self) -> Result<()> {
        if self.n_points < 1 {
            return Err(Error::Argument("n_points must be at least 1".into()));
        }
        if self.n_subsets < 1 {
            return Err(Error::Argument("n_subsets must be at least 1".into()));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::Argument("noise_sd must be finite and >= 0".into()));
        }
        if self.omega_range[0] >= self.omega_range[1] {
            return Err(Error::Argument(
                "omega_range lower bound must be below upper bound".into(),
            ));
        }
        Ok(())
    }
}

const SINUSOID_DRIVERS: usize = 4;

/// Generate the sinusoid dataset and its K = n_subsets + 1 partition (the
/// final subset is an element-wise duplicate of the previous one).
pub fn generate_sinusoid(cfg: &SinusoidConfig) -> Result<(Dataset, Partition)> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, streams::GENERATOR, 0);
    let omegas: Vec<f64> = (0..SINUSOID_DRIVERS)
        .map(|_| rng.random_range(cfg.omega_range[0]..cfg.omega_range[1]))
        .collect();

    let n0 = cfg.n_points * cfg.n_subsets;
    let mut features = Vec::with_capacity(n0 * SINUSOID_DRIVERS);
    let mut response = Vec::with_capacity(n0);
    for t in 1..=n0 {
        let mut x = [0.0f64; SINUSOID_DRIVERS];
        for (sig, omega) in x.iter_mut().zip(&omegas) {
            let eta: f64 = rng.sample(StandardNormal);
            *sig = (omega * t as f64).sin() + cfg.noise_sd * eta;
        }
        let eps: f64 = rng.sample(StandardNormal);
        features.extend_from_slice(&x);
        response.push(x[0] * x[1] + x[2] * x[3] + cfg.noise_sd * eps);
    }

    // duplicate the final chronological subset as an extra subset
    let dup_start = n0 - cfg.n_points;
    let dup_features: Vec<f64> = features[dup_start * SINUSOID_DRIVERS..].to_vec();
    let dup_response: Vec<f64> = response[dup_start..].to_vec();
    features.extend_from_slice(&dup_features);
    response.extend_from_slice(&dup_response);

    let n = n0 + cfg.n_points;
    let k = cfg.n_subsets + 1;
    let row_ids = (1..=n as u64).collect();
    let names = (1..=SINUSOID_DRIVERS).map(|j| format!("x{j}")).collect();
    let ds = Dataset::new(names, features, "y", response, row_ids, Vec::new())?;

    let mut assignment = Vec::with_capacity(n);
    for subset in 0..cfg.n_subsets {
        assignment.extend(std::iter::repeat_n(subset, cfg.n_points));
    }
    assignment.extend(std::iter::repeat_n(cfg.n_subsets, cfg.n_points));
    let labels = (1..=k).map(|i| i.to_string()).collect();
    let partition = Partition::new(k, assignment, labels)?;
    Ok((ds, partition))
}

/// Which generative regime links the sensitive attribute to the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioTag {
    /// Response and features independent of the attribute.
    A,
    /// Response depends on the attribute, features do not.
    B,
    /// Both response and features depend on the attribute.
    C,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiasGroup {
    pub label: String,
    pub x_d: f64,
}

/// Config for the bias scenarios. Each group contributes `per_group` rows;
/// the attribute value x_D is stored as an aux column only.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiasScenario {
    pub scenario: ScenarioTag,
    pub groups: Vec<BiasGroup>,
    pub per_group: usize,
    pub j: usize,
    pub seed: u64,
}

impl Default for BiasScenario {
    fn default() -> Self {
        BiasScenario {
            scenario: ScenarioTag::A,
            groups: vec![
                BiasGroup {
                    label: "A".into(),
                    x_d: -1.0,
                },
                BiasGroup {
                    label: "B".into(),
                    x_d: 0.0,
                },
                BiasGroup {
                    label: "C".into(),
                    x_d: 1.0,
                },
            ],
            per_group: 100,
            j: 4,
            seed: 0,
        }
    }
}

impl BiasScenario {
    fn validate(&self) -> Result<()> {
        if self.groups.len() < 2 {
            return Err(Error::Argument("at least 2 groups required".into()));
        }
        let mut values: Vec<f64> = self.groups.iter().map(|g| g.x_d).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Argument("group x_D values must be distinct".into()));
        }
        if self.per_group < 1 {
            return Err(Error::Argument("per_group must be at least 1".into()));
        }
        if self.j < 1 {
            return Err(Error::Argument("j must be at least 1".into()));
        }
        Ok(())
    }
}

/// Mean multiplier for feature `idx` (0-based) under scenario c:
/// +1, -1, +2, -2, +3, ...
fn scenario_c_multiplier(idx: usize) -> f64 {
    let magnitude = (idx / 2 + 1) as f64;
    if idx.is_multiple_of(2) {
        magnitude
    } else {
        -magnitude
    }
}

/// Generate a bias-scenario dataset partitioned by group, with x_D stored as
/// an aux column only.
pub fn generate_bias(sc: &BiasScenario) -> Result<(Dataset, Partition)> {
    sc.validate()?;
    let mut rng = stream_rng(sc.seed, streams::GENERATOR, 0);
    let n = sc.groups.len() * sc.per_group;
    let mut features = Vec::with_capacity(n * sc.j);
    let mut response = Vec::with_capacity(n);
    let mut x_d_col = Vec::with_capacity(n);
    let mut assignment = Vec::with_capacity(n);

    for (g_idx, group) in sc.groups.iter().enumerate() {
        for _ in 0..sc.per_group {
            for f_idx in 0..sc.j {
                let z: f64 = rng.sample(StandardNormal);
                let mean = match sc.scenario {
                    ScenarioTag::A | ScenarioTag::B => 0.0,
                    ScenarioTag::C => scenario_c_multiplier(f_idx) * group.x_d,
                };
                features.push(mean + z);
            }
            let eps: f64 = rng.sample(StandardNormal);
            let y = match sc.scenario {
                ScenarioTag::A => eps,
                ScenarioTag::B | ScenarioTag::C => group.x_d + eps,
            };
            response.push(y);
            x_d_col.push(group.x_d);
            assignment.push(g_idx);
        }
    }

    let names = (1..=sc.j).map(|j| format!("x{j}")).collect();
    let row_ids = (1..=n as u64).collect();
    let ds = Dataset::new(
        names,
        features,
        "y",
        response,
        row_ids,
        vec![("x_D".into(), x_d_col)],
    )?;
    let labels = sc.groups.iter().map(|g| g.label.clone()).collect();
    let partition = Partition::new(sc.groups.len(), assignment, labels)?;
    Ok((ds, partition))
}
