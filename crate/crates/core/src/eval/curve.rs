use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::protocol::{apply_protocol, Protocol};
use crate::data::PreparedData;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};
use crate::tm::{HyperParams, TmClassifier};

/// Default budget grid: every count for small `n`, otherwise ten evenly
/// spaced counts from 1 to `n`.
pub fn default_k_grid(n: usize) -> Vec<usize> {
    if n <= 12 {
        return (1..=n).collect();
    }
    let mut v: Vec<usize> = (0..10)
        .map(|i| 1 + ((i as f64) * (n - 1) as f64 / 9.0).round() as usize)
        .collect();
    v.dedup();
    v
}

/// Trapezoid area under `acc` with `k` rescaled to `[0, 1]`; a single point
/// gives its own value.
pub fn trapezoid_auc(k: &[usize], acc: &[f64]) -> Result<f64> {
    if k.len() != acc.len() || k.is_empty() {
        return Err(Error::invalid("AUC needs matching, non-empty k and accuracy vectors"));
    }
    if k.len() == 1 {
        return Ok(acc[0]);
    }
    let (lo, hi) = (k[0] as f64, k[k.len() - 1] as f64);
    if !(hi > lo) {
        return Err(Error::invalid("k values must be strictly ascending"));
    }
    let mut area = 0.0;
    for i in 1..k.len() {
        let w = (k[i] - k[i - 1]) as f64 / (hi - lo);
        area += w * (acc[i] + acc[i - 1]) / 2.0;
    }
    Ok(area)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub protocol: Protocol,
    pub k_grid: Vec<usize>,
    pub trials: usize,
    pub model_params: HyperParams,
    pub seed: u64,
}

impl EvalConfig {
    /// Config with the default grid for `num_features` features and 10 trials.
    pub fn new(protocol: Protocol, num_features: usize, model_params: HyperParams, seed: u64) -> Self {
        Self {
            protocol,
            k_grid: default_k_grid(num_features),
            trials: 10,
            model_params,
            seed,
        }
    }

    pub fn validate(&self, num_features: usize) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.k_grid.is_empty() {
            return Err(Error::invalid("k_grid is empty"));
        }
        if self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("k_grid must be strictly ascending"));
        }
        if self.k_grid[0] < 1 || *self.k_grid.last().unwrap() > num_features {
            return Err(Error::invalid(format!("k_grid must lie within [1, {num_features}]")));
        }
        self.model_params.validate()
    }
}

/// Test and validation accuracy of one retrained machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub test_acc: f64,
    pub val_acc: f64,
}

/// Seed of the machine trained in `trial`; independent of k, protocol and
/// method so that matching cells share models where their data agree.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    derive_seed(seed, &[0x7121, trial as u64])
}

/// Transforms all three splits at budget `k` and retrains one machine.
pub fn evaluate_point(
    data: &PreparedData,
    ranking: &[usize],
    k: usize,
    protocol: Protocol,
    params: &HyperParams,
    seed: u64,
    trial: usize,
) -> Result<TrialResult> {
    let mut rng = rng_from(seed, &[0xE7A1, trial as u64, protocol.tag(), k as u64]);
    let train = apply_protocol(&data.train, &data.train, ranking, k, protocol, &mut rng)?;
    let val = apply_protocol(&data.val, &data.train, ranking, k, protocol, &mut rng)?;
    let test = apply_protocol(&data.test, &data.train, ranking, k, protocol, &mut rng)?;
    let params = params.clone().with_seed(trial_seed(seed, trial));
    let model = TmClassifier::train(params, &train).map_err(|e| Error::Training {
        k,
        trial,
        source: Box::new(e),
    })?;
    Ok(TrialResult {
        test_acc: model.accuracy(&test)?,
        val_acc: model.accuracy(&val)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruningCurve {
    pub method_id: String,
    pub protocol: Protocol,
    pub dataset: String,
    pub k_values: Vec<usize>,
    /// Test accuracy over trials.
    pub mean_acc: Vec<f64>,
    pub std_acc: Vec<f64>,
    pub val_mean_acc: Vec<f64>,
    pub val_std_acc: Vec<f64>,
    pub auc: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Retrains `trials` machines at every k of the grid and averages.
pub fn evaluate_curve(data: &PreparedData, ranking: &[usize], method_id: &str, config: &EvalConfig) -> Result<PruningCurve> {
    config.validate(data.train.num_features())?;
    let jobs: Vec<(usize, usize)> = config
        .k_grid
        .iter()
        .flat_map(|&k| (0..config.trials).map(move |t| (k, t)))
        .collect();
    let results: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(k, t)| evaluate_point(data, ranking, k, config.protocol, &config.model_params, config.seed, t))
        .collect::<Result<_>>()?;
    let mut curve = PruningCurve {
        method_id: method_id.to_string(),
        protocol: config.protocol,
        dataset: data.name.clone(),
        k_values: config.k_grid.clone(),
        mean_acc: Vec::new(),
        std_acc: Vec::new(),
        val_mean_acc: Vec::new(),
        val_std_acc: Vec::new(),
        auc: 0.0,
    };
    for chunk in results.chunks(config.trials) {
        let test: Vec<f64> = chunk.iter().map(|r| r.test_acc).collect();
        let val: Vec<f64> = chunk.iter().map(|r| r.val_acc).collect();
        let (m, s) = mean_std(&test);
        curve.mean_acc.push(m);
        curve.std_acc.push(s);
        let (m, s) = mean_std(&val);
        curve.val_mean_acc.push(m);
        curve.val_std_acc.push(s);
    }
    curve.auc = trapezoid_auc(&curve.k_values, &curve.mean_acc)?;
    Ok(curve)
}
