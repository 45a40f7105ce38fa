//! Probes that re-evaluate the frozen machine on modified validation rows.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use super::{running_mean, FeatureMasks};
use crate::bits::BitMatrix;
use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::rng::rng_from;
use crate::tm::TmClassifier;
use crate::weights::aggregate_vector;

fn check(model: &TmClassifier, data: &BinaryDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::invalid("probe scorers need a non-empty validation split"));
    }
    if data.num_columns() != model.num_features() {
        return Err(Error::Dimension {
            expected: model.num_features(),
            got: data.num_columns(),
        });
    }
    Ok(())
}

/// Columns that some clause of `class` includes, positively or negated.
fn class_columns(model: &TmClassifier, class: usize) -> Vec<usize> {
    let clauses = &model.clauses()[model.class_range(class)];
    (0..model.num_features())
        .filter(|&c| clauses.iter().any(|cl| cl.touches_column(c)))
        .collect()
}

/// Mean absolute change of the true-class sum when one column is flipped,
/// summed per feature.
pub fn taylor_crit(model: &TmClassifier, data: &BinaryDataset) -> Result<Vec<f64>> {
    check(model, data)?;
    let touched: Vec<Vec<usize>> = (0..model.num_classes()).map(|c| class_columns(model, c)).collect();
    let per_sample: Vec<Vec<(usize, f64)>> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let y = data.labels()[i];
            let mut x = data.bits().row(i).to_vec();
            let base = model.class_sum_bits(&x, y);
            touched[y]
                .iter()
                .map(|&c| {
                    let bit = 1u64 << (c % 64);
                    x[c / 64] ^= bit;
                    let d = (model.class_sum_bits(&x, y) - base).abs();
                    x[c / 64] ^= bit;
                    (c, d as f64)
                })
                .collect()
        })
        .collect();
    let mut cols = vec![0.0; data.num_columns()];
    for sample in per_sample {
        for (c, d) in sample {
            cols[c] += d;
        }
    }
    let n = data.len() as f64;
    cols.iter_mut().for_each(|v| *v /= n);
    aggregate_vector(&cols, data.feature_map())
}

/// Random keep/drop masks over original features, each dropped with
/// probability 1/2.
pub fn random_masks(num_features: usize, n_masks: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = rng_from(seed, &[0xDA05]);
    (0..n_masks)
        .map(|_| (0..num_features).map(|_| rng.random_bool(0.5)).collect())
        .collect()
}

pub fn var_dropout(model: &TmClassifier, data: &BinaryDataset, n_masks: usize, seed: u64) -> Result<Vec<f64>> {
    let masks = random_masks(data.num_features(), n_masks, seed);
    var_dropout_with_masks(model, data, &masks)
}

/// Per sample and feature: |mean true-class sum over masks keeping the
/// feature - mean over masks dropping it| (0 if either side is empty),
/// averaged over samples. `true` in a mask means kept.
pub fn var_dropout_with_masks(model: &TmClassifier, data: &BinaryDataset, masks: &[Vec<bool>]) -> Result<Vec<f64>> {
    check(model, data)?;
    let nf = data.num_features();
    if let Some(m) = masks.iter().find(|m| m.len() != nf) {
        return Err(Error::Dimension { expected: nf, got: m.len() });
    }
    let fm = FeatureMasks::new(data.bits(), data.feature_map());
    let per_sample: Vec<Vec<f64>> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let y = data.labels()[i];
            let x = data.bits().row(i);
            let mut buf = Vec::new();
            let values: Vec<f64> = masks
                .iter()
                .map(|m| {
                    fm.apply(x, m, &mut buf);
                    model.class_sum_bits(&buf, y) as f64
                })
                .collect();
            (0..nf)
                .map(|f| {
                    let (mut kept, mut nk, mut dropped, mut nd) = (0.0, 0usize, 0.0, 0usize);
                    for (m, v) in masks.iter().zip(&values) {
                        if m[f] {
                            kept += v;
                            nk += 1;
                        } else {
                            dropped += v;
                            nd += 1;
                        }
                    }
                    if nk == 0 || nd == 0 {
                        0.0
                    } else {
                        (kept / nk as f64 - dropped / nd as f64).abs()
                    }
                })
                .collect()
        })
        .collect();
    let mut s = vec![0.0; nf];
    for row in &per_sample {
        for (a, v) in s.iter_mut().zip(row) {
            *a += v;
        }
    }
    let n = data.len() as f64;
    s.iter_mut().for_each(|v| *v /= n);
    Ok(s)
}

fn masked_accuracy(model: &TmClassifier, data: &BinaryDataset, mask: &[u64]) -> f64 {
    let correct = (0..data.len())
        .filter(|&i| {
            let row: Vec<u64> = data.bits().row(i).iter().zip(mask).map(|(x, m)| x & !m).collect();
            model.predict_bits(&row) == data.labels()[i]
        })
        .count();
    correct as f64 / data.len() as f64
}

/// Validation accuracy lost when each feature's columns are forced to 0.
pub fn ablation_impact(model: &TmClassifier, data: &BinaryDataset) -> Result<Vec<f64>> {
    check(model, data)?;
    let fm = FeatureMasks::new(data.bits(), data.feature_map());
    let base = model.accuracy(data)?;
    Ok((0..fm.len())
        .into_par_iter()
        .map(|f| base - masked_accuracy(model, data, fm.feature(f)))
        .collect())
}

/// Leave-one-feature-out masking; the same mechanics as [`ablation_impact`].
pub fn dropout_loo(model: &TmClassifier, data: &BinaryDataset) -> Result<Vec<f64>> {
    ablation_impact(model, data)
}

/// Each validation bit flipped independently with probability `rate`.
pub fn noisy_copy(data: &BinaryDataset, rate: f64, seed: u64, copy: u64) -> Result<BinaryDataset> {
    let mut rng = rng_from(seed, &[0x5AB1, copy]);
    let src = data.bits();
    let mut bits = BitMatrix::zeros(src.rows(), src.cols());
    for i in 0..src.rows() {
        for j in 0..src.cols() {
            bits.set(i, j, src.get(i, j) ^ rng.random_bool(rate));
        }
    }
    data.with_bits(bits, data.feature_map().clone())
}

/// Mean TaylorCrit over `n_noise` noisy copies of the validation split.
pub fn smooth_stabil(
    model: &TmClassifier,
    data: &BinaryDataset,
    n_noise: usize,
    rate: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    check(model, data)?;
    if n_noise == 0 {
        return Err(Error::invalid("n_noise must be >= 1"));
    }
    let mut acc = vec![0.0; data.num_features()];
    for k in 0..n_noise {
        let copy = noisy_copy(data, rate, seed, k as u64)?;
        running_mean(&mut acc, &taylor_crit(model, &copy)?, k + 1);
    }
    Ok(acc)
}

/// Mean accuracy drop when a feature's column group is shuffled jointly
/// across validation samples.
pub fn perm_importance(model: &TmClassifier, data: &BinaryDataset, n_permutations: usize, seed: u64) -> Result<Vec<f64>> {
    check(model, data)?;
    if n_permutations == 0 {
        return Err(Error::invalid("n_permutations must be >= 1"));
    }
    let fm = FeatureMasks::new(data.bits(), data.feature_map());
    let base = model.accuracy(data)?;
    let n = data.len();
    Ok((0..fm.len())
        .into_par_iter()
        .map(|f| {
            let mask = fm.feature(f);
            let mut drop = 0.0;
            for r in 0..n_permutations {
                let mut rng = rng_from(seed, &[f as u64, r as u64]);
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                let correct = (0..n)
                    .filter(|&i| {
                        let own = data.bits().row(i);
                        let other = data.bits().row(perm[i]);
                        let row: Vec<u64> = own
                            .iter()
                            .zip(other)
                            .zip(mask)
                            .map(|((a, b), m)| (a & !m) | (b & m))
                            .collect();
                        model.predict_bits(&row) == data.labels()[i]
                    })
                    .count();
                drop += base - correct as f64 / n as f64;
            }
            drop / n_permutations as f64
        })
        .collect())
}
