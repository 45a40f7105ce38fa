//! Shapley and LIME attributions of the true-class sum.
//!
//! Both use a zero baseline: a feature "absent" from a coalition or
//! perturbation has all of its columns forced to 0.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand::RngCore;
use rayon::prelude::*;

use super::FeatureMasks;
use crate::bits::BitMatrix;
use crate::data::{BinaryDataset, FeatureMap};
use crate::error::{Error, Result};
use crate::rng::rng_from;
use crate::tm::TmClassifier;

/// Ridge penalty on the LIME surrogate's slopes (not the intercept).
pub const LIME_PENALTY: f64 = 1e-3;

fn check(model: &TmClassifier, data: &BinaryDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::invalid("attribution scorers need a non-empty validation split"));
    }
    if data.num_columns() != model.num_features() {
        return Err(Error::Dimension {
            expected: model.num_features(),
            got: data.num_columns(),
        });
    }
    Ok(())
}

fn pack_one(x: &[bool], map: &FeatureMap) -> Result<(BitMatrix, FeatureMasks)> {
    if x.len() != map.num_columns() {
        return Err(Error::Dimension {
            expected: map.num_columns(),
            got: x.len(),
        });
    }
    let bits = BitMatrix::from_rows(&[x], x.len());
    let masks = FeatureMasks::new(&bits, map);
    Ok((bits, masks))
}

fn shapley_packed<R: RngCore>(
    model: &TmClassifier,
    x: &[u64],
    y: usize,
    masks: &FeatureMasks,
    n_perms: usize,
    rng: &mut R,
) -> Vec<f64> {
    let nf = masks.len();
    let mut phi = vec![0.0; nf];
    let mut order: Vec<usize> = (0..nf).collect();
    let empty = model.class_sum_bits(&masks.zero_row(), y);
    for p in 0..n_perms {
        // antithetic pairs: every odd draw walks the previous order backwards
        if p % 2 == 0 {
            order.shuffle(rng);
        } else {
            order.reverse();
        }
        let mut cur = masks.zero_row();
        let mut prev = empty;
        for &f in &order {
            for ((c, xv), m) in cur.iter_mut().zip(x).zip(masks.feature(f)) {
                *c |= xv & m;
            }
            let v = model.class_sum_bits(&cur, y);
            phi[f] += (v - prev) as f64;
            prev = v;
        }
    }
    phi.iter_mut().for_each(|p| *p /= n_perms as f64);
    phi
}

/// Monte-Carlo Shapley values of one sample's true-class sum over the
/// original features.
pub fn shapley_values(
    model: &TmClassifier,
    x: &[bool],
    y: usize,
    map: &FeatureMap,
    n_perms: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_perms == 0 {
        return Err(Error::invalid("n_perms must be >= 1"));
    }
    if y >= model.num_classes() {
        return Err(Error::invalid(format!("class {y} out of range")));
    }
    let (bits, masks) = pack_one(x, map)?;
    let mut rng = rng_from(seed, &[0x5A4F]);
    Ok(shapley_packed(model, bits.row(0), y, &masks, n_perms, &mut rng))
}

/// Mean |Shapley value| over validation samples.
pub fn shap(model: &TmClassifier, data: &BinaryDataset, n_perms: usize, seed: u64) -> Result<Vec<f64>> {
    check(model, data)?;
    if n_perms == 0 {
        return Err(Error::invalid("n_perms must be >= 1"));
    }
    let masks = FeatureMasks::new(data.bits(), data.feature_map());
    let per_sample: Vec<Vec<f64>> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from(seed, &[0x5A4F, i as u64]);
            shapley_packed(model, data.bits().row(i), data.labels()[i], &masks, n_perms, &mut rng)
        })
        .collect();
    Ok(mean_abs(&per_sample, masks.len()))
}

fn mean_abs(rows: &[Vec<f64>], width: usize) -> Vec<f64> {
    let mut s = vec![0.0; width];
    for r in rows {
        for (a, v) in s.iter_mut().zip(r) {
            *a += v.abs();
        }
    }
    s.iter_mut().for_each(|v| *v /= rows.len() as f64);
    s
}

/// Default kernel width for `num_features` features.
pub fn default_kernel_width(num_features: usize) -> f64 {
    0.75 * (num_features.max(1) as f64).sqrt()
}

/// Random perturbations over features (`true` = kept). The first one keeps
/// every feature so the explained point itself is always in the fit.
pub fn lime_perturbations<R: RngCore>(num_features: usize, n_perturb: usize, rng: &mut R) -> Vec<Vec<bool>> {
    let mut out = vec![vec![true; num_features]];
    while out.len() < n_perturb {
        out.push((0..num_features).map(|_| rng.random_bool(0.5)).collect());
    }
    out
}

fn lime_packed(
    model: &TmClassifier,
    x: &[u64],
    y: usize,
    masks: &FeatureMasks,
    perturbations: &[Vec<bool>],
    width: f64,
) -> Vec<f64> {
    let nf = masks.len();
    let m = perturbations.len();
    let mut z = DMatrix::<f64>::zeros(m, nf + 1);
    let mut target = DVector::<f64>::zeros(m);
    let mut kernel = DVector::<f64>::zeros(m);
    let mut buf = Vec::new();
    for (r, p) in perturbations.iter().enumerate() {
        masks.apply(x, p, &mut buf);
        target[r] = model.class_sum_bits(&buf, y) as f64;
        z[(r, 0)] = 1.0;
        let mut hamming = 0.0;
        for (f, &keep) in p.iter().enumerate() {
            if keep {
                z[(r, f + 1)] = 1.0;
            } else {
                hamming += 1.0;
            }
        }
        kernel[r] = (-(hamming * hamming) / (width * width)).exp();
    }
    let mut zw = z.clone();
    for (r, w) in kernel.iter().enumerate() {
        zw.row_mut(r).scale_mut(*w);
    }
    let mut a = zw.transpose() * &z;
    for f in 1..=nf {
        a[(f, f)] += LIME_PENALTY;
    }
    let b = zw.transpose() * target;
    let beta = match a.clone().cholesky() {
        Some(ch) => ch.solve(&b),
        None => a.lu().solve(&b).unwrap_or_else(|| DVector::zeros(nf + 1)),
    };
    beta.iter().skip(1).copied().collect()
}

/// Signed surrogate slopes for one sample, fit on the given perturbations.
pub fn lime_local(
    model: &TmClassifier,
    x: &[bool],
    y: usize,
    map: &FeatureMap,
    perturbations: &[Vec<bool>],
    kernel_width: f64,
) -> Result<Vec<f64>> {
    if perturbations.is_empty() {
        return Err(Error::invalid("LIME needs at least one perturbation"));
    }
    if !(kernel_width > 0.0) {
        return Err(Error::invalid("kernel_width must be positive"));
    }
    if let Some(p) = perturbations.iter().find(|p| p.len() != map.num_features()) {
        return Err(Error::Dimension {
            expected: map.num_features(),
            got: p.len(),
        });
    }
    if y >= model.num_classes() {
        return Err(Error::invalid(format!("class {y} out of range")));
    }
    let (bits, masks) = pack_one(x, map)?;
    Ok(lime_packed(model, bits.row(0), y, &masks, perturbations, kernel_width))
}

/// Mean |slope| over the first `max_samples` validation samples.
pub fn lime(
    model: &TmClassifier,
    data: &BinaryDataset,
    n_perturb: usize,
    kernel_width: Option<f64>,
    max_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check(model, data)?;
    if n_perturb == 0 || max_samples == 0 {
        return Err(Error::invalid("n_perturb and max_samples must be >= 1"));
    }
    let nf = data.num_features();
    let width = kernel_width.unwrap_or_else(|| default_kernel_width(nf));
    if !(width > 0.0) {
        return Err(Error::invalid("kernel_width must be positive"));
    }
    let masks = FeatureMasks::new(data.bits(), data.feature_map());
    let count = data.len().min(max_samples);
    let per_sample: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from(seed, &[0x11AE, i as u64]);
            let pert = lime_perturbations(nf, n_perturb, &mut rng);
            lime_packed(model, data.bits().row(i), data.labels()[i], &masks, &pert, width)
        })
        .collect();
    Ok(mean_abs(&per_sample, nf))
}
