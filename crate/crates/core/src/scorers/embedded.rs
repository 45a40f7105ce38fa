//! Scorers that read the trained machine's clauses and weights.
//!
//! The |W|-based scorers take a classes x features magnitude matrix that
//! is already aggregated to original features.

use ndarray::{Array2, ArrayView1};

use crate::data::FeatureMap;
use crate::error::{Error, Result};
use crate::tm::TmClassifier;
use crate::weights::aggregate_vector;

/// Added to the standard deviation in [`stability`].
pub const STABILITY_EPS: f64 = 1e-6;

fn check_alpha(model: &TmClassifier, alpha: &[f64]) -> Result<()> {
    if alpha.len() != model.num_classes() {
        return Err(Error::Dimension {
            expected: model.num_classes(),
            got: alpha.len(),
        });
    }
    Ok(())
}

fn touches_feature(model: &TmClassifier, map: &FeatureMap) -> Result<Vec<Vec<bool>>> {
    if map.num_columns() != model.num_features() {
        return Err(Error::Dimension {
            expected: model.num_features(),
            got: map.num_columns(),
        });
    }
    Ok(model
        .clauses()
        .iter()
        .map(|cl| {
            map.groups()
                .iter()
                .map(|g| g.columns.iter().any(|&c| cl.touches_column(c)))
                .collect()
        })
        .collect())
}

/// Class-weighted count of clauses that include a literal of each feature.
pub fn relevance(model: &TmClassifier, map: &FeatureMap, alpha: &[f64]) -> Result<Vec<f64>> {
    check_alpha(model, alpha)?;
    let touch = touches_feature(model, map)?;
    let mut s = vec![0.0; map.num_features()];
    for (cl, t) in model.clauses().iter().zip(&touch) {
        for (f, &hit) in t.iter().enumerate() {
            if hit {
                s[f] += alpha[cl.class_id()];
            }
        }
    }
    Ok(s)
}

/// Largest clause weight among clauses touching each feature.
pub fn tm_weight(model: &TmClassifier, map: &FeatureMap) -> Result<Vec<f64>> {
    let touch = touches_feature(model, map)?;
    let mut s = vec![0.0f64; map.num_features()];
    for (cl, t) in model.clauses().iter().zip(&touch) {
        for (f, &hit) in t.iter().enumerate() {
            if hit {
                s[f] = s[f].max(cl.weight() as f64);
            }
        }
    }
    Ok(s)
}

fn per_feature(mag: &Array2<f64>, f: impl Fn(ArrayView1<f64>) -> f64) -> Vec<f64> {
    mag.columns().into_iter().map(f).collect()
}

pub fn cw_sum(mag: &Array2<f64>, alpha: &[f64]) -> Vec<f64> {
    per_feature(mag, |col| col.iter().zip(alpha).map(|(w, a)| a * w).sum())
}

pub fn support_cw_sum(mag: &Array2<f64>, alpha: &[f64]) -> Vec<f64> {
    per_feature(mag, |col| col.iter().zip(alpha).map(|(w, a)| (1.0 - a) * w).sum())
}

pub fn cw_feat(mag: &Array2<f64>) -> Vec<f64> {
    per_feature(mag, |col| {
        let total: f64 = col.sum();
        if total == 0.0 {
            return 0.0;
        }
        col.iter().map(|w| w / total * w).sum()
    })
}

/// Gap between the two largest class magnitudes (the largest when C = 1).
pub fn margin(mag: &Array2<f64>) -> Vec<f64> {
    per_feature(mag, |col| {
        let mut v: Vec<f64> = col.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        match v.as_slice() {
            [] => 0.0,
            [a] => *a,
            [a, b, ..] => a - b,
        }
    })
}

fn distribution(col: ArrayView1<f64>) -> Option<Vec<f64>> {
    let total: f64 = col.sum();
    (total > 0.0).then(|| col.iter().map(|w| w / total).collect())
}

/// `ln C - H(p)`: high when the magnitude is concentrated on few classes.
pub fn entropy(mag: &Array2<f64>) -> Vec<f64> {
    let ln_c = (mag.nrows() as f64).ln();
    per_feature(mag, |col| match distribution(col) {
        None => 0.0,
        Some(p) => {
            let h: f64 = p.iter().filter(|&&q| q > 0.0).map(|q| -q * q.ln()).sum();
            (ln_c - h).max(0.0)
        }
    })
}

pub fn gini(mag: &Array2<f64>) -> Vec<f64> {
    per_feature(mag, |col| match distribution(col) {
        None => 0.0,
        Some(p) => p.iter().map(|q| q * q).sum(),
    })
}

/// Mean over standard deviation of each class/column weight history,
/// class-weighted and summed per feature.
pub fn stability(history: &[Array2<f64>], alpha: &[f64], map: &FeatureMap) -> Result<Vec<f64>> {
    let Some(first) = history.first() else {
        return Err(Error::invalid("stability needs a per-epoch weight history; train the model first"));
    };
    let (c, d) = first.dim();
    if alpha.len() != c {
        return Err(Error::Dimension { expected: c, got: alpha.len() });
    }
    let t = history.len() as f64;
    let mut cols = vec![0.0; d];
    for (ci, a) in alpha.iter().enumerate() {
        for (j, out) in cols.iter_mut().enumerate() {
            let mean = history.iter().map(|h| h[[ci, j]]).sum::<f64>() / t;
            let var = history.iter().map(|h| (h[[ci, j]] - mean).powi(2)).sum::<f64>() / t;
            *out += a * mean / (var.sqrt() + STABILITY_EPS);
        }
    }
    aggregate_vector(&cols, map)
}
