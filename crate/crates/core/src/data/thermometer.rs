use crate::bits::BitMatrix;
use crate::error::{Error, Result};

use super::{BinaryDataset, FeatureGroup, FeatureMap, RawDataset};

pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
enum Encoding {
    /// Equal-width thresholds over the fit range; also used for 0/1 features
    /// (one bin, threshold 1).
    Levels(Vec<f64>),
    /// Constant on the fit rows: a single column that is always 0.
    Dead,
}

/// Per-feature unary encoder with thresholds fitted on a subset of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermometerEncoder {
    names: Vec<String>,
    encodings: Vec<Encoding>,
}

impl ThermometerEncoder {
    /// Fits thresholds on `fit_rows` of `raw` only.
    pub fn fit(raw: &RawDataset, bins: usize, fit_rows: &[usize]) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("bins must be >= 1"));
        }
        if fit_rows.is_empty() {
            return Err(Error::invalid("no rows to fit thresholds on"));
        }
        let encodings = (0..raw.n_features())
            .map(|f| {
                let vals: Vec<f64> = fit_rows.iter().map(|&i| raw.features[i][f]).collect();
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if lo == hi {
                    Encoding::Dead
                } else if vals.iter().all(|&v| v == 0.0 || v == 1.0) {
                    Encoding::Levels(vec![1.0])
                } else {
                    Encoding::Levels(equal_width(lo, hi, bins))
                }
            })
            .collect();
        Ok(Self {
            names: raw.feature_names.clone(),
            encodings,
        })
    }

    pub fn num_features(&self) -> usize {
        self.encodings.len()
    }

    /// Features that were constant on the fit rows.
    pub fn constant_features(&self) -> Vec<usize> {
        self.encodings
            .iter()
            .enumerate()
            .filter(|(_, e)| matches!(e, Encoding::Dead))
            .map(|(f, _)| f)
            .collect()
    }

    pub fn feature_map(&self) -> FeatureMap {
        let mut next = 0;
        let groups = self
            .encodings
            .iter()
            .zip(&self.names)
            .map(|(e, name)| {
                let thresholds = match e {
                    Encoding::Levels(t) => t.clone(),
                    Encoding::Dead => vec![f64::INFINITY],
                };
                let columns = (next..next + thresholds.len()).collect();
                next += thresholds.len();
                FeatureGroup {
                    name: name.clone(),
                    columns,
                    thresholds,
                }
            })
            .collect();
        FeatureMap::new(groups, next).expect("encoder builds a valid partition")
    }

    /// Bits for one value of feature `f`, lowest threshold first.
    pub fn encode_value(&self, f: usize, v: f64) -> Vec<bool> {
        match &self.encodings[f] {
            Encoding::Levels(t) => t.iter().map(|&th| v >= th).collect(),
            Encoding::Dead => vec![false],
        }
    }

    pub fn encode(&self, raw: &RawDataset) -> Result<BinaryDataset> {
        if raw.n_features() != self.num_features() {
            return Err(Error::Dimension {
                expected: self.num_features(),
                got: raw.n_features(),
            });
        }
        let map = self.feature_map();
        let mut bits = BitMatrix::zeros(raw.n_samples(), map.num_columns());
        for (i, row) in raw.features.iter().enumerate() {
            for (f, g) in map.groups().iter().enumerate() {
                for (&col, &th) in g.columns.iter().zip(&g.thresholds) {
                    if row[f] >= th {
                        bits.set(i, col, true);
                    }
                }
            }
        }
        Ok(BinaryDataset::new(bits, raw.labels.clone(), raw.num_classes(), map)?
            .with_constant_features(self.constant_features()))
    }
}

/// `bins` thresholds `lo + b (hi - lo) / bins` for `b = 1..=bins`.
fn equal_width(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let width = hi - lo;
    let mut t: Vec<f64> = (1..bins)
        .map(|b| lo + width * b as f64 / bins as f64)
        .collect();
    t.push(hi);
    t.dedup();
    t
}

/// Fits thresholds on `fit_indices` and encodes every row of `raw`.
pub fn thermometer_encode(raw: &RawDataset, bins: usize, fit_indices: &[usize]) -> Result<BinaryDataset> {
    ThermometerEncoder::fit(raw, bins, fit_indices)?.encode(raw)
}
