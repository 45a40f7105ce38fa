//! Dataset ingestion, thermometer binarization, splitting and generators.

mod fixtures;
mod raw;
mod split;
mod synthetic;
mod thermometer;

use std::fmt::Write as _;

pub use fixtures::{canonical_name, fixture, fixture_names, resolve_dataset, DATA_DIR_ENV};
pub use raw::{load_csv, load_delimited, LabelColumn, RawDataset};
pub use split::{stratified_split, Split, DEFAULT_FRACTIONS};
pub use synthetic::{generate_feature_interaction, generate_hierarchical_bool, generate_parity};
pub use thermometer::{thermometer_encode, ThermometerEncoder, DEFAULT_BINS};

use crate::bits::BitMatrix;
use crate::error::{Error, Result};

/// Binarized columns owned by one original feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGroup {
    pub name: String,
    /// Column indices in ascending threshold order.
    pub columns: Vec<usize>,
    /// `columns[b]` is 1 iff the raw value is `>= thresholds[b]`.
    pub thresholds: Vec<f64>,
}

/// Mapping from binarized columns back to original features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    groups: Vec<FeatureGroup>,
    owner: Vec<usize>,
}

impl FeatureMap {
    pub fn new(groups: Vec<FeatureGroup>, num_columns: usize) -> Result<Self> {
        let mut owner = vec![usize::MAX; num_columns];
        for (f, g) in groups.iter().enumerate() {
            if g.columns.len() != g.thresholds.len() {
                return Err(Error::invalid(format!("feature {f}: columns and thresholds differ in length")));
            }
            if g.thresholds.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::invalid(format!("feature {f}: thresholds not strictly increasing")));
            }
            for &c in &g.columns {
                match owner.get_mut(c) {
                    Some(o) if *o == usize::MAX => *o = f,
                    Some(_) => return Err(Error::invalid(format!("column {c} mapped twice"))),
                    None => return Err(Error::invalid(format!("column {c} out of range"))),
                }
            }
        }
        if let Some(c) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::invalid(format!("column {c} belongs to no feature")));
        }
        Ok(Self { groups, owner })
    }

    /// One column per feature.
    pub fn identity(d: usize) -> Self {
        let groups = (0..d)
            .map(|j| FeatureGroup {
                name: format!("x{j}"),
                columns: vec![j],
                thresholds: vec![1.0],
            })
            .collect();
        Self {
            groups,
            owner: (0..d).collect(),
        }
    }

    pub fn num_features(&self) -> usize {
        self.groups.len()
    }

    pub fn num_columns(&self) -> usize {
        self.owner.len()
    }

    pub fn groups(&self) -> &[FeatureGroup] {
        &self.groups
    }

    pub fn columns(&self, feature: usize) -> &[usize] {
        &self.groups[feature].columns
    }

    pub fn owner(&self, column: usize) -> usize {
        self.owner[column]
    }

    pub fn names(&self) -> Vec<String> {
        self.groups.iter().map(|g| g.name.clone()).collect()
    }

    /// Map with the given features' groups dropped and the surviving columns
    /// renumbered densely. Also returns the old indices of kept columns.
    pub fn without(&self, drop: &[usize]) -> (FeatureMap, Vec<usize>) {
        let mut kept = Vec::new();
        let mut groups = Vec::new();
        for (f, g) in self.groups.iter().enumerate() {
            if drop.contains(&f) {
                continue;
            }
            let start = kept.len();
            kept.extend_from_slice(&g.columns);
            groups.push(FeatureGroup {
                name: g.name.clone(),
                columns: (start..kept.len()).collect(),
                thresholds: g.thresholds.clone(),
            });
        }
        let owner = groups
            .iter()
            .enumerate()
            .flat_map(|(f, g)| g.columns.iter().map(move |_| f))
            .collect();
        (FeatureMap { groups, owner }, kept)
    }
}

/// Binarized samples, labels, and the column-to-feature mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDataset {
    bits: BitMatrix,
    labels: Vec<usize>,
    num_classes: usize,
    feature_map: FeatureMap,
    constant_features: Vec<usize>,
}

impl BinaryDataset {
    pub fn new(bits: BitMatrix, labels: Vec<usize>, num_classes: usize, feature_map: FeatureMap) -> Result<Self> {
        if bits.rows() != labels.len() {
            return Err(Error::Dimension {
                expected: bits.rows(),
                got: labels.len(),
            });
        }
        if bits.cols() != feature_map.num_columns() {
            return Err(Error::Dimension {
                expected: feature_map.num_columns(),
                got: bits.cols(),
            });
        }
        if let Some(&y) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::invalid(format!("label {y} out of range for {num_classes} classes")));
        }
        Ok(Self {
            bits,
            labels,
            num_classes,
            feature_map,
            constant_features: Vec::new(),
        })
    }

    /// Dataset with an identity feature map (each column is a feature).
    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R], labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        if let Some(r) = rows.iter().find(|r| r.as_ref().len() != d) {
            return Err(Error::Dimension {
                expected: d,
                got: r.as_ref().len(),
            });
        }
        Self::new(BitMatrix::from_rows(rows, d), labels, num_classes, FeatureMap::identity(d))
    }

    pub(crate) fn with_constant_features(mut self, constant: Vec<usize>) -> Self {
        self.constant_features = constant;
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_columns(&self) -> usize {
        self.bits.cols()
    }

    pub fn num_features(&self) -> usize {
        self.feature_map.num_features()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn bits(&self) -> &BitMatrix {
        &self.bits
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_map(&self) -> &FeatureMap {
        &self.feature_map
    }

    /// Features that were constant on the fit rows (encoded as dead columns).
    pub fn constant_features(&self) -> &[usize] {
        &self.constant_features
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            bits: self.bits.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
            feature_map: self.feature_map.clone(),
            constant_features: self.constant_features.clone(),
        }
    }

    /// Same samples and labels with new bits and mapping.
    pub fn with_bits(&self, bits: BitMatrix, feature_map: FeatureMap) -> Result<Self> {
        Ok(Self::new(bits, self.labels.clone(), self.num_classes, feature_map)?
            .with_constant_features(self.constant_features.clone()))
    }

    /// Empirical class frequencies.
    pub fn class_frequencies(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.num_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        let n = self.len().max(1) as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }

    /// Whether every column group obeys the thermometer ordering
    /// (bit b set implies bit b-1 set) on every sample.
    pub fn is_thermometer_monotone(&self) -> bool {
        (0..self.len()).all(|i| {
            self.feature_map.groups().iter().all(|g| {
                g.columns
                    .windows(2)
                    .all(|w| !self.bits.get(i, w[1]) || self.bits.get(i, w[0]))
            })
        })
    }

    /// One line per sample: the 0/1 column string, a space, the label.
    pub fn export_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * (self.num_columns() + 4));
        for i in 0..self.len() {
            for j in 0..self.num_columns() {
                out.push(if self.bits.get(i, j) { '1' } else { '0' });
            }
            let _ = writeln!(out, " {}", self.labels[i]);
        }
        out
    }
}

/// A dataset split and encoded with thresholds fitted on its train part.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub name: String,
    pub raw: RawDataset,
    pub split: Split,
    pub encoder: ThermometerEncoder,
    pub train: BinaryDataset,
    pub val: BinaryDataset,
    pub test: BinaryDataset,
}

impl PreparedData {
    pub fn new(raw: RawDataset, bins: usize, seed: u64) -> Result<Self> {
        let split = stratified_split(&raw.labels, raw.num_classes(), DEFAULT_FRACTIONS, seed)?;
        let encoder = ThermometerEncoder::fit(&raw, bins, &split.train)?;
        let all = encoder.encode(&raw)?;
        Ok(Self {
            name: raw.name.clone(),
            train: all.subset(&split.train),
            val: all.subset(&split.val),
            test: all.subset(&split.test),
            raw,
            split,
            encoder,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_map_validation() {
        let g = |c: Vec<usize>, t: Vec<f64>| FeatureGroup {
            name: String::new(),
            columns: c,
            thresholds: t,
        };
        assert!(FeatureMap::new(vec![g(vec![0, 1], vec![1.0, 2.0]), g(vec![2], vec![0.5])], 3).is_ok());
        assert!(FeatureMap::new(vec![g(vec![0, 1], vec![1.0, 2.0]), g(vec![1], vec![0.5])], 2).is_err());
        assert!(FeatureMap::new(vec![g(vec![0], vec![1.0])], 2).is_err());
        assert!(FeatureMap::new(vec![g(vec![0, 1], vec![2.0, 2.0])], 2).is_err());
    }

    #[test]
    fn dropping_features_renumbers_columns() {
        let g = |c: Vec<usize>| FeatureGroup {
            name: String::new(),
            thresholds: (0..c.len()).map(|b| b as f64).collect(),
            columns: c,
        };
        let m = FeatureMap::new(vec![g(vec![0, 1]), g(vec![2, 3, 4]), g(vec![5])], 6).unwrap();
        let (m2, kept) = m.without(&[1]);
        assert_eq!(kept, vec![0, 1, 5]);
        assert_eq!(m2.columns(1), &[2]);
        assert_eq!(m2.num_columns(), 3);
        assert_eq!(m2.owner(2), 1);
    }

    #[test]
    fn export_format() {
        let d = BinaryDataset::from_rows(&[vec![true, false], vec![false, false]], vec![1, 0], 2).unwrap();
        assert_eq!(d.export_text(), "10 1\n00 0\n");
    }
}
