//! Model-free filters on the binarized train split.
//!
//! Statistics are computed per binary column and summed over each
//! feature's column group.

use rand::Rng as _;

use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::rng::rng_from;
use crate::weights::aggregate_vector;

/// Contingency counts of one binary column against the labels:
/// `counts[v][c]` for column value `v`.
pub fn contingency(data: &BinaryDataset, col: usize) -> [Vec<usize>; 2] {
    let mut counts = [vec![0; data.num_classes()], vec![0; data.num_classes()]];
    for (i, &y) in data.labels().iter().enumerate() {
        counts[data.bits().get(i, col) as usize][y] += 1;
    }
    counts
}

fn nonempty(data: &BinaryDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::invalid("filter scorers need a non-empty train split"));
    }
    Ok(())
}

/// Plug-in mutual information (nats) between one column and the label.
pub fn mutual_info_column(counts: &[Vec<usize>; 2]) -> f64 {
    let n: usize = counts.iter().flatten().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let row: Vec<f64> = counts.iter().map(|r| r.iter().sum::<usize>() as f64).collect();
    let classes = counts[0].len();
    let mut mi = 0.0;
    for v in 0..2 {
        for c in 0..classes {
            let joint = counts[v][c] as f64;
            if joint == 0.0 {
                continue;
            }
            let col = (counts[0][c] + counts[1][c]) as f64;
            mi += joint / n * (joint * n / (row[v] * col)).ln();
        }
    }
    mi.max(0.0)
}

/// Pearson chi-squared statistic of one 2 x C table; cells with zero
/// expected count contribute nothing.
pub fn chi2_column(counts: &[Vec<usize>; 2]) -> f64 {
    let n: usize = counts.iter().flatten().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let classes = counts[0].len();
    let mut stat = 0.0;
    for row in counts {
        let r = row.iter().sum::<usize>() as f64;
        for c in 0..classes {
            let expected = r * (counts[0][c] + counts[1][c]) as f64 / n;
            if expected > 0.0 {
                let diff = row[c] as f64 - expected;
                stat += diff * diff / expected;
            }
        }
    }
    stat
}

pub fn mutual_info(data: &BinaryDataset) -> Result<Vec<f64>> {
    nonempty(data)?;
    let cols: Vec<f64> = (0..data.num_columns())
        .map(|j| mutual_info_column(&contingency(data, j)))
        .collect();
    aggregate_vector(&cols, data.feature_map())
}

pub fn chi2(data: &BinaryDataset) -> Result<Vec<f64>> {
    nonempty(data)?;
    let cols: Vec<f64> = (0..data.num_columns())
        .map(|j| chi2_column(&contingency(data, j)))
        .collect();
    aggregate_vector(&cols, data.feature_map())
}

/// Bernoulli variance `p (1 - p)` per column, summed per feature.
pub fn variance(data: &BinaryDataset) -> Result<Vec<f64>> {
    nonempty(data)?;
    let n = data.len() as f64;
    let cols: Vec<f64> = (0..data.num_columns())
        .map(|j| {
            let p = data.bits().column_ones(j) as f64 / n;
            p * (1.0 - p)
        })
        .collect();
    aggregate_vector(&cols, data.feature_map())
}

/// Uniform scores in `[0, 1)`, one per original feature.
pub fn random(num_features: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from(seed, &[0x4A4D]);
    (0..num_features).map(|_| rng.random::<f64>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> BinaryDataset {
        // column 0 copies the label, column 1 is constant, column 2 is noise
        let rows = [[false, true, false], [false, true, true], [true, true, false], [true, true, true]];
        BinaryDataset::from_rows(&rows, vec![0, 0, 1, 1], 2).unwrap()
    }

    #[test]
    fn informative_column_wins() {
        let d = toy();
        let mi = mutual_info(&d).unwrap();
        assert!((mi[0] - 2f64.ln()).abs() < 1e-12);
        assert_eq!(mi[1], 0.0);
        assert!(mi[2].abs() < 1e-12);
        let c = chi2(&d).unwrap();
        assert!((c[0] - 4.0).abs() < 1e-12);
        assert_eq!(c[1], 0.0);
        assert_eq!(variance(&d).unwrap(), vec![0.25, 0.0, 0.25]);
    }

    #[test]
    fn random_is_seeded() {
        assert_eq!(random(5, 3), random(5, 3));
        assert_ne!(random(5, 3), random(5, 4));
        assert!(random(50, 1).iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn empty_split_is_rejected() {
        let d = toy().subset(&[]);
        assert!(chi2(&d).is_err());
    }
}
