use std::fmt;
use std::str::FromStr;

use rand::{Rng as _, RngCore};
use serde::{Deserialize, Serialize};

use crate::data::BinaryDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Keep only the top-k features live, mask the rest to 0.
    Insertion,
    /// Mask the top-k features to 0.
    Deletion,
    /// Drop the top-k features' columns entirely.
    Roar,
    /// Replace the top-k features with draws from their train marginal.
    Road,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [Protocol::Insertion, Protocol::Deletion, Protocol::Roar, Protocol::Road];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Insertion => "insertion",
            Protocol::Deletion => "deletion",
            Protocol::Roar => "roar",
            Protocol::Road => "road",
        }
    }

    pub(crate) fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|p| p.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown protocol {s:?}; expected insertion, deletion, roar or road")))
    }
}

/// Parses protocol names; `all` expands to every protocol.
pub fn parse_protocols<S: AsRef<str>>(names: &[S]) -> Result<Vec<Protocol>> {
    let mut out = Vec::new();
    for n in names {
        let ps = if n.as_ref().eq_ignore_ascii_case("all") {
            Protocol::ALL.to_vec()
        } else {
            vec![n.as_ref().parse()?]
        };
        for p in ps {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

fn check_ranking(ranking: &[usize], n: usize, k: usize) -> Result<()> {
    if ranking.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: ranking.len(),
        });
    }
    let mut seen = vec![false; n];
    for &f in ranking {
        if f >= n || std::mem::replace(&mut seen[f], true) {
            return Err(Error::invalid("ranking is not a permutation of the features"));
        }
    }
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds the {n} features")));
    }
    Ok(())
}

/// Transforms `data` for one protocol at budget `k`. `marginal` is the
/// train split ROAD samples replacement values from; a replacement copies
/// the feature's whole column group from a random train row, which is the
/// thermometer code of a value drawn from the feature's train marginal.
pub fn apply_protocol<R: RngCore + ?Sized>(
    data: &BinaryDataset,
    marginal: &BinaryDataset,
    ranking: &[usize],
    k: usize,
    protocol: Protocol,
    rng: &mut R,
) -> Result<BinaryDataset> {
    let map = data.feature_map();
    check_ranking(ranking, map.num_features(), k)?;
    let top = &ranking[..k];
    let cols_of = |fs: &[usize]| -> Vec<usize> { fs.iter().flat_map(|&f| map.columns(f).iter().copied()).collect() };
    match protocol {
        Protocol::Insertion | Protocol::Deletion => {
            let masked = if protocol == Protocol::Deletion {
                cols_of(top)
            } else {
                cols_of(&ranking[k..])
            };
            let mut bits = data.bits().clone();
            let mask = bits.column_mask(masked);
            bits.clear_masked(&mask);
            data.with_bits(bits, map.clone())
        }
        Protocol::Roar => {
            let (kept_map, kept_cols) = map.without(top);
            let bits = data.bits().select_cols(&kept_cols);
            BinaryDataset::new(bits, data.labels().to_vec(), data.num_classes(), kept_map)
        }
        Protocol::Road => {
            if marginal.num_columns() != data.num_columns() {
                return Err(Error::Dimension {
                    expected: data.num_columns(),
                    got: marginal.num_columns(),
                });
            }
            if k > 0 && marginal.is_empty() {
                return Err(Error::invalid("ROAD needs a non-empty marginal split"));
            }
            let mut bits = data.bits().clone();
            for i in 0..data.len() {
                for &f in top {
                    let r = rng.random_range(0..marginal.len());
                    for &c in map.columns(f) {
                        bits.set(i, c, marginal.bits().get(r, c));
                    }
                }
            }
            data.with_bits(bits, map.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureGroup, FeatureMap};
    use crate::rng::rng_from;

    fn group(name: &str, cols: &[usize]) -> FeatureGroup {
        FeatureGroup {
            name: name.into(),
            columns: cols.to_vec(),
            thresholds: (1..=cols.len()).map(|t| t as f64).collect(),
        }
    }

    fn grouped() -> BinaryDataset {
        // feature 0 -> cols 0,1 ; feature 1 -> col 2 ; feature 2 -> cols 3,4
        let map = FeatureMap::new(
            vec![
                group("a", &[0, 1]),
                group("b", &[2]),
                group("c", &[3, 4]),
            ],
            5,
        )
        .unwrap();
        let rows = [
            [true, true, true, true, false],
            [true, false, false, true, true],
            [false, false, true, false, false],
        ];
        let bits = crate::bits::BitMatrix::from_rows(&rows, 5);
        BinaryDataset::new(bits, vec![0, 1, 0], 2, map).unwrap()
    }

    #[test]
    fn masking_protocols() {
        let d = grouped();
        let mut rng = rng_from(1, &[]);
        let ranking = [2, 0, 1];
        let del0 = apply_protocol(&d, &d, &ranking, 0, Protocol::Deletion, &mut rng).unwrap();
        assert_eq!(del0, d);
        let ins_all = apply_protocol(&d, &d, &ranking, 3, Protocol::Insertion, &mut rng).unwrap();
        assert_eq!(ins_all, d);
        let del1 = apply_protocol(&d, &d, &ranking, 1, Protocol::Deletion, &mut rng).unwrap();
        assert!((0..3).all(|i| !del1.bits().get(i, 3) && !del1.bits().get(i, 4)));
        assert_eq!(del1.bits().row_bools(0)[..3], [true, true, true]);
        let ins1 = apply_protocol(&d, &d, &ranking, 1, Protocol::Insertion, &mut rng).unwrap();
        assert_eq!(ins1.bits().row_bools(1), vec![false, false, false, true, true]);
    }

    #[test]
    fn roar_shrinks() {
        let d = grouped();
        let mut rng = rng_from(1, &[]);
        let r = apply_protocol(&d, &d, &[2, 0, 1], 1, Protocol::Roar, &mut rng).unwrap();
        assert_eq!((r.num_columns(), r.num_features()), (3, 2));
        assert_eq!(r.bits().row_bools(1), vec![true, false, false]);
        let none = apply_protocol(&d, &d, &[2, 0, 1], 3, Protocol::Roar, &mut rng).unwrap();
        assert_eq!((none.num_columns(), none.len()), (0, 3));
    }

    #[test]
    fn road_copies_whole_groups() {
        let d = grouped();
        let mut rng = rng_from(4, &[]);
        let r = apply_protocol(&d, &d, &[0, 2, 1], 2, Protocol::Road, &mut rng).unwrap();
        assert!(r.is_thermometer_monotone());
        for i in 0..3 {
            let row = r.bits().row_bools(i);
            assert_eq!(row[2], d.bits().get(i, 2));
            assert!((0..3).any(|j| d.bits().row_bools(j)[..2] == row[..2]));
        }
    }

    #[test]
    fn bad_inputs() {
        let d = grouped();
        let mut rng = rng_from(1, &[]);
        assert!(apply_protocol(&d, &d, &[0, 1, 2], 4, Protocol::Deletion, &mut rng).is_err());
        assert!(apply_protocol(&d, &d, &[0, 0, 2], 1, Protocol::Deletion, &mut rng).is_err());
        assert_eq!(parse_protocols(&["all"]).unwrap().len(), 4);
        assert!("roa".parse::<Protocol>().is_err());
    }
}
