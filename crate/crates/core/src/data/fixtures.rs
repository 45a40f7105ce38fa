//! Bundled datasets and name resolution.
//!
//! Iris, Digits (8x8), Wine and Breast Cancer ship inside the crate. Any other
//! named dataset (Banknote, Transfusion, ...) is read from
//! `$TMFS_DATA_DIR/<name>.csv` with the label in the last column.

use std::path::{Path, PathBuf};

use super::raw::parse_delimited;
use super::{generate_feature_interaction, generate_hierarchical_bool, generate_parity, LabelColumn, RawDataset};
use crate::error::{Error, Result};

pub const DATA_DIR_ENV: &str = "TMFS_DATA_DIR";

struct Bundled {
    name: &'static str,
    label: &'static str,
    text: &'static str,
}

const BUNDLED: &[Bundled] = &[
    Bundled {
        name: "iris",
        label: "species",
        text: include_str!("../../data/iris.csv"),
    },
    Bundled {
        name: "digits",
        label: "target",
        text: include_str!("../../data/digits.csv"),
    },
    Bundled {
        name: "wine",
        label: "target",
        text: include_str!("../../data/wine.csv"),
    },
    Bundled {
        name: "breast_cancer",
        label: "target",
        text: include_str!("../../data/breast_cancer.csv"),
    },
];

const GENERATED: &[&str] = &["parity", "hierarchical_bool", "feature_interaction"];

/// Names accepted by [`fixture`] without touching the filesystem.
pub fn fixture_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|b| b.name).chain(GENERATED.iter().copied()).collect()
}

/// Lowercase name with `-` and spaces mapped to `_`.
pub fn canonical_name(name: &str) -> String {
    name.trim().to_ascii_lowercase().replace(['-', ' '], "_")
}

/// Loads a bundled or generated dataset (generators use n=500, d=20 and,
/// for parity, k=5).
pub fn fixture(name: &str, seed: u64) -> Result<RawDataset> {
    let key = canonical_name(name);
    if let Some(b) = BUNDLED.iter().find(|b| b.name == key) {
        return parse_delimited(b.text, b.name, LabelColumn::Name(b.label.into()), b',', Path::new(b.name));
    }
    match key.as_str() {
        "parity" => generate_parity(500, 20, 5, seed),
        "hierarchical_bool" => generate_hierarchical_bool(500, 20, seed),
        "feature_interaction" => generate_feature_interaction(500, 20, seed),
        _ => Err(Error::invalid(format!("unknown dataset {name:?}"))),
    }
}

/// Resolves a dataset by explicit path, bundled/generated name, or a CSV in
/// the data directory (`data_dir`, else `$TMFS_DATA_DIR`).
pub fn resolve_dataset(
    name: &str,
    path: Option<&Path>,
    label: Option<LabelColumn>,
    data_dir: Option<&Path>,
    seed: u64,
) -> Result<RawDataset> {
    if let Some(p) = path {
        let mut d = super::load_csv(p, label.unwrap_or(LabelColumn::Last))?;
        d.name = name.to_string();
        return Ok(d);
    }
    match fixture(name, seed) {
        Ok(d) => Ok(d),
        Err(Error::InvalidInput(_)) => {
            let dir: Option<PathBuf> = data_dir
                .map(Path::to_path_buf)
                .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from));
            let dir = dir.ok_or_else(|| {
                Error::invalid(format!(
                    "dataset {name:?} is not bundled; set {DATA_DIR_ENV} or give a path"
                ))
            })?;
            let p = dir.join(format!("{}.csv", canonical_name(name)));
            let mut d = super::load_csv(&p, label.unwrap_or(LabelColumn::Last))?;
            d.name = canonical_name(name);
            Ok(d)
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_shapes() {
        let iris = fixture("iris", 0).unwrap();
        assert_eq!((iris.n_samples(), iris.n_features(), iris.num_classes()), (150, 4, 3));
        assert_eq!(iris.class_names[0], "setosa");
        let digits = fixture("Digits", 0).unwrap();
        assert_eq!((digits.n_samples(), digits.n_features(), digits.num_classes()), (1797, 64, 10));
        let wine = fixture("wine", 0).unwrap();
        assert_eq!((wine.n_samples(), wine.n_features(), wine.num_classes()), (178, 13, 3));
        let bc = fixture("breast-cancer", 0).unwrap();
        assert_eq!((bc.n_samples(), bc.n_features(), bc.num_classes()), (569, 30, 2));
        let p = fixture("parity", 1).unwrap();
        assert_eq!((p.n_samples(), p.n_features()), (500, 20));
    }

    #[test]
    fn data_dir_lookup() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("banknote.csv"), "a,b,class\n1,2,0\n3,4,1\n5,6,1\n").unwrap();
        let d = resolve_dataset("banknote", None, None, Some(dir.path()), 0).unwrap();
        assert_eq!(d.n_samples(), 3);
        assert_eq!(d.name, "banknote");
        assert!(resolve_dataset("nothing_here", None, None, Some(dir.path()), 0).is_err());
    }
}
