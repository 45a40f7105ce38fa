use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Real-valued samples with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub name: String,
    pub feature_names: Vec<String>,
    /// Row-major, `n_samples x n_features`.
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

/// Which column of a delimited file carries the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

impl From<&str> for LabelColumn {
    fn from(s: &str) -> Self {
        LabelColumn::Name(s.to_string())
    }
}

impl RawDataset {
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Dimension {
                expected: features.len(),
                got: labels.len(),
            });
        }
        if let Some(r) = features.iter().find(|r| r.len() != feature_names.len()) {
            return Err(Error::Dimension {
                expected: feature_names.len(),
                got: r.len(),
            });
        }
        if let Some(&y) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::invalid(format!("label {y} out of range for {num_classes} classes")));
        }
        Ok(Self {
            name: name.into(),
            feature_names,
            features,
            labels,
            class_names: (0..num_classes).map(|c| c.to_string()).collect(),
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn column(&self, f: usize) -> impl Iterator<Item = f64> + '_ {
        self.features.iter().map(move |r| r[f])
    }
}

/// Reads a delimited text file with a header row.
///
/// Labels are mapped to `0..C` in order of first appearance.
pub fn load_csv(path: impl AsRef<Path>, label: impl Into<LabelColumn>) -> Result<RawDataset> {
    load_delimited(path, label, b',')
}

pub fn load_delimited(path: impl AsRef<Path>, label: impl Into<LabelColumn>, delimiter: u8) -> Result<RawDataset> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_delimited(&text, &name, label.into(), delimiter, path)
}

pub(crate) fn parse_delimited(
    text: &str,
    name: &str,
    label: LabelColumn,
    delimiter: u8,
    origin: &Path,
) -> Result<RawDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.len() < 2 {
        return Err(Error::invalid(format!(
            "{}: need at least one feature and one label column",
            origin.display()
        )));
    }
    let label_idx = match &label {
        LabelColumn::Name(n) => header
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| Error::invalid(format!("{}: no label column {n:?}", origin.display())))?,
        LabelColumn::Index(i) if *i < header.len() => *i,
        LabelColumn::Index(i) => {
            return Err(Error::invalid(format!("{}: label column index {i} out of range", origin.display())))
        }
        LabelColumn::Last => header.len() - 1,
    };

    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();

    for (row_no, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row_no + 2;
        if rec.len() != header.len() {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let mut row = Vec::with_capacity(feature_names.len());
        for (i, cell) in rec.iter().enumerate() {
            if i == label_idx {
                let next = class_names.len();
                let id = *class_index.entry(cell.to_string()).or_insert_with(|| {
                    class_names.push(cell.to_string());
                    next
                });
                labels.push(id);
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    path: origin.to_path_buf(),
                    line,
                    message: format!("non-numeric value {cell:?} in column {:?}", header[i]),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        path: origin.to_path_buf(),
                        line,
                        message: format!("non-finite value in column {:?}", header[i]),
                    });
                }
                row.push(v);
            }
        }
        features.push(row);
    }

    if features.is_empty() {
        return Err(Error::invalid(format!("{}: no data rows", origin.display())));
    }
    if class_names.len() < 2 {
        return Err(Error::invalid(format!(
            "{}: label column has a single class",
            origin.display()
        )));
    }
    Ok(RawDataset {
        name: name.to_string(),
        feature_names,
        features,
        labels,
        class_names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_rows_in_order() {
        let f = write("a,b,y\n1,2,a\n3,4.5,b\n-1,0,a\n");
        let d = load_csv(f.path(), "y").unwrap();
        assert_eq!(d.features, vec![vec![1.0, 2.0], vec![3.0, 4.5], vec![-1.0, 0.0]]);
        assert_eq!(d.labels, vec![0, 1, 0]);
        assert_eq!(d.class_names, vec!["a", "b"]);
        assert_eq!(d.feature_names, vec!["a", "b"]);
    }

    #[test]
    fn label_in_the_middle_and_last() {
        let f = write("y,a,b\nq,1,2\np,3,4\n");
        let d = load_csv(f.path(), LabelColumn::Index(0)).unwrap();
        assert_eq!(d.labels, vec![0, 1]);
        let f = write("a,b,y\n1,2,z\n3,4,w\n");
        let d = load_csv(f.path(), LabelColumn::Last).unwrap();
        assert_eq!(d.features[1], vec![3.0, 4.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(load_csv("/definitely/missing.csv", "y"), Err(Error::Io { .. })));
        let f = write("a,b,y\n");
        assert!(load_csv(f.path(), "y").is_err());
        let f = write("a,b,y\n1,x,0\n2,3,1\n");
        assert!(matches!(load_csv(f.path(), "y"), Err(Error::Parse { line: 2, .. })));
        let f = write("a,b,y\n1,2,0\n2,3,0\n");
        assert!(load_csv(f.path(), "y").is_err());
        let f = write("a,b,y\n1,2,0\n2,3,1\n");
        assert!(load_csv(f.path(), "label").is_err());
    }
}
