//! Persisted benchmark tables.
//!
//! Every record carries the schema version and the hash of the config that
//! produced it. Wall-clock timings live in their own file so the other
//! tables stay byte-identical across reruns.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::curve::PruningCurve;
use super::protocol::Protocol;
use crate::error::{Error, Result};
use crate::scorers::{FeatureScore, MethodSpec};
use crate::weights::Variant;

pub const SCHEMA_VERSION: u32 = 1;

pub const CURVES_JSONL: &str = "curves.jsonl";
pub const CURVES_CSV: &str = "curves.csv";
pub const SCORES_JSONL: &str = "scores.jsonl";
pub const SCORES_CSV: &str = "scores.csv";
pub const TIMINGS_CSV: &str = "timings.csv";
pub const BASELINE_JSONL: &str = "baseline.jsonl";
pub const BASELINE_CSV: &str = "baseline.csv";
pub const FAILURES_CSV: &str = "failures.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub schema_version: u32,
    pub config_hash: String,
    pub dataset: String,
    pub method_id: String,
    pub variant: Option<Variant>,
    pub label: String,
    pub category: String,
    pub protocol: Protocol,
    pub trials: usize,
    pub k_values: Vec<usize>,
    pub mean_acc: Vec<f64>,
    pub std_acc: Vec<f64>,
    pub val_mean_acc: Vec<f64>,
    pub val_std_acc: Vec<f64>,
    pub auc: f64,
}

impl CurveRecord {
    pub fn new(spec: MethodSpec, curve: PruningCurve, trials: usize, config_hash: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config_hash: config_hash.to_string(),
            dataset: curve.dataset,
            method_id: spec.method.id().to_string(),
            variant: spec.variant,
            label: spec.label(),
            category: spec.method.category().as_str().to_string(),
            protocol: curve.protocol,
            trials,
            k_values: curve.k_values,
            mean_acc: curve.mean_acc,
            std_acc: curve.std_acc,
            val_mean_acc: curve.val_mean_acc,
            val_std_acc: curve.val_std_acc,
            auc: curve.auc,
        }
    }

    pub fn key(&self) -> (String, String, Protocol) {
        (self.dataset.clone(), self.label.clone(), self.protocol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub schema_version: u32,
    pub config_hash: String,
    pub dataset: String,
    pub method_id: String,
    pub variant: Option<Variant>,
    pub label: String,
    pub category: String,
    pub feature_names: Vec<String>,
    pub scores: Vec<f64>,
    pub ranking: Vec<usize>,
}

impl ScoreRecord {
    pub fn new(dataset: &str, spec: MethodSpec, score: &FeatureScore, feature_names: Vec<String>, config_hash: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config_hash: config_hash.to_string(),
            dataset: dataset.to_string(),
            method_id: spec.method.id().to_string(),
            variant: spec.variant,
            label: spec.label(),
            category: spec.method.category().as_str().to_string(),
            feature_names,
            scores: score.scores.clone(),
            ranking: score.ranking.clone(),
        }
    }

    pub fn key(&self) -> (String, String) {
        (self.dataset.clone(), self.label.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub config_hash: String,
    pub dataset: String,
    pub label: String,
    pub rank_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub schema_version: u32,
    pub config_hash: String,
    pub dataset: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub n_columns: usize,
    pub n_classes: usize,
    pub num_clauses: usize,
    pub threshold: u32,
    pub specificity: f64,
    pub epochs: usize,
    pub test_acc: f64,
    pub test_macro_f1: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub dataset: String,
    pub label: String,
    pub protocol: Option<Protocol>,
    pub error: String,
}

/// Everything a benchmark directory holds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub curves: Vec<CurveRecord>,
    pub scores: Vec<ScoreRecord>,
    pub timings: Vec<TimingRecord>,
    pub baselines: Vec<BaselineRecord>,
    pub failures: Vec<FailureRecord>,
}

fn variant_str(v: Option<Variant>) -> &'static str {
    v.map(Variant::as_str).unwrap_or("")
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(v) => out.push(v),
            // a run killed mid-write can leave a torn final line
            Err(e) => log::warn!("{}:{}: skipping unreadable record: {e}", path.display(), i + 1),
        }
    }
    Ok(out)
}

pub(crate) fn append_jsonl<T: Serialize>(path: &Path, rec: &T) -> Result<()> {
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let line = serde_json::to_string(rec)?;
    writeln!(f, "{line}").map_err(|e| Error::io(path, e))
}

fn write_jsonl<T: Serialize>(path: &Path, recs: &[T]) -> Result<()> {
    let mut s = String::new();
    for r in recs {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_writer(fs::File::create(path).map_err(|e| Error::io(path, e))?))
}

impl ResultTable {
    /// Canonical record order: dataset, method label, protocol.
    pub fn sort(&mut self) {
        self.curves.sort_by(|a, b| a.key().cmp(&b.key()));
        self.scores.sort_by(|a, b| a.key().cmp(&b.key()));
        self.timings
            .sort_by(|a, b| (&a.dataset, &a.label).cmp(&(&b.dataset, &b.label)));
        self.baselines.sort_by(|a, b| a.dataset.cmp(&b.dataset));
        self.failures.sort_by(|a, b| {
            (&a.dataset, &a.label, a.protocol, &a.error).cmp(&(&b.dataset, &b.label, b.protocol, &b.error))
        });
    }

    /// Reads a result directory. Missing files count as empty tables.
    pub fn load(dir: &Path) -> Result<Self> {
        let mut t = Self {
            curves: read_jsonl(&dir.join(CURVES_JSONL))?,
            scores: read_jsonl(&dir.join(SCORES_JSONL))?,
            baselines: read_jsonl(&dir.join(BASELINE_JSONL))?,
            ..Default::default()
        };
        let timings = dir.join(TIMINGS_CSV);
        if timings.exists() {
            let mut r = csv::Reader::from_path(&timings)?;
            for rec in r.deserialize() {
                t.timings.push(rec?);
            }
        }
        Ok(t)
    }

    /// Distinct config hashes across all records.
    pub fn config_hashes(&self) -> Vec<String> {
        let mut h: Vec<String> = self
            .curves
            .iter()
            .map(|c| c.config_hash.clone())
            .chain(self.scores.iter().map(|s| s.config_hash.clone()))
            .chain(self.baselines.iter().map(|b| b.config_hash.clone()))
            .chain(self.timings.iter().map(|t| t.config_hash.clone()))
            .collect();
        h.sort();
        h.dedup();
        h
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty() && self.scores.is_empty() && self.baselines.is_empty()
    }

    /// Writes every table in canonical order.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut t = self.clone();
        t.sort();
        write_jsonl(&dir.join(CURVES_JSONL), &t.curves)?;
        write_jsonl(&dir.join(SCORES_JSONL), &t.scores)?;
        write_jsonl(&dir.join(BASELINE_JSONL), &t.baselines)?;

        let mut w = csv_writer(&dir.join(CURVES_CSV))?;
        w.write_record([
            "config_hash", "dataset", "method", "variant", "category", "protocol", "k", "mean_acc", "std_acc",
            "val_mean_acc", "val_std_acc", "auc",
        ])?;
        for c in &t.curves {
            for i in 0..c.k_values.len() {
                w.write_record([
                    c.config_hash.clone(),
                    c.dataset.clone(),
                    c.method_id.clone(),
                    variant_str(c.variant).to_string(),
                    c.category.clone(),
                    c.protocol.to_string(),
                    c.k_values[i].to_string(),
                    c.mean_acc[i].to_string(),
                    c.std_acc[i].to_string(),
                    c.val_mean_acc[i].to_string(),
                    c.val_std_acc[i].to_string(),
                    c.auc.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(dir, e))?;

        let mut w = csv_writer(&dir.join(SCORES_CSV))?;
        w.write_record([
            "config_hash", "dataset", "method", "variant", "category", "feature", "feature_name", "score", "rank",
        ])?;
        for s in &t.scores {
            let mut rank = vec![0; s.ranking.len()];
            for (pos, &f) in s.ranking.iter().enumerate() {
                rank[f] = pos + 1;
            }
            for f in 0..s.scores.len() {
                w.write_record([
                    s.config_hash.clone(),
                    s.dataset.clone(),
                    s.method_id.clone(),
                    variant_str(s.variant).to_string(),
                    s.category.clone(),
                    f.to_string(),
                    s.feature_names.get(f).cloned().unwrap_or_default(),
                    s.scores[f].to_string(),
                    rank[f].to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(dir, e))?;

        let mut w = csv_writer(&dir.join(TIMINGS_CSV))?;
        for r in &t.timings {
            w.serialize(r)?;
        }
        if t.timings.is_empty() {
            w.write_record(["config_hash", "dataset", "label", "rank_time"])?;
        }
        w.flush().map_err(|e| Error::io(dir, e))?;

        let mut w = csv_writer(&dir.join(BASELINE_CSV))?;
        for r in &t.baselines {
            w.serialize(r)?;
        }
        if t.baselines.is_empty() {
            w.write_record([
                "schema_version", "config_hash", "dataset", "n_samples", "n_features", "n_columns", "n_classes",
                "num_clauses", "threshold", "specificity", "epochs", "test_acc", "test_macro_f1", "val_acc",
            ])?;
        }
        w.flush().map_err(|e| Error::io(dir, e))?;

        let mut w = csv_writer(&dir.join(FAILURES_CSV))?;
        w.write_record(["dataset", "label", "protocol", "error"])?;
        for f in &t.failures {
            w.write_record([
                f.dataset.as_str(),
                f.label.as_str(),
                f.protocol.map(Protocol::as_str).unwrap_or(""),
                f.error.as_str(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(dir, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_survive_a_reload_bit_for_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(BASELINE_JSONL);
        let rec = BaselineRecord {
            schema_version: SCHEMA_VERSION,
            config_hash: "h".into(),
            dataset: "d".into(),
            n_samples: 1,
            n_features: 1,
            n_columns: 1,
            n_classes: 2,
            num_clauses: 4,
            threshold: 1,
            specificity: 3.0,
            epochs: 1,
            test_acc: 0.23676880222841226,
            test_macro_f1: 0.1 + 0.2,
            val_acc: 1.0 / 3.0,
        };
        append_jsonl(&path, &rec).unwrap();
        let back: Vec<BaselineRecord> = read_jsonl(&path).unwrap();
        assert_eq!(back[0].test_acc.to_bits(), rec.test_acc.to_bits());
        assert_eq!(back, vec![rec]);
    }
}
