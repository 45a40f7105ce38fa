//! Run configuration: TOML file, flag overrides, validation and hashing.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tmfs_core::data::{canonical_name, resolve_dataset, LabelColumn};
use tmfs_core::eval::{dataset_seed, parse_protocols, BenchmarkConfig, BenchmarkDataset, Protocol};
use tmfs_core::scorers::{parse_methods, MethodSpec, ScorerConfig};
use tmfs_core::tm::{tuned_settings, HyperParams};
use tmfs_core::PreparedData;

use crate::user;

pub const CONFIG_SCHEMA: u32 = 1;
pub const OUTPUT_ENV: &str = "TMFS_OUTPUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Header name or zero-based index; the last column when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
}

impl DatasetEntry {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            path: None,
            label_column: None,
            s: None,
            t: None,
        }
    }

    fn label(&self) -> Option<LabelColumn> {
        self.label_column.as_ref().map(|l| match l.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(l.clone()),
        })
    }

    /// `(s, T)`: explicit values first, then the tuned table, then (3, 600).
    pub fn settings(&self) -> (f64, u32) {
        let (s, t) = tuned_settings(&self.name).unwrap_or((3.0, 600));
        (self.s.unwrap_or(s), self.t.unwrap_or(t))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub trials: usize,
    pub bins: usize,
    pub epochs: usize,
    pub num_clauses: usize,
    pub methods: Vec<String>,
    pub protocols: Vec<String>,
    pub k_grid: Option<Vec<usize>>,
    /// Worker threads; every core when absent.
    pub parallelism: Option<usize>,
    pub data_dir: Option<PathBuf>,
    pub scorer: ScorerConfig,
    pub datasets: Vec<DatasetEntry>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA,
            seed: 42,
            output_dir: PathBuf::from("results"),
            trials: 10,
            bins: 10,
            epochs: 30,
            num_clauses: 500,
            methods: vec!["all".into()],
            protocols: vec!["all".into()],
            k_grid: None,
            parallelism: None,
            data_dir: None,
            scorer: ScorerConfig::default(),
            datasets: Vec::new(),
        }
    }
}

/// What the hash covers: everything that can change a number in the output.
#[derive(Serialize)]
struct HashView<'a> {
    schema_version: u32,
    seed: u64,
    trials: usize,
    bins: usize,
    epochs: usize,
    num_clauses: usize,
    methods: Vec<String>,
    protocols: Vec<Protocol>,
    k_grid: &'a Option<Vec<usize>>,
    scorer: &'a ScorerConfig,
    datasets: Vec<(String, Option<&'a Path>, &'a Option<String>, f64, u32)>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| user(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| user(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA {
            return Err(user(format!(
                "config schema_version {} is not supported (expected {CONFIG_SCHEMA})",
                self.schema_version
            )));
        }
        if self.datasets.is_empty() {
            return Err(user("no datasets configured"));
        }
        if self.trials == 0 || self.bins == 0 || self.epochs == 0 || self.num_clauses == 0 {
            return Err(user("trials, bins, epochs and num_clauses must all be >= 1"));
        }
        if self.parallelism == Some(0) {
            return Err(user("parallelism must be >= 1"));
        }
        for d in &self.datasets {
            let (s, t) = d.settings();
            if !(s.is_finite() && s > 0.0) || t == 0 {
                return Err(user(format!("dataset {}: s and T must be positive", d.name)));
            }
        }
        self.scorer.validate().map_err(|e| user(e.to_string()))?;
        self.method_specs()?;
        self.protocol_list()?;
        Ok(())
    }

    pub fn method_specs(&self) -> Result<Vec<MethodSpec>> {
        parse_methods(&self.methods).map_err(|e| user(e.to_string()))
    }

    pub fn protocol_list(&self) -> Result<Vec<Protocol>> {
        parse_protocols(&self.protocols).map_err(|e| user(e.to_string()))
    }

    /// First 16 hex digits of SHA-256 over the result-relevant settings.
    pub fn hash(&self) -> Result<String> {
        let view = HashView {
            schema_version: self.schema_version,
            seed: self.seed,
            trials: self.trials,
            bins: self.bins,
            epochs: self.epochs,
            num_clauses: self.num_clauses,
            methods: self.method_specs()?.iter().map(MethodSpec::label).collect(),
            protocols: self.protocol_list()?,
            k_grid: &self.k_grid,
            scorer: &self.scorer,
            datasets: self
                .datasets
                .iter()
                .map(|d| {
                    let (s, t) = d.settings();
                    (canonical_name(&d.name), d.path.as_deref(), &d.label_column, s, t)
                })
                .collect(),
        };
        let digest = Sha256::digest(serde_json::to_vec(&view)?);
        Ok(hex::encode(digest)[..16].to_string())
    }

    pub fn params_for(&self, entry: &DatasetEntry, num_classes: usize) -> HyperParams {
        let (s, t) = entry.settings();
        HyperParams::new(self.num_clauses, t, s, num_classes)
            .with_balanced_clauses()
            .with_epochs(self.epochs)
    }

    /// Loads, splits and encodes every configured dataset.
    pub fn prepare(&self) -> Result<Vec<BenchmarkDataset>> {
        self.datasets
            .iter()
            .map(|entry| {
                let name = canonical_name(&entry.name);
                let seed = dataset_seed(self.seed, &name);
                let mut raw = resolve_dataset(
                    &name,
                    entry.path.as_deref(),
                    entry.label(),
                    self.data_dir.as_deref(),
                    seed,
                )
                .map_err(|e| user(format!("dataset {}: {e}", entry.name)))?;
                raw.name = name.clone();
                let params = self.params_for(entry, raw.num_classes());
                let data = PreparedData::new(raw, self.bins, seed).with_context(|| format!("preparing {name}"))?;
                Ok(BenchmarkDataset { data, params })
            })
            .collect()
    }

    pub fn benchmark(&self) -> Result<BenchmarkConfig> {
        Ok(BenchmarkConfig {
            methods: self.method_specs()?,
            protocols: self.protocol_list()?,
            k_grid: self.k_grid.clone(),
            trials: self.trials,
            seed: self.seed,
            scorer: self.scorer.clone(),
            parallelism: self.parallelism,
            config_hash: self.hash()?,
        })
    }
}
