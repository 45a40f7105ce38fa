use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{default_k_grid, evaluate_curve, EvalConfig};
use super::protocol::Protocol;
use super::records::*;
use crate::data::PreparedData;
use crate::error::{Error, Result};
use crate::metrics::macro_f1;
use crate::rng::{derive_seed, str_tag};
use crate::scorers::{score, Method, MethodSpec, ScorerConfig, ScoringContext};
use crate::tm::{HyperParams, TmClassifier};

/// One dataset of a benchmark with its machine settings.
#[derive(Debug, Clone)]
pub struct BenchmarkDataset {
    pub data: PreparedData,
    pub params: HyperParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub methods: Vec<MethodSpec>,
    pub protocols: Vec<Protocol>,
    /// Explicit budgets (clipped to each dataset's feature count) or the
    /// default grid when `None`.
    pub k_grid: Option<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    pub scorer: ScorerConfig,
    /// Worker threads; `None` uses every core.
    pub parallelism: Option<usize>,
    pub config_hash: String,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            methods: MethodSpec::all(),
            protocols: Protocol::ALL.to_vec(),
            k_grid: None,
            trials: 10,
            seed: 42,
            scorer: ScorerConfig::default(),
            parallelism: None,
            config_hash: String::new(),
        }
    }
}

impl BenchmarkConfig {
    /// Methods to run: the configured ones plus the Random reference.
    pub fn method_list(&self) -> Vec<MethodSpec> {
        let mut m = self.methods.clone();
        let random = MethodSpec::plain(Method::Random);
        if !m.contains(&random) {
            m.push(random);
        }
        m
    }

    pub fn grid_for(&self, num_features: usize) -> Result<Vec<usize>> {
        match &self.k_grid {
            None => Ok(default_k_grid(num_features)),
            Some(g) => {
                let mut v: Vec<usize> = g.iter().copied().filter(|&k| k >= 1 && k <= num_features).collect();
                v.sort_unstable();
                v.dedup();
                if v.is_empty() {
                    return Err(Error::invalid(format!("no k in the grid fits {num_features} features")));
                }
                Ok(v)
            }
        }
    }
}

/// Per-dataset seed shared by the reference model, scorers and retraining.
pub fn dataset_seed(seed: u64, name: &str) -> u64 {
    derive_seed(seed, &[str_tag(name)])
}

/// Trains the reference machine a dataset's rankings are computed from.
pub fn reference_model(ds: &BenchmarkDataset, seed: u64) -> Result<TmClassifier> {
    let params = ds
        .params
        .clone()
        .with_seed(derive_seed(dataset_seed(seed, &ds.data.name), &[0x8EF]));
    TmClassifier::train(params, &ds.data.train)
}

pub fn baseline_record(ds: &BenchmarkDataset, model: &TmClassifier, config_hash: &str) -> Result<BaselineRecord> {
    let d = &ds.data;
    let pred = model.predict_matrix(d.test.bits())?;
    Ok(BaselineRecord {
        schema_version: SCHEMA_VERSION,
        config_hash: config_hash.to_string(),
        dataset: d.name.clone(),
        n_samples: d.raw.n_samples(),
        n_features: d.raw.n_features(),
        n_columns: d.train.num_columns(),
        n_classes: d.raw.num_classes(),
        num_clauses: model.params().num_clauses,
        threshold: model.params().threshold,
        specificity: model.params().specificity,
        epochs: model.params().epochs,
        test_acc: crate::metrics::accuracy(&pred, d.test.labels()),
        test_macro_f1: macro_f1(&pred, d.test.labels(), d.raw.num_classes()),
        val_acc: model.accuracy(&d.val)?,
    })
}

fn run_inner(datasets: &[BenchmarkDataset], cfg: &BenchmarkConfig, out: Option<&Path>) -> Result<ResultTable> {
    let mut table = match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let t = ResultTable::load(dir)?;
            if let Some(h) = t.config_hashes().into_iter().find(|h| *h != cfg.config_hash) {
                return Err(Error::invalid(format!(
                    "{} holds results of another config (hash {h}); use a fresh output directory",
                    dir.display()
                )));
            }
            t
        }
        None => ResultTable::default(),
    };
    let mut names = HashSet::new();
    if let Some(d) = datasets.iter().find(|d| !names.insert(d.data.name.as_str())) {
        return Err(Error::invalid(format!("dataset {:?} listed twice", d.data.name)));
    }
    let methods = cfg.method_list();
    let done_curves: HashSet<_> = table.curves.iter().map(|c| c.key()).collect();
    let mut rankings: HashMap<(String, String), Vec<usize>> =
        table.scores.iter().map(|s| (s.key(), s.ranking.clone())).collect();
    let have_baseline: HashSet<String> = table.baselines.iter().map(|b| b.dataset.clone()).collect();

    // scores and baselines, one dataset at a time
    for ds in datasets {
        let name = ds.data.name.clone();
        let missing: Vec<MethodSpec> = methods
            .iter()
            .copied()
            .filter(|m| !rankings.contains_key(&(name.clone(), m.label())))
            .collect();
        if missing.is_empty() && have_baseline.contains(&name) {
            continue;
        }
        let model = reference_model(ds, cfg.seed)?;
        if !have_baseline.contains(&name) {
            let b = baseline_record(ds, &model, &cfg.config_hash)?;
            if let Some(dir) = out {
                append_jsonl(&dir.join(BASELINE_JSONL), &b)?;
            }
            table.baselines.push(b);
        }
        let ctx = ScoringContext::new(&model, &ds.data.train, &ds.data.val)?;
        let scorer_cfg = ScorerConfig {
            seed: dataset_seed(cfg.seed, &name),
            ..cfg.scorer.clone()
        };
        let feature_names = ds.data.train.feature_map().names();
        for spec in missing {
            match score(spec, &ctx, &scorer_cfg) {
                Ok(s) => {
                    let rec = ScoreRecord::new(&name, spec, &s, feature_names.clone(), &cfg.config_hash);
                    let timing = TimingRecord {
                        config_hash: cfg.config_hash.clone(),
                        dataset: name.clone(),
                        label: spec.label(),
                        rank_time: s.rank_time,
                    };
                    if let Some(dir) = out {
                        append_jsonl(&dir.join(SCORES_JSONL), &rec)?;
                    }
                    log::info!("{name}: scored {} in {:.3}s", spec.label(), s.rank_time);
                    rankings.insert(rec.key(), rec.ranking.clone());
                    table.scores.push(rec);
                    table.timings.push(timing);
                }
                Err(e) => {
                    log::warn!("{name}: {} failed: {e}", spec.label());
                    table.failures.push(FailureRecord {
                        dataset: name.clone(),
                        label: spec.label(),
                        protocol: None,
                        error: e.to_string(),
                    });
                }
            }
        }
    }

    // retraining cells
    let mut cells = Vec::new();
    for (di, ds) in datasets.iter().enumerate() {
        let grid = cfg.grid_for(ds.data.train.num_features())?;
        for spec in &methods {
            let Some(ranking) = rankings.get(&(ds.data.name.clone(), spec.label())) else {
                continue;
            };
            for &p in &cfg.protocols {
                if !done_curves.contains(&(ds.data.name.clone(), spec.label(), p)) {
                    cells.push((di, *spec, p, ranking.clone(), grid.clone()));
                }
            }
        }
    }
    let writer = Mutex::new(());
    let outcomes: Vec<std::result::Result<CurveRecord, FailureRecord>> = cells
        .par_iter()
        .map(|(di, spec, protocol, ranking, grid)| {
            let ds = &datasets[*di];
            let ecfg = EvalConfig {
                protocol: *protocol,
                k_grid: grid.clone(),
                trials: cfg.trials,
                model_params: ds.params.clone(),
                seed: dataset_seed(cfg.seed, &ds.data.name),
            };
            let fail = |e: Error| FailureRecord {
                dataset: ds.data.name.clone(),
                label: spec.label(),
                protocol: Some(*protocol),
                error: e.to_string(),
            };
            let curve = evaluate_curve(&ds.data, ranking, &spec.label(), &ecfg).map_err(fail)?;
            let rec = CurveRecord::new(*spec, curve, cfg.trials, &cfg.config_hash);
            if let Some(dir) = out {
                let _guard = writer.lock().unwrap_or_else(|p| p.into_inner());
                append_jsonl(&dir.join(CURVES_JSONL), &rec).map_err(fail)?;
            }
            log::info!("{}: {} {} auc={:.4}", rec.dataset, rec.label, rec.protocol, rec.auc);
            Ok(rec)
        })
        .collect();
    for o in outcomes {
        match o {
            Ok(c) => table.curves.push(c),
            Err(f) => {
                log::warn!("{}: {} {:?} failed: {}", f.dataset, f.label, f.protocol, f.error);
                table.failures.push(f);
            }
        }
    }
    table.sort();
    if let Some(dir) = out {
        table.write(dir)?;
    }
    Ok(table)
}

/// Scores every method on every dataset and evaluates each (method,
/// protocol) cell by retraining. With `out` set, results are appended as
/// they finish, finished cells are skipped on rerun, and the final tables
/// are rewritten in canonical order. Failed cells are recorded and the run
/// continues.
pub fn run_benchmark(datasets: &[BenchmarkDataset], cfg: &BenchmarkConfig, out: Option<&Path>) -> Result<ResultTable> {
    if cfg.trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    cfg.scorer.validate()?;
    match cfg.parallelism {
        Some(0) => Err(Error::invalid("parallelism must be >= 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?
            .install(|| run_inner(datasets, cfg, out)),
        None => run_inner(datasets, cfg, out),
    }
}
