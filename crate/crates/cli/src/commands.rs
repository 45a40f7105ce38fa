use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tmfs_core::analysis::{top5_tally, write_analysis, AnalysisOptions};
use tmfs_core::eval::records::{ScoreRecord, TimingRecord};
use tmfs_core::eval::{baseline_record, dataset_seed, reference_model, run_benchmark, ResultTable};
use tmfs_core::scorers::{score, ScorerConfig, ScoringContext};

use crate::config::RunConfig;
use crate::user;

pub const TRAIN_DIR: &str = "train";
pub const RANK_DIR: &str = "rank";
pub const EVAL_DIR: &str = "eval";
pub const ANALYSIS_DIR: &str = "analysis";
pub const REPORT_FILE: &str = "report.md";
pub const LOG_FILE: &str = "tmfs.log";

/// Timestamps only ever land here, so every other artifact stays byte-stable.
pub fn log_run(root: &Path, command: &str, hash: &str) -> Result<()> {
    use std::io::Write;
    fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(root.join(LOG_FILE))?;
    writeln!(f, "{secs} {command} {hash}")?;
    Ok(())
}

pub fn train(cfg: &RunConfig) -> Result<PathBuf> {
    let hash = cfg.hash()?;
    let dir = cfg.output_dir.join(TRAIN_DIR);
    let models = dir.join("models");
    fs::create_dir_all(&models).with_context(|| format!("creating {}", models.display()))?;
    let mut table = ResultTable::default();
    println!("{:<24} {:>8} {:>9}", "dataset", "accuracy", "macro-F1");
    for ds in cfg.prepare()? {
        let model = reference_model(&ds, cfg.seed)?;
        let b = baseline_record(&ds, &model, &hash)?;
        model.save(models.join(format!("{}.tm", ds.data.name)))?;
        println!("{:<24} {:>8.4} {:>9.4}", b.dataset, b.test_acc, b.test_macro_f1);
        table.baselines.push(b);
    }
    table.write(&dir)?;
    Ok(dir)
}

pub fn rank(cfg: &RunConfig) -> Result<PathBuf> {
    let hash = cfg.hash()?;
    let specs = cfg.method_specs()?;
    let dir = cfg.output_dir.join(RANK_DIR);
    let mut table = ResultTable::default();
    for ds in cfg.prepare()? {
        let name = ds.data.name.clone();
        let model = reference_model(&ds, cfg.seed)?;
        table.baselines.push(baseline_record(&ds, &model, &hash)?);
        let ctx = ScoringContext::new(&model, &ds.data.train, &ds.data.val)?;
        let scorer = ScorerConfig {
            seed: dataset_seed(cfg.seed, &name),
            ..cfg.scorer.clone()
        };
        let names = ds.data.train.feature_map().names();
        for &spec in &specs {
            let s = score(spec, &ctx, &scorer).with_context(|| format!("{name}: {}", spec.label()))?;
            println!("{name:<24} {:<24} {:>10.4}s", spec.label(), s.rank_time);
            table.timings.push(TimingRecord {
                config_hash: hash.clone(),
                dataset: name.clone(),
                label: spec.label(),
                rank_time: s.rank_time,
            });
            table.scores.push(ScoreRecord::new(&name, spec, &s, names.clone(), &hash));
        }
    }
    table.write(&dir)?;
    Ok(dir)
}

pub fn eval(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.output_dir.join(EVAL_DIR);
    let datasets = cfg.prepare()?;
    let table = run_benchmark(&datasets, &cfg.benchmark()?, Some(&dir))?;
    println!("{} curves, {} failures", table.curves.len(), table.failures.len());
    for f in &table.failures {
        eprintln!("warning: {} {} {:?}: {}", f.dataset, f.label, f.protocol, f.error);
    }
    Ok(dir)
}

/// Loads a result directory and insists on a single config hash.
pub fn load_results(dir: &Path) -> Result<(ResultTable, String)> {
    if !dir.is_dir() {
        return Err(user(format!("{} does not exist; run `tmfs eval` first", dir.display())));
    }
    let table = ResultTable::load(dir)?;
    if table.is_empty() {
        return Err(user(format!("{} holds no results; run `tmfs eval` first", dir.display())));
    }
    let hashes = table.config_hashes();
    if hashes.len() > 1 {
        return Err(user(format!(
            "{} mixes results of several configs ({}); analyze one run at a time",
            dir.display(),
            hashes.join(", ")
        )));
    }
    let hash = hashes.into_iter().next().unwrap_or_default();
    Ok((table, hash))
}

pub fn analyze(root: &Path, input: Option<&Path>) -> Result<PathBuf> {
    let input = input.map(Path::to_path_buf).unwrap_or_else(|| root.join(EVAL_DIR));
    let (table, _) = load_results(&input)?;
    let out = root.join(ANALYSIS_DIR);
    let files = write_analysis(&table, &out, &AnalysisOptions::default()).map_err(|e| match e {
        tmfs_core::Error::InvalidInput(m) => user(m),
        e => e.into(),
    })?;
    for f in &files {
        println!("{}", out.join(f).display());
    }
    Ok(out)
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

/// Markdown summary of an evaluation directory. No timestamps, so reruns
/// produce the same bytes.
pub fn render_report(table: &ResultTable, hash: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Feature ranking benchmark\n");
    let _ = writeln!(s, "Config hash: `{hash}`\n");

    let mut baselines = table.baselines.clone();
    baselines.sort_by(|a, b| a.dataset.cmp(&b.dataset));
    let _ = writeln!(s, "## Baseline\n");
    let _ = writeln!(
        s,
        "| Dataset | Samples | Features | Columns | Classes | Clauses | s | T | Epochs | Accuracy (%) | Macro-F1 (%) |"
    );
    let _ = writeln!(s, "|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|");
    for b in &baselines {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            b.dataset,
            b.n_samples,
            b.n_features,
            b.n_columns,
            b.n_classes,
            b.num_clauses,
            b.specificity,
            b.threshold,
            b.epochs,
            pct(b.test_acc),
            pct(b.test_macro_f1)
        );
    }

    // protocol -> method -> dataset -> auc
    let mut aucs: BTreeMap<_, BTreeMap<&str, BTreeMap<&str, f64>>> = BTreeMap::new();
    for c in &table.curves {
        aucs.entry(c.protocol)
            .or_default()
            .entry(c.label.as_str())
            .or_default()
            .insert(c.dataset.as_str(), c.auc);
    }
    for (protocol, methods) in &aucs {
        let mut datasets: Vec<&str> = methods.values().flat_map(|m| m.keys().copied()).collect();
        datasets.sort_unstable();
        datasets.dedup();
        let mut rows: Vec<(&str, f64)> = methods
            .iter()
            .map(|(m, by)| (*m, by.values().sum::<f64>() / by.len() as f64))
            .collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
        let _ = writeln!(s, "\n## AUC, {protocol}\n");
        let _ = writeln!(s, "| Method | {} | Mean |", datasets.join(" | "));
        let _ = writeln!(s, "|---|{}---:|", "---:|".repeat(datasets.len()));
        for (m, mean) in rows {
            let cells: Vec<String> = datasets
                .iter()
                .map(|d| methods[m].get(d).map_or("".into(), |a| format!("{a:.4}")))
                .collect();
            let _ = writeln!(s, "| {m} | {} | {mean:.4} |", cells.join(" | "));
        }
    }

    let tally = top5_tally(&table.curves);
    if !tally.is_empty() {
        let _ = writeln!(s, "\n## Top-5 appearances\n");
        let _ = writeln!(s, "| Protocol | Method | Count |");
        let _ = writeln!(s, "|---|---|---:|");
        for r in tally.iter().filter(|r| r.count > 0) {
            let _ = writeln!(s, "| {} | {} | {} |", r.protocol, r.method, r.count);
        }
    }
    s
}

pub fn report(root: &Path, input: Option<&Path>) -> Result<PathBuf> {
    let input = input.map(Path::to_path_buf).unwrap_or_else(|| root.join(EVAL_DIR));
    let (table, hash) = load_results(&input)?;
    let path = root.join(REPORT_FILE);
    fs::write(&path, render_report(&table, &hash)).with_context(|| format!("writing {}", path.display()))?;
    println!("{}", path.display());
    Ok(path)
}
