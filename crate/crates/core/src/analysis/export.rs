use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::*;
use crate::eval::ResultTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Protocol whose AUCs feed the tradeoff table and the clustering.
    pub protocol: Protocol,
    pub merge_variants: bool,
    /// Heatmap grid per dataset name, `(rows, cols)`.
    pub heatmap_grids: BTreeMap<String, (usize, usize)>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            protocol: Protocol::Road,
            merge_variants: true,
            heatmap_grids: BTreeMap::from([("digits".to_string(), (8, 8))]),
        }
    }
}

fn csv_out(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_writer(fs::File::create(path).map_err(|e| Error::io(path, e))?))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_matrix(path: &Path, labels: &[String], m: &[Vec<f64>]) -> Result<()> {
    let mut w = csv_out(path)?;
    let mut header = vec![String::new()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for (l, row) in labels.iter().zip(m) {
        let mut rec = vec![l.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    finish(w, path)
}

fn safe_name(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Writes every analysis artifact into `dir` and returns the file names.
pub fn write_analysis(table: &ResultTable, dir: &Path, opts: &AnalysisOptions) -> Result<Vec<String>> {
    if table.curves.is_empty() && table.scores.is_empty() {
        return Err(Error::invalid("the result table is empty; run the benchmark first"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let path = dir.join("tally.csv");
    let mut w = csv_out(&path)?;
    w.write_record(["method", "protocol", "count"])?;
    for r in top5_tally(&table.curves) {
        w.write_record([r.method, r.protocol.to_string(), r.count.to_string()])?;
    }
    finish(w, &path)?;
    written.push("tally.csv".to_string());

    if table.curves.iter().any(|c| c.protocol == opts.protocol) {
        let t = tradeoff_table(&table.curves, &table.timings, opts.protocol)?;
        let rows_out = |name: &str, rows: &[TradeoffRow]| -> Result<()> {
            let path = dir.join(name);
            let mut w = csv_out(&path)?;
            for r in rows {
                w.serialize(r)?;
            }
            finish(w, &path)
        };
        rows_out("tradeoff.csv", &t.rows)?;
        let path = dir.join("tradeoff_top3.csv");
        let mut w = csv_out(&path)?;
        w.write_record(["order", "dataset", "method", "category", "auc", "normalized_auc", "normalized_time"])?;
        for (order, rows) in [
            ("normalize_then_select", &t.top3_normalize_then_select),
            ("select_then_normalize", &t.top3_select_then_normalize),
        ] {
            for r in rows {
                w.write_record([
                    order.to_string(),
                    r.dataset.clone(),
                    r.method.clone(),
                    r.category.clone(),
                    r.auc.to_string(),
                    r.normalized_auc.to_string(),
                    r.normalized_time.to_string(),
                ])?;
            }
        }
        finish(w, &path)?;
        let path = dir.join("tradeoff_categories.csv");
        let mut w = csv_out(&path)?;
        w.write_record(["dataset", "category", "normalized_auc", "normalized_time", "members"])?;
        for m in &t.category_means {
            w.write_record([
                m.dataset.clone().unwrap_or_else(|| "all".into()),
                m.category.clone(),
                m.normalized_auc.to_string(),
                m.normalized_time.to_string(),
                m.members.to_string(),
            ])?;
        }
        finish(w, &path)?;
        written.extend(["tradeoff.csv", "tradeoff_top3.csv", "tradeoff_categories.csv"].map(String::from));

        let profiles = method_profiles(&table.curves, opts.protocol, opts.merge_variants)?;
        let labels: Vec<String> = profiles.iter().map(|p| p.method_id.clone()).collect();
        let vecs: Vec<Vec<f64>> = profiles.iter().map(|p| p.auc_by_dataset.clone()).collect();
        let dist = distance_matrix(&vecs)?;
        write_matrix(&dir.join("distances.csv"), &labels, &dist)?;
        let tree = average_linkage(&dist, labels)?;
        let path = dir.join("dendrogram.csv");
        let mut w = csv_out(&path)?;
        w.write_record(["step", "a", "b", "height", "size"])?;
        for (i, m) in tree.merges.iter().enumerate() {
            w.write_record([i, m.a, m.b].map(|v| v.to_string()).iter().chain(&[m.height.to_string(), m.size.to_string()]))?;
        }
        finish(w, &path)?;
        let path = dir.join("dendrogram_leaves.csv");
        let mut w = csv_out(&path)?;
        w.write_record(["id", "label", "plot_position"])?;
        let order = tree.leaf_order();
        let mut pos = vec![0; order.len()];
        for (p, &leaf) in order.iter().enumerate() {
            pos[leaf] = p;
        }
        for (i, l) in tree.labels.iter().enumerate() {
            w.write_record([i.to_string(), l.clone(), pos[i].to_string()])?;
        }
        finish(w, &path)?;
        written.extend(["distances.csv", "dendrogram.csv", "dendrogram_leaves.csv"].map(String::from));
    } else {
        log::warn!("no {} curves; skipping tradeoff and clustering", opts.protocol);
    }

    let mut by_ds: BTreeMap<&str, Vec<&crate::eval::records::ScoreRecord>> = BTreeMap::new();
    for s in &table.scores {
        by_ds.entry(&s.dataset).or_default().push(s);
    }
    let path = dir.join("correlations.csv");
    let mut w = csv_out(&path)?;
    w.write_record(["dataset", "method_a", "method_b", "spearman"])?;
    for (ds, recs) in &by_ds {
        let vecs: Vec<Vec<f64>> = recs.iter().map(|r| r.scores.clone()).collect();
        if vecs.first().is_none_or(|v| v.len() < 2) {
            continue;
        }
        let m = correlation_matrix(&vecs)?;
        for i in 0..recs.len() {
            for j in 0..recs.len() {
                w.write_record([ds.to_string(), recs[i].label.clone(), recs[j].label.clone(), m[i][j].to_string()])?;
            }
        }
    }
    finish(w, &path)?;
    written.push("correlations.csv".to_string());

    for (ds, recs) in &by_ds {
        let key = crate::data::canonical_name(ds);
        let Some(&(rows, cols)) = opts.heatmap_grids.get(&key) else {
            continue;
        };
        let hdir = dir.join("heatmaps");
        fs::create_dir_all(&hdir).map_err(|e| Error::io(&hdir, e))?;
        for r in recs {
            let grid = heatmap_export(&r.scores, rows, cols)?;
            let name = format!("heatmaps/{}__{}.csv", safe_name(ds), safe_name(&r.label));
            let path = dir.join(&name);
            let mut w = csv_out(&path)?;
            for row in grid {
                w.write_record(row.iter().map(|v| v.to_string()))?;
            }
            finish(w, &path)?;
            written.push(name);
        }
    }
    Ok(written)
}
