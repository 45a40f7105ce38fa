//! Post-hoc summaries of a benchmark's result table.

mod cluster;
mod correlation;
mod export;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

pub use cluster::{average_linkage, distance_matrix, Dendrogram, Matrix, Merge};
pub use correlation::{average_ranks, correlation_matrix, spearman};
pub use export::{write_analysis, AnalysisOptions};

use crate::error::{Error, Result};
use crate::eval::records::{CurveRecord, TimingRecord};
use crate::eval::Protocol;

/// Min-max scaling to `[0, 1]`; a zero range maps every value to
/// `degenerate`.
pub fn min_max(values: &[f64], degenerate: f64) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![degenerate; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyRow {
    pub method: String,
    pub protocol: Protocol,
    pub count: usize,
}

fn by_auc_desc<'a>(mut v: Vec<&'a CurveRecord>) -> Vec<&'a CurveRecord> {
    v.sort_by(|a, b| b.auc.total_cmp(&a.auc).then_with(|| a.label.cmp(&b.label)));
    v
}

/// Per (dataset, protocol), counts which methods land in the five highest
/// AUCs (ties by method label). Every method/protocol pair seen gets a row.
pub fn top5_tally(curves: &[CurveRecord]) -> Vec<TallyRow> {
    let mut groups: BTreeMap<(&str, Protocol), Vec<&CurveRecord>> = BTreeMap::new();
    let mut counts: BTreeMap<(String, Protocol), usize> = BTreeMap::new();
    for c in curves {
        groups.entry((&c.dataset, c.protocol)).or_default().push(c);
        counts.entry((c.label.clone(), c.protocol)).or_insert(0);
    }
    for (_, g) in groups {
        for c in by_auc_desc(g).into_iter().take(5) {
            *counts.get_mut(&(c.label.clone(), c.protocol)).unwrap() += 1;
        }
    }
    let mut rows: Vec<TallyRow> = counts
        .into_iter()
        .map(|((method, protocol), count)| TallyRow { method, protocol, count })
        .collect();
    rows.sort_by(|a, b| (a.protocol, b.count, &a.method).cmp(&(b.protocol, a.count, &b.method)));
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub dataset: String,
    pub method: String,
    pub category: String,
    pub auc: f64,
    pub rank_time: f64,
    pub normalized_auc: f64,
    pub normalized_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMean {
    /// `None` for the mean over every dataset.
    pub dataset: Option<String>,
    pub category: String,
    pub normalized_auc: f64,
    pub normalized_time: f64,
    pub members: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffTable {
    pub protocol: Protocol,
    pub rows: Vec<TradeoffRow>,
    pub category_means: Vec<CategoryMean>,
    /// Top 3 by AUC per dataset, values normalized over all methods.
    pub top3_normalize_then_select: Vec<TradeoffRow>,
    /// Top 3 by AUC per dataset, values normalized among those three.
    pub top3_select_then_normalize: Vec<TradeoffRow>,
}

/// Degenerate-range values: a lone method counts as best in AUC and
/// neutral in time.
pub const DEGENERATE_AUC: f64 = 1.0;
pub const DEGENERATE_TIME: f64 = 0.0;

fn normalized_rows(dataset: &str, curves: &[&CurveRecord], times: &HashMap<(&str, &str), f64>) -> Result<Vec<TradeoffRow>> {
    let mut raw = Vec::with_capacity(curves.len());
    for c in curves {
        let t = *times
            .get(&(dataset, c.label.as_str()))
            .ok_or_else(|| Error::invalid(format!("no rank time recorded for {} on {dataset}", c.label)))?;
        raw.push((c, t));
    }
    let aucs: Vec<f64> = raw.iter().map(|(c, _)| c.auc).collect();
    let ts: Vec<f64> = raw.iter().map(|(_, t)| *t).collect();
    let na = min_max(&aucs, DEGENERATE_AUC);
    let nt = min_max(&ts, DEGENERATE_TIME);
    Ok(raw
        .iter()
        .enumerate()
        .map(|(i, (c, t))| TradeoffRow {
            dataset: dataset.to_string(),
            method: c.label.clone(),
            category: c.category.clone(),
            auc: c.auc,
            rank_time: *t,
            normalized_auc: na[i],
            normalized_time: nt[i],
        })
        .collect())
}

fn category_means(rows: &[TradeoffRow], dataset: Option<String>) -> Vec<CategoryMean> {
    let mut acc: BTreeMap<&str, (f64, f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry(&r.category).or_insert((0.0, 0.0, 0));
        e.0 += r.normalized_auc;
        e.1 += r.normalized_time;
        e.2 += 1;
    }
    acc.into_iter()
        .map(|(cat, (a, t, n))| CategoryMean {
            dataset: dataset.clone(),
            category: cat.to_string(),
            normalized_auc: a / n as f64,
            normalized_time: t / n as f64,
            members: n,
        })
        .collect()
}

/// Speed-quality table for one protocol: per dataset, AUC and rank time
/// min-max normalized across methods, with category means and both orders
/// of top-3 selection.
pub fn tradeoff_table(curves: &[CurveRecord], timings: &[TimingRecord], protocol: Protocol) -> Result<TradeoffTable> {
    let times: HashMap<(&str, &str), f64> = timings
        .iter()
        .map(|t| ((t.dataset.as_str(), t.label.as_str()), t.rank_time))
        .collect();
    let mut by_ds: BTreeMap<&str, Vec<&CurveRecord>> = BTreeMap::new();
    for c in curves.iter().filter(|c| c.protocol == protocol) {
        by_ds.entry(&c.dataset).or_default().push(c);
    }
    let mut table = TradeoffTable {
        protocol,
        rows: Vec::new(),
        category_means: Vec::new(),
        top3_normalize_then_select: Vec::new(),
        top3_select_then_normalize: Vec::new(),
    };
    for (ds, group) in by_ds {
        let group = by_auc_desc(group);
        let rows = normalized_rows(ds, &group, &times)?;
        table.category_means.extend(category_means(&rows, Some(ds.to_string())));
        table.top3_normalize_then_select.extend(rows.iter().take(3).cloned());
        table
            .top3_select_then_normalize
            .extend(normalized_rows(ds, &group[..group.len().min(3)], &times)?);
        table.rows.extend(rows);
    }
    table.category_means.extend(category_means(&table.rows, None));
    Ok(table)
}

/// A method's AUC under one protocol across datasets (sorted by name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodProfile {
    pub method_id: String,
    pub datasets: Vec<String>,
    pub auc_by_dataset: Vec<f64>,
}

/// Profiles for clustering. With `merge_variants`, net and PosNeg curves of
/// one method are averaged into a single profile keyed by the method id;
/// otherwise each label is its own profile. Every profile must cover every
/// dataset.
pub fn method_profiles(curves: &[CurveRecord], protocol: Protocol, merge_variants: bool) -> Result<Vec<MethodProfile>> {
    let selected: Vec<&CurveRecord> = curves.iter().filter(|c| c.protocol == protocol).collect();
    let datasets: Vec<String> = selected
        .iter()
        .map(|c| c.dataset.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut acc: BTreeMap<String, BTreeMap<&str, (f64, usize)>> = BTreeMap::new();
    for c in &selected {
        let key = if merge_variants { c.method_id.clone() } else { c.label.clone() };
        let e = acc.entry(key).or_default().entry(&c.dataset).or_insert((0.0, 0));
        e.0 += c.auc;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(method_id, per)| {
            let auc_by_dataset = datasets
                .iter()
                .map(|d| {
                    per.get(d.as_str())
                        .map(|(s, n)| s / *n as f64)
                        .ok_or_else(|| Error::invalid(format!("{method_id} has no {protocol} curve on {d}")))
                })
                .collect::<Result<_>>()?;
            Ok(MethodProfile {
                method_id,
                datasets: datasets.clone(),
                auc_by_dataset,
            })
        })
        .collect()
}

/// Per-feature scores laid out row-major on a `rows x cols` grid and
/// min-max normalized (a constant input becomes all zeros).
pub fn heatmap_export(scores: &[f64], rows: usize, cols: usize) -> Result<Vec<Vec<f64>>> {
    if rows * cols != scores.len() {
        return Err(Error::invalid(format!(
            "a {rows}x{cols} grid does not fit {} feature scores",
            scores.len()
        )));
    }
    let norm = min_max(scores, 0.0);
    Ok(norm.chunks(cols.max(1)).map(|r| r.to_vec()).take(rows).collect())
}
