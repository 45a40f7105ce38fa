use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square distance matrix, row-major.
pub type Matrix = Vec<Vec<f64>>;

/// Pairwise Euclidean distances between equal-length profiles.
pub fn distance_matrix(profiles: &[Vec<f64>]) -> Result<Matrix> {
    if profiles.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(p) = profiles.iter().find(|p| p.len() != profiles[0].len()) {
        return Err(Error::Dimension {
            expected: profiles[0].len(),
            got: p.len(),
        });
    }
    let n = profiles.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = profiles[i]
                .iter()
                .zip(&profiles[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    Ok(d)
}

/// One agglomeration step. Leaves are clusters `0..n`; the cluster formed
/// by merge `t` gets id `n + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Leaves in plotting order (left subtree before right).
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.labels.len();
        if self.merges.is_empty() {
            return (0..n).collect();
        }
        let mut out = Vec::with_capacity(n);
        let mut stack = vec![n + self.merges.len() - 1];
        while let Some(id) = stack.pop() {
            if id < n {
                out.push(id);
            } else {
                let m = self.merges[id - n];
                stack.push(m.b);
                stack.push(m.a);
            }
        }
        out
    }
}

fn check_distances(dist: &Matrix) -> Result<()> {
    let n = dist.len();
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Dimension { expected: n, got: row.len() });
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("distance ({i}, {j}) = {v} is not a finite non-negative value")));
            }
            if (v - dist[j][i]).abs() > 1e-9 * v.abs().max(1.0) {
                return Err(Error::invalid(format!("distance matrix is not symmetric at ({i}, {j})")));
            }
        }
        if row[i] != 0.0 {
            return Err(Error::invalid(format!("distance ({i}, {i}) is not zero")));
        }
    }
    Ok(())
}

/// UPGMA: repeatedly merges the two active clusters with the smallest mean
/// pairwise distance, preferring the lexicographically smallest id pair on
/// ties.
pub fn average_linkage(dist: &Matrix, labels: Vec<String>) -> Result<Dendrogram> {
    check_distances(dist)?;
    let n = dist.len();
    if labels.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: labels.len(),
        });
    }
    let total = (2 * n).saturating_sub(1);
    let mut d = vec![vec![f64::INFINITY; total]; total];
    for i in 0..n {
        d[i][..n].copy_from_slice(&dist[i]);
    }
    let mut size = vec![1usize; total];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for t in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, usize, usize)> = None;
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                let v = d[i][j];
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let (height, a, b) = best.expect("at least two active clusters");
        let id = n + t;
        size[id] = size[a] + size[b];
        active.retain(|&c| c != a && c != b);
        for &k in &active {
            let v = (size[a] as f64 * d[a][k] + size[b] as f64 * d[b][k]) / size[id] as f64;
            d[id][k] = v;
            d[k][id] = v;
        }
        active.push(id);
        merges.push(Merge {
            a,
            b,
            height,
            size: size[id],
        });
    }
    Ok(Dendrogram { labels, merges })
}
