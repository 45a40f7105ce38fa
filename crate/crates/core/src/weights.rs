//! Literal incidence and class-by-column clause-weight accumulations.
//!
//! For clause `l` of class `c` with weight `w_l`:
//!
//! ```text
//! W+[c, f] = sum_l w_l * [l includes  x_f]
//! W-[c, f] = sum_l w_l * [l includes ¬x_f]
//! net = W+ - W-    abs = |net|    sum = W+ + W-    abs_sum = |sum|
//! ```
//!
//! Weights enter unsigned; clause polarity is not applied.

use ndarray::{Array2, Axis};

use crate::data::FeatureMap;
use crate::error::{Error, Result};
use crate::tm::TmClassifier;

/// Which |W| matrix the weight-based scorers read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `abs = |W+ - W-|`
    Net,
    /// `abs_sum = |W+ + W-|`
    PosNeg,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Net => "net",
            Variant::PosNeg => "posneg",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "net" => Ok(Variant::Net),
            "posneg" => Ok(Variant::PosNeg),
            _ => Err(Error::invalid(format!("unknown variant {s:?} (expected net or posneg)"))),
        }
    }
}

/// Clause-by-column inclusion indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct LiteralIncidence {
    pub plus: Array2<bool>,
    pub minus: Array2<bool>,
}

pub fn literal_incidence(model: &TmClassifier) -> LiteralIncidence {
    let m = model.clauses().len();
    let d = model.num_features();
    let mut plus = Array2::from_elem((m, d), false);
    let mut minus = Array2::from_elem((m, d), false);
    for (l, c) in model.clauses().iter().enumerate() {
        for f in 0..d {
            plus[[l, f]] = c.includes_positive(f);
            minus[[l, f]] = c.includes_negated(f);
        }
    }
    LiteralIncidence { plus, minus }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightViews {
    pub w_plus: Array2<f64>,
    pub w_minus: Array2<f64>,
    pub net: Array2<f64>,
    pub abs: Array2<f64>,
    pub sum: Array2<f64>,
    pub abs_sum: Array2<f64>,
    /// Per-epoch `abs` snapshots, using the final incidence with each
    /// epoch's recorded weights.
    pub per_epoch_abs: Vec<Array2<f64>>,
    /// Per-epoch `abs_sum` snapshots, built the same way.
    pub per_epoch_abs_sum: Vec<Array2<f64>>,
}

impl WeightViews {
    /// Recomputes every derived view from `w_plus` and `w_minus`.
    pub fn from_parts(w_plus: Array2<f64>, w_minus: Array2<f64>) -> Self {
        let net = &w_plus - &w_minus;
        let sum = &w_plus + &w_minus;
        Self {
            abs: net.mapv(f64::abs),
            abs_sum: sum.mapv(f64::abs),
            net,
            sum,
            w_plus,
            w_minus,
            per_epoch_abs: Vec::new(),
            per_epoch_abs_sum: Vec::new(),
        }
    }

    /// The |W| matrix (classes x columns) for `variant`.
    pub fn magnitude(&self, variant: Variant) -> &Array2<f64> {
        match variant {
            Variant::Net => &self.abs,
            Variant::PosNeg => &self.abs_sum,
        }
    }

    pub fn history(&self, variant: Variant) -> &[Array2<f64>] {
        match variant {
            Variant::Net => &self.per_epoch_abs,
            Variant::PosNeg => &self.per_epoch_abs_sum,
        }
    }
}

fn accumulate_with(model: &TmClassifier, inc: &LiteralIncidence, weights: &[u32]) -> (Array2<f64>, Array2<f64>) {
    let c = model.num_classes();
    let d = model.num_features();
    let mut w_plus = Array2::zeros((c, d));
    let mut w_minus = Array2::zeros((c, d));
    for (l, clause) in model.clauses().iter().enumerate() {
        let w = weights[l] as f64;
        if w == 0.0 {
            continue;
        }
        let class = clause.class_id();
        for f in 0..d {
            if inc.plus[[l, f]] {
                w_plus[[class, f]] += w;
            }
            if inc.minus[[l, f]] {
                w_minus[[class, f]] += w;
            }
        }
    }
    (w_plus, w_minus)
}

pub fn accumulate_weights(model: &TmClassifier, incidence: &LiteralIncidence) -> WeightViews {
    let current: Vec<u32> = model.clauses().iter().map(|c| c.weight()).collect();
    let (p, m) = accumulate_with(model, incidence, &current);
    let mut views = WeightViews::from_parts(p, m);
    for snap in model.weight_history() {
        let (p, m) = accumulate_with(model, incidence, snap);
        views.per_epoch_abs.push((&p - &m).mapv(f64::abs));
        views.per_epoch_abs_sum.push((&p + &m).mapv(f64::abs));
    }
    views
}

/// Incidence plus accumulation in one call.
pub fn weight_views(model: &TmClassifier) -> WeightViews {
    accumulate_weights(model, &literal_incidence(model))
}

/// Sums each row's column groups into one value per original feature.
pub fn aggregate_to_features(view: &Array2<f64>, map: &FeatureMap) -> Result<Array2<f64>> {
    if view.ncols() != map.num_columns() {
        return Err(Error::invalid(format!(
            "view has {} columns but the feature map covers {}",
            view.ncols(),
            map.num_columns()
        )));
    }
    let mut out = Array2::zeros((view.nrows(), map.num_features()));
    for (f, g) in map.groups().iter().enumerate() {
        for &col in &g.columns {
            let mut dst = out.column_mut(f);
            dst += &view.column(col);
        }
    }
    Ok(out)
}

/// Per-column vector to per-feature vector by group sums.
pub fn aggregate_vector(scores: &[f64], map: &FeatureMap) -> Result<Vec<f64>> {
    if scores.len() != map.num_columns() {
        return Err(Error::Dimension {
            expected: map.num_columns(),
            got: scores.len(),
        });
    }
    Ok(map
        .groups()
        .iter()
        .map(|g| g.columns.iter().map(|&c| scores[c]).sum())
        .collect())
}

/// Total |W| per class, used by conservation checks.
pub fn class_totals(view: &Array2<f64>) -> Vec<f64> {
    view.sum_axis(Axis(1)).to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::fixture_f1;
    use crate::data::FeatureGroup;
    use crate::tm::HyperParams;
    use ndarray::array;

    #[test]
    fn untrained_model_has_no_incidence() {
        let m = TmClassifier::new(HyperParams::new(4, 10, 3.0, 2), 5).unwrap();
        let inc = literal_incidence(&m);
        assert!(inc.plus.iter().chain(inc.minus.iter()).all(|&b| !b));
    }

    #[test]
    fn incidence_marks_literals() {
        let m = fixture_f1();
        let inc = literal_incidence(&m);
        assert!(inc.plus[[0, 0]]);
        assert_eq!(inc.plus.row(0).iter().filter(|&&b| b).count(), 1);
        assert!(inc.minus[[2, 1]]);
    }

    #[test]
    fn f1_accumulations() {
        let v = weight_views(&fixture_f1());
        assert_eq!(v.w_plus, array![[2.0, 0.0, 0.0], [4.0, 0.0, 0.0]]);
        assert_eq!(v.w_minus, array![[0.0, 0.0, 0.0], [0.0, 4.0, 0.0]]);
        assert_eq!(v.net[[1, 1]], -4.0);
        assert_eq!(v.abs[[1, 1]], 4.0);
        assert_eq!(v.sum[[1, 1]], 4.0);
        assert_eq!(v.abs, array![[2.0, 0.0, 0.0], [4.0, 4.0, 0.0]]);
    }

    #[test]
    fn zero_weights_give_zero_views() {
        let mut m = fixture_f1();
        for c in m.clauses_mut() {
            c.set_weight(0);
        }
        let v = weight_views(&m);
        assert!(v.abs_sum.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn aggregation() {
        let map = FeatureMap::new(
            vec![
                FeatureGroup {
                    name: "a".into(),
                    columns: vec![0, 1, 2],
                    thresholds: vec![1.0, 2.0, 3.0],
                },
                FeatureGroup {
                    name: "b".into(),
                    columns: vec![3],
                    thresholds: vec![1.0],
                },
            ],
            4,
        )
        .unwrap();
        let v = array![[1.0, 2.0, 3.0, 0.0]];
        assert_eq!(aggregate_to_features(&v, &map).unwrap(), array![[6.0, 0.0]]);
        let id = FeatureMap::identity(4);
        assert_eq!(aggregate_to_features(&v, &id).unwrap(), v);
        assert!(aggregate_to_features(&array![[1.0, 2.0]], &map).is_err());
        assert_eq!(aggregate_vector(&[1.0, 2.0, 3.0, 5.0], &map).unwrap(), vec![6.0, 5.0]);
    }
}
