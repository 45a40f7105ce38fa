//! Feature scorers behind one interface.
//!
//! Every scorer yields one score per original feature, higher meaning more
//! important, plus a deterministic ranking and its wall-clock cost.
//! Filters read the train split; model-based scorers probe the trained
//! machine on the validation split.

pub mod attribution;
pub mod embedded;
pub mod filters;
pub mod probes;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bits::BitMatrix;
use crate::data::{BinaryDataset, FeatureMap};
use crate::error::{Error, Result};
use crate::tm::TmClassifier;
use crate::weights::{aggregate_to_features, weight_views, Variant, WeightViews};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Filter,
    Embedded,
    Wrapper,
    Attribution,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Filter => "filter",
            Category::Embedded => "embedded",
            Category::Wrapper => "wrapper",
            Category::Attribution => "attribution",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    MutualInfo,
    Chi2,
    Variance,
    Random,
    Relevance,
    TmWeight,
    CwSum,
    SupportCwSum,
    CwFeat,
    Margin,
    Entropy,
    Gini,
    Stability,
    TaylorCrit,
    VarDropout,
    AblationImpact,
    SmoothStabil,
    Dropout,
    PermImportance,
    Shap,
    Lime,
}

impl Method {
    pub const ALL: [Method; 21] = [
        Method::MutualInfo,
        Method::Chi2,
        Method::Variance,
        Method::Random,
        Method::Relevance,
        Method::TmWeight,
        Method::CwSum,
        Method::SupportCwSum,
        Method::CwFeat,
        Method::Margin,
        Method::Entropy,
        Method::Gini,
        Method::Stability,
        Method::TaylorCrit,
        Method::VarDropout,
        Method::AblationImpact,
        Method::SmoothStabil,
        Method::Dropout,
        Method::PermImportance,
        Method::Shap,
        Method::Lime,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::MutualInfo => "MutualInfo",
            Method::Chi2 => "Chi2",
            Method::Variance => "Variance",
            Method::Random => "Random",
            Method::Relevance => "Relevance",
            Method::TmWeight => "TM-Weight",
            Method::CwSum => "CW-Sum",
            Method::SupportCwSum => "Support-CW-Sum",
            Method::CwFeat => "CW-Feat",
            Method::Margin => "Margin",
            Method::Entropy => "Entropy",
            Method::Gini => "Gini",
            Method::Stability => "Stability",
            Method::TaylorCrit => "TaylorCrit",
            Method::VarDropout => "VarDropout",
            Method::AblationImpact => "AblationImpact",
            Method::SmoothStabil => "SmoothStabil",
            Method::Dropout => "Dropout",
            Method::PermImportance => "PermImportance",
            Method::Shap => "SHAP",
            Method::Lime => "LIME",
        }
    }

    pub fn category(self) -> Category {
        use Method::*;
        match self {
            MutualInfo | Chi2 | Variance | Random => Category::Filter,
            Relevance | TmWeight | CwSum | SupportCwSum | CwFeat | Margin | Entropy | Gini | Stability
            | TaylorCrit | VarDropout | AblationImpact | SmoothStabil => Category::Embedded,
            Dropout | PermImportance => Category::Wrapper,
            Shap | Lime => Category::Attribution,
        }
    }

    /// Scorers that read a |W| matrix and so come in net and PosNeg forms.
    pub fn has_variants(self) -> bool {
        use Method::*;
        matches!(self, CwSum | SupportCwSum | CwFeat | Margin | Entropy | Gini | Stability)
    }

    pub fn needs_model(self) -> bool {
        self.category() != Category::Filter
    }

    pub fn valid_ids() -> String {
        Self::ALL.iter().map(|m| m.id()).collect::<Vec<_>>().join(", ")
    }
}

fn normalize_id(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = normalize_id(s);
        Self::ALL
            .iter()
            .copied()
            .find(|m| normalize_id(m.id()) == key)
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?}; valid ids: {}", Self::valid_ids())))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// A method together with its weight-view variant (only for
/// [`Method::has_variants`] methods).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MethodSpec {
    pub method: Method,
    pub variant: Option<Variant>,
}

impl MethodSpec {
    pub fn new(method: Method, variant: Option<Variant>) -> Self {
        let variant = if method.has_variants() {
            Some(variant.unwrap_or(Variant::Net))
        } else {
            None
        };
        Self { method, variant }
    }

    pub fn plain(method: Method) -> Self {
        Self::new(method, None)
    }

    /// `CW-Sum`, `CW-Sum-PosNeg`, `Chi2`, ...
    pub fn label(&self) -> String {
        match self.variant {
            Some(Variant::PosNeg) => format!("{}-PosNeg", self.method.id()),
            _ => self.method.id().to_string(),
        }
    }

    /// Every method, with both variants where they exist.
    pub fn all() -> Vec<MethodSpec> {
        let mut v = Vec::new();
        for m in Method::ALL {
            v.push(MethodSpec::new(m, Some(Variant::Net)));
            if m.has_variants() {
                v.push(MethodSpec::new(m, Some(Variant::PosNeg)));
            }
        }
        v
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    /// Accepts `CW-Sum`, `CW-Sum-PosNeg`, `cw_sum:posneg`, ...
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some((m, v)) = t.split_once(':') {
            return Ok(MethodSpec::new(m.parse()?, Some(v.parse()?)));
        }
        let lower = t.to_ascii_lowercase();
        for suffix in ["-posneg", "_posneg"] {
            if let Some(stem) = lower.strip_suffix(suffix) {
                let m: Method = stem.parse()?;
                if !m.has_variants() {
                    return Err(Error::invalid(format!("{} has no PosNeg variant", m.id())));
                }
                return Ok(MethodSpec::new(m, Some(Variant::PosNeg)));
            }
        }
        Ok(MethodSpec::new(t.parse()?, None))
    }
}

impl TryFrom<String> for MethodSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MethodSpec> for String {
    fn from(m: MethodSpec) -> String {
        m.label()
    }
}

/// Expands user method names; `all` yields every method and variant.
pub fn parse_methods<S: AsRef<str>>(names: &[S]) -> Result<Vec<MethodSpec>> {
    let mut out: Vec<MethodSpec> = Vec::new();
    for n in names {
        let specs = if n.as_ref().eq_ignore_ascii_case("all") {
            MethodSpec::all()
        } else {
            vec![n.as_ref().parse()?]
        };
        for s in specs {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// Knobs of the randomized and sample-based scorers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorerConfig {
    pub n_masks: usize,
    pub n_noise: usize,
    pub noise_rate: f64,
    pub n_permutations: usize,
    pub n_shapley_perms: usize,
    pub n_perturb: usize,
    /// LIME kernel width; `None` means `0.75 * sqrt(num_features)`.
    pub kernel_width: Option<f64>,
    /// At most this many validation samples are explained by LIME.
    pub lime_samples: usize,
    pub seed: u64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        Self {
            n_masks: 64,
            n_noise: 8,
            noise_rate: 0.05,
            n_permutations: 5,
            n_shapley_perms: 64,
            n_perturb: 256,
            kernel_width: None,
            lime_samples: 50,
            seed: 0,
        }
    }
}

impl ScorerConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_masks", self.n_masks),
            ("n_noise", self.n_noise),
            ("n_permutations", self.n_permutations),
            ("n_shapley_perms", self.n_shapley_perms),
            ("n_perturb", self.n_perturb),
            ("lime_samples", self.lime_samples),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::invalid(format!("{name} must be >= 1")));
        }
        if !(0.0..0.5).contains(&self.noise_rate) {
            return Err(Error::invalid("noise_rate must lie in [0, 0.5)"));
        }
        if matches!(self.kernel_width, Some(w) if !(w > 0.0)) {
            return Err(Error::invalid("kernel_width must be positive"));
        }
        Ok(())
    }
}

/// One scorer's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub method_id: String,
    pub variant: Option<Variant>,
    pub scores: Vec<f64>,
    pub ranking: Vec<usize>,
    /// Seconds of wall clock spent producing the scores.
    pub rank_time: f64,
}

impl FeatureScore {
    pub fn new(spec: MethodSpec, scores: Vec<f64>, rank_time: f64) -> Self {
        Self {
            method_id: spec.method.id().to_string(),
            variant: spec.variant,
            ranking: rank_descending(&scores),
            scores,
            rank_time,
        }
    }

    pub fn label(&self) -> String {
        match self.variant {
            Some(Variant::PosNeg) => format!("{}-PosNeg", self.method_id),
            _ => self.method_id.clone(),
        }
    }
}

/// Feature indices by descending score; ties keep ascending index order.
pub fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// Everything a scorer may read: the frozen model, its weight views, the
/// train split (filters, class weights) and the validation split (probes).
pub struct ScoringContext<'a> {
    pub model: &'a TmClassifier,
    pub views: WeightViews,
    pub train: &'a BinaryDataset,
    pub val: &'a BinaryDataset,
    /// Class weights: empirical class frequencies of the train split.
    pub alpha: Vec<f64>,
    views_time: f64,
}

impl<'a> ScoringContext<'a> {
    pub fn new(model: &'a TmClassifier, train: &'a BinaryDataset, val: &'a BinaryDataset) -> Result<Self> {
        for d in [train, val] {
            if d.num_columns() != model.num_features() {
                return Err(Error::Dimension {
                    expected: model.num_features(),
                    got: d.num_columns(),
                });
            }
        }
        let start = Instant::now();
        let views = weight_views(model);
        let views_time = start.elapsed().as_secs_f64();
        Ok(Self {
            model,
            views,
            train,
            val,
            alpha: train.class_frequencies(),
            views_time,
        })
    }

    pub fn feature_map(&self) -> &FeatureMap {
        self.train.feature_map()
    }

    fn magnitude_by_feature(&self, variant: Variant) -> Result<ndarray::Array2<f64>> {
        aggregate_to_features(self.views.magnitude(variant), self.feature_map())
    }
}

/// Runs one scorer and times it.
pub fn score(spec: MethodSpec, ctx: &ScoringContext<'_>, cfg: &ScorerConfig) -> Result<FeatureScore> {
    cfg.validate()?;
    let start = Instant::now();
    let variant = spec.variant.unwrap_or(Variant::Net);
    let map = ctx.feature_map();
    let seed = crate::rng::derive_seed(cfg.seed, &[crate::rng::str_tag(&spec.label())]);
    let scores = match spec.method {
        Method::MutualInfo => filters::mutual_info(ctx.train)?,
        Method::Chi2 => filters::chi2(ctx.train)?,
        Method::Variance => filters::variance(ctx.train)?,
        Method::Random => filters::random(map.num_features(), seed),
        Method::Relevance => embedded::relevance(ctx.model, map, &ctx.alpha)?,
        Method::TmWeight => embedded::tm_weight(ctx.model, map)?,
        Method::CwSum => embedded::cw_sum(&ctx.magnitude_by_feature(variant)?, &ctx.alpha),
        Method::SupportCwSum => embedded::support_cw_sum(&ctx.magnitude_by_feature(variant)?, &ctx.alpha),
        Method::CwFeat => embedded::cw_feat(&ctx.magnitude_by_feature(variant)?),
        Method::Margin => embedded::margin(&ctx.magnitude_by_feature(variant)?),
        Method::Entropy => embedded::entropy(&ctx.magnitude_by_feature(variant)?),
        Method::Gini => embedded::gini(&ctx.magnitude_by_feature(variant)?),
        Method::Stability => embedded::stability(ctx.views.history(variant), &ctx.alpha, map)?,
        Method::TaylorCrit => probes::taylor_crit(ctx.model, ctx.val)?,
        Method::VarDropout => probes::var_dropout(ctx.model, ctx.val, cfg.n_masks, seed)?,
        Method::AblationImpact => probes::ablation_impact(ctx.model, ctx.val)?,
        Method::SmoothStabil => probes::smooth_stabil(ctx.model, ctx.val, cfg.n_noise, cfg.noise_rate, seed)?,
        Method::Dropout => probes::dropout_loo(ctx.model, ctx.val)?,
        Method::PermImportance => probes::perm_importance(ctx.model, ctx.val, cfg.n_permutations, seed)?,
        Method::Shap => attribution::shap(ctx.model, ctx.val, cfg.n_shapley_perms, seed)?,
        Method::Lime => attribution::lime(
            ctx.model,
            ctx.val,
            cfg.n_perturb,
            cfg.kernel_width,
            cfg.lime_samples,
            seed,
        )?,
    };
    let mut elapsed = start.elapsed().as_secs_f64();
    if uses_views(spec.method) {
        elapsed += ctx.views_time;
    }
    if let Some(bad) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::invalid(format!("{} produced a non-finite score for feature {bad}", spec.label())));
    }
    Ok(FeatureScore::new(spec, scores, elapsed.max(f64::MIN_POSITIVE)))
}

fn uses_views(m: Method) -> bool {
    m.has_variants()
}

/// Per-feature column masks over packed rows.
pub(crate) struct FeatureMasks {
    masks: Vec<Vec<u64>>,
    words: usize,
}

impl FeatureMasks {
    pub(crate) fn new(bits: &BitMatrix, map: &FeatureMap) -> Self {
        let masks = map
            .groups()
            .iter()
            .map(|g| bits.column_mask(g.columns.iter().copied()))
            .collect();
        Self {
            masks,
            words: crate::bits::words_for(bits.cols()),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.masks.len()
    }

    pub(crate) fn feature(&self, f: usize) -> &[u64] {
        &self.masks[f]
    }

    /// `x` with every feature whose `keep` flag is false zeroed.
    pub(crate) fn apply(&self, x: &[u64], keep: &[bool], out: &mut Vec<u64>) {
        out.clear();
        out.extend_from_slice(x);
        for (f, &k) in keep.iter().enumerate() {
            if !k {
                for (o, m) in out.iter_mut().zip(&self.masks[f]) {
                    *o &= !m;
                }
            }
        }
    }

    pub(crate) fn zero_row(&self) -> Vec<u64> {
        vec![0; self.words]
    }
}

/// Running mean that is exact when every input is identical.
pub(crate) fn running_mean(acc: &mut [f64], next: &[f64], count: usize) {
    let k = count as f64;
    for (a, &x) in acc.iter_mut().zip(next) {
        *a += (x - *a) / k;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_ties_by_index() {
        assert_eq!(rank_descending(&[1.0, 3.0, 3.0, 0.0]), vec![1, 2, 0, 3]);
        assert_eq!(rank_descending(&[0.5]), vec![0]);
    }

    #[test]
    fn method_ids_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.id().parse::<Method>().unwrap(), m);
        }
        assert_eq!("cw_sum".parse::<Method>().unwrap(), Method::CwSum);
        let err = "nope".parse::<Method>().unwrap_err().to_string();
        assert!(err.contains("TM-Weight"));
        let s: MethodSpec = "Stability-PosNeg".parse().unwrap();
        assert_eq!(s.variant, Some(Variant::PosNeg));
        assert_eq!(s.label(), "Stability-PosNeg");
        assert!("Chi2-PosNeg".parse::<MethodSpec>().is_err());
    }

    #[test]
    fn all_expands_variants() {
        assert_eq!(Method::ALL.len(), 21);
        let all = parse_methods(&["all"]).unwrap();
        assert_eq!(all.len(), 21 + 7);
        assert_eq!(parse_methods(&["Chi2", "chi2"]).unwrap().len(), 1);
    }

    #[test]
    fn running_mean_is_exact_for_repeats() {
        let mut acc = vec![0.0; 2];
        for k in 1..=7 {
            running_mean(&mut acc, &[0.1, 1.0 / 3.0], k);
        }
        assert_eq!(acc, vec![0.1, 1.0 / 3.0]);
    }

    #[test]
    fn every_method_yields_a_permutation() {
        let raw = crate::data::generate_feature_interaction(200, 6, 3).unwrap();
        let prep = crate::PreparedData::new(raw, 4, 3).unwrap();
        let params = crate::HyperParams::new(20, 10, 3.0, 2).with_epochs(3);
        let model = TmClassifier::train(params, &prep.train).unwrap();
        let ctx = ScoringContext::new(&model, &prep.train, &prep.val).unwrap();
        let cfg = ScorerConfig {
            n_shapley_perms: 4,
            n_perturb: 16,
            ..Default::default()
        };
        for spec in MethodSpec::all() {
            let s = score(spec, &ctx, &cfg).unwrap();
            assert_eq!(s.scores.len(), 6, "{}", spec.label());
            let mut r = s.ranking.clone();
            r.sort();
            assert_eq!(r, (0..6).collect::<Vec<_>>());
            assert!(s.rank_time > 0.0);
            assert_eq!(s.label(), spec.label());
            let again = score(spec, &ctx, &cfg).unwrap();
            assert_eq!(again.scores, s.scores, "{}", spec.label());
        }
    }
}
