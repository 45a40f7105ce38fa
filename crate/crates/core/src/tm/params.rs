use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default automaton depth per action.
pub const DEFAULT_STATES_PER_ACTION: u32 = 128;

/// Hyperparameters of a multiclass weighted Tsetlin Machine.
///
/// `num_clauses` is the total over all classes; it is split evenly so every
/// (class, polarity) pair owns `num_clauses / (2 * num_classes)` clauses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub num_clauses: usize,
    pub threshold: u32,
    pub specificity: f64,
    pub num_classes: usize,
    pub ta_states_per_action: u32,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            num_clauses: 500,
            threshold: 600,
            specificity: 3.0,
            num_classes: 2,
            ta_states_per_action: DEFAULT_STATES_PER_ACTION,
            epochs: 30,
            seed: 42,
        }
    }
}

/// Tuned `(s, T)` per known dataset name (canonical lowercase form).
const TUNED: &[(&str, f64, u32)] = &[
    ("hierarchical_bool", 3.0, 600),
    ("parity", 3.0, 600),
    ("feature_interaction", 3.0, 600),
    ("balance_scale", 3.0, 600),
    ("banknote", 3.0, 600),
    ("breast_cancer", 18.33, 500),
    ("digits", 6.92, 50),
    ("ecoli", 3.0, 600),
    ("glass", 13.10, 50),
    ("heart_disease", 3.32, 300),
    ("ionosphere", 19.82, 200),
    ("iris", 14.80, 300),
    ("pima_diabetes", 8.63, 50),
    ("sonar", 3.30, 50),
    ("spambase", 3.0, 600),
    ("steel_plates_faults", 8.34, 50),
    ("transfusion", 3.0, 600),
    ("vehicle", 1.17, 50),
    ("wine", 9.70, 800),
];

/// Tuned `(specificity, threshold)` for a known dataset name.
pub fn tuned_settings(name: &str) -> Option<(f64, u32)> {
    let key = name.trim().to_ascii_lowercase().replace(['-', ' '], "_");
    TUNED.iter().find(|(n, _, _)| *n == key).map(|&(_, s, t)| (s, t))
}

/// Names with tuned settings.
pub fn tuned_dataset_names() -> Vec<&'static str> {
    TUNED.iter().map(|(n, _, _)| *n).collect()
}

impl HyperParams {
    /// 500 clauses (balanced across classes), 30 epochs, and the tuned
    /// `(s, T)` of `name` when known, else `s = 3`, `T = 600`.
    pub fn for_dataset(name: &str, num_classes: usize) -> Self {
        let (s, t) = tuned_settings(name).unwrap_or((3.0, 600));
        Self::new(500, t, s, num_classes).with_balanced_clauses()
    }

    pub fn new(num_clauses: usize, threshold: u32, specificity: f64, num_classes: usize) -> Self {
        Self {
            num_clauses,
            threshold,
            specificity,
            num_classes,
            ..Self::default()
        }
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Rounds `num_clauses` down to the nearest multiple of `2 * num_classes`
    /// (at least one clause per class and polarity).
    pub fn with_balanced_clauses(mut self) -> Self {
        let unit = 2 * self.num_classes.max(1);
        self.num_clauses = (self.num_clauses / unit).max(1) * unit;
        self
    }

    pub fn clauses_per_polarity(&self) -> usize {
        self.num_clauses / (2 * self.num_classes)
    }

    pub fn clauses_per_class(&self) -> usize {
        2 * self.clauses_per_polarity()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::invalid(format!(
                "num_classes must be >= 2, got {}",
                self.num_classes
            )));
        }
        if self.num_clauses == 0 || self.num_clauses % (2 * self.num_classes) != 0 {
            return Err(Error::invalid(format!(
                "num_clauses {} must be a positive multiple of 2*num_classes = {}",
                self.num_clauses,
                2 * self.num_classes
            )));
        }
        if self.threshold == 0 {
            return Err(Error::invalid("threshold must be positive"));
        }
        if !(self.specificity >= 1.0) || !self.specificity.is_finite() {
            return Err(Error::invalid(format!(
                "specificity must be a finite value >= 1, got {}",
                self.specificity
            )));
        }
        if self.ta_states_per_action == 0 || self.ta_states_per_action > u32::MAX / 2 {
            return Err(Error::invalid("ta_states_per_action out of range"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(HyperParams::default().validate().is_ok());
        assert!(HyperParams::new(500, 300, 14.8, 3).validate().is_err());
        let p = HyperParams::new(500, 300, 14.8, 3).with_balanced_clauses();
        assert_eq!(p.num_clauses, 498);
        assert_eq!(p.clauses_per_polarity(), 83);
        assert!(p.validate().is_ok());
        assert!(HyperParams::new(20, 10, 0.5, 2).validate().is_err());
        assert!(HyperParams::new(20, 0, 3.0, 2).validate().is_err());
        assert!(HyperParams::new(20, 10, 3.0, 1).validate().is_err());
    }
}
