use std::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::clause::{Chance, Clause, EvalMode, Polarity};
use super::params::HyperParams;
use crate::bits::{words_for, BitMatrix, WORD};
use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::rng::rng_from;

/// Signed per-class vote totals for one input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSums(pub Vec<i64>);

impl ClassSums {
    /// Index of the largest sum; ties go to the lowest class index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (c, &s) in self.0.iter().enumerate() {
            if s > self.0[best] {
                best = c;
            }
        }
        best
    }
}

/// Weighted multiclass Tsetlin Machine.
///
/// Clauses are laid out class by class; within a class the positive-polarity
/// clauses come first.
#[derive(Debug, Clone, PartialEq)]
pub struct TmClassifier {
    params: HyperParams,
    num_features: usize,
    clauses: Vec<Clause>,
    weight_history: Vec<Vec<u32>>,
}

impl TmClassifier {
    pub fn new(params: HyperParams, num_features: usize) -> Result<Self> {
        params.validate()?;
        let per = params.clauses_per_polarity();
        let n = params.ta_states_per_action;
        let mut clauses = Vec::with_capacity(params.num_clauses);
        for class in 0..params.num_classes {
            for polarity in [Polarity::Positive, Polarity::Negative] {
                clauses.extend((0..per).map(|_| Clause::new(num_features, n, class, polarity)));
            }
        }
        Ok(Self {
            params,
            num_features,
            clauses,
            weight_history: Vec::new(),
        })
    }

    /// Reassembles a model from stored parts, checking the clause layout.
    pub fn from_parts(
        params: HyperParams,
        num_features: usize,
        clauses: Vec<Clause>,
        weight_history: Vec<Vec<u32>>,
    ) -> Result<Self> {
        params.validate()?;
        if clauses.len() != params.num_clauses {
            return Err(Error::Dimension {
                expected: params.num_clauses,
                got: clauses.len(),
            });
        }
        let per = params.clauses_per_polarity();
        for (i, c) in clauses.iter().enumerate() {
            let class = i / (2 * per);
            let polarity = if (i / per) % 2 == 0 {
                Polarity::Positive
            } else {
                Polarity::Negative
            };
            if c.num_features() != num_features
                || c.class_id() != class
                || c.polarity() != polarity
                || c.states_per_action() != params.ta_states_per_action
            {
                return Err(Error::invalid(format!("clause {i} does not match the model layout")));
            }
        }
        if let Some(h) = weight_history.iter().find(|h| h.len() != clauses.len()) {
            return Err(Error::Dimension {
                expected: clauses.len(),
                got: h.len(),
            });
        }
        Ok(Self {
            params,
            num_features,
            clauses,
            weight_history,
        })
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_classes(&self) -> usize {
        self.params.num_classes
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clauses_mut(&mut self) -> &mut [Clause] {
        &mut self.clauses
    }

    /// Per-epoch snapshots of every clause weight, one entry per completed epoch.
    pub fn weight_history(&self) -> &[Vec<u32>] {
        &self.weight_history
    }

    pub fn class_range(&self, class: usize) -> Range<usize> {
        let k = self.params.clauses_per_class();
        class * k..(class + 1) * k
    }

    fn check_words(&self, x: &[u64]) -> Result<()> {
        let expected = words_for(self.num_features);
        if x.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Weighted vote of one class on a packed row (inference semantics).
    #[inline]
    pub fn class_sum_bits(&self, x: &[u64], class: usize) -> i64 {
        self.clauses[self.class_range(class)]
            .iter()
            .filter(|c| c.fires(x, EvalMode::Infer))
            .map(|c| c.polarity().sign() * c.weight() as i64)
            .sum()
    }

    pub fn class_sums_bits(&self, x: &[u64]) -> ClassSums {
        ClassSums((0..self.num_classes()).map(|c| self.class_sum_bits(x, c)).collect())
    }

    pub fn class_sums(&self, x: &[bool]) -> Result<ClassSums> {
        let words = self.pack(x)?;
        Ok(self.class_sums_bits(&words))
    }

    pub fn predict(&self, x: &[bool]) -> Result<usize> {
        Ok(self.class_sums(x)?.argmax())
    }

    #[inline]
    pub fn predict_bits(&self, x: &[u64]) -> usize {
        self.class_sums_bits(x).argmax()
    }

    pub fn predict_matrix(&self, x: &BitMatrix) -> Result<Vec<usize>> {
        if x.cols() != self.num_features {
            return Err(Error::Dimension {
                expected: self.num_features,
                got: x.cols(),
            });
        }
        Ok((0..x.rows()).map(|i| self.predict_bits(x.row(i))).collect())
    }

    /// Fraction of correctly classified samples; 0 for an empty dataset.
    pub fn accuracy(&self, data: &BinaryDataset) -> Result<f64> {
        let pred = self.predict_matrix(data.bits())?;
        Ok(crate::metrics::accuracy(&pred, data.labels()))
    }

    fn pack(&self, x: &[bool]) -> Result<Vec<u64>> {
        if x.len() != self.num_features {
            return Err(Error::Dimension {
                expected: self.num_features,
                got: x.len(),
            });
        }
        let mut w = vec![0u64; words_for(x.len())];
        for (j, &b) in x.iter().enumerate() {
            if b {
                w[j / WORD] |= 1 << (j % WORD);
            }
        }
        Ok(w)
    }

    /// Applies one round of class feedback for a single sample.
    fn feedback_class<R: RngCore>(&mut self, x: &[u64], class: usize, chance: Chance, target: bool, rng: &mut R) {
        let s = self.params.specificity;
        let range = self.class_range(class);
        for clause in &mut self.clauses[range] {
            if !chance.hit(rng) {
                continue;
            }
            let fires = clause.fires(x, EvalMode::Train);
            let recognize = (clause.polarity() == Polarity::Positive) == target;
            if recognize {
                clause.type_i_with_output(x, fires, s, rng);
            } else {
                clause.type_ii_with_output(x, fires);
            }
        }
    }

    /// Updates the machine on one sample.
    pub fn update<R: RngCore>(&mut self, x: &[u64], y: usize, rng: &mut R) -> Result<()> {
        self.check_words(x)?;
        let c = self.num_classes();
        if y >= c {
            return Err(Error::invalid(format!("label {y} out of range for {c} classes")));
        }
        let t = self.params.threshold as i64;
        let sums = self.class_sums_bits(x);
        let clamp = |v: i64| v.clamp(-t, t) as f64;
        let t = t as f64;

        let p_target = (t - clamp(sums.0[y])) / (2.0 * t);
        self.feedback_class(x, y, Chance::new(p_target), true, rng);

        let mut other = rng.random_range(0..c - 1);
        if other >= y {
            other += 1;
        }
        let p_other = (t + clamp(sums.0[other])) / (2.0 * t);
        self.feedback_class(x, other, Chance::new(p_other), false, rng);
        Ok(())
    }

    /// One pass over `data` in a freshly shuffled order, then a weight snapshot.
    pub fn fit_epoch<R: RngCore>(&mut self, data: &BinaryDataset, rng: &mut R) -> Result<()> {
        if data.len() == 0 {
            return Err(Error::invalid("cannot train on an empty dataset"));
        }
        if data.num_columns() != self.num_features {
            return Err(Error::Dimension {
                expected: self.num_features,
                got: data.num_columns(),
            });
        }
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(rng);
        for i in order {
            self.update(data.bits().row(i), data.labels()[i], rng)?;
        }
        self.weight_history
            .push(self.clauses.iter().map(|c| c.weight()).collect());
        Ok(())
    }

    /// Trains `epochs` more epochs. Epoch `e` (counted over the model's
    /// lifetime) draws from its own stream derived from the model seed, so
    /// training is reproducible and can be resumed.
    pub fn fit(&mut self, data: &BinaryDataset, epochs: usize) -> Result<()> {
        for _ in 0..epochs {
            let epoch = self.weight_history.len() as u64;
            let mut rng = rng_from(self.params.seed, &[epoch]);
            self.fit_epoch(data, &mut rng)?;
        }
        Ok(())
    }

    /// Builds and trains a model for `data` with `params.epochs` epochs.
    pub fn train(params: HyperParams, data: &BinaryDataset) -> Result<Self> {
        let epochs = params.epochs;
        let mut m = Self::new(params, data.num_columns())?;
        m.fit(data, epochs)?;
        Ok(m)
    }
}
