//! A single clause and its team of Tsetlin automata.

use rand::RngCore;

use crate::bits::{words_for, WORD};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> i64 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }
}

/// How an empty clause (no included literal) evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Empty clauses output 1, so they can still receive Type I feedback.
    Train,
    /// Empty clauses output 0 and never vote.
    Infer,
}

/// Probability as a threshold on a uniform `u32` draw.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Chance(u64);

impl Chance {
    pub(crate) fn new(p: f64) -> Self {
        let p = p.clamp(0.0, 1.0);
        Chance((p * (1u64 << 32) as f64).round() as u64)
    }

    #[inline]
    pub(crate) fn hit<R: RngCore + ?Sized>(self, rng: &mut R) -> bool {
        (rng.next_u32() as u64) < self.0
    }
}

/// A conjunction over literals `x_0..x_{d-1}, ¬x_0..¬x_{d-1}`.
///
/// Automaton `j` (positive literal for `j < d`, negated literal `j - d`
/// otherwise) holds a state in `[1, 2N]`; the literal is included iff the
/// state exceeds `N`. Include bitmasks are kept in sync with the states.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    states: Vec<u32>,
    polarity: Polarity,
    class_id: usize,
    weight: u32,
    n: u32,
    num_features: usize,
    include_pos: Vec<u64>,
    include_neg: Vec<u64>,
    included: usize,
}

impl Clause {
    /// Fresh clause: every automaton at state `N` (exclude side), weight 1.
    pub fn new(num_features: usize, n: u32, class_id: usize, polarity: Polarity) -> Self {
        let w = words_for(num_features);
        Self {
            states: vec![n; 2 * num_features],
            polarity,
            class_id,
            weight: 1,
            n,
            num_features,
            include_pos: vec![0; w],
            include_neg: vec![0; w],
            included: 0,
        }
    }

    pub fn from_parts(
        states: Vec<u32>,
        n: u32,
        class_id: usize,
        polarity: Polarity,
        weight: u32,
    ) -> Result<Self> {
        if states.len() % 2 != 0 {
            return Err(Error::invalid("automaton state count must be even"));
        }
        if let Some(bad) = states.iter().find(|&&s| s < 1 || s > 2 * n) {
            return Err(Error::invalid(format!("automaton state {bad} outside [1, {}]", 2 * n)));
        }
        let mut c = Self::new(states.len() / 2, n, class_id, polarity);
        c.weight = weight;
        for (j, s) in states.into_iter().enumerate() {
            c.set_state(j, s);
        }
        Ok(c)
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn ta_states(&self) -> &[u32] {
        &self.states
    }

    pub fn states_per_action(&self) -> u32 {
        self.n
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn class_id(&self) -> usize {
        self.class_id
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn set_weight(&mut self, w: u32) {
        self.weight = w;
    }

    pub fn num_included(&self) -> usize {
        self.included
    }

    #[inline]
    pub fn is_included(&self, literal: usize) -> bool {
        self.states[literal] > self.n
    }

    /// Whether the positive literal of column `col` is included.
    pub fn includes_positive(&self, col: usize) -> bool {
        self.is_included(col)
    }

    /// Whether the negated literal of column `col` is included.
    pub fn includes_negated(&self, col: usize) -> bool {
        self.is_included(self.num_features + col)
    }

    pub fn touches_column(&self, col: usize) -> bool {
        self.includes_positive(col) || self.includes_negated(col)
    }

    pub fn positive_mask(&self) -> &[u64] {
        &self.include_pos
    }

    pub fn negated_mask(&self) -> &[u64] {
        &self.include_neg
    }

    pub fn set_state(&mut self, literal: usize, value: u32) {
        debug_assert!((1..=2 * self.n).contains(&value));
        let was = self.is_included(literal);
        self.states[literal] = value;
        let now = value > self.n;
        if was != now {
            let (mask, col) = if literal < self.num_features {
                (&mut self.include_pos, literal)
            } else {
                (&mut self.include_neg, literal - self.num_features)
            };
            mask[col / WORD] ^= 1 << (col % WORD);
            if now {
                self.included += 1;
            } else {
                self.included -= 1;
            }
        }
    }

    /// Puts exactly `literals` on the include side (state N+1) and every
    /// other automaton at N. Literal `j < d` is `x_j`, `d + j` is `¬x_j`.
    pub fn set_literals(&mut self, literals: &[usize]) -> Result<()> {
        if let Some(&bad) = literals.iter().find(|&&l| l >= 2 * self.num_features) {
            return Err(Error::invalid(format!(
                "literal {bad} out of range for {} features",
                self.num_features
            )));
        }
        for j in 0..2 * self.num_features {
            let s = if literals.contains(&j) { self.n + 1 } else { self.n };
            self.set_state(j, s);
        }
        Ok(())
    }

    #[inline]
    fn increment(&mut self, literal: usize) {
        let s = self.states[literal];
        if s < 2 * self.n {
            self.set_state(literal, s + 1);
        }
    }

    #[inline]
    fn decrement(&mut self, literal: usize) {
        let s = self.states[literal];
        if s > 1 {
            self.set_state(literal, s - 1);
        }
    }

    /// Clause output on a packed input row. Padding bits must be zero.
    #[inline]
    pub fn fires(&self, x: &[u64], mode: EvalMode) -> bool {
        if self.included == 0 {
            return mode == EvalMode::Train;
        }
        self.include_pos
            .iter()
            .zip(&self.include_neg)
            .zip(x)
            .all(|((&p, &n), &xw)| p & !xw == 0 && n & xw == 0)
    }

    /// Clause output on a boolean input vector.
    pub fn evaluate(&self, x: &[bool], mode: EvalMode) -> Result<bool> {
        if x.len() != self.num_features {
            return Err(Error::Dimension {
                expected: self.num_features,
                got: x.len(),
            });
        }
        let mut words = vec![0u64; words_for(x.len())];
        for (j, &b) in x.iter().enumerate() {
            if b {
                words[j / WORD] |= 1 << (j % WORD);
            }
        }
        Ok(self.fires(&words, mode))
    }

    /// Type I feedback (recognize). With the clause firing on `x`, satisfied
    /// literals move toward include with probability (s-1)/s and unsatisfied
    /// ones toward exclude with probability 1/s, and the weight grows by one.
    /// Otherwise every automaton moves toward exclude with probability 1/s.
    pub fn type_i_feedback<R: RngCore + ?Sized>(&mut self, x: &[u64], specificity: f64, rng: &mut R) {
        let fires = self.fires(x, EvalMode::Train);
        self.type_i_with_output(x, fires, specificity, rng);
    }

    pub(crate) fn type_i_with_output<R: RngCore + ?Sized>(
        &mut self,
        x: &[u64],
        fires: bool,
        specificity: f64,
        rng: &mut R,
    ) {
        let strengthen = Chance::new((specificity - 1.0) / specificity);
        let weaken = Chance::new(1.0 / specificity);
        let d = self.num_features;
        if fires {
            for j in 0..d {
                let xj = x[j / WORD] >> (j % WORD) & 1 == 1;
                let (sat, unsat) = if xj { (j, d + j) } else { (d + j, j) };
                if strengthen.hit(rng) {
                    self.increment(sat);
                }
                if weaken.hit(rng) {
                    self.decrement(unsat);
                }
            }
            self.weight = self.weight.saturating_add(1);
        } else {
            for lit in 0..2 * d {
                if weaken.hit(rng) {
                    self.decrement(lit);
                }
            }
        }
        self.debug_check();
    }

    /// Type II feedback (reject). Only acts when the clause fires on `x`:
    /// every excluded literal that `x` falsifies steps toward include, and
    /// the weight drops by one (floored at zero).
    pub fn type_ii_feedback(&mut self, x: &[u64]) {
        let fires = self.fires(x, EvalMode::Train);
        self.type_ii_with_output(x, fires);
    }

    pub(crate) fn type_ii_with_output(&mut self, x: &[u64], fires: bool) {
        if !fires {
            return;
        }
        let d = self.num_features;
        for j in 0..d {
            let xj = x[j / WORD] >> (j % WORD) & 1 == 1;
            let unsat = if xj { d + j } else { j };
            if !self.is_included(unsat) {
                self.increment(unsat);
            }
        }
        self.weight = self.weight.saturating_sub(1);
        self.debug_check();
    }

    #[inline]
    fn debug_check(&self) {
        debug_assert!(self.states.iter().all(|&s| s >= 1 && s <= 2 * self.n));
    }
}
