//! Hand-built machines for unit tests.

use crate::tm::{HyperParams, TmClassifier};

/// A model with `per_polarity` clauses per (class, polarity), all weights
/// zero except the listed `(clause, literals, weight)` entries.
pub(crate) fn model(d: usize, classes: usize, per_polarity: usize, entries: &[(usize, &[usize], u32)]) -> TmClassifier {
    let params = HyperParams::new(2 * classes * per_polarity, 10, 3.0, classes);
    let mut m = TmClassifier::new(params, d).unwrap();
    for c in m.clauses_mut() {
        c.set_weight(0);
    }
    for &(idx, lits, w) in entries {
        let c = &mut m.clauses_mut()[idx];
        c.set_literals(lits).unwrap();
        c.set_weight(w);
    }
    m
}

/// Clause 0 (class 0, +, w=2) includes x0; clause 2 (class 1, +, w=4)
/// includes x0 and ¬x1. d = 3.
pub(crate) fn fixture_f1() -> TmClassifier {
    model(3, 2, 1, &[(0, &[0], 2), (2, &[0, 4], 4)])
}
