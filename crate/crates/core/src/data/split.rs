use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::rng_from;

pub const DEFAULT_FRACTIONS: [f64; 3] = [0.6, 0.2, 0.2];

/// Disjoint train/validation/test sample indices, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn parts(&self) -> [&[usize]; 3] {
        [&self.train, &self.val, &self.test]
    }
}

/// Class-stratified three-way split.
///
/// Every class contributes at least one sample to each part (for classes of
/// 3 or 4 samples this takes precedence over the overall proportions). Per-class counts
/// start from `floor(fraction * n_class)`; the leftover samples go, largest
/// fractional remainder first, to the parts that are still short of their
/// global target, so both per-class and overall sizes stay within one sample
/// of the exact proportions.
pub fn stratified_split(labels: &[usize], num_classes: usize, fractions: [f64; 3], seed: u64) -> Result<Split> {
    let total: f64 = fractions.iter().sum();
    if fractions.iter().any(|&f| !(f > 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("split fractions {fractions:?} must be positive and sum to 1")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class
            .get_mut(y)
            .ok_or_else(|| Error::invalid(format!("label {y} out of range")))?
            .push(i);
    }
    if let Some((c, v)) = by_class.iter().enumerate().find(|(_, v)| v.len() < 3) {
        return Err(Error::invalid(format!("class {c} has {} samples; need at least 3", v.len())));
    }

    let n = labels.len();
    let targets = apportion(n, &fractions);
    let mut alloc: Vec<[usize; 3]> = by_class
        .iter()
        .map(|v| {
            let m = v.len() as f64;
            let mut a = [0; 3];
            for k in 0..3 {
                a[k] = ((fractions[k] * m).floor() as usize).max(1);
            }
            // for tiny classes the minimum of one per part can overshoot
            while a.iter().sum::<usize>() > v.len() {
                let k = (0..3).max_by_key(|&k| a[k]).unwrap();
                a[k] -= 1;
            }
            a
        })
        .collect();

    let mut leftover: Vec<usize> = by_class
        .iter()
        .zip(&alloc)
        .map(|(v, a)| v.len() - a.iter().sum::<usize>())
        .collect();
    loop {
        let given: Vec<usize> = (0..3).map(|k| alloc.iter().map(|a| a[k]).sum()).collect();
        let mut best: Option<(f64, bool, usize, usize)> = None;
        for c in 0..num_classes {
            if leftover[c] == 0 {
                continue;
            }
            for k in 0..3 {
                let short = given[k] < targets[k];
                let rem = fractions[k] * by_class[c].len() as f64 - alloc[c][k] as f64;
                if rem <= 0.0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((br, bs, _, _)) => (short, rem) > (bs, br),
                };
                if better {
                    best = Some((rem, short, c, k));
                }
            }
        }
        match best {
            Some((_, _, c, k)) => {
                alloc[c][k] += 1;
                leftover[c] -= 1;
            }
            None => break,
        }
    }

    rebalance(&mut alloc, &by_class.iter().map(Vec::len).collect::<Vec<_>>(), &fractions, n);

    let mut rng = rng_from(seed, &[0x5911]);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for (mut idx, a) in by_class.into_iter().zip(&alloc) {
        idx.shuffle(&mut rng);
        let mut it = idx.into_iter();
        for k in 0..3 {
            parts[k].extend(it.by_ref().take(a[k]));
        }
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    let [train, val, test] = parts;
    Ok(Split { train, val, test })
}

/// Moves single samples between parts inside a class, directly or through
/// the third part, until every part is within one sample of its exact size.
/// Each cell stays at the floor or ceiling of its exact per-class share.
fn rebalance(alloc: &mut [[usize; 3]], sizes: &[usize], fractions: &[f64; 3], n: usize) {
    let exact = |c: usize, k: usize| fractions[k] * sizes[c] as f64;
    let can_take = |a: &[[usize; 3]], c: usize, k: usize| a[c][k] > 1 && (a[c][k] - 1) as f64 > exact(c, k) - 1.0;
    let can_give = |a: &[[usize; 3]], c: usize, k: usize| ((a[c][k] + 1) as f64) < exact(c, k) + 1.0;
    for _ in 0..4 * n + 8 {
        let dev: Vec<f64> = (0..3)
            .map(|k| alloc.iter().map(|a| a[k]).sum::<usize>() as f64 - fractions[k] * n as f64)
            .collect();
        let over = (0..3).max_by(|&a, &b| dev[a].partial_cmp(&dev[b]).unwrap()).unwrap();
        let under = (0..3).min_by(|&a, &b| dev[a].partial_cmp(&dev[b]).unwrap()).unwrap();
        if dev[over] <= 1.0 + 1e-9 && dev[under] >= -1.0 - 1e-9 {
            return;
        }
        let shift = |a: &mut [[usize; 3]], from: usize, to: usize| -> bool {
            match (0..a.len()).find(|&c| can_take(a, c, from) && can_give(a, c, to)) {
                Some(c) => {
                    a[c][from] -= 1;
                    a[c][to] += 1;
                    true
                }
                None => false,
            }
        };
        if shift(alloc, over, under) {
            continue;
        }
        let mid = 3 - over - under;
        let mut trial = alloc.to_vec();
        if shift(&mut trial, over, mid) && shift(&mut trial, mid, under) {
            alloc.copy_from_slice(&trial);
            continue;
        }
        return;
    }
}

/// Largest-remainder apportionment of `n` items by `fractions`.
fn apportion(n: usize, fractions: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut out = [0usize; 3];
    for k in 0..3 {
        out[k] = exact[k].floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - out[a] as f64;
        let rb = exact[b] - out[b] as f64;
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut rest = n - out.iter().sum::<usize>();
    for k in order.into_iter().cycle() {
        if rest == 0 {
            break;
        }
        out[k] += 1;
        rest -= 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(counts: &[usize]) -> Vec<usize> {
        counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat(c).take(n))
            .collect()
    }

    fn class_counts(idx: &[usize], y: &[usize], c: usize) -> usize {
        idx.iter().filter(|&&i| y[i] == c).count()
    }

    #[test]
    fn balanced_hundred() {
        let y = labels(&[50, 50]);
        let s = stratified_split(&y, 2, DEFAULT_FRACTIONS, 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (60, 20, 20));
        for c in 0..2 {
            assert_eq!(class_counts(&s.train, &y, c), 30);
            assert_eq!(class_counts(&s.val, &y, c), 10);
            assert_eq!(class_counts(&s.test, &y, c), 10);
        }
        assert_eq!(s, stratified_split(&y, 2, DEFAULT_FRACTIONS, 1).unwrap());
        assert_ne!(s, stratified_split(&y, 2, DEFAULT_FRACTIONS, 2).unwrap());
    }

    #[test]
    fn small_classes_reach_every_part() {
        for n in 3..=8 {
            let y = labels(&[n, 40]);
            let s = stratified_split(&y, 2, DEFAULT_FRACTIONS, 5).unwrap();
            for part in s.parts() {
                assert!(class_counts(part, &y, 0) >= 1, "n={n}");
            }
        }
        assert!(stratified_split(&labels(&[2, 40]), 2, DEFAULT_FRACTIONS, 5).is_err());
    }

    proptest! {
        #[test]
        fn partition_and_proportions(counts in prop::collection::vec(5usize..60, 2..8), seed in any::<u64>()) {
            let y = labels(&counts);
            let s = stratified_split(&y, counts.len(), DEFAULT_FRACTIONS, seed).unwrap();
            let mut all: Vec<usize> = s.parts().iter().flat_map(|p| p.iter().copied()).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
            let n = y.len() as f64;
            for (k, part) in s.parts().iter().enumerate() {
                prop_assert!((part.len() as f64 - DEFAULT_FRACTIONS[k] * n).abs() <= 1.0 + 1e-9,
                    "part {} has {} of {}", k, part.len(), n);
                for (c, &m) in counts.iter().enumerate() {
                    let got = class_counts(part, &y, c) as f64;
                    prop_assert!(got >= 1.0);
                    prop_assert!((got - DEFAULT_FRACTIONS[k] * m as f64).abs() < 1.0 + 1e-9);
                }
            }
        }
    }
}
