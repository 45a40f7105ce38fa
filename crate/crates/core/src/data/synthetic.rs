//! Boolean benchmark generators. Features are 0/1 reals, so they pass
//! through the thermometer encoder as single columns.

use rand::Rng;

use super::RawDataset;
use crate::error::{Error, Result};
use crate::rng::rng_from;

fn random_bits(n: usize, d: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = rng_from(seed, &[0xB175]);
    (0..n).map(|_| (0..d).map(|_| rng.random::<bool>()).collect()).collect()
}

fn to_raw(name: &str, rows: Vec<Vec<bool>>, label: impl Fn(&[bool]) -> bool) -> RawDataset {
    let d = rows.first().map_or(0, Vec::len);
    let labels = rows.iter().map(|r| label(r) as usize).collect();
    let features = rows
        .into_iter()
        .map(|r| r.into_iter().map(|b| b as u8 as f64).collect())
        .collect();
    let names = (0..d).map(|j| format!("x{j}")).collect();
    RawDataset::new(name, names, features, labels, 2).expect("generator output is consistent")
}

/// Uniform random bits; label is the XOR of the first `k` bits.
pub fn generate_parity(n: usize, d: usize, k: usize, seed: u64) -> Result<RawDataset> {
    if k == 0 || k > d {
        return Err(Error::invalid(format!("parity order k={k} must be in 1..={d}")));
    }
    let rows = random_bits(n, d, seed);
    Ok(to_raw("parity", rows, |r| r[..k].iter().fold(false, |a, &b| a ^ b)))
}

/// Label is the majority vote of `x0∧x1`, `x2∧x3`, `x4∧x5`; other bits are noise.
pub fn generate_hierarchical_bool(n: usize, d: usize, seed: u64) -> Result<RawDataset> {
    if d < 6 {
        return Err(Error::invalid(format!("hierarchical boolean needs d >= 6, got {d}")));
    }
    let rows = random_bits(n, d, seed);
    Ok(to_raw("hierarchical_bool", rows, |r| {
        let votes = [r[0] && r[1], r[2] && r[3], r[4] && r[5]];
        votes.iter().filter(|&&v| v).count() >= 2
    }))
}

/// Label is `(x0∧x1) XOR (x2∧x3)`; other bits are noise.
pub fn generate_feature_interaction(n: usize, d: usize, seed: u64) -> Result<RawDataset> {
    if d < 4 {
        return Err(Error::invalid(format!("feature interaction needs d >= 4, got {d}")));
    }
    let rows = random_bits(n, d, seed);
    Ok(to_raw("feature_interaction", rows, |r| (r[0] && r[1]) ^ (r[2] && r[3])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label_of(gen: impl Fn(&[bool]) -> bool, x: &[bool]) -> usize {
        gen(x) as usize
    }

    #[test]
    fn parity_rules() {
        let d = generate_parity(200, 20, 1, 3).unwrap();
        for (r, &y) in d.features.iter().zip(&d.labels) {
            assert_eq!(y, r[0] as usize);
        }
        let d = generate_parity(200, 20, 5, 3).unwrap();
        for (r, &y) in d.features.iter().zip(&d.labels) {
            let ones = r[..5].iter().filter(|&&v| v == 1.0).count();
            assert_eq!(y, ones % 2);
        }
        assert!(generate_parity(10, 4, 5, 0).is_err());
    }

    #[test]
    fn hierarchical_rules() {
        let f = |r: &[bool]| [r[0] && r[1], r[2] && r[3], r[4] && r[5]].iter().filter(|&&v| v).count() >= 2;
        assert_eq!(label_of(f, &[true; 20]), 1);
        assert_eq!(label_of(f, &[false; 20]), 0);
        let d = generate_hierarchical_bool(300, 20, 8).unwrap();
        for (r, &y) in d.features.iter().zip(&d.labels) {
            let mut b: Vec<bool> = r.iter().map(|&v| v == 1.0).collect();
            assert_eq!(y, f(&b) as usize);
            for v in &mut b[6..] {
                *v = !*v;
            }
            assert_eq!(y, f(&b) as usize);
        }
    }

    #[test]
    fn interaction_rules() {
        let d = generate_feature_interaction(300, 20, 8).unwrap();
        for (r, &y) in d.features.iter().zip(&d.labels) {
            let b: Vec<bool> = r.iter().map(|&v| v == 1.0).collect();
            assert_eq!(y, ((b[0] && b[1]) ^ (b[2] && b[3])) as usize);
        }
        let f = |r: &[bool]| (r[0] && r[1]) ^ (r[2] && r[3]);
        let mut x = vec![false; 20];
        assert_eq!(label_of(f, &x), 0);
        x[0] = true;
        x[1] = true;
        assert_eq!(label_of(f, &x), 1);
        x[2] = true;
        x[3] = true;
        assert_eq!(label_of(f, &x), 0);
    }

    #[test]
    fn pure_in_seed() {
        assert_eq!(generate_parity(50, 8, 3, 4).unwrap(), generate_parity(50, 8, 3, 4).unwrap());
        assert_ne!(generate_parity(50, 8, 3, 4).unwrap(), generate_parity(50, 8, 3, 5).unwrap());
    }
}
