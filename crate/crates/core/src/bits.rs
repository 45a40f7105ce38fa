//! Row-packed boolean matrix used for model inputs.

use serde::{Deserialize, Serialize};

pub(crate) const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// Dense boolean matrix, one padded run of `u64` words per row.
///
/// Padding bits past `cols` are always zero; clause evaluation relies on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            words: vec![0; rows * stride],
        }
    }

    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged row {i}");
            for (j, &b) in r.iter().enumerate() {
                if b {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.words[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.words[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(j < self.cols);
        self.words[i * self.stride + j / WORD] >> (j % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        debug_assert!(j < self.cols);
        let w = &mut self.words[i * self.stride + j / WORD];
        if v {
            *w |= 1 << (j % WORD);
        } else {
            *w &= !(1 << (j % WORD));
        }
    }

    pub fn row_bools(&self, i: usize) -> Vec<bool> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn column_ones(&self, j: usize) -> usize {
        (0..self.rows).filter(|&i| self.get(i, j)).count()
    }

    /// New matrix holding the given rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(idx.len(), self.cols);
        for (dst, &src) in idx.iter().enumerate() {
            m.row_mut(dst).copy_from_slice(self.row(src));
        }
        m
    }

    /// New matrix holding the given columns, in order.
    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (dst, &src) in cols.iter().enumerate() {
                if self.get(i, src) {
                    m.set(i, dst, true);
                }
            }
        }
        m
    }

    /// Word-level mask with the given columns set, for bulk row masking.
    pub fn column_mask(&self, cols: impl IntoIterator<Item = usize>) -> Vec<u64> {
        let mut mask = vec![0u64; self.stride];
        for j in cols {
            mask[j / WORD] |= 1 << (j % WORD);
        }
        mask
    }

    /// Clears every bit selected by `mask` in every row.
    pub fn clear_masked(&mut self, mask: &[u64]) {
        for i in 0..self.rows {
            for (w, m) in self.row_mut(i).iter_mut().zip(mask) {
                *w &= !m;
            }
        }
    }
}
