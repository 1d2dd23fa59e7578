//! Fixed-width bit vectors over F₂ and Gaussian elimination on them.

use std::fmt;

/// A fixed-length vector over F₂, packed 64 coordinates per word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut b = Self::new(len);
        b.set(i, true);
        b
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[i / 64];
        if v {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    pub fn xor_assign(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + t)
            })
        })
    }

    /// `self ⊆ other`, both read as sets of indices.
    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn union(&self, other: &BitSet) -> BitSet {
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        BitSet { len: self.len, words }
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter_ones()).finish()
    }
}

/// Solves the affine system `row · z = rhs` over F₂.
///
/// Returns `None` when the system is inconsistent and the rank of the
/// coefficient matrix otherwise.
pub fn affine_rank(rows: &[(BitSet, bool)]) -> Option<usize> {
    let mut pivots: Vec<(usize, BitSet, bool)> = Vec::new();
    for (row, rhs) in rows {
        let mut r = row.clone();
        let mut b = *rhs;
        for (col, prow, pb) in &pivots {
            if r.get(*col) {
                r.xor_assign(prow);
                b ^= *pb;
            }
        }
        match r.first_one() {
            Some(col) => {
                // Keep the basis fully reduced on pivot columns.
                for (_, prow, pb) in pivots.iter_mut() {
                    if prow.get(col) {
                        prow.xor_assign(&r);
                        *pb ^= b;
                    }
                }
                pivots.push((col, r, b));
            }
            None if b => return None,
            None => {}
        }
    }
    Some(pivots.len())
}

/// Rank of a family of vectors.
pub fn rank(rows: &[BitSet]) -> usize {
    let sys: Vec<(BitSet, bool)> = rows.iter().map(|r| (r.clone(), false)).collect();
    affine_rank(&sys).expect("homogeneous systems are consistent")
}
