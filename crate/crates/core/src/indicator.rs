//! Observed indicator vectors: one bit per training graph.

use std::fmt;

/// The column `I(x in g_1), ..., I(x in g_n)` of a pattern `x`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IndicatorVector {
    words: Vec<u64>,
    len: usize,
    support: usize,
}

impl IndicatorVector {
    pub fn zeros(len: usize) -> Self {
        IndicatorVector {
            words: vec![0; len.div_ceil(64)],
            len,
            support: 0,
        }
    }

    pub fn ones(len: usize) -> Self {
        Self::from_indices(len, 0..len)
    }

    /// Builds from set positions; duplicates are ignored.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.set(i);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_indices(bits.len(), bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i))
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let (w, b) = (i / 64, i % 64);
        if self.words[w] & (1 << b) == 0 {
            self.words[w] |= 1 << b;
            self.support += 1;
        }
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of set bits.
    pub fn support(&self) -> usize {
        self.support
    }

    /// Set positions in ascending order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b)
            })
        })
    }

    /// `1(self) ⊆ 1(other)`.
    pub fn is_subset_of(&self, other: &IndicatorVector) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// `sum_{i in 1(self)} values[i]`, accumulated in ascending index order.
    pub fn sum_over(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len);
        let mut s = 0.0;
        for i in self.iter_ones() {
            s += values[i];
        }
        s
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for IndicatorVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndicatorVector({self})")
    }
}

impl fmt::Display for IndicatorVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn support_counts_set_bits(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let v = IndicatorVector::from_bools(&bits);
            prop_assert_eq!(v.support(), bits.iter().filter(|&&b| b).count());
            prop_assert_eq!(v.to_bools(), bits.clone());
            let ones: Vec<usize> = v.iter_ones().collect();
            let expected: Vec<usize> = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
            prop_assert_eq!(ones, expected);
        }

        #[test]
        fn subset_matches_bitwise_definition(a in proptest::collection::vec(any::<bool>(), 70), b in proptest::collection::vec(any::<bool>(), 70)) {
            let va = IndicatorVector::from_bools(&a);
            let vb = IndicatorVector::from_bools(&b);
            let expected = a.iter().zip(&b).all(|(&x, &y)| !x || y);
            prop_assert_eq!(va.is_subset_of(&vb), expected);
        }
    }

    #[test]
    fn duplicate_set_does_not_double_count() {
        let v = IndicatorVector::from_indices(5, [1, 1, 3]);
        assert_eq!(v.support(), 2);
        assert_eq!(v.to_string(), "01010");
    }
}
