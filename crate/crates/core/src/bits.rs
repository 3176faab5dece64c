//! Fixed-length bit sets used for voxel occupancy, visibility rows and view
//! selections.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut set = Self::new(len);
        for w in &mut set.words {
            *w = !0;
        }
        set.clear_tail();
        set
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::new(len);
        for i in indices {
            set.insert(i);
        }
        set
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
    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if value {
            self.insert(i)
        } else {
            self.remove(i)
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn none(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Size of the intersection with `other`.
    pub fn intersection_count(&self, other: &BitSet) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.ones().collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Packs the bits into bytes, bit `i` stored at byte `i / 8`, bit `i % 8`
    /// (least significant bit first).
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        for b in 0..n {
            out.push((self.words[b / 8] >> ((b % 8) * 8)) as u8);
        }
        out
    }

    /// Inverse of [`BitSet::to_le_bytes`]. Bits past `len` must be zero.
    pub fn from_le_bytes(len: usize, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        let mut set = Self::new(len);
        for (b, &byte) in bytes.iter().enumerate() {
            set.words[b / 8] |= (byte as u64) << ((b % 8) * 8);
        }
        let before = set.words.clone();
        set.clear_tail();
        (before == set.words).then_some(set)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl std::fmt::Debug for BitSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitSet({}){:?}", self.len, self.to_vec())
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BitSetRepr {
    len: usize,
    ones: Vec<usize>,
}

impl Serialize for BitSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BitSetRepr {
            len: self.len,
            ones: self.to_vec(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = BitSetRepr::deserialize(deserializer)?;
        if let Some(&bad) = repr.ones.iter().find(|&&i| i >= repr.len) {
            return Err(serde::de::Error::custom(format!(
                "bit {bad} out of range {}",
                repr.len
            )));
        }
        Ok(BitSet::from_indices(repr.len, repr.ones))
    }
}
