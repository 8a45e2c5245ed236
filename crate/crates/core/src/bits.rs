//! Fixed-width bitstrings and site sets backed by a single machine word.
//!
//! Bit `k` of the word always refers to site (qubit / vertex) `k`. When a
//! bitstring is rendered as text, site 0 is the leftmost character, matching
//! the way Pauli words are written (`"XZI"` acts as `X` on site 0).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest number of sites supported by the symbolic layer.
pub const MAX_SITES: usize = 64;

pub(crate) fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A bitstring of length `n` (one bit per site).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: usize,
    bits: u64,
}

impl BitString {
    pub fn new(len: usize, bits: u64) -> Result<Self> {
        if len > MAX_SITES {
            return Err(Error::Capacity {
                what: "bitstring length",
                requested: len as u128,
                limit: MAX_SITES as u128,
            });
        }
        if bits & !mask(len) != 0 {
            return Err(Error::InvalidInput(format!(
                "bits {bits:#x} do not fit in {len} sites"
            )));
        }
        Ok(Self { len, bits })
    }

    pub(crate) fn from_raw(len: usize, bits: u64) -> Self {
        debug_assert!(len <= MAX_SITES && bits & !mask(len) == 0);
        Self { len, bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self::from_raw(len, 0)
    }

    pub fn ones(len: usize) -> Self {
        Self::from_raw(len, mask(len))
    }

    /// Interprets `index` as a basis-state index, site 0 being the most
    /// significant bit.
    pub fn from_index(len: usize, index: u64) -> Result<Self> {
        if len < 64 && index >> len != 0 {
            return Err(Error::IndexOutOfRange {
                index: index as usize,
                len: 1usize << len,
            });
        }
        let mut bits = 0u64;
        for k in 0..len {
            if (index >> (len - 1 - k)) & 1 == 1 {
                bits |= 1 << k;
            }
        }
        Self::new(len, bits)
    }

    /// Inverse of [`BitString::from_index`].
    pub fn to_index(self) -> u64 {
        (0..self.len).fold(0u64, |acc, k| (acc << 1) | ((self.bits >> k) & 1))
    }

    pub fn len(self) -> usize {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn get(self, k: usize) -> bool {
        k < self.len && (self.bits >> k) & 1 == 1
    }

    pub fn count_ones(self) -> u32 {
        self.bits.count_ones()
    }

    /// Parity of the bitwise AND, i.e. the GF(2) inner product.
    pub fn dot(self, other: BitString) -> bool {
        (self.bits & other.bits).count_ones() % 2 == 1
    }

    pub fn xor(self, other: BitString) -> BitString {
        debug_assert_eq!(self.len, other.len);
        Self::from_raw(self.len, self.bits ^ other.bits)
    }

    pub fn iter_ones(self) -> impl Iterator<Item = usize> {
        SiteSet(self.bits).iter()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len {
            f.write_str(if self.get(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        let mut len = 0usize;
        for (pos, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => {
                    if pos < 64 {
                        bits |= 1 << pos;
                    }
                }
                _ => return Err(Error::parse(pos, format!("expected '0' or '1', found {ch:?}"))),
            }
            len += 1;
        }
        Self::new(len, bits)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A set of site indices; serialized as an ascending list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct SiteSet(pub u64);

impl SiteSet {
    pub const EMPTY: SiteSet = SiteSet(0);

    pub fn from_sites(sites: &[usize]) -> Result<Self> {
        let mut m = 0u64;
        for &s in sites {
            if s >= MAX_SITES {
                return Err(Error::IndexOutOfRange {
                    index: s,
                    len: MAX_SITES,
                });
            }
            m |= 1 << s;
        }
        Ok(SiteSet(m))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, k: usize) -> bool {
        k < 64 && (self.0 >> k) & 1 == 1
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let k = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(k)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

// Ascending size first, then lexicographic on the sorted site lists.
impl Ord for SiteSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.to_vec().cmp(&other.to_vec()))
    }
}

impl PartialOrd for SiteSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, k) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for SiteSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for SiteSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let sites = Vec::<usize>::deserialize(deserializer)?;
        SiteSet::from_sites(&sites).map_err(serde::de::Error::custom)
    }
}

/// All subsets of `{0..n}` of size `k`, in lexicographic order.
pub(crate) fn subsets_of_size(n: usize, k: usize) -> Vec<SiteSet> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(SiteSet(idx.iter().fold(0u64, |m, &s| m | (1 << s))));
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for t in i..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_puts_site_zero_first() {
        let b: BitString = "110".parse().unwrap();
        assert!(b.get(0) && b.get(1) && !b.get(2));
        assert_eq!(b.to_string(), "110");
        assert_eq!(b.to_index(), 0b110);
        assert_eq!(BitString::from_index(3, 0b110).unwrap(), b);
    }

    #[test]
    fn rejects_bad_characters() {
        assert!(matches!(
            "10x".parse::<BitString>(),
            Err(Error::Parse { position: 2, .. })
        ));
        assert!(BitString::from_index(3, 8).is_err());
    }

    #[test]
    fn subsets_are_complete_and_ordered() {
        let s = subsets_of_size(5, 3);
        assert_eq!(s.len(), 10);
        assert_eq!(s[0].to_vec(), vec![0, 1, 2]);
        assert_eq!(s[9].to_vec(), vec![2, 3, 4]);
        assert_eq!(subsets_of_size(4, 0), vec![SiteSet::EMPTY]);
        assert!(subsets_of_size(2, 3).is_empty());
        let mut sorted = s.clone();
        sorted.sort();
        assert_eq!(sorted, s);
    }
}
