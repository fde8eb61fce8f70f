//! Binary strings, and the conversions between strings, board columns and
//! natural numbers used throughout the crate.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bit string {0:?}: only '0' and '1' are allowed")]
pub struct ParseBitsError(pub String);

/// A finite binary string. Ordered by length first, then lexicographically,
/// which is the canonical enumeration order of programs and outputs.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    /// The string of length `len` whose big-endian value is `value`.
    /// This is how board columns are identified with strings.
    pub fn from_column(value: u64, len: usize) -> Self {
        assert!(len <= 64, "column strings are at most 64 bits");
        assert!(len == 64 || value < (1u64 << len), "value {value} does not fit {len} bits");
        Self((0..len).rev().map(|i| (value >> i) & 1 == 1).collect())
    }

    /// Big-endian value of the string. Panics above 64 bits.
    pub fn to_column(&self) -> u64 {
        assert!(self.len() <= 64, "string too long for a column index");
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// Binary numeral of `n` without leading zeros; zero is the empty string.
    pub fn from_natural(n: u64) -> Self {
        let width = 64 - n.leading_zeros() as usize;
        Self::from_column(n, width)
    }

    /// Inverse of [`BitString::from_natural`]. Strings with a leading zero do
    /// not denote a natural number.
    pub fn to_natural(&self) -> Option<u64> {
        match self.0.first() {
            None => Some(0),
            Some(false) => None,
            Some(true) if self.len() <= 64 => Some(self.to_column()),
            Some(true) => None,
        }
    }

    /// All strings of exactly `len` bits, in lexicographic order.
    pub fn all_of_len(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64);
        (0..(1u64 << len)).map(move |v| BitString::from_column(v, len))
    }

    /// All strings of length at most `max_len`, in canonical order.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = BitString> {
        (0..=max_len).flat_map(BitString::all_of_len)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ParseBitsError(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}
