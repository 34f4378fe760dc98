use std::fmt;

use crate::error::{Error, Result};

/// Largest chain length whose codeword fits the 2-bit packing.
pub const MAX_PACKED_LEN: usize = 64;

/// A product-basis configuration: one letter per site, each `< d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    letters: Vec<u8>,
}

impl Configuration {
    pub fn new(letters: Vec<u8>) -> Self {
        Self { letters }
    }

    /// Checks every letter against the alphabet size.
    pub fn checked(letters: Vec<u8>, d: usize) -> Result<Self> {
        if let Some((i, &a)) = letters.iter().enumerate().find(|(_, &a)| a as usize >= d) {
            return Err(Error::InvalidConfiguration(format!(
                "letter {a} at site {} is outside 0..{d}",
                i + 1
            )));
        }
        Ok(Self { letters })
    }

    /// Parses a digit string such as `"0120"`.
    pub fn parse_digits(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|v| v as u8)
                    .ok_or_else(|| Error::InvalidConfiguration(format!("bad digit `{c}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn zeros(len: usize) -> Self {
        Self { letters: vec![0; len] }
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<u8> {
        self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// 2 bits per site, site 1 in the lowest bits.
    pub fn pack(&self) -> u128 {
        assert!(self.letters.len() <= MAX_PACKED_LEN, "configuration too long to pack");
        self.letters
            .iter()
            .enumerate()
            .fold(0u128, |acc, (i, &a)| acc | ((a as u128 & 3) << (2 * i)))
    }

    pub fn unpack(code: u128, len: usize) -> Self {
        assert!(len <= MAX_PACKED_LEN, "configuration too long to unpack");
        Self {
            letters: (0..len).map(|i| ((code >> (2 * i)) & 3) as u8).collect(),
        }
    }

    /// Dense base-`d` index with site 1 least significant.
    pub fn index(&self, d: usize) -> u64 {
        self.letters
            .iter()
            .rev()
            .fold(0u64, |acc, &a| acc * d as u64 + a as u64)
    }

    pub fn from_index(mut index: u64, d: usize, len: usize) -> Self {
        let mut letters = Vec::with_capacity(len);
        for _ in 0..len {
            letters.push((index % d as u64) as u8);
            index /= d as u64;
        }
        Self { letters }
    }
}

impl From<Vec<u8>> for Configuration {
    fn from(letters: Vec<u8>) -> Self {
        Self::new(letters)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.letters {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Decodes a dense index into `out` without allocating.
pub(crate) fn decode_into(mut index: u64, d: u64, out: &mut [u8]) {
    for slot in out.iter_mut() {
        *slot = (index % d) as u8;
        index /= d;
    }
}

pub(crate) fn encode(letters: &[u8], d: u64) -> u64 {
    letters.iter().rev().fold(0u64, |acc, &a| acc * d + a as u64)
}
