//! Fixed-width binary strings: the `arg` and `res` values of a jash.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Widest permitted `arg`/`res`; values always fit in a `u64`.
pub const MAX_WIDTH: usize = 63;

/// A nonempty binary string such as `"010111"`, most significant bit first.
///
/// Width is part of the value: `"001"` and `"1"` are distinct.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bits(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BitsError {
    #[error("empty bit string")]
    Empty,
    #[error("bit string of {len} bits exceeds the maximum width {MAX_WIDTH}")]
    TooWide { len: usize },
    #[error("bit string contains a character other than '0' or '1' at index {at}")]
    BadChar { at: usize },
}

impl Bits {
    pub fn new(s: &str) -> Result<Self, BitsError> {
        if s.is_empty() {
            return Err(BitsError::Empty);
        }
        if s.len() > MAX_WIDTH {
            return Err(BitsError::TooWide { len: s.len() });
        }
        if let Some(at) = s.bytes().position(|b| b != b'0' && b != b'1') {
            return Err(BitsError::BadChar { at });
        }
        Ok(Bits(String::from(s)))
    }

    /// Renders the low `width` bits of `value`, most significant first.
    pub fn from_value(value: u64, width: usize) -> Result<Self, BitsError> {
        if width == 0 {
            return Err(BitsError::Empty);
        }
        if width > MAX_WIDTH {
            return Err(BitsError::TooWide { len: width });
        }
        let mut s = String::with_capacity(width);
        for i in (0..width).rev() {
            s.push(if value >> i & 1 == 1 { '1' } else { '0' });
        }
        Ok(Bits(s))
    }

    pub fn zeros(width: usize) -> Result<Self, BitsError> {
        Self::from_value(0, width)
    }

    pub fn ones(width: usize) -> Result<Self, BitsError> {
        Self::from_value(u64::MAX, width)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructors reject empty strings
    }

    /// Numeric value of the string, MSB first.
    pub fn value(&self) -> u64 {
        self.0
            .bytes()
            .fold(0u64, |acc, b| acc << 1 | u64::from(b - b'0'))
    }

    /// Bit `i` counting from the most significant end; out of range reads 0.
    pub fn bit(&self, i: u64) -> u64 {
        match usize::try_from(i) {
            Ok(i) if i < self.0.len() => u64::from(self.0.as_bytes()[i] - b'0'),
            _ => 0,
        }
    }

    /// Count of leading `'0'` characters.
    pub fn leading_zeros(&self) -> u32 {
        self.0.bytes().take_while(|&b| b == b'0').count() as u32
    }

    /// Packs into bytes MSB-first, left-padded with zero bits to a whole
    /// number of bytes. `"011000010110001001100011"` packs to `b"abc"`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.0.len().div_ceil(8);
        let v = self.value();
        (0..nbytes)
            .map(|i| (v >> (8 * (nbytes - 1 - i))) as u8)
            .collect()
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({})", self.0)
    }
}

impl FromStr for Bits {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Bits::new(s)
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Bits::new(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_and_width() {
        let b = Bits::new("010111").unwrap();
        assert_eq!(b.value(), 23);
        assert_eq!(b.len(), 6);
        assert_eq!(Bits::from_value(23, 6).unwrap(), b);
    }

    #[test]
    fn from_value_truncates_high_bits() {
        assert_eq!(Bits::from_value(0b1111, 2).unwrap().as_str(), "11");
    }

    #[test]
    fn leading_zero_counts() {
        assert_eq!(Bits::new("0001").unwrap().leading_zeros(), 3);
        assert_eq!(Bits::new("1000").unwrap().leading_zeros(), 0);
    }

    #[test]
    fn packing_is_msb_first_and_left_padded() {
        let b = Bits::new("011000010110001001100011").unwrap();
        assert_eq!(b.to_bytes(), b"abc");
        // 20 bits pack into 3 bytes with 4 leading pad bits.
        let b = Bits::from_value(0xabcde, 20).unwrap();
        assert_eq!(b.to_bytes(), [0x0a, 0xbc, 0xde]);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(Bits::new(""), Err(BitsError::Empty));
        assert_eq!(Bits::new("012"), Err(BitsError::BadChar { at: 2 }));
        assert!(matches!(
            Bits::new(core::str::from_utf8(&[b'0'; 64]).unwrap()),
            Err(BitsError::TooWide { len: 64 })
        ));
    }

    #[test]
    fn msb_indexed_bit_access() {
        let b = Bits::new("10").unwrap();
        assert_eq!(b.bit(0), 1);
        assert_eq!(b.bit(1), 0);
        assert_eq!(b.bit(2), 0);
        assert_eq!(b.bit(u64::MAX), 0);
    }
}
