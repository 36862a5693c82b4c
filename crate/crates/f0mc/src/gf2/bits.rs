use std::cmp::Ordering;
use std::fmt;

use rand::RngCore;

use crate::error::{Error, Result};

/// A fixed-width vector over GF(2).
///
/// Bit index 0 is the most significant (first) bit, so the string `101` has
/// `get(0) == true`, `get(2) == true`, and numeric value 5. Comparison is
/// lexicographic MSB-first, which for equal widths coincides with unsigned
/// integer order. The width is fixed at construction.
///
/// Internally bits are packed little-endian into `u64` words: `words[0]` holds
/// the least significant 64 bits of the numeric value. All external renderings
/// (binary, hex) are MSB-first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitString {
    /// The all-zero string of the given width.
    pub fn zeros(len: usize) -> Self {
        BitString { len, words: vec![0; word_count(len)] }
    }

    /// Interprets `value` as the numeric value of a `len`-bit string.
    ///
    /// Fails if `value` does not fit in `len` bits.
    pub fn from_u64(value: u64, len: usize) -> Result<Self> {
        if len < 64 && value >> len != 0 {
            return Err(Error::InvalidParams {
                msg: format!("value {value} does not fit in {len} bits"),
            });
        }
        let mut s = Self::zeros(len);
        if !s.words.is_empty() {
            s.words[0] = value;
        }
        Ok(s)
    }

    pub fn from_u128(value: u128, len: usize) -> Result<Self> {
        if len < 128 && value >> len != 0 {
            return Err(Error::InvalidParams {
                msg: format!("value {value} does not fit in {len} bits"),
            });
        }
        let mut s = Self::zeros(len);
        if !s.words.is_empty() {
            s.words[0] = value as u64;
        }
        if s.words.len() > 1 {
            s.words[1] = (value >> 64) as u64;
        }
        Ok(s)
    }

    /// Builds a string from bits given MSB-first.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut s = Self::zeros(bits.len());
        for (i, b) in bits.iter().enumerate() {
            s.set(i, *b);
        }
        s
    }

    /// Uniformly random string of the given width.
    pub fn random(rng: &mut impl RngCore, len: usize) -> Self {
        let mut words = vec![0u64; word_count(len)];
        for w in words.iter_mut() {
            *w = rng.next_u64();
        }
        let mut s = BitString { len, words };
        s.mask_top();
        s
    }

    fn mask_top(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(top) = self.words.last_mut() {
                *top &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Position of bit index `i` (MSB-first) counted from the LSB end.
    #[inline]
    fn pos(&self, i: usize) -> usize {
        debug_assert!(i < self.len);
        self.len - 1 - i
    }

    /// Bit at MSB-first index `i`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        let p = self.pos(i);
        (self.words[p / 64] >> (p % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        let p = self.pos(i);
        let mask = 1u64 << (p % 64);
        if v {
            self.words[p / 64] |= mask;
        } else {
            self.words[p / 64] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// In-place XOR with an equal-width string.
    pub fn xor_assign(&mut self, other: &BitString) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// GF(2) inner product: parity of the AND of two equal-width strings.
    pub fn and_parity(&self, other: &BitString) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones() & 1;
        }
        acc & 1 == 1
    }

    /// The first `m` bits (MSB side) as a new string of width `m`.
    pub fn prefix(&self, m: usize) -> BitString {
        debug_assert!(m <= self.len);
        // Numerically: value >> (len - m).
        let shift = self.len - m;
        let mut out = BitString::zeros(m);
        let (wshift, bshift) = (shift / 64, shift % 64);
        for i in 0..out.words.len() {
            let lo = self.words.get(i + wshift).copied().unwrap_or(0);
            let hi = self.words.get(i + wshift + 1).copied().unwrap_or(0);
            out.words[i] = if bshift == 0 { lo } else { (lo >> bshift) | (hi << (64 - bshift)) };
        }
        out.mask_top();
        out
    }

    /// The last `m` bits (LSB side) as a new string of width `m`.
    pub fn suffix(&self, m: usize) -> BitString {
        debug_assert!(m <= self.len);
        let mut out = BitString::zeros(m);
        let n = out.words.len();
        out.words.copy_from_slice(&self.words[..n]);
        out.mask_top();
        out
    }

    /// Whether the first `m` bits equal `other` (which must have width `m`).
    pub fn has_prefix(&self, other: &BitString) -> bool {
        debug_assert!(other.len <= self.len);
        self.prefix(other.len) == *other
    }

    /// Length of the maximal all-zero suffix (counted from the LSB end).
    /// Returns the full width for the all-zero string.
    pub fn trailing_zeros(&self) -> u32 {
        let mut tz = 0u32;
        for (i, &w) in self.words.iter().enumerate() {
            if w != 0 {
                tz += w.trailing_zeros();
                return tz.min(self.len as u32);
            }
            tz = (i as u32 + 1) * 64;
        }
        self.len as u32
    }

    /// Index (MSB-first) of the first set bit, or `None` if zero.
    pub fn leading_one(&self) -> Option<usize> {
        for (i, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                let p = i * 64 + (63 - w.leading_zeros() as usize);
                return Some(self.len - 1 - p);
            }
        }
        None
    }

    /// Numeric value when the width is at most 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        if self.len > 64 {
            // Wider strings may still hold small values.
            if self.words[1..].iter().any(|&w| w != 0) {
                return None;
            }
        }
        Some(self.words.first().copied().unwrap_or(0))
    }

    /// Numeric value as a float; wide strings lose low-order precision.
    pub fn to_f64(&self) -> f64 {
        let mut acc = 0.0f64;
        for &w in self.words.iter().rev() {
            acc = acc * 2f64.powi(64) + w as f64;
        }
        acc
    }

    /// MSB-first binary rendering, e.g. `0b0110`.
    pub fn to_binary_string(&self) -> String {
        let mut s = String::with_capacity(self.len + 2);
        s.push_str("0b");
        for i in 0..self.len {
            s.push(if self.get(i) { '1' } else { '0' });
        }
        s
    }

    /// MSB-first hex rendering of the numeric value, e.g. `0x1a`.
    pub fn to_hex_string(&self) -> String {
        let nibbles = self.len.div_ceil(4).max(1);
        let mut s = String::with_capacity(nibbles + 2);
        s.push_str("0x");
        for i in (0..nibbles).rev() {
            let shift = i * 4;
            let nib = if shift < self.words.len() * 64 {
                let w = self.words[shift / 64];
                let off = shift % 64;
                let mut v = (w >> off) & 0xf;
                if off > 60 && shift / 64 + 1 < self.words.len() {
                    v |= (self.words[shift / 64 + 1] << (64 - off)) & 0xf;
                }
                v
            } else {
                0
            };
            s.push(char::from_digit(nib as u32, 16).unwrap());
        }
        s
    }

    /// Parses `0b...`, `0x...`, or decimal text into a string of width `len`.
    pub fn parse(text: &str, len: usize) -> Result<Self> {
        let text = text.trim();
        let err = |msg: String| Error::InvalidParams { msg };
        if let Some(bin) = text.strip_prefix("0b") {
            let mut s = Self::zeros(len);
            let digits: Vec<char> = bin.chars().filter(|c| *c != '_').collect();
            if digits.len() > len {
                return Err(err(format!("binary literal has {} bits, width is {len}", digits.len())));
            }
            let offset = len - digits.len();
            for (i, c) in digits.iter().enumerate() {
                match c {
                    '0' => {}
                    '1' => s.set(offset + i, true),
                    _ => return Err(err(format!("invalid binary digit '{c}'"))),
                }
            }
            Ok(s)
        } else if let Some(hex) = text.strip_prefix("0x") {
            let mut s = Self::zeros(len);
            let digits: Vec<u64> = hex
                .chars()
                .filter(|c| *c != '_')
                .map(|c| c.to_digit(16).map(|d| d as u64).ok_or_else(|| err(format!("invalid hex digit '{c}'"))))
                .collect::<Result<_>>()?;
            for (k, nib) in digits.iter().rev().enumerate() {
                for b in 0..4 {
                    if (nib >> b) & 1 == 1 {
                        let p = k * 4 + b;
                        if p >= len {
                            return Err(err(format!("hex literal does not fit in {len} bits")));
                        }
                        let i = len - 1 - p;
                        s.set(i, true);
                    }
                }
            }
            Ok(s)
        } else {
            let value: u128 = text
                .parse()
                .map_err(|_| err(format!("expected 0b/0x/decimal literal, got '{text}'")))?;
            Self::from_u128(value, len)
        }
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.len == other.len {
            // Numeric comparison, identical to MSB-first lexicographic order.
            for (a, b) in self.words.iter().rev().zip(other.words.iter().rev()) {
                match a.cmp(b) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        } else {
            // General lexicographic order; a proper prefix sorts first.
            let common = self.len.min(other.len);
            for i in 0..common {
                match (self.get(i), other.get(i)) {
                    (false, true) => return Ordering::Less,
                    (true, false) => return Ordering::Greater,
                    _ => {}
                }
            }
            self.len.cmp(&other.len)
        }
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({})", self.to_binary_string())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_binary_string()[2..])
    }
}
