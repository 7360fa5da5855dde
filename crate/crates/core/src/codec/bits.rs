//! Bit-level writer and reader. Bits fill each byte from the least
//! significant end; multi-bit fields are written least significant bit
//! first, Elias-gamma codes most significant bit first.

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of bits written so far.
    pub fn bit_len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn write_bit(&mut self, bit: bool) {
        let off = self.len % 8;
        if off == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().expect("byte pushed") |= 1 << off;
        }
        self.len += 1;
    }

    /// Low `n` bits of `value`, least significant first.
    pub fn write_bits(&mut self, value: u64, n: u32) {
        debug_assert!(n <= 64);
        for i in 0..n {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    pub fn write_f64(&mut self, x: f64) {
        self.write_bits(x.to_bits(), 64);
    }

    /// Elias-gamma code of `x >= 1`: `floor(log2 x)` zeros, then `x` in
    /// binary from its leading one.
    pub fn write_gamma(&mut self, x: u64) {
        assert!(x >= 1, "gamma code needs x >= 1");
        let nbits = 64 - x.leading_zeros();
        for _ in 1..nbits {
            self.write_bit(false);
        }
        for i in (0..nbits).rev() {
            self.write_bit((x >> i) & 1 == 1);
        }
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn finish(self) -> (Vec<u8>, usize) {
        let len = self.len;
        (self.bytes, len)
    }
}

/// Length in bits of the Elias-gamma code of `x`.
pub fn gamma_len(x: u64) -> usize {
    2 * (63 - x.leading_zeros() as usize) + 1
}

#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    limit: usize,
    pos: usize,
}

impl<'a> BitReader<'a> {
    /// Reader over the first `bit_len` bits of `bytes`.
    pub fn new(bytes: &'a [u8], bit_len: usize) -> Result<Self> {
        if bit_len > 8 * bytes.len() {
            return Err(Error::Truncated(format!(
                "{} bits declared, {} available",
                bit_len,
                8 * bytes.len()
            )));
        }
        Ok(Self {
            bytes,
            limit: bit_len,
            pos: 0,
        })
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.limit - self.pos
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.limit {
            return Err(Error::Truncated(format!("bit {} past end {}", self.pos, self.limit)));
        }
        let b = (self.bytes[self.pos / 8] >> (self.pos % 8)) & 1 == 1;
        self.pos += 1;
        Ok(b)
    }

    pub fn read_bits(&mut self, n: u32) -> Result<u64> {
        if self.remaining() < n as usize {
            return Err(Error::Truncated(format!("need {n} bits, {} left", self.remaining())));
        }
        let mut v = 0u64;
        for i in 0..n {
            if self.read_bit()? {
                v |= 1 << i;
            }
        }
        Ok(v)
    }

    pub fn read_f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.read_bits(64)?))
    }

    pub fn read_gamma(&mut self) -> Result<u64> {
        let mut zeros = 0u32;
        while !self.read_bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(Error::Malformed("gamma code longer than 64 bits".into()));
            }
        }
        let mut v = 1u64;
        for _ in 0..zeros {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gamma_codes() {
        let mut w = BitWriter::new();
        w.write_gamma(1);
        w.write_gamma(2);
        w.write_gamma(5);
        // 1 | 010 | 00101
        assert_eq!(w.bit_len(), 1 + 3 + 5);
        assert_eq!(gamma_len(5), 5);
        let (bytes, len) = w.finish();
        let mut r = BitReader::new(&bytes, len).unwrap();
        assert_eq!(r.read_gamma().unwrap(), 1);
        assert_eq!(r.read_gamma().unwrap(), 2);
        assert_eq!(r.read_gamma().unwrap(), 5);
        assert!(matches!(r.read_bit(), Err(Error::Truncated(_))));
    }

    #[test]
    fn lsb_first_packing() {
        let mut w = BitWriter::new();
        w.write_bit(true);
        w.write_bit(false);
        w.write_bit(true);
        assert_eq!(w.into_bytes(), vec![0b101]);
    }

    proptest! {
        #[test]
        fn mixed_round_trip(fields in proptest::collection::vec((any::<u64>(), 0u32..=64, 1u64..1_000_000), 0..40)) {
            let mut w = BitWriter::new();
            for &(v, n, g) in &fields {
                w.write_bits(v, n);
                w.write_gamma(g);
            }
            let (bytes, len) = w.finish();
            let mut r = BitReader::new(&bytes, len).unwrap();
            for &(v, n, g) in &fields {
                let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
                prop_assert_eq!(r.read_bits(n).unwrap(), v & mask);
                prop_assert_eq!(r.read_gamma().unwrap(), g);
            }
            prop_assert_eq!(r.remaining(), 0);
        }
    }
}
