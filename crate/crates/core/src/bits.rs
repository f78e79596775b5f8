//! Bit-string helpers. Bit strings are plain `Vec<bool>` / `&[bool]`.

use crate::error::{Error, Result};

/// Appends the low `width` bits of `value`, most significant first.
pub fn push_uint(out: &mut Vec<bool>, value: u64, width: u32) {
    debug_assert!(width == 64 || value >> width == 0, "{value} does not fit in {width} bits");
    for i in (0..width).rev() {
        out.push((value >> i) & 1 == 1);
    }
}

/// Reads `bits` as an unsigned integer, most significant first.
pub fn to_uint(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

/// Number of bits needed to write any value below `n` (ceil(log2 n)).
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Expands bytes into bits, most significant bit of each byte first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
        .collect()
}

/// Packs bits into bytes, most significant bit first; the tail is zero-padded.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i))))
        .collect()
}

/// Sequential reader over a bit slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        Self { bits, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        let b = *self
            .bits
            .get(self.pos)
            .ok_or_else(|| Error::corrupt(format!("bit stream ended at {}", self.pos)))?;
        self.pos += 1;
        Ok(b)
    }

    pub fn read_uint(&mut self, width: u32) -> Result<u64> {
        let w = width as usize;
        if self.remaining() < w {
            return Err(Error::corrupt(format!(
                "need {w} bits at {}, only {} remain",
                self.pos,
                self.remaining()
            )));
        }
        let v = to_uint(&self.bits[self.pos..self.pos + w]);
        self.pos += w;
        Ok(v)
    }

    pub fn read_slice(&mut self, len: usize) -> Result<&'a [bool]> {
        if self.remaining() < len {
            return Err(Error::corrupt(format!(
                "need {len} bits at {}, only {} remain",
                self.pos,
                self.remaining()
            )));
        }
        let s = &self.bits[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }
}
