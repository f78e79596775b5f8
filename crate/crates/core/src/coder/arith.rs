//! Static binary arithmetic coder with 32-bit registers.
//!
//! Classic low/high interval coder with bit-at-a-time renormalization; a carry
//! into already emitted bits is resolved with the pending ("bits to follow")
//! counter. The flush writes two bits plus any pending bits, and the decoder
//! reads zeros past the end of the stream.

use crate::error::{Error, Result};

const TOP: u64 = (1 << 32) - 1;
const HALF: u64 = 1 << 31;
const QUARTER: u64 = 1 << 30;
const THREE_QUARTERS: u64 = 3 << 30;

/// Largest frequency total the coder accepts.
pub const MAX_TOTAL: u64 = QUARTER;

/// Something that accepts coded bits.
pub trait BitSink {
    fn put(&mut self, bit: bool);
}

impl BitSink for Vec<bool> {
    #[inline]
    fn put(&mut self, bit: bool) {
        self.push(bit);
    }
}

/// Counts bits without storing them.
#[derive(Debug, Default, Clone, Copy)]
pub struct BitCounter(pub usize);

impl BitSink for BitCounter {
    #[inline]
    fn put(&mut self, _bit: bool) {
        self.0 += 1;
    }
}

/// Cumulative frequency table built directly from symbol counts.
#[derive(Debug, Clone)]
pub struct Frequencies {
    cumulative: Vec<u64>,
}

impl Frequencies {
    pub fn new(counts: &[u64]) -> Result<Self> {
        let mut cumulative = Vec::with_capacity(counts.len() + 1);
        let mut acc = 0u64;
        cumulative.push(0);
        for &c in counts {
            acc += c;
            cumulative.push(acc);
        }
        if acc == 0 {
            return Err(Error::param("frequency table is empty"));
        }
        if acc > MAX_TOTAL {
            return Err(Error::param(format!("frequency total {acc} exceeds {MAX_TOTAL}")));
        }
        Ok(Self { cumulative })
    }

    pub fn total(&self) -> u64 {
        *self.cumulative.last().unwrap()
    }

    pub fn symbols(&self) -> usize {
        self.cumulative.len() - 1
    }

    #[inline]
    fn bounds(&self, symbol: usize) -> (u64, u64) {
        (self.cumulative[symbol], self.cumulative[symbol + 1])
    }

    /// Symbol whose interval contains `target`.
    #[inline]
    fn find(&self, target: u64) -> usize {
        self.cumulative.partition_point(|&c| c <= target) - 1
    }
}

pub struct Encoder<'f, S> {
    freqs: &'f Frequencies,
    low: u64,
    high: u64,
    pending: u64,
    sink: S,
}

impl<'f, S: BitSink> Encoder<'f, S> {
    pub fn new(freqs: &'f Frequencies, sink: S) -> Self {
        Self { freqs, low: 0, high: TOP, pending: 0, sink }
    }

    #[inline]
    fn emit(&mut self, bit: bool) {
        self.sink.put(bit);
        for _ in 0..self.pending {
            self.sink.put(!bit);
        }
        self.pending = 0;
    }

    /// Codes one symbol. Panics (debug) if the symbol has zero frequency.
    #[inline]
    pub fn encode(&mut self, symbol: usize) {
        let (lo, hi) = self.freqs.bounds(symbol);
        debug_assert!(hi > lo, "symbol {symbol} has zero frequency");
        let total = self.freqs.total();
        let range = self.high - self.low + 1;
        self.high = self.low + range * hi / total - 1;
        self.low += range * lo / total;
        loop {
            if self.high < HALF {
                self.emit(false);
            } else if self.low >= HALF {
                self.emit(true);
                self.low -= HALF;
                self.high -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.pending += 1;
                self.low -= QUARTER;
                self.high -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
    }

    pub fn finish(mut self) -> S {
        self.pending += 1;
        let bit = self.low >= QUARTER;
        self.emit(bit);
        self.sink
    }
}

/// Encodes `symbols` into a fresh bit vector.
pub fn encode(symbols: impl IntoIterator<Item = usize>, freqs: &Frequencies) -> Result<Vec<bool>> {
    let mut enc = Encoder::new(freqs, Vec::new());
    for s in symbols {
        if s >= freqs.symbols() || freqs.bounds(s).0 == freqs.bounds(s).1 {
            return Err(Error::param(format!("symbol {s} has zero frequency in the model")));
        }
        enc.encode(s);
    }
    Ok(enc.finish())
}

/// Exact coded length of `symbols` in bits.
pub fn encoded_len(symbols: impl IntoIterator<Item = usize>, freqs: &Frequencies) -> usize {
    let mut enc = Encoder::new(freqs, BitCounter::default());
    for s in symbols {
        enc.encode(s);
    }
    enc.finish().0
}

/// Decodes exactly `count` symbols from `bits`.
pub fn decode(bits: &[bool], freqs: &Frequencies, count: usize) -> Result<Vec<usize>> {
    let mut pos = 0usize;
    let mut next_bit = || {
        let b = bits.get(pos).copied().unwrap_or(false);
        pos += 1;
        b as u64
    };
    let mut value = 0u64;
    for _ in 0..32 {
        value = (value << 1) | next_bit();
    }
    let (mut low, mut high) = (0u64, TOP);
    let total = freqs.total();
    let mut shifts = 0usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        if value < low || value > high {
            return Err(Error::corrupt("arithmetic decoder left its interval"));
        }
        let range = high - low + 1;
        let target = ((value - low + 1) * total - 1) / range;
        if target >= total {
            return Err(Error::corrupt("arithmetic decoder target out of range"));
        }
        let symbol = freqs.find(target);
        let (lo, hi) = freqs.bounds(symbol);
        high = low + range * hi / total - 1;
        low += range * lo / total;
        loop {
            if high < HALF {
            } else if low >= HALF {
                low -= HALF;
                high -= HALF;
                value -= HALF;
            } else if low >= QUARTER && high < THREE_QUARTERS {
                low -= QUARTER;
                high -= QUARTER;
                value -= QUARTER;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
            value = (value << 1) | next_bit();
            shifts += 1;
        }
        out.push(symbol);
    }
    // The encoder emits exactly one bit per renormalization shift plus two flush bits.
    if bits.len() < shifts + 2 {
        return Err(Error::corrupt(format!(
            "arithmetic stream truncated: {} bits present, at least {} required",
            bits.len(),
            shifts + 2
        )));
    }
    Ok(out)
}
