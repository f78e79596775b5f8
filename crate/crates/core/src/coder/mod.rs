//! Entropy coding of prediction errors and embedding-capacity accounting.
//!
//! Wire layout of the self-embedded description (all fields MSB first):
//!
//! * arithmetic backend: `CD1 = T (8 bits) | 2T+1 symbol counts (w bits each) |
//!   len(CD2) (3+w bits)`, then `CD2`, the arithmetic-coded symbol stream;
//! * Huffman backend: `CD1 = T (8 bits) | for each symbol: length-1 (3 bits),
//!   codeword (length bits)`, then `CD2`, the concatenated codewords;
//!
//! followed in both cases by `AD`, the 8-bit original values of all joint pixels.
//! Here `w = ceil(log2(N1*N2))`. Symbols are ordered `-T..T-1`, then joint.

pub mod arith;
pub mod huffman;
mod model;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bits::{ceil_log2, push_uint, BitReader};
use crate::error::{Error, Result};
use crate::predictor::{Histogram, PixelCode, PredictionErrors};

pub use arith::Frequencies;
pub use huffman::HuffmanTable;
pub use model::{SymbolModel, MAX_THRESHOLD};

/// Entropy coder used for the symbol stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Arithmetic,
    Huffman,
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arith" | "arithmetic" => Ok(Backend::Arithmetic),
            "huffman" => Ok(Backend::Huffman),
            other => Err(Error::param(format!("unknown coder {other:?} (expected arith or huffman)"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Arithmetic => "arith",
            Backend::Huffman => "huffman",
        })
    }
}

/// How the threshold scan evaluates candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanMode {
    /// Exact argmax over `1..=255`; arithmetic candidates that provably cannot win are skipped.
    #[default]
    Exact,
    /// Rank thresholds by an entropy estimate and exactly encode only the best few.
    Estimate,
}

/// Bits needed to write any pixel count of an `N1 x N2` image.
pub fn count_width(pixels: usize) -> u32 {
    ceil_log2(pixels as u64)
}

/// Length in bits of the field holding L.
pub fn length_field_bits(pixels: usize) -> usize {
    3 + count_width(pixels) as usize
}

/// Self-embedded description produced for one threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedStream {
    pub backend: Backend,
    pub model: SymbolModel,
    pub cd1: Vec<bool>,
    pub cd2: Vec<bool>,
    pub ad: Vec<bool>,
}

impl CodedStream {
    pub fn threshold(&self) -> u32 {
        self.model.threshold()
    }

    /// L = len(CD) + len(AD).
    pub fn total_len(&self) -> usize {
        self.cd1.len() + self.cd2.len() + self.ad.len()
    }

    pub fn to_bits(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.total_len());
        out.extend_from_slice(&self.cd1);
        out.extend_from_slice(&self.cd2);
        out.extend_from_slice(&self.ad);
        out
    }
}

/// Closed-form length of CD1 for the arithmetic backend: 11 + (2T+2)·w.
pub fn arith_header_len(threshold: u32, pixels: usize) -> usize {
    11 + (2 * threshold as usize + 2) * count_width(pixels) as usize
}

/// Closed-form length of CD1 for the Huffman backend: 8 + 3(2T+1) + sum of codeword lengths.
pub fn huffman_header_len(table: &HuffmanTable) -> usize {
    8 + 3 * table.len() + table.lengths().iter().map(|&l| l as usize).sum::<usize>()
}

fn symbols<'a>(errors: &'a [i32], threshold: u32) -> impl Iterator<Item = usize> + 'a {
    errors.iter().map(move |&e| model::symbol_of(threshold, e))
}

/// Length of CD + AD at `threshold`, or `None` if the threshold cannot be coded.
fn description_len(errors: &[i32], histogram: &Histogram, threshold: u32, pixels: usize, backend: Backend) -> Option<usize> {
    let model = SymbolModel::classify(histogram, threshold);
    let ad = 8 * model.joint_count() as usize;
    match backend {
        Backend::Arithmetic => {
            let freqs = Frequencies::new(model.counts()).ok()?;
            let cd2 = arith::encoded_len(symbols(errors, threshold), &freqs);
            if cd2 >> length_field_bits(pixels) != 0 {
                return None;
            }
            Some(arith_header_len(threshold, pixels) + cd2 + ad)
        }
        Backend::Huffman => {
            let table = HuffmanTable::for_counts(model.counts()).ok()?;
            Some(huffman_header_len(&table) + table.cost(model.counts()) as usize + ad)
        }
    }
}

/// Exact net capacity EC_T = 8·(#embedding pixels) − len(L field) − L at `threshold`.
///
/// `pixels` is N1·N2 of the whole image. Returns `None` when the threshold is
/// not codable (more than 256 Huffman symbols, or an over-long stream); the
/// value may be negative.
pub fn net_capacity(errors: &[i32], threshold: u32, pixels: usize, backend: Backend) -> Option<i64> {
    let histogram = Histogram::from_errors(errors);
    net_capacity_with(errors, &histogram, threshold, pixels, backend)
}

fn net_capacity_with(errors: &[i32], histogram: &Histogram, threshold: u32, pixels: usize, backend: Backend) -> Option<i64> {
    let len = description_len(errors, histogram, threshold, pixels, backend)?;
    Some(8 * errors.len() as i64 - length_field_bits(pixels) as i64 - len as i64)
}

/// Entropy-estimated capacity, used to prune the scan.
fn estimated_capacity(histogram: &Histogram, threshold: u32, pixels: usize, backend: Backend) -> Option<f64> {
    let model = SymbolModel::classify(histogram, threshold);
    let header = match backend {
        Backend::Arithmetic => arith_header_len(threshold, pixels) as f64,
        Backend::Huffman => {
            if model.symbol_count() > 1 << huffman::MAX_CODE_LEN {
                return None;
            }
            (8 + 3 * model.symbol_count()) as f64 + 4.0 * model.symbol_count() as f64
        }
    };
    let n = histogram.total() as f64;
    Some(8.0 * n - length_field_bits(pixels) as f64 - header - model.entropy_bits() - 8.0 * model.joint_count() as f64)
}

/// Upper bound on the arithmetic-backend capacity at `threshold`.
///
/// Each coding step narrows a range of at least 2^30 to at most `range*p + 1`,
/// so the stream is longer than the ideal length minus `n*log2(1 + total/2^30)`.
fn arith_capacity_bound(histogram: &Histogram, threshold: u32, pixels: usize) -> i64 {
    let model = SymbolModel::classify(histogram, threshold);
    let n = model.total() as f64;
    let slack = n * (1.0 + n / arith::MAX_TOTAL as f64).log2() + 2.0;
    let cd2_floor = (model.entropy_bits() - slack).floor().max(0.0) as i64;
    8 * model.total() as i64
        - length_field_bits(pixels) as i64
        - arith_header_len(threshold, pixels) as i64
        - cd2_floor
        - 8 * model.joint_count() as i64
        + 1
}

/// Result of the threshold search.
#[derive(Debug, Clone)]
pub struct ThresholdChoice {
    pub stream: CodedStream,
    /// Net capacity in bits at the chosen threshold.
    pub capacity: i64,
}

/// Finds the capacity-maximizing threshold (smallest on ties) and encodes at it.
pub fn optimize_threshold(prediction: &PredictionErrors, pixels: usize, backend: Backend, mode: ScanMode) -> Result<ThresholdChoice> {
    let errors = &prediction.errors;
    if errors.is_empty() {
        return Err(Error::param("no embedding pixels"));
    }
    let histogram = Histogram::from_errors(errors);
    let evaluate = |t: u32| net_capacity_with(errors, &histogram, t, pixels, backend).map(|c| (c, t));
    let pick = |a: (i64, u32), b: (i64, u32)| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a };
    let best = match (mode, backend) {
        (ScanMode::Exact, Backend::Huffman) => (1..=MAX_THRESHOLD).into_par_iter().filter_map(evaluate).reduce_with(pick),
        (ScanMode::Exact, Backend::Arithmetic) => {
            // Visit thresholds by decreasing capacity bound; stop once no bound can win.
            let mut ranked: Vec<(i64, u32)> =
                (1..=MAX_THRESHOLD).map(|t| (arith_capacity_bound(&histogram, t, pixels), t)).collect();
            ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            let batch = rayon::current_num_threads().max(1);
            let mut best: Option<(i64, u32)> = None;
            for chunk in ranked.chunks(batch) {
                if let Some((c, t)) = best {
                    if chunk[0].0 < c || (chunk[0].0 == c && chunk[0].1 > t) {
                        break;
                    }
                }
                let found = chunk.par_iter().filter_map(|&(_, t)| evaluate(t)).reduce_with(pick);
                best = match (best, found) {
                    (Some(a), Some(b)) => Some(pick(a, b)),
                    (a, b) => a.or(b),
                };
            }
            best
        }
        (ScanMode::Estimate, _) => {
            let mut ranked: Vec<(f64, u32)> = (1..=MAX_THRESHOLD)
                .filter_map(|t| estimated_capacity(&histogram, t, pixels, backend).map(|c| (c, t)))
                .collect();
            ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            ranked.into_par_iter().take(6).filter_map(|(_, t)| evaluate(t)).reduce_with(pick)
        }
    };
    let (capacity, threshold) = best.ok_or(Error::NoRoom { best: i64::MIN })?;
    if capacity <= 0 {
        return Err(Error::NoRoom { best: capacity });
    }
    let stream = encode_at(prediction, &histogram, threshold, pixels, backend)?;
    debug_assert_eq!(8 * errors.len() as i64 - length_field_bits(pixels) as i64 - stream.total_len() as i64, capacity);
    Ok(ThresholdChoice { stream, capacity })
}

/// Builds CD1, CD2 and AD at a fixed threshold.
pub fn encode(prediction: &PredictionErrors, threshold: u32, pixels: usize, backend: Backend) -> Result<CodedStream> {
    if !(1..=MAX_THRESHOLD).contains(&threshold) {
        return Err(Error::param(format!("threshold {threshold} outside 1..=255")));
    }
    let histogram = Histogram::from_errors(&prediction.errors);
    encode_at(prediction, &histogram, threshold, pixels, backend)
}

fn encode_at(prediction: &PredictionErrors, histogram: &Histogram, threshold: u32, pixels: usize, backend: Backend) -> Result<CodedStream> {
    let errors = &prediction.errors;
    let model = SymbolModel::classify(histogram, threshold);
    let width = count_width(pixels);
    let mut cd1 = Vec::new();
    push_uint(&mut cd1, threshold as u64, 8);
    let cd2 = match backend {
        Backend::Arithmetic => {
            for &c in model.counts() {
                push_uint(&mut cd1, c, width);
            }
            let freqs = Frequencies::new(model.counts())?;
            let cd2 = arith::encode(symbols(errors, threshold), &freqs)?;
            let len_bits = length_field_bits(pixels) as u32;
            if cd2.len() >> len_bits != 0 {
                return Err(Error::param("coded stream too long for its length field"));
            }
            push_uint(&mut cd1, cd2.len() as u64, len_bits);
            cd2
        }
        Backend::Huffman => {
            let table = HuffmanTable::for_counts(model.counts())?;
            for (&len, &code) in table.lengths().iter().zip(table.codes()) {
                push_uint(&mut cd1, len as u64 - 1, 3);
                push_uint(&mut cd1, code as u64, len as u32);
            }
            let mut cd2 = Vec::new();
            for s in symbols(errors, threshold) {
                table.encode_symbol(&mut cd2, s);
            }
            cd2
        }
    };
    let joint = model.joint_symbol();
    let mut ad = Vec::with_capacity(8 * model.joint_count() as usize);
    for (&e, &v) in errors.iter().zip(&prediction.values) {
        if model.symbol_of(e) == joint {
            push_uint(&mut ad, v as u64, 8);
        }
    }
    Ok(CodedStream { backend, model, cd1, cd2, ad })
}

/// Decoded description: threshold plus one code per embedding pixel in canonical order.
#[derive(Debug, Clone)]
pub struct DecodedStream {
    pub threshold: u32,
    pub codes: Vec<PixelCode>,
}

/// Parses exactly `description` (the L bits of CD‖AD) for `embedding_pixels` pixels.
pub fn decode(description: &[bool], embedding_pixels: usize, pixels: usize, backend: Backend) -> Result<DecodedStream> {
    let mut r = BitReader::new(description);
    let threshold = r.read_uint(8)? as u32;
    if threshold == 0 {
        return Err(Error::corrupt("threshold 0 in header"));
    }
    let n_symbols = 2 * threshold as usize + 1;
    let symbols: Vec<usize> = match backend {
        Backend::Arithmetic => {
            let width = count_width(pixels);
            let counts = (0..n_symbols).map(|_| r.read_uint(width)).collect::<Result<Vec<u64>>>()?;
            if counts.iter().sum::<u64>() != embedding_pixels as u64 {
                return Err(Error::corrupt("symbol counts do not match the number of embedding pixels"));
            }
            let cd2_len = r.read_uint(length_field_bits(pixels) as u32)? as usize;
            let cd2 = r.read_slice(cd2_len)?;
            let freqs = Frequencies::new(&counts).map_err(|e| Error::corrupt(e.to_string()))?;
            let decoded = arith::decode(cd2, &freqs, embedding_pixels)?;
            let mut seen = vec![0u64; n_symbols];
            for &s in &decoded {
                seen[s] += 1;
            }
            if seen != counts {
                return Err(Error::corrupt("decoded symbols disagree with header counts"));
            }
            decoded
        }
        Backend::Huffman => {
            if n_symbols > 1 << huffman::MAX_CODE_LEN {
                return Err(Error::corrupt("too many Huffman symbols in header"));
            }
            let mut lengths = Vec::with_capacity(n_symbols);
            let mut codes = Vec::with_capacity(n_symbols);
            for _ in 0..n_symbols {
                let len = r.read_uint(3)? as u8 + 1;
                lengths.push(len);
                codes.push(r.read_uint(len as u32)? as u32);
            }
            let table = HuffmanTable::from_parts(lengths, codes)?;
            let decoder = table.decoder()?;
            (0..embedding_pixels).map(|_| decoder.decode_symbol(&mut r)).collect::<Result<_>>()?
        }
    };
    let joint = n_symbols - 1;
    let joint_count = symbols.iter().filter(|&&s| s == joint).count();
    if r.remaining() != 8 * joint_count {
        return Err(Error::corrupt(format!(
            "auxiliary data holds {} bits, expected {}",
            r.remaining(),
            8 * joint_count
        )));
    }
    let t = threshold as i32;
    let codes = symbols
        .into_iter()
        .map(|s| {
            if s == joint {
                r.read_uint(8).map(|v| PixelCode::Literal(v as u8))
            } else {
                Ok(PixelCode::Error(s as i32 - t))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecodedStream { threshold, codes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplace_errors(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> PredictionErrors {
        let errors: Vec<i32> = (0..n)
            .map(|_| {
                let u: f64 = rng.gen_range(-0.5..0.5);
                let e = -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln();
                e.round().clamp(-255.0, 255.0) as i32
            })
            .collect();
        let values = errors.iter().map(|&e| (128 + e / 2) as u8).collect();
        PredictionErrors { errors, values }
    }

    #[test]
    fn header_lengths_match_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let p = laplace_errors(&mut rng, 5000, 4.0);
        let pixels = 72 * 72;
        for t in [1, 3, 10, 40] {
            let a = encode(&p, t, pixels, Backend::Arithmetic).unwrap();
            assert_eq!(a.cd1.len(), arith_header_len(t, pixels));
            assert_eq!(a.cd1.len(), 11 + (2 * t as usize + 2) * 13);
            assert_eq!(a.ad.len(), 8 * a.model.joint_count() as usize);
            let h = encode(&p, t, pixels, Backend::Huffman).unwrap();
            let table = HuffmanTable::for_counts(h.model.counts()).unwrap();
            assert_eq!(h.cd1.len(), 8 + 3 * (2 * t as usize + 1) + table.lengths().iter().map(|&l| l as usize).sum::<usize>());
            assert_eq!(h.cd2.len() as u64, table.cost(h.model.counts()));
            for (backend, s) in [(Backend::Arithmetic, &a), (Backend::Huffman, &h)] {
                let cap = net_capacity(&p.errors, t, pixels, backend).unwrap();
                assert_eq!(cap, 8 * 5000 - 16 - s.total_len() as i64);
            }
        }
    }

    #[test]
    fn length_field_for_512_square() {
        assert_eq!(length_field_bits(512 * 512), 21);
    }

    #[test]
    fn scan_returns_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = laplace_errors(&mut rng, 20_000, 6.0);
        let pixels = 160 * 128;
        for backend in [Backend::Arithmetic, Backend::Huffman] {
            let choice = optimize_threshold(&p, pixels, backend, ScanMode::Exact).unwrap();
            let all: Vec<Option<i64>> = (1..=255).map(|t| net_capacity(&p.errors, t, pixels, backend)).collect();
            let best = all.iter().flatten().max().copied().unwrap();
            assert_eq!(choice.capacity, best);
            let first = all.iter().position(|&c| c == Some(best)).unwrap() as u32 + 1;
            assert_eq!(choice.stream.threshold(), first);
            let est = optimize_threshold(&p, pixels, backend, ScanMode::Estimate).unwrap();
            assert!(est.capacity <= choice.capacity);
        }
    }

    #[test]
    fn arithmetic_bound_dominates_exact_capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for scale in [0.3, 2.0, 8.0, 40.0] {
            let p = laplace_errors(&mut rng, 30_000, scale);
            let h = Histogram::from_errors(&p.errors);
            for t in 1..=255 {
                if let Some(c) = net_capacity(&p.errors, t, 200 * 200, Backend::Arithmetic) {
                    assert!(arith_capacity_bound(&h, t, 200 * 200) >= c, "scale {scale} T {t}");
                }
            }
        }
    }

    #[test]
    fn degenerate_errors_pick_threshold_one() {
        let p = PredictionErrors { errors: vec![0; 4095], values: vec![9; 4095] };
        let choice = optimize_threshold(&p, 4096, Backend::Arithmetic, ScanMode::Exact).unwrap();
        assert_eq!(choice.stream.threshold(), 1);
        assert!(choice.stream.cd2.len() <= 16);
        let expected = 8 * 4095 - 15 - 11 - 4 * 12 - choice.stream.cd2.len() as i64;
        assert_eq!(choice.capacity, expected);
    }

    #[test]
    fn huffman_thresholds_beyond_256_symbols_are_skipped() {
        let p = PredictionErrors { errors: vec![0, 1, -1], values: vec![0; 3] };
        assert!(net_capacity(&p.errors, 128, 4096, Backend::Huffman).is_none());
        assert!(net_capacity(&p.errors, 127, 4096, Backend::Huffman).is_some());
    }

    #[test]
    fn no_room_on_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let errors: Vec<i32> = (0..4000).map(|_| rng.gen_range(-255..=255)).collect();
        let p = PredictionErrors { values: vec![0; errors.len()], errors };
        assert!(matches!(optimize_threshold(&p, 4096, Backend::Arithmetic, ScanMode::Exact), Err(Error::NoRoom { .. })));
    }

    #[test]
    fn decode_inverts_encode() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = laplace_errors(&mut rng, 3000, 10.0);
        for backend in [Backend::Arithmetic, Backend::Huffman] {
            for t in [1, 7, 30] {
                let s = encode(&p, t, 4096, backend).unwrap();
                let d = decode(&s.to_bits(), 3000, 4096, backend).unwrap();
                assert_eq!(d.threshold, t);
                for ((code, &e), &v) in d.codes.iter().zip(&p.errors).zip(&p.values) {
                    match *code {
                        PixelCode::Error(x) => assert_eq!(x, e),
                        PixelCode::Literal(x) => {
                            assert!(e < -(t as i32) || e >= t as i32);
                            assert_eq!(x, v);
                        }
                    }
                }
                // one bit too many or too few is rejected
                let mut longer = s.to_bits();
                longer.push(false);
                assert!(decode(&longer, 3000, 4096, backend).is_err());
            }
        }
    }

    #[test]
    fn backend_names() {
        assert_eq!("arith".parse::<Backend>().unwrap(), Backend::Arithmetic);
        assert_eq!("huffman".parse::<Backend>().unwrap(), Backend::Huffman);
        assert!("lzw".parse::<Backend>().is_err());
        assert_eq!(Backend::Huffman.to_string(), "huffman");
    }
}
