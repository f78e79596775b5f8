//! Keys and the splitmix64 keystream.
//!
//! splitmix64 is a fast, well-distributed generator but it is **not** a
//! cryptographically strong cipher. It is used here because every party must
//! regenerate the exact same stream from a key; a vetted stream cipher can be
//! substituted behind [`keystream`] without touching the callers. Each cover
//! image should be encrypted with fresh keys (one-time use).

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// A 256-bit key, written externally as 64 hex characters.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Key([u8; 32]);

impl Key {
    pub const fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    /// The generator seed: the first eight key bytes, little-endian.
    pub fn seed(&self) -> u64 {
        u64::from_le_bytes(self.0[..8].try_into().expect("8 bytes"))
    }

    /// Key whose seed is `seed` and whose remaining bytes are zero.
    pub fn from_seed(seed: u64) -> Self {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&seed.to_le_bytes());
        Self(bytes)
    }
}

impl FromStr for Key {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.len() != 64 {
            return Err(Error::param(format!("key must be 64 hex characters, got {}", s.len())));
        }
        let mut bytes = [0u8; 32];
        hex::decode_to_slice(s, &mut bytes).map_err(|e| Error::param(format!("bad key: {e}")))?;
        Ok(Self(bytes))
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Key({}…)", hex::encode(&self.0[..4]))
    }
}

/// The splitmix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// `n` keystream bytes: consecutive generator outputs, each emitted little-endian.
pub fn keystream(key: &Key, n: usize) -> Vec<u8> {
    let mut rng = SplitMix64::new(key.seed());
    let mut out = Vec::with_capacity(n + 8);
    while out.len() < n {
        out.extend_from_slice(&rng.next_u64().to_le_bytes());
    }
    out.truncate(n);
    out
}

/// XORs `bits` with the keystream's bit expansion (byte order as emitted, bit 0 first).
pub fn xor_bits(bits: &[bool], key: &Key) -> Vec<bool> {
    let stream = keystream(key, bits.len().div_ceil(8));
    bits.iter()
        .enumerate()
        .map(|(i, &b)| b ^ ((stream[i / 8] >> (i % 8)) & 1 == 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_seed_zero() {
        // Reference value of the published splitmix64 algorithm.
        let mut g = SplitMix64::new(0);
        assert_eq!(g.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(g.next_u64(), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn keystream_layout() {
        let k = Key::from_seed(0);
        let s = keystream(&k, 10);
        assert_eq!(&s[..8], &0xE220_A839_7B1D_CDAFu64.to_le_bytes());
        assert_eq!(s.len(), 10);
        assert_eq!(keystream(&k, 10), s);
        assert!(keystream(&k, 0).is_empty());
    }

    #[test]
    fn key_hex_round_trip() {
        let text = "00112233445566778899aabbccddeeff00112233445566778899aabbccddeeff";
        let k: Key = text.parse().unwrap();
        assert_eq!(k.to_string(), text);
        assert_eq!(k.seed(), 0x7766_5544_3322_1100);
        assert!("abc".parse::<Key>().is_err());
        assert!("zz".repeat(32).parse::<Key>().is_err());
    }

    #[test]
    fn xor_bits_is_involution() {
        let k = Key::from_seed(42);
        let bits: Vec<bool> = (0..21).map(|i| i % 3 == 0).collect();
        let enc = xor_bits(&bits, &k);
        assert_eq!(enc.len(), 21);
        assert_ne!(enc, bits);
        assert_eq!(xor_bits(&enc, &k), bits);
    }

    #[test]
    fn xor_bits_uses_lsb_first() {
        let k = Key::from_seed(0);
        let zeros = vec![false; 8];
        let first = keystream(&k, 1)[0];
        let expect: Vec<bool> = (0..8).map(|i| (first >> i) & 1 == 1).collect();
        assert_eq!(xor_bits(&zeros, &k), expect);
    }
}
