//! Length-limited canonical Huffman codes.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::bits::{push_uint, BitReader};
use crate::error::{Error, Result};

/// Longest codeword: every codeword must fit inside one 8-bit pixel.
pub const MAX_CODE_LEN: u32 = 8;

/// Optimal prefix-code lengths for `weights` with no codeword longer than
/// `max_len`. Every symbol gets a codeword, including zero weights.
pub fn optimal_lengths(weights: &[u64], max_len: u32) -> Result<Vec<u8>> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::param("empty alphabet"));
    }
    if n == 1 {
        return Ok(vec![1]);
    }
    if max_len >= 32 || n > 1usize << max_len {
        return Err(Error::param(format!("{n} symbols cannot be coded within {max_len} bits")));
    }
    let lengths = unlimited_lengths(weights);
    if lengths.iter().all(|&l| l as u32 <= max_len) {
        return Ok(lengths);
    }
    Ok(package_merge(weights, max_len))
}

/// Plain Huffman lengths. Ties break toward lower symbol indices, then older nodes.
fn unlimited_lengths(weights: &[u64]) -> Vec<u8> {
    let n = weights.len();
    // parent links for leaves 0..n and internal nodes n..2n-1
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = weights.iter().enumerate().map(|(i, &w)| Reverse((w, i))).collect();
    let mut next = n;
    while heap.len() > 1 {
        let Reverse((w1, a)) = heap.pop().unwrap();
        let Reverse((w2, b)) = heap.pop().unwrap();
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse((w1 + w2, next)));
        next += 1;
    }
    let mut depth = vec![0u8; 2 * n - 1];
    for node in (0..2 * n - 2).rev() {
        depth[node] = depth[parent[node]] + 1;
    }
    depth.truncate(n);
    depth
}

#[derive(Clone, Copy)]
enum Node {
    Leaf(usize),
    /// Pair `(2i, 2i+1)` of the previous level.
    Package(usize),
}

/// Boundary-free package-merge (Larmore & Hirschberg).
fn package_merge(weights: &[u64], max_len: u32) -> Vec<u8> {
    let n = weights.len();
    let mut leaves: Vec<(u64, usize)> = weights.iter().copied().zip(0..).collect();
    leaves.sort_unstable();
    let leaf_items: Vec<(u64, Node)> = leaves.iter().map(|&(w, s)| (w, Node::Leaf(s))).collect();

    let mut levels: Vec<Vec<(u64, Node)>> = vec![leaf_items.clone()];
    for _ in 1..max_len {
        let prev = levels.last().unwrap();
        let packages: Vec<(u64, Node)> = prev
            .chunks_exact(2)
            .enumerate()
            .map(|(i, pair)| (pair[0].0 + pair[1].0, Node::Package(i)))
            .collect();
        let mut merged = Vec::with_capacity(leaf_items.len() + packages.len());
        let (mut i, mut j) = (0, 0);
        while i < leaf_items.len() || j < packages.len() {
            if j >= packages.len() || (i < leaf_items.len() && leaf_items[i].0 <= packages[j].0) {
                merged.push(leaf_items[i]);
                i += 1;
            } else {
                merged.push(packages[j]);
                j += 1;
            }
        }
        levels.push(merged);
    }

    let mut lengths = vec![0u8; n];
    let mut stack: Vec<(usize, Node)> = levels[max_len as usize - 1][..2 * n - 2]
        .iter()
        .map(|&(_, node)| (max_len as usize - 1, node))
        .collect();
    while let Some((level, node)) = stack.pop() {
        match node {
            Node::Leaf(s) => lengths[s] += 1,
            Node::Package(i) => {
                let prev = &levels[level - 1];
                stack.push((level - 1, prev[2 * i].1));
                stack.push((level - 1, prev[2 * i + 1].1));
            }
        }
    }
    lengths
}

/// Canonical codewords: symbols ordered by (length, index) get consecutive codes.
pub fn canonical_codes(lengths: &[u8]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&s| (lengths[s], s));
    let mut codes = vec![0u32; lengths.len()];
    let mut code = 0u32;
    let mut prev_len = 0u8;
    for s in order {
        code <<= lengths[s] - prev_len;
        codes[s] = code;
        code += 1;
        prev_len = lengths[s];
    }
    codes
}

/// Codeword table: `(length, code)` per symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTable {
    lengths: Vec<u8>,
    codes: Vec<u32>,
}

impl HuffmanTable {
    /// Optimal 8-bit-limited canonical table for the add-one smoothed weights `counts[i] + 1`.
    pub fn for_counts(counts: &[u64]) -> Result<Self> {
        let weights: Vec<u64> = counts.iter().map(|&c| c + 1).collect();
        Self::from_lengths(optimal_lengths(&weights, MAX_CODE_LEN)?)
    }

    pub fn from_lengths(lengths: Vec<u8>) -> Result<Self> {
        let codes = canonical_codes(&lengths);
        Self::from_parts(lengths, codes)
    }

    /// Explicit codewords; validates lengths and prefix-freeness.
    pub fn from_parts(lengths: Vec<u8>, codes: Vec<u32>) -> Result<Self> {
        let table = Self { lengths, codes };
        table.lookup_table()?;
        Ok(table)
    }

    pub fn lengths(&self) -> &[u8] {
        &self.lengths
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// Sum of `counts[i] * len(i)`.
    pub fn cost(&self, counts: &[u64]) -> u64 {
        counts.iter().zip(&self.lengths).map(|(&c, &l)| c * l as u64).sum()
    }

    pub fn encode_symbol(&self, out: &mut Vec<bool>, symbol: usize) {
        push_uint(out, self.codes[symbol] as u64, self.lengths[symbol] as u32);
    }

    /// 256-entry table mapping every 8-bit prefix to its symbol.
    fn lookup_table(&self) -> Result<Vec<Option<usize>>> {
        let mut table = vec![None; 1 << MAX_CODE_LEN];
        for (s, (&len, &code)) in self.lengths.iter().zip(&self.codes).enumerate() {
            if len == 0 || len as u32 > MAX_CODE_LEN || code >> len != 0 {
                return Err(Error::corrupt(format!("invalid codeword for symbol {s}")));
            }
            let shift = MAX_CODE_LEN - len as u32;
            let start = (code << shift) as usize;
            for slot in &mut table[start..start + (1 << shift)] {
                if slot.is_some() {
                    return Err(Error::corrupt("codewords are not prefix-free"));
                }
                *slot = Some(s);
            }
        }
        Ok(table)
    }

    pub fn decoder(&self) -> Result<HuffmanDecoder<'_>> {
        Ok(HuffmanDecoder { table: self, lookup: self.lookup_table()? })
    }
}

pub struct HuffmanDecoder<'t> {
    table: &'t HuffmanTable,
    lookup: Vec<Option<usize>>,
}

impl HuffmanDecoder<'_> {
    pub fn decode_symbol(&self, reader: &mut BitReader<'_>) -> Result<usize> {
        let avail = reader.remaining().min(MAX_CODE_LEN as usize);
        let mut probe = reader.clone();
        let mut prefix = 0usize;
        for _ in 0..avail {
            prefix = (prefix << 1) | probe.read_bit()? as usize;
        }
        prefix <<= MAX_CODE_LEN as usize - avail;
        let symbol = self.lookup[prefix].ok_or_else(|| Error::corrupt("bits match no codeword"))?;
        let len = self.table.lengths[symbol] as usize;
        if len > avail {
            return Err(Error::corrupt("codeword runs past end of stream"));
        }
        reader.read_slice(len)?;
        Ok(symbol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kraft(lengths: &[u8]) -> f64 {
        lengths.iter().map(|&l| 0.5f64.powi(l as i32)).sum()
    }

    #[test]
    fn smoothed_three_symbol_example() {
        // counts 1, 5, 2 -> weights 2, 6, 3 (probabilities 2/11, 6/11, 3/11)
        let t = HuffmanTable::for_counts(&[1, 5, 2]).unwrap();
        assert_eq!(t.lengths(), &[2, 1, 2]);
    }

    #[test]
    fn two_symbols_get_one_bit() {
        assert_eq!(optimal_lengths(&[10, 1], 8).unwrap(), vec![1, 1]);
        assert_eq!(optimal_lengths(&[5], 8).unwrap(), vec![1]);
    }

    #[test]
    fn length_limit_is_enforced() {
        // Fibonacci weights force a deep unconstrained tree.
        let mut w = vec![1u64, 1];
        while w.len() < 20 {
            let k = w.len();
            w.push(w[k - 1] + w[k - 2]);
        }
        let free = unlimited_lengths(&w);
        assert!(free.iter().any(|&l| l > 8));
        let limited = optimal_lengths(&w, 8).unwrap();
        assert!(limited.iter().all(|&l| (1..=8).contains(&l)));
        assert!(kraft(&limited) <= 1.0 + 1e-12);
        assert!(optimal_lengths(&vec![1; 257], 8).is_err());
        let full = optimal_lengths(&vec![1; 256], 8).unwrap();
        assert!(full.iter().all(|&l| l == 8));
    }

    #[test]
    fn package_merge_matches_huffman_when_unconstrained() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(2..60);
            let w: Vec<u64> = (0..n).map(|_| rng.gen_range(1..1000)).collect();
            let free = unlimited_lengths(&w);
            let pm = package_merge(&w, 16);
            let cost = |l: &[u8]| w.iter().zip(l).map(|(&a, &b)| a * b as u64).sum::<u64>();
            assert_eq!(cost(&free), cost(&pm));
        }
    }

    #[test]
    fn canonical_codes_are_prefix_free() {
        let t = HuffmanTable::from_lengths(vec![2, 1, 3, 3]).unwrap();
        assert_eq!(t.codes(), &[0b10, 0b0, 0b110, 0b111]);
        assert!(HuffmanTable::from_parts(vec![1, 2], vec![0, 0b01]).is_err());
    }

    #[test]
    fn encode_decode_round_trip() {
        let counts = [10u64, 0, 300, 45, 2];
        let t = HuffmanTable::for_counts(&counts).unwrap();
        let symbols = [2usize, 2, 0, 4, 1, 3, 2];
        let mut bits = Vec::new();
        for &s in &symbols {
            t.encode_symbol(&mut bits, s);
        }
        let dec = t.decoder().unwrap();
        let mut r = BitReader::new(&bits);
        let back: Vec<usize> = (0..symbols.len()).map(|_| dec.decode_symbol(&mut r).unwrap()).collect();
        assert_eq!(back, symbols);
        assert_eq!(r.remaining(), 0);
        assert!(dec.decode_symbol(&mut r).is_err());
    }
}
