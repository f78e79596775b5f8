use crate::predictor::Histogram;

/// Largest threshold representable in the 8-bit header field.
pub const MAX_THRESHOLD: u32 = 255;

/// The (2T+1)-symbol alphabet for threshold `T`: one symbol per error in
/// `[-T, T-1]` (independent bins) plus one shared joint symbol for the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolModel {
    threshold: u32,
    counts: Vec<u64>,
}

impl SymbolModel {
    /// Splits a histogram at threshold `T` (`1 <= T <= 255`).
    pub fn classify(histogram: &Histogram, threshold: u32) -> Self {
        assert!((1..=MAX_THRESHOLD).contains(&threshold), "threshold {threshold} out of range");
        let t = threshold as i32;
        let mut counts: Vec<u64> = (-t..t).map(|e| histogram.count(e)).collect();
        let independent: u64 = counts.iter().sum();
        counts.push(histogram.total() - independent);
        Self { threshold, counts }
    }

    /// Model from explicit counts (independent bins `-T..T-1` then the joint count).
    pub fn from_counts(threshold: u32, counts: Vec<u64>) -> Self {
        assert_eq!(counts.len(), 2 * threshold as usize + 1);
        Self { threshold, counts }
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    /// Per-symbol counts; the last entry is the joint count h_J.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn symbol_count(&self) -> usize {
        self.counts.len()
    }

    pub fn joint_symbol(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn joint_count(&self) -> u64 {
        self.counts[self.joint_symbol()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Symbol index of prediction error `e`.
    #[inline]
    pub fn symbol_of(&self, e: i32) -> usize {
        symbol_of(self.threshold, e)
    }

    /// Prediction error carried by an independent symbol, `None` for the joint symbol.
    pub fn error_of(&self, symbol: usize) -> Option<i32> {
        (symbol < self.joint_symbol()).then(|| symbol as i32 - self.threshold as i32)
    }

    /// Ideal code length in bits, sum of -log2(p) over all coded symbols.
    pub fn entropy_bits(&self) -> f64 {
        let total = self.total() as f64;
        self.counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| c as f64 * (total / c as f64).log2())
            .sum()
    }
}

#[inline]
pub(crate) fn symbol_of(threshold: u32, e: i32) -> usize {
    let t = threshold as i32;
    if (-t..t).contains(&e) {
        (e + t) as usize
    } else {
        2 * threshold as usize
    }
}
