//! Reference selection, adjacency + MED prediction and the canonical recovery order.
//!
//! Each block keeps one reference pixel unchanged. Pixels on the reference's row
//! and column are predicted from their neighbour toward the reference; every
//! other pixel is predicted with the median edge detector from its three
//! neighbours toward the reference (diagonal `a`, vertical `b`, horizontal `c`).
//!
//! The canonical order in which errors are emitted is also the order in which a
//! decoder can rebuild the block: reference row outward, reference column
//! outward, then the remaining pixels by increasing Manhattan distance from the
//! reference (row-major among equal distances). Every MED input is strictly
//! closer to the reference than the pixel it predicts, so it is always ready.

use std::collections::HashMap;

use crate::crypto::SplitMix64;
use crate::error::{Error, Result};
use crate::grid::BlockGrid;
use crate::image::GrayImage;

/// Smallest and largest prediction error produced by [`med`] on 8-bit inputs.
pub const MIN_ERROR: i32 = -510;
pub const MAX_ERROR: i32 = 510;

/// Median edge detector. The `b + c - a` branch is not clamped.
#[inline]
pub fn med(a: i32, b: i32, c: i32) -> i32 {
    let (lo, hi) = if b < c { (b, c) } else { (c, b) };
    if a <= lo {
        hi
    } else if a >= hi {
        lo
    } else {
        b + c - a
    }
}

/// Zero-based in-block position of each block's reference pixel, indexed by snake order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferencePlan {
    positions: Vec<(usize, usize)>,
}

impl ReferencePlan {
    /// Draws one generator output per block from splitmix64 seeded with `seed`:
    /// row `s mod n1`, column `(s / n1) mod n2`.
    pub fn seeded(seed: u64, grid: &BlockGrid) -> Self {
        let (n1, n2) = (grid.block_height() as u64, grid.block_width() as u64);
        let mut rng = SplitMix64::new(seed);
        let positions = (0..grid.block_count())
            .map(|_| {
                let s = rng.next_u64();
                ((s % n1) as usize, ((s / n1) % n2) as usize)
            })
            .collect();
        Self { positions }
    }

    /// Every block uses the top-left pixel.
    pub fn top_left(grid: &BlockGrid) -> Self {
        Self { positions: vec![(0, 0); grid.block_count()] }
    }

    pub fn positions(&self) -> &[(usize, usize)] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Absolute pixel indices of all reference pixels.
    pub fn pixel_indices(&self, grid: &BlockGrid) -> Vec<usize> {
        self.positions
            .iter()
            .enumerate()
            .map(|(i, &(j, k))| {
                let (r, c) = grid.block_origin(i);
                (r + j) * grid.image_width() + c + k
            })
            .collect()
    }
}

/// How one pixel is predicted. Operands are row-major in-block indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    /// Copy of the adjacent pixel toward the reference.
    Neighbor(u32),
    /// MED over (diagonal, vertical, horizontal) neighbours toward the reference.
    Med(u32, u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub target: u32,
    pub predictor: Predictor,
}

impl Step {
    #[inline]
    pub fn predict(&self, block: &[i32]) -> i32 {
        match self.predictor {
            Predictor::Neighbor(n) => block[n as usize],
            Predictor::Med(a, b, c) => med(block[a as usize], block[b as usize], block[c as usize]),
        }
    }
}

/// Canonical prediction/recovery order for an `height x width` block with its
/// reference at `(rj, rk)`.
pub fn canonical_order(height: usize, width: usize, rj: usize, rk: usize) -> Vec<Step> {
    assert!(rj < height && rk < width, "reference outside block");
    let idx = |j: usize, k: usize| (j * width + k) as u32;
    let mut steps = Vec::with_capacity(height * width - 1);
    for k in (0..rk).rev() {
        steps.push(Step { target: idx(rj, k), predictor: Predictor::Neighbor(idx(rj, k + 1)) });
    }
    for k in rk + 1..width {
        steps.push(Step { target: idx(rj, k), predictor: Predictor::Neighbor(idx(rj, k - 1)) });
    }
    for j in (0..rj).rev() {
        steps.push(Step { target: idx(j, rk), predictor: Predictor::Neighbor(idx(j + 1, rk)) });
    }
    for j in rj + 1..height {
        steps.push(Step { target: idx(j, rk), predictor: Predictor::Neighbor(idx(j - 1, rk)) });
    }
    let mut corners: Vec<(usize, usize, usize)> = (0..height)
        .filter(|&j| j != rj)
        .flat_map(|j| (0..width).filter(move |&k| k != rk).map(move |k| (j.abs_diff(rj) + k.abs_diff(rk), j, k)))
        .collect();
    corners.sort_unstable();
    for (_, j, k) in corners {
        let jn = if j < rj { j + 1 } else { j - 1 };
        let kn = if k < rk { k + 1 } else { k - 1 };
        steps.push(Step { target: idx(j, k), predictor: Predictor::Med(idx(jn, kn), idx(jn, k), idx(j, kn)) });
    }
    steps
}

/// Prediction errors of `block` (row-major, `height x width`) in canonical order.
pub fn predict_block(block: &[u8], height: usize, width: usize, reference: (usize, usize)) -> Vec<i32> {
    let values: Vec<i32> = block.iter().map(|&v| v as i32).collect();
    canonical_order(height, width, reference.0, reference.1)
        .iter()
        .map(|s| values[s.target as usize] - s.predict(&values))
        .collect()
}

/// What the decoder knows about one non-reference pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelCode {
    /// Entropy-coded prediction error.
    Error(i32),
    /// Literal 8-bit value carried in the auxiliary data.
    Literal(u8),
}

/// Rebuilds a block from its reference value and per-pixel codes given in canonical order.
pub fn recover_block(
    height: usize,
    width: usize,
    reference: (usize, usize),
    reference_value: u8,
    codes: impl IntoIterator<Item = PixelCode>,
) -> Result<Vec<u8>> {
    let order = canonical_order(height, width, reference.0, reference.1);
    let mut values = vec![0i32; height * width];
    values[reference.0 * width + reference.1] = reference_value as i32;
    let mut codes = codes.into_iter();
    for step in &order {
        let code = codes.next().ok_or_else(|| Error::corrupt("too few pixel codes for block"))?;
        values[step.target as usize] = reconstruct(step, &values, code)?;
    }
    Ok(values.into_iter().map(|v| v as u8).collect())
}

#[inline]
pub(crate) fn reconstruct(step: &Step, values: &[i32], code: PixelCode) -> Result<i32> {
    match code {
        PixelCode::Literal(v) => Ok(v as i32),
        PixelCode::Error(e) => {
            let v = step.predict(values) + e;
            if (0..=255).contains(&v) {
                Ok(v)
            } else {
                Err(Error::corrupt(format!("recovered pixel value {v} outside 0..=255")))
            }
        }
    }
}

/// Canonical orders for every distinct reference position used by a plan.
#[derive(Debug, Clone)]
pub struct OrderTable {
    orders: HashMap<(usize, usize), Vec<Step>>,
}

impl OrderTable {
    pub fn new(grid: &BlockGrid, plan: &ReferencePlan) -> Self {
        let mut orders = HashMap::new();
        for &pos in plan.positions() {
            orders
                .entry(pos)
                .or_insert_with(|| canonical_order(grid.block_height(), grid.block_width(), pos.0, pos.1));
        }
        Self { orders }
    }

    pub fn get(&self, reference: (usize, usize)) -> &[Step] {
        &self.orders[&reference]
    }
}

/// Prediction errors of every embedding pixel, blocks in snake order and pixels
/// in canonical order, together with the pixels' original values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionErrors {
    pub errors: Vec<i32>,
    pub values: Vec<u8>,
}

impl PredictionErrors {
    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Predicts every embedding pixel of `image`.
pub fn predict_image(image: &GrayImage, grid: &BlockGrid, plan: &ReferencePlan, orders: &OrderTable) -> PredictionErrors {
    let per_block = grid.block_pixels() - 1;
    let mut errors = Vec::with_capacity(grid.block_count() * per_block);
    let mut values = Vec::with_capacity(grid.block_count() * per_block);
    let mut block = vec![0i32; grid.block_pixels()];
    for (i, &reference) in plan.positions().iter().enumerate() {
        for (slot, p) in block.iter_mut().zip(grid.block_pixel_indices(i)) {
            *slot = image.pixels()[p] as i32;
        }
        for step in orders.get(reference) {
            let y = block[step.target as usize];
            errors.push(y - step.predict(&block));
            values.push(y as u8);
        }
    }
    PredictionErrors { errors, values }
}

/// Prediction-error histogram over [`MIN_ERROR`, `MAX_ERROR`].
#[derive(Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
}

impl Histogram {
    pub fn from_errors(errors: &[i32]) -> Self {
        let mut counts = vec![0u64; (MAX_ERROR - MIN_ERROR + 1) as usize];
        for &e in errors {
            counts[(e - MIN_ERROR) as usize] += 1;
        }
        Self { counts }
    }

    /// h_e; zero outside the domain.
    pub fn count(&self, e: i32) -> u64 {
        if (MIN_ERROR..=MAX_ERROR).contains(&e) {
            self.counts[(e - MIN_ERROR) as usize]
        } else {
            0
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Error value with the largest count (smallest value on ties).
    pub fn mode(&self) -> Option<i32> {
        let (i, &c) = self.counts.iter().enumerate().max_by_key(|&(i, &c)| (c, std::cmp::Reverse(i)))?;
        (c > 0).then_some(i as i32 + MIN_ERROR)
    }
}

impl std::fmt::Debug for Histogram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let nonzero: Vec<(i32, u64)> = (MIN_ERROR..=MAX_ERROR)
            .filter_map(|e| Some((e, self.count(e))).filter(|x| x.1 > 0))
            .collect();
        f.debug_struct("Histogram").field("nonzero", &nonzero).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn med_branches() {
        assert_eq!(med(2, 7, 5), 7);
        assert_eq!(med(9, 7, 5), 5);
        assert_eq!(med(6, 7, 5), 6);
        // b + c - a can leave the pixel range
        assert_eq!(med(1, 255, 255), 255);
        assert_eq!(med(0, 0, 0), 0);
    }

    #[test]
    fn two_by_two_example() {
        // [[1,2],[3,4]] with reference at the top-left
        let e = predict_block(&[1, 2, 3, 4], 2, 2, (0, 0));
        assert_eq!(e, vec![1, 2, 1]);
        let codes = e.iter().map(|&x| PixelCode::Error(x));
        assert_eq!(recover_block(2, 2, (0, 0), 1, codes).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn constant_block_has_zero_errors() {
        for rj in 0..4 {
            for rk in 0..4 {
                let e = predict_block(&[100; 16], 4, 4, (rj, rk));
                assert_eq!(e, vec![0; 15]);
            }
        }
    }

    #[test]
    fn med_templates_match_4x4_table() {
        // Reference at 1-based (2,2). Expected (a, b, c, y) as 1-based (row, col).
        let table = [
            ((2, 2), (2, 1), (1, 2), (1, 1)),
            ((2, 2), (2, 3), (1, 2), (1, 3)),
            ((2, 3), (2, 4), (1, 3), (1, 4)),
            ((2, 2), (2, 1), (3, 2), (3, 1)),
            ((2, 2), (2, 3), (3, 2), (3, 3)),
            ((2, 3), (2, 4), (3, 3), (3, 4)),
            ((3, 2), (3, 1), (4, 2), (4, 1)),
            ((3, 2), (3, 3), (4, 2), (4, 3)),
            ((3, 3), (3, 4), (4, 3), (4, 4)),
        ];
        let idx = |(j, k): (u32, u32)| (j - 1) * 4 + (k - 1);
        let order = canonical_order(4, 4, 1, 1);
        let meds: Vec<_> = order
            .iter()
            .filter_map(|s| match s.predictor {
                Predictor::Med(a, b, c) => Some((s.target, (a, b, c))),
                _ => None,
            })
            .collect();
        assert_eq!(meds.len(), 9);
        for (a, b, c, y) in table {
            let found = meds.iter().find(|m| m.0 == idx(y)).expect("pixel predicted by MED");
            assert_eq!(found.1, (idx(a), idx(b), idx(c)), "pixel {y:?}");
        }
        // adjacency cases of the same example
        let neighbor = |t: u32| {
            order.iter().find(|s| s.target == t).map(|s| s.predictor).unwrap()
        };
        assert_eq!(neighbor(idx((2, 1))), Predictor::Neighbor(idx((2, 2))));
        assert_eq!(neighbor(idx((2, 4))), Predictor::Neighbor(idx((2, 3))));
        assert_eq!(neighbor(idx((4, 2))), Predictor::Neighbor(idx((3, 2))));
    }

    #[test]
    fn order_is_topological_for_all_small_blocks() {
        for h in 1..=16 {
            for w in 1..=16 {
                if h * w < 2 {
                    continue;
                }
                for rj in 0..h {
                    for rk in 0..w {
                        let order = canonical_order(h, w, rj, rk);
                        assert_eq!(order.len(), h * w - 1);
                        let mut ready = vec![false; h * w];
                        ready[rj * w + rk] = true;
                        for s in &order {
                            let inputs = match s.predictor {
                                Predictor::Neighbor(n) => vec![n],
                                Predictor::Med(a, b, c) => vec![a, b, c],
                            };
                            for i in inputs {
                                assert!(ready[i as usize], "{h}x{w} ref ({rj},{rk}): input {i} of {} not ready", s.target);
                            }
                            assert!(!ready[s.target as usize]);
                            ready[s.target as usize] = true;
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn seeded_plan_uses_first_generator_output() {
        let grid = BlockGrid::new(4, 4, 4, 4).unwrap();
        let plan = ReferencePlan::seeded(0, &grid);
        let s: u64 = 0xE220_A839_7B1D_CDAF;
        assert_eq!(plan.positions(), &[((s % 4) as usize, ((s / 4) % 4) as usize)]);
        assert_eq!(plan.positions(), &[(3, 3)]);
        assert_eq!(ReferencePlan::seeded(0, &grid), plan);
    }

    #[test]
    fn plan_positions_stay_in_block() {
        let grid = BlockGrid::new(60, 50, 6, 5).unwrap();
        let plan = ReferencePlan::seeded(99, &grid);
        assert_eq!(plan.len(), 100);
        assert!(plan.positions().iter().all(|&(j, k)| j < 6 && k < 5));
    }

    #[test]
    fn histogram_counts() {
        let h = Histogram::from_errors(&[1, 2, 1]);
        assert_eq!((h.count(1), h.count(2), h.count(0)), (2, 1, 0));
        assert_eq!(h.total(), 3);
        assert_eq!(Histogram::from_errors(&[]).total(), 0);
        assert_eq!(h.count(-600), 0);
    }

    #[test]
    fn prediction_count_matches_embedding_pixels() {
        let img = GrayImage::from_fn(20, 18, |r, c| (r * 7 + c * c) as u8).unwrap();
        let grid = BlockGrid::new(20, 18, 4, 5).unwrap();
        let plan = ReferencePlan::seeded(7, &grid);
        let orders = OrderTable::new(&grid, &plan);
        let pe = predict_image(&img, &grid, &plan, &orders);
        assert_eq!(pe.len(), grid.block_count() * (20 - 1));
        assert_eq!(Histogram::from_errors(&pe.errors).total() as usize, pe.len());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn predict_then_recover_8x8(block in proptest::collection::vec(any::<u8>(), 64), rj in 0usize..8, rk in 0usize..8) {
            let e = predict_block(&block, 8, 8, (rj, rk));
            prop_assert!(e.iter().all(|&x| (MIN_ERROR..=MAX_ERROR).contains(&x)));
            let codes = e.iter().map(|&x| PixelCode::Error(x));
            let back = recover_block(8, 8, (rj, rk), block[rj * 8 + rk], codes).unwrap();
            prop_assert_eq!(back, block);
        }
    }

    proptest! {
        #[test]
        fn mixed_literals_recover(block in proptest::collection::vec(any::<u8>(), 30), joint in proptest::collection::vec(any::<bool>(), 29), rj in 0usize..5, rk in 0usize..6) {
            let e = predict_block(&block, 5, 6, (rj, rk));
            let order = canonical_order(5, 6, rj, rk);
            let codes: Vec<_> = order.iter().zip(&e).zip(&joint).map(|((s, &err), &j)| {
                if j { PixelCode::Literal(block[s.target as usize]) } else { PixelCode::Error(err) }
            }).collect();
            prop_assert_eq!(recover_block(5, 6, (rj, rk), block[rj * 6 + rk], codes).unwrap(), block);
        }
    }

    #[test]
    fn all_literal_block() {
        let block: Vec<u8> = (0..16).map(|i| (i * 17) as u8).collect();
        let order = canonical_order(4, 4, 2, 1);
        let codes = order.iter().map(|s| PixelCode::Literal(block[s.target as usize]));
        assert_eq!(recover_block(4, 4, (2, 1), block[9], codes).unwrap(), block);
    }
}
