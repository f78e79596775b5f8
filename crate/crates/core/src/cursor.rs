//! Linear bit addressing over the bit planes of embedding pixels.

use crate::error::{Error, Result};
use crate::grid::BlockGrid;
use crate::image::{bit, set_bit, GrayImage};

/// Maps a linear bit position onto `(pixel, plane)` pairs of embedding pixels.
///
/// Order is plane-major: every embedding pixel's plane-0 bit in raster order,
/// then plane 1, up to plane 7. Reference pixels and pass-through pixels are
/// never addressed.
#[derive(Debug, Clone)]
pub struct BitCursor {
    pixels: Vec<usize>,
}

impl BitCursor {
    /// Builds the cursor for the covered region of `grid`, skipping the pixel
    /// indices in `references` (which must lie inside the covered region).
    pub fn new(grid: &BlockGrid, references: &[usize]) -> Self {
        let width = grid.image_width();
        let mut is_ref = vec![false; grid.image_height() * width];
        for &r in references {
            is_ref[r] = true;
        }
        let mut pixels = Vec::with_capacity(grid.covered_pixels() - references.len());
        for row in 0..grid.covered_height() {
            for col in 0..grid.covered_width() {
                let idx = row * width + col;
                if !is_ref[idx] {
                    pixels.push(idx);
                }
            }
        }
        Self { pixels }
    }

    /// Number of embedding pixels.
    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    /// Total addressable bits, eight per embedding pixel.
    pub fn capacity(&self) -> usize {
        self.pixels.len() * 8
    }

    /// Raster-ordered pixel indices of the embedding pixels.
    pub fn pixels(&self) -> &[usize] {
        &self.pixels
    }

    #[inline]
    pub fn locate(&self, position: usize) -> (usize, u32) {
        let n = self.pixels.len();
        (self.pixels[position % n], (position / n) as u32)
    }

    fn check_range(&self, start: usize, len: usize) -> Result<()> {
        match start.checked_add(len) {
            Some(end) if end <= self.capacity() => Ok(()),
            _ => Err(Error::Capacity { requested: start.saturating_add(len), available: self.capacity() }),
        }
    }

    pub fn read(&self, image: &GrayImage, start: usize, len: usize) -> Result<Vec<bool>> {
        self.check_range(start, len)?;
        let px = image.pixels();
        Ok((start..start + len)
            .map(|p| {
                let (i, plane) = self.locate(p);
                bit(px[i], plane)
            })
            .collect())
    }

    pub fn write(&self, image: &mut GrayImage, start: usize, bits: &[bool]) -> Result<()> {
        self.check_range(start, bits.len())?;
        let px = image.pixels_mut();
        for (p, &b) in (start..).zip(bits) {
            let (i, plane) = self.locate(p);
            px[i] = set_bit(px[i], plane, b);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> (GrayImage, BlockGrid, BitCursor) {
        let img = GrayImage::from_fn(7, 9, |r, c| (r * 40 + c * 3) as u8).unwrap();
        let grid = BlockGrid::new(7, 9, 3, 4).unwrap();
        let refs: Vec<usize> = (0..grid.block_count())
            .map(|i| {
                let (r, c) = grid.block_origin(i);
                (r + 1) * 9 + c + 2
            })
            .collect();
        let cursor = BitCursor::new(&grid, &refs);
        (img, grid, cursor)
    }

    #[test]
    fn capacity_excludes_references_and_margin() {
        let (_, grid, cursor) = sample();
        assert_eq!(grid.covered_pixels(), 6 * 8);
        assert_eq!(cursor.capacity(), 8 * (48 - 4));
        assert!(cursor.pixels().iter().all(|&p| p != 9 + 2));
    }

    #[test]
    fn plane_major_order() {
        let (_, _, cursor) = sample();
        let n = cursor.pixel_count();
        assert_eq!(cursor.locate(0), (0, 0));
        assert_eq!(cursor.locate(1), (1, 0));
        assert_eq!(cursor.locate(n), (0, 1));
        assert_eq!(cursor.locate(8 * n - 1), (cursor.pixels()[n - 1], 7));
    }

    #[test]
    fn out_of_range_is_rejected() {
        let (mut img, _, cursor) = sample();
        assert!(cursor.read(&img, cursor.capacity() - 1, 2).is_err());
        assert!(cursor.write(&mut img, cursor.capacity(), &[true]).is_err());
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(bits in proptest::collection::vec(any::<bool>(), 0..352), start in 0usize..10) {
            let (mut img, grid, cursor) = sample();
            let original = img.clone();
            let start = start.min(cursor.capacity() - bits.len());
            cursor.write(&mut img, start, &bits).unwrap();
            prop_assert_eq!(cursor.read(&img, start, bits.len()).unwrap(), bits);
            // margin pixels and references untouched
            for r in 0..7 {
                for c in 0..9 {
                    let idx = r * 9 + c;
                    if !grid.is_covered(r, c) || !cursor.pixels().contains(&idx) {
                        prop_assert_eq!(img.get(r, c), original.get(r, c));
                    }
                }
            }
        }
    }
}
