//! Non-overlapping block partition with boustrophedon (snake) block order.

use crate::error::{Error, Result};

/// Partition of an `image_height x image_width` image into `block_height x block_width`
/// blocks. Block indices follow the snake order: grid row 0 left to right, grid row 1
/// right to left, and so on, so consecutive blocks always share an edge.
///
/// Pixels below or right of the covered `(rows*block_height) x (cols*block_width)`
/// region are pass-through: no operation reads or writes them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockGrid {
    image_height: usize,
    image_width: usize,
    block_height: usize,
    block_width: usize,
    rows: usize,
    cols: usize,
}

impl BlockGrid {
    pub fn new(image_height: usize, image_width: usize, block_height: usize, block_width: usize) -> Result<Self> {
        if block_height == 0 || block_width == 0 {
            return Err(Error::param("block dimensions must be non-zero"));
        }
        if block_height > image_height || block_width > image_width {
            return Err(Error::param(format!(
                "block {block_height}x{block_width} larger than image {image_height}x{image_width}"
            )));
        }
        Ok(Self {
            image_height,
            image_width,
            block_height,
            block_width,
            rows: image_height / block_height,
            cols: image_width / block_width,
        })
    }

    /// A single block spanning the whole image.
    pub fn whole(image_height: usize, image_width: usize) -> Result<Self> {
        Self::new(image_height, image_width, image_height, image_width)
    }

    pub fn image_height(&self) -> usize {
        self.image_height
    }

    pub fn image_width(&self) -> usize {
        self.image_width
    }

    pub fn block_height(&self) -> usize {
        self.block_height
    }

    pub fn block_width(&self) -> usize {
        self.block_width
    }

    pub fn block_pixels(&self) -> usize {
        self.block_height * self.block_width
    }

    /// Number of grid rows (floor(N1 / n1)).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of grid columns (floor(N2 / n2)).
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn block_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Grid coordinates of the block at snake index `index`.
    pub fn snake_position(&self, index: usize) -> (usize, usize) {
        let row = index / self.cols;
        let offset = index % self.cols;
        let col = if row % 2 == 0 { offset } else { self.cols - 1 - offset };
        (row, col)
    }

    /// Snake index of the block at grid coordinates `(row, col)`.
    pub fn snake_index(&self, row: usize, col: usize) -> usize {
        let offset = if row % 2 == 0 { col } else { self.cols - 1 - col };
        row * self.cols + offset
    }

    /// Top-left pixel of the block at grid coordinates `(row, col)`.
    pub fn origin(&self, row: usize, col: usize) -> (usize, usize) {
        (row * self.block_height, col * self.block_width)
    }

    /// Top-left pixel of the block at snake index `index`.
    pub fn block_origin(&self, index: usize) -> (usize, usize) {
        let (r, c) = self.snake_position(index);
        self.origin(r, c)
    }

    pub fn covered_height(&self) -> usize {
        self.rows * self.block_height
    }

    pub fn covered_width(&self) -> usize {
        self.cols * self.block_width
    }

    pub fn covered_pixels(&self) -> usize {
        self.covered_height() * self.covered_width()
    }

    pub fn is_covered(&self, row: usize, col: usize) -> bool {
        row < self.covered_height() && col < self.covered_width()
    }

    /// Row-major pixel indices of the block at snake index `index`.
    pub fn block_pixel_indices(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let (r0, c0) = self.block_origin(index);
        let w = self.image_width;
        (0..self.block_height).flat_map(move |j| (0..self.block_width).map(move |k| (r0 + j) * w + c0 + k))
    }

    /// Copies the block at snake index `index` out of a row-major image buffer.
    pub fn read_block(&self, pixels: &[u8], index: usize) -> Vec<u8> {
        self.block_pixel_indices(index).map(|i| pixels[i]).collect()
    }

    /// Writes `block` (row-major) into the block at snake index `index`.
    pub fn write_block(&self, pixels: &mut [u8], index: usize, block: &[u8]) {
        for (i, &v) in self.block_pixel_indices(index).zip(block) {
            pixels[i] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lena_sized_grid() {
        let g = BlockGrid::new(512, 512, 8, 8).unwrap();
        assert_eq!(g.block_count(), 4096);
        assert_eq!((g.rows(), g.cols()), (64, 64));
    }

    #[test]
    fn snake_order_on_4x4() {
        let g = BlockGrid::new(16, 16, 4, 4).unwrap();
        let order: Vec<_> = (0..8).map(|i| g.snake_position(i)).collect();
        assert_eq!(
            order,
            vec![(0, 0), (0, 1), (0, 2), (0, 3), (1, 3), (1, 2), (1, 1), (1, 0)]
        );
    }

    #[test]
    fn consecutive_blocks_are_adjacent() {
        for (h, w, bh, bw) in [(16, 16, 4, 4), (10, 21, 3, 2), (7, 5, 1, 1), (9, 9, 3, 9)] {
            let g = BlockGrid::new(h, w, bh, bw).unwrap();
            for i in 1..g.block_count() {
                let (a, b) = (g.snake_position(i - 1), g.snake_position(i));
                let d = a.0.abs_diff(b.0) + a.1.abs_diff(b.1);
                assert_eq!(d, 1, "blocks {} and {} not adjacent", i - 1, i);
                assert_eq!(g.snake_index(b.0, b.1), i);
            }
        }
    }

    #[test]
    fn remainder_margin_is_pass_through() {
        let g = BlockGrid::new(10, 10, 3, 3).unwrap();
        assert_eq!(g.block_count(), 9);
        assert!(g.is_covered(8, 8));
        assert!(!g.is_covered(9, 0));
        assert!(!g.is_covered(0, 9));
        let mut seen = [0u8; 100];
        for i in 0..g.block_count() {
            for p in g.block_pixel_indices(i) {
                seen[p] += 1;
            }
        }
        for (p, &count) in seen.iter().enumerate() {
            let covered = g.is_covered(p / 10, p % 10);
            assert_eq!(count, covered as u8, "pixel {p}");
        }
    }

    #[test]
    fn rejects_oversized_blocks() {
        assert!(BlockGrid::new(4, 4, 5, 1).is_err());
        assert!(BlockGrid::new(4, 4, 1, 5).is_err());
    }
}
