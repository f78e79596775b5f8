//! Keyed Arnold permutation of block positions.
//!
//! The block grid is cut into disjoint `M x M` tiles with `M = gcd(rows, cols)`,
//! and each tile is scrambled by the map
//! `(k, l) -> (k + b*l, a*k + (ab+1)*l) mod M`, iterated `t` times. The matrix
//! has determinant 1, so its inverse is `[[ab+1, -b], [-a, 1]] mod M`.

use super::keystream::{Key, SplitMix64};
use crate::error::{Error, Result};
use crate::grid::BlockGrid;
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArnoldParams {
    pub a: u64,
    pub b: u64,
    pub iterations: u32,
    pub tile: usize,
}

fn gcd(mut x: usize, mut y: usize) -> usize {
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

impl ArnoldParams {
    /// Derives `a`, `b` and the iteration count from the first three keystream words of `key`.
    pub fn derive(key: &Key, grid: &BlockGrid) -> Self {
        let mut rng = SplitMix64::new(key.seed());
        let a = 1 + rng.next_u64() % 255;
        let b = 1 + rng.next_u64() % 255;
        let iterations = 1 + (rng.next_u64() % 16) as u32;
        Self { a, b, iterations, tile: gcd(grid.rows(), grid.cols()) }
    }

    /// A tile smaller than 2 leaves the grid unchanged.
    pub fn is_identity(&self) -> bool {
        self.tile < 2
    }

    /// One forward step on tile coordinates.
    pub fn forward(&self, k: usize, l: usize) -> (usize, usize) {
        let m = self.tile as u64;
        let (k, l) = (k as u64, l as u64);
        let (a, b) = (self.a % m, self.b % m);
        let k2 = (k + b * l) % m;
        let l2 = (a * k + (a * b + 1) % m * l) % m;
        (k2 as usize, l2 as usize)
    }

    /// One inverse step on tile coordinates.
    pub fn backward(&self, k: usize, l: usize) -> (usize, usize) {
        let m = self.tile as u64;
        let (k, l) = (k as u64, l as u64);
        let (a, b) = (self.a % m, self.b % m);
        let k2 = ((a * b + 1) % m * k + (m - b) * l) % m;
        let l2 = ((m - a) * k + l) % m;
        (k2 as usize, l2 as usize)
    }

    /// Destination of tile coordinates after all iterations.
    pub fn map(&self, k: usize, l: usize) -> (usize, usize) {
        (0..self.iterations).fold((k, l), |(k, l), _| self.forward(k, l))
    }

    /// Source of tile coordinates after all iterations.
    pub fn unmap(&self, k: usize, l: usize) -> (usize, usize) {
        (0..self.iterations).fold((k, l), |(k, l), _| self.backward(k, l))
    }
}

fn permute(image: &GrayImage, grid: &BlockGrid, params: &ArnoldParams, inverse: bool) -> Result<GrayImage> {
    if params.tile != gcd(grid.rows(), grid.cols()) {
        return Err(Error::param("Arnold tile size does not match the block grid"));
    }
    let mut out = image.clone();
    if params.is_identity() {
        return Ok(out);
    }
    let m = params.tile;
    for row in 0..grid.rows() {
        for col in 0..grid.cols() {
            let (tr, tc) = (row / m * m, col / m * m);
            let (k, l) = (row % m, col % m);
            let (k2, l2) = if inverse { params.unmap(k, l) } else { params.map(k, l) };
            let src = grid.snake_index(row, col);
            let dst = grid.snake_index(tr + k2, tc + l2);
            grid.write_block(out.pixels_mut(), dst, &grid.read_block(image.pixels(), src));
        }
    }
    Ok(out)
}

/// Moves the block at tile position `(k, l)` to `map(k, l)` in every tile.
pub fn arnold_permute(image: &GrayImage, grid: &BlockGrid, params: &ArnoldParams) -> Result<GrayImage> {
    permute(image, grid, params, false)
}

/// Undoes [`arnold_permute`].
pub fn arnold_inverse(image: &GrayImage, grid: &BlockGrid, params: &ArnoldParams) -> Result<GrayImage> {
    permute(image, grid, params, true)
}
