//! Block-wise modular pixel shifting along the snake chain.
//!
//! Block 1 is shifted by the raw key byte r_1. Every later block i draws its
//! shift r'_i from an allowed set built from the previous plain block, so a
//! small scale factor keeps most within-block differences intact. Recovery
//! runs the same chain on the already recovered blocks.

use std::fmt;
use std::str::FromStr;

use super::keystream::{keystream, Key, SplitMix64};
use crate::error::{Error, Result};
use crate::grid::BlockGrid;
use crate::image::GrayImage;

/// Shift rule for blocks after the first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulation {
    /// Shifts constrained by scale factor ζ in `[0, 1]`.
    Constrained(f64),
    /// Every block shifted by its raw key byte.
    Unconstrained,
}

impl Modulation {
    fn validate(self) -> Result<()> {
        match self {
            Modulation::Constrained(z) if !(0.0..=1.0).contains(&z) => {
                Err(Error::param(format!("scale factor {z} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("none") {
            return Ok(Modulation::Unconstrained);
        }
        let z: f64 = s.parse().map_err(|_| Error::param(format!("bad scale factor {s:?} (expected 0..1 or none)")))?;
        let m = Modulation::Constrained(z);
        m.validate()?;
        Ok(m)
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulation::Constrained(z) => write!(f, "{z}"),
            Modulation::Unconstrained => f.write_str("none"),
        }
    }
}

/// Allowed shifts after a block with the given extremes, as the two ranges
/// `0..=low_end` and `high_start..=255` (the second may be empty).
pub fn allowed_shifts(zeta: f64, min: u8, max: u8) -> (u32, u32) {
    let low_end = (zeta * (255 - max) as f64).floor() as u32;
    let high_start = (255.0 - zeta * min as f64).floor() as u32 + 1;
    (low_end, high_start)
}

fn constrained_shift(zeta: f64, previous: &[u8], r: u8, index: usize) -> u8 {
    let min = *previous.iter().min().expect("non-empty block");
    let max = *previous.iter().max().expect("non-empty block");
    let (low_end, high_start) = allowed_shifts(zeta, min, max);
    let size = (low_end + 1) as u64 + 256u64.saturating_sub(high_start as u64);
    let s = SplitMix64::new(r as u64 ^ index as u64).next_u64() % size;
    if s <= low_end as u64 {
        s as u8
    } else {
        (high_start as u64 + s - low_end as u64 - 1) as u8
    }
}

/// Adds `shift` to every pixel modulo 256.
pub fn shift_block(block: &mut [u8], shift: u8) {
    for v in block {
        *v = v.wrapping_add(shift);
    }
}

/// Modulates every block of `grid` in snake order. Returns the encrypted image
/// and the applied shifts r'_1..r'_N.
pub fn modulate(image: &GrayImage, grid: &BlockGrid, key: &Key, mode: Modulation) -> Result<(GrayImage, Vec<u8>)> {
    mode.validate()?;
    check_grid(image, grid)?;
    let n = grid.block_count();
    let r = keystream(key, n);
    let mut out = image.clone();
    let mut shifts = Vec::with_capacity(n);
    let mut previous: Vec<u8> = Vec::new();
    for (i, &ri) in r.iter().enumerate() {
        let plain = grid.read_block(image.pixels(), i);
        let shift = next_shift(mode, &previous, ri, i);
        let mut block = plain.clone();
        shift_block(&mut block, shift);
        grid.write_block(out.pixels_mut(), i, &block);
        shifts.push(shift);
        previous = plain;
    }
    Ok((out, shifts))
}

/// Inverts [`modulate`], deriving each shift from the block just recovered.
pub fn demodulate(image: &GrayImage, grid: &BlockGrid, key: &Key, mode: Modulation) -> Result<GrayImage> {
    mode.validate()?;
    check_grid(image, grid)?;
    let n = grid.block_count();
    let r = keystream(key, n);
    let mut out = image.clone();
    let mut previous: Vec<u8> = Vec::new();
    for (i, &ri) in r.iter().enumerate() {
        let shift = next_shift(mode, &previous, ri, i);
        let mut block = grid.read_block(image.pixels(), i);
        shift_block(&mut block, shift.wrapping_neg());
        grid.write_block(out.pixels_mut(), i, &block);
        previous = block;
    }
    Ok(out)
}

/// Shift for zero-based block `i`; the generator seed uses the one-based index.
fn next_shift(mode: Modulation, previous: &[u8], r: u8, i: usize) -> u8 {
    match mode {
        _ if i == 0 => r,
        Modulation::Unconstrained => r,
        Modulation::Constrained(zeta) => constrained_shift(zeta, previous, r, i + 1),
    }
}

fn check_grid(image: &GrayImage, grid: &BlockGrid) -> Result<()> {
    if grid.image_height() != image.height() || grid.image_width() != image.width() {
        return Err(Error::DimensionMismatch(format!(
            "grid for {}x{} applied to {}x{} image",
            grid.image_height(),
            grid.image_width(),
            image.height(),
            image.width()
        )));
    }
    Ok(())
}
