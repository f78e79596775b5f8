//! Vacating room after encryption.
//!
//! Keys: `K_M` drives block modulation, `K_P` the Arnold block permutation,
//! `K_H` the payload cipher. The hider vacates room in the encrypted image with
//! per-block references drawn from a public seed; the description stays in
//! plain form. Extraction needs `{K_H, seed}`; recovery needs `{K_M, K_P}` (and
//! the seed to undo the vacating step).

use super::{embed_payload, extract_payload};
use crate::coder::{Backend, ScanMode};
use crate::crypto::{arnold_inverse, arnold_permute, demodulate, keystream, modulate, ArnoldParams, Key, Modulation};
use crate::erga::{self, ErgaParams, DEFAULT_SEED};
use crate::error::Result;
use crate::grid::BlockGrid;
use crate::image::GrayImage;

/// Parameters shared by owner, hider and receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VraeConfig {
    pub block_height: usize,
    pub block_width: usize,
    pub modulation: Modulation,
    pub seed: u64,
    pub backend: Backend,
    pub scan: ScanMode,
}

impl VraeConfig {
    pub fn new(block_height: usize, block_width: usize, modulation: Modulation, backend: Backend) -> Self {
        Self { block_height, block_width, modulation, seed: DEFAULT_SEED, backend, scan: ScanMode::Exact }
    }

    pub fn grid(&self, image: &GrayImage) -> Result<BlockGrid> {
        BlockGrid::new(image.height(), image.width(), self.block_height, self.block_width)
    }

    pub fn erga(&self) -> ErgaParams {
        let mut p = ErgaParams::blocks(self.block_height, self.block_width, self.seed, self.backend);
        p.scan = self.scan;
        p
    }
}

/// Owner's encrypted image together with the quantities needed for analysis.
#[derive(Debug, Clone)]
pub struct Encrypted {
    pub image: GrayImage,
    /// Applied shift r'_i per block in snake order.
    pub shifts: Vec<u8>,
    pub arnold: ArnoldParams,
}

/// XORs pixels outside the block-covered region with the `K_M` keystream past the block bytes.
fn mask_uncovered(image: &mut GrayImage, grid: &BlockGrid, key_m: &Key) {
    let width = image.width();
    let uncovered: Vec<usize> = (0..image.len()).filter(|&i| !grid.is_covered(i / width, i % width)).collect();
    if uncovered.is_empty() {
        return;
    }
    let stream = keystream(key_m, grid.block_count() + uncovered.len());
    for (&i, &k) in uncovered.iter().zip(&stream[grid.block_count()..]) {
        image.pixels_mut()[i] ^= k;
    }
}

/// Owner side: snake-order modulation, then Arnold permutation of blocks.
pub fn encrypt(image: &GrayImage, key_m: &Key, key_p: &Key, config: &VraeConfig) -> Result<Encrypted> {
    let grid = config.grid(image)?;
    let (mut modulated, shifts) = modulate(image, &grid, key_m, config.modulation)?;
    mask_uncovered(&mut modulated, &grid, key_m);
    let arnold = ArnoldParams::derive(key_p, &grid);
    let image = arnold_permute(&modulated, &grid, &arnold)?;
    Ok(Encrypted { image, shifts, arnold })
}

/// Inverts [`encrypt`].
pub fn decrypt(encrypted: &GrayImage, key_m: &Key, key_p: &Key, config: &VraeConfig) -> Result<GrayImage> {
    let grid = config.grid(encrypted)?;
    let arnold = ArnoldParams::derive(key_p, &grid);
    let mut modulated = arnold_inverse(encrypted, &grid, &arnold)?;
    mask_uncovered(&mut modulated, &grid, key_m);
    demodulate(&modulated, &grid, key_m, config.modulation)
}

/// Hider's view of an encrypted image after vacating room.
#[derive(Debug, Clone)]
pub struct Marked {
    pub image: GrayImage,
    pub threshold: u32,
    pub capacity: usize,
}

/// Net room the hider can vacate in `encrypted`.
pub fn capacity(encrypted: &GrayImage, config: &VraeConfig) -> Result<(u32, usize)> {
    erga::capacity(encrypted, &config.erga())
}

/// Hider side: vacates room in the encrypted image and writes the encrypted payload.
pub fn embed(encrypted: &GrayImage, payload: &[bool], key_h: &Key, config: &VraeConfig) -> Result<Marked> {
    let vacated = erga::vacate(encrypted, &config.erga())?;
    let mut image = vacated.carrier.clone();
    embed_payload(&mut image, &vacated.frame, &vacated.layout, payload, key_h)?;
    Ok(Marked { image, threshold: vacated.threshold, capacity: vacated.capacity() })
}

/// Receiver side: recovers `len` payload bits with only `K_H` and the seed.
pub fn extract(marked: &GrayImage, key_h: &Key, len: usize, config: &VraeConfig) -> Result<Vec<bool>> {
    let (frame, layout) = erga::read_layout(marked, &config.erga())?;
    extract_payload(marked, &frame, &layout, len, key_h)
}

/// Restores the owner's encrypted image from a marked one (no keys needed).
pub fn restore_encrypted(marked: &GrayImage, config: &VraeConfig) -> Result<GrayImage> {
    erga::restore(marked, &config.erga())
}

/// Receiver side: recovers the original image with `K_M` and `K_P`.
pub fn recover(marked: &GrayImage, key_m: &Key, key_p: &Key, config: &VraeConfig) -> Result<GrayImage> {
    decrypt(&restore_encrypted(marked, config)?, key_m, key_p, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn image(rng: &mut ChaCha8Rng, h: usize, w: usize) -> GrayImage {
        GrayImage::from_fn(h, w, |r, c| (100.0 + 70.0 * ((r as f64 / 11.0).sin() * (c as f64 / 7.0).cos()) + rng.gen_range(0.0..3.0)) as u8).unwrap()
    }

    #[test]
    fn encrypt_decrypt_round_trip_with_uncovered_border() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = image(&mut rng, 50, 38);
        let (m, p) = (Key::from_seed(1), Key::from_seed(2));
        for modulation in [Modulation::Constrained(0.0), Modulation::Constrained(0.6), Modulation::Unconstrained] {
            let config = VraeConfig::new(6, 6, modulation, Backend::Arithmetic);
            let enc = encrypt(&x, &m, &p, &config).unwrap();
            // 50x38 with 6x6 blocks leaves a 2-row and 2-column border outside the grid
            let border: Vec<(usize, usize)> = (0..50).flat_map(|r| (0..38).map(move |c| (r, c))).filter(|&(r, c)| r >= 48 || c >= 36).collect();
            let changed = border.iter().filter(|&&(r, c)| enc.image.get(r, c) != x.get(r, c)).count();
            assert!(changed > border.len() * 9 / 10, "{changed}/{}", border.len());
            assert_eq!(decrypt(&enc.image, &m, &p, &config).unwrap(), x);
        }
    }

    #[test]
    fn full_pipeline_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = image(&mut rng, 64, 64);
        let (m, p, h) = (Key::from_seed(3), Key::from_seed(4), Key::from_seed(5));
        for backend in [Backend::Arithmetic, Backend::Huffman] {
            let config = VraeConfig::new(4, 4, Modulation::Constrained(0.5), backend);
            let enc = encrypt(&x, &m, &p, &config).unwrap();
            let (_, cap) = capacity(&enc.image, &config).unwrap();
            let payload: Vec<bool> = (0..cap).map(|_| rng.gen()).collect();
            let marked = embed(&enc.image, &payload, &h, &config).unwrap();
            assert_eq!(marked.capacity, cap);
            assert_eq!(extract(&marked.image, &h, cap, &config).unwrap(), payload);
            assert_eq!(restore_encrypted(&marked.image, &config).unwrap(), enc.image);
            assert_eq!(recover(&marked.image, &m, &p, &config).unwrap(), x);
        }
    }
}
