//! Stream-cipher encryption, correlation-preserving block modulation and
//! Arnold block permutation.

mod arnold;
mod keystream;
mod modulation;

pub use arnold::{arnold_inverse, arnold_permute, ArnoldParams};
pub use keystream::{keystream, xor_bits, Key, SplitMix64};
pub use modulation::{allowed_shifts, demodulate, modulate, shift_block, Modulation};

use crate::image::GrayImage;

/// XORs every pixel (raster order) with the keystream of `key`. Involutive.
pub fn xor_image(image: &GrayImage, key: &Key) -> GrayImage {
    let mut out = image.clone();
    let stream = keystream(key, image.len());
    for (p, k) in out.pixels_mut().iter_mut().zip(stream) {
        *p ^= k;
    }
    out
}
