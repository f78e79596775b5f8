//! The two end-to-end protocols.
//!
//! Vacating room before encryption (VRBE): the owner vacates the plain image,
//! stream-ciphers it and hides the description length under a second key.
//! Vacating room after encryption (VRAE): the owner modulates and scrambles
//! blocks so that their internal correlation survives, and the hider vacates
//! room in the encrypted image.
//!
//! In both, extraction and recovery need disjoint key sets (separability).

pub mod vrae;
pub mod vrbe;

use crate::bits::to_uint;
use crate::crypto::{xor_bits, Key};
use crate::erga::{Frame, RoomLayout};
use crate::error::Result;
use crate::image::GrayImage;

pub use vrae::VraeConfig;

/// Writes `payload` encrypted with `key_h` into the free room.
pub(crate) fn embed_payload(carrier: &mut GrayImage, frame: &Frame, layout: &RoomLayout, payload: &[bool], key_h: &Key) -> Result<()> {
    frame.write_room(carrier, layout, &xor_bits(payload, key_h))
}

/// Reads `len` bits from the free room and decrypts them with `key_h`.
pub(crate) fn extract_payload(carrier: &GrayImage, frame: &Frame, layout: &RoomLayout, len: usize, key_h: &Key) -> Result<Vec<bool>> {
    Ok(xor_bits(&frame.read_room(carrier, layout, len)?, key_h))
}

pub(crate) fn length_from_bits(bits: &[bool]) -> usize {
    to_uint(bits) as usize
}
