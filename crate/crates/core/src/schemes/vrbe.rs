//! Vacating room before encryption.
//!
//! Keys: `K_E1` encrypts the image, `K_E2` hides the description length L,
//! `K_H` encrypts the payload. Extraction needs `{K_E2, K_H}`; recovery needs
//! `{K_E1, K_E2}`.

use super::{embed_payload, extract_payload, length_from_bits};
use crate::coder::Backend;
use crate::crypto::{xor_bits, xor_image, Key};
use crate::erga::{self, ErgaParams, Frame, RoomLayout};
use crate::error::Result;
use crate::image::GrayImage;

/// Encrypted image with reserved room, as handed to the data hider.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub image: GrayImage,
    pub threshold: u32,
    pub capacity: usize,
}

fn params(backend: Backend) -> ErgaParams {
    ErgaParams::whole_image(backend)
}

/// Owner side: vacate, stream-cipher every pixel, then overwrite the L field with L'.
pub fn prepare(image: &GrayImage, key_e1: &Key, key_e2: &Key, backend: Backend) -> Result<Prepared> {
    let vacated = erga::vacate(image, &params(backend))?;
    let mut encrypted = xor_image(&vacated.carrier, key_e1);
    let frame = &vacated.frame;
    let hidden = xor_bits(&frame.length_to_bits(vacated.layout.description_bits), key_e2);
    frame.write_length_bits(&mut encrypted, &hidden)?;
    Ok(Prepared { image: encrypted, threshold: vacated.threshold, capacity: vacated.capacity() })
}

/// Locates the room of an encrypted carrier using `K_E2`.
pub fn locate_room(carrier: &GrayImage, key_e2: &Key, backend: Backend) -> Result<(Frame, RoomLayout)> {
    let frame = Frame::new(carrier.height(), carrier.width(), &params(backend))?;
    let length = length_from_bits(&xor_bits(&frame.read_length_bits(carrier)?, key_e2));
    let layout = frame.layout(length)?;
    Ok((frame, layout))
}

/// Free room of an encrypted carrier in bits.
pub fn capacity(carrier: &GrayImage, key_e2: &Key, backend: Backend) -> Result<usize> {
    Ok(locate_room(carrier, key_e2, backend)?.1.room_bits())
}

/// Hider side: writes `payload` encrypted with `K_H` at the start of the room.
pub fn embed(carrier: &GrayImage, payload: &[bool], key_e2: &Key, key_h: &Key, backend: Backend) -> Result<GrayImage> {
    let (frame, layout) = locate_room(carrier, key_e2, backend)?;
    let mut marked = carrier.clone();
    embed_payload(&mut marked, &frame, &layout, payload, key_h)?;
    Ok(marked)
}

/// Receiver side: recovers `len` payload bits without the image key.
pub fn extract(marked: &GrayImage, key_e2: &Key, key_h: &Key, len: usize, backend: Backend) -> Result<Vec<bool>> {
    let (frame, layout) = locate_room(marked, key_e2, backend)?;
    extract_payload(marked, &frame, &layout, len, key_h)
}

/// Receiver side: recovers the original image without the hiding key.
pub fn recover(marked: &GrayImage, key_e1: &Key, key_e2: &Key, backend: Backend) -> Result<GrayImage> {
    let (_, layout) = locate_room(marked, key_e2, backend)?;
    let decrypted = xor_image(marked, key_e1);
    erga::restore_with_length(&decrypted, &params(backend), layout.description_bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn image(rng: &mut ChaCha8Rng) -> GrayImage {
        GrayImage::from_fn(48, 40, |r, c| (90.0 + 60.0 * ((r as f64 / 9.0).sin() + (c as f64 / 13.0).cos()) / 2.0 + rng.gen_range(0.0..4.0)) as u8).unwrap()
    }

    #[test]
    fn full_capacity_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (e1, e2, h) = (Key::from_seed(1), Key::from_seed(2), Key::from_seed(3));
        for backend in [Backend::Arithmetic, Backend::Huffman] {
            let x = image(&mut rng);
            let prepared = prepare(&x, &e1, &e2, backend).unwrap();
            assert_eq!(capacity(&prepared.image, &e2, backend).unwrap(), prepared.capacity);
            let payload: Vec<bool> = (0..prepared.capacity).map(|_| rng.gen()).collect();
            let marked = embed(&prepared.image, &payload, &e2, &h, backend).unwrap();
            assert_eq!(extract(&marked, &e2, &h, payload.len(), backend).unwrap(), payload);
            assert_eq!(recover(&marked, &e1, &e2, backend).unwrap(), x);
        }
    }

    #[test]
    fn oversized_payload_is_a_capacity_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = image(&mut rng);
        let (e1, e2, h) = (Key::from_seed(4), Key::from_seed(5), Key::from_seed(6));
        let p = prepare(&x, &e1, &e2, Backend::Arithmetic).unwrap();
        let payload = vec![true; p.capacity + 1];
        match embed(&p.image, &payload, &e2, &h, Backend::Arithmetic) {
            Err(Error::Capacity { requested, available }) => assert_eq!((requested, available), (p.capacity + 1, p.capacity)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_image_key_fails_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = image(&mut rng);
        let (e1, e2) = (Key::from_seed(7), Key::from_seed(8));
        let p = prepare(&x, &e1, &e2, Backend::Arithmetic).unwrap();
        match recover(&p.image, &Key::from_seed(99), &e2, Backend::Arithmetic) {
            Ok(img) => assert_ne!(img, x),
            Err(e) => assert!(matches!(e, Error::Corrupt(_))),
        }
    }
}
