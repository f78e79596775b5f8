//! Binary PGM (P5, maxval 255) reading and writing.

use crate::error::{Error, Result};
use crate::image::GrayImage;

struct HeaderParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderParser<'a> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Format { offset: self.pos, message: message.into() })
    }

    /// Skips whitespace and `#` comments that run to end of line.
    fn skip_blank(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_blank();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.fail(format!("expected {what}"));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        match text.parse::<usize>() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.fail(format!("{what} out of range"))
            }
        }
    }
}

/// Decodes a binary P5 PGM with maxval 255.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut p = HeaderParser { bytes, pos: 0 };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return p.fail("missing P5 magic");
    }
    p.pos = 2;
    let width = p.number("width")?;
    let height = p.number("height")?;
    let maxval_at = p.pos;
    let maxval = p.number("maxval")?;
    if maxval != 255 {
        p.pos = maxval_at;
        return p.fail(format!("unsupported maxval {maxval}"));
    }
    if width == 0 || height == 0 {
        return p.fail("zero image dimension");
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(p.pos) {
        Some(b) if b.is_ascii_whitespace() => p.pos += 1,
        _ => return p.fail("expected whitespace after maxval"),
    }
    let need = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format { offset: p.pos, message: "image too large".into() })?;
    let payload = &bytes[p.pos..];
    if payload.len() < need {
        return Err(Error::Format {
            offset: bytes.len(),
            message: format!("truncated payload: expected {need} bytes, found {}", payload.len()),
        });
    }
    GrayImage::new(height, width, payload[..need].to_vec())
}

/// Encodes with the canonical header `P5\n<W> <H>\n255\n`.
pub fn save_pgm(image: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width(), image.height());
    let mut out = Vec::with_capacity(header.len() + image.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(image.pixels());
    out
}

pub fn read_pgm_file(path: impl AsRef<std::path::Path>) -> Result<GrayImage> {
    load_pgm(&std::fs::read(path)?)
}

pub fn write_pgm_file(path: impl AsRef<std::path::Path>, image: &GrayImage) -> Result<()> {
    std::fs::write(path, save_pgm(image))?;
    Ok(())
}
