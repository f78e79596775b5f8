//! Fixtures shared by the benchmarks.

use rdhei::GrayImage;

/// Smooth deterministic test image with mild texture.
pub fn fixture(height: usize, width: usize) -> GrayImage {
    GrayImage::from_fn(height, width, |r, c| {
        let (y, x) = (r as f64, c as f64);
        let v = 120.0 + 50.0 * (y * 0.031).sin() * (x * 0.017).cos() + 20.0 * ((x + y) * 0.09).sin() + ((r * 31 + c * 17) % 7) as f64;
        v.clamp(0.0, 255.0) as u8
    })
    .expect("non-empty fixture")
}

/// The standard Lena image if present in the repository test data, else a 512x512 fixture.
pub fn standard_or_fixture() -> GrayImage {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../testdata/standard/lena.pgm");
    rdhei::read_pgm_file(path).unwrap_or_else(|_| fixture(512, 512))
}
