//! Reversible data hiding in encrypted grayscale images.
//!
//! An image is made self-describing by predicting every non-reference pixel,
//! entropy coding the prediction errors and writing that description into the
//! image's own bit planes, which vacates the remaining bits for a payload.
//! Two protocols build on this: vacating room before encryption (stream
//! cipher) and after encryption (block modulation plus Arnold scrambling).

pub mod bits;
pub mod coder;
pub mod crypto;
pub mod cursor;
pub mod erga;
pub mod error;
pub mod grid;
pub mod image;
pub mod pgm;
pub mod predictor;
pub mod schemes;
pub mod toolkit;

pub use coder::{Backend, ScanMode};
pub use crypto::{Key, Modulation};
pub use erga::{ErgaParams, Layout, DEFAULT_SEED};
pub use error::{Error, Result};
pub use grid::BlockGrid;
pub use image::GrayImage;
pub use pgm::{load_pgm, read_pgm_file, save_pgm, write_pgm_file};
pub use schemes::VraeConfig;
