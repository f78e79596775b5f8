//! Embedding room generation: make an image self-describing and vacate the rest.
//!
//! The carrier's embedding-pixel bits, addressed by [`BitCursor`], hold in order
//! the length L (MSB first, `3 + ceil(log2(N1*N2))` bits), the L bits of
//! CD1‖CD2‖AD, and then free room. Reference pixels are never touched.

use crate::bits::{push_uint, to_uint};
use crate::coder::{self, Backend, ScanMode};
use crate::cursor::BitCursor;
use crate::error::{Error, Result};
use crate::grid::BlockGrid;
use crate::image::GrayImage;
use crate::predictor::{predict_image, reconstruct, OrderTable, PixelCode, ReferencePlan};

/// How the image is partitioned for prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// One block spanning the image, reference at the top-left pixel.
    WholeImage,
    /// `height x width` blocks, references drawn from the seed.
    Blocks { height: usize, width: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErgaParams {
    pub layout: Layout,
    pub seed: u64,
    pub backend: Backend,
    pub scan: ScanMode,
}

/// Public reference seed used unless the parties agree on another.
pub const DEFAULT_SEED: u64 = 0x5EED_0001;

impl ErgaParams {
    pub fn whole_image(backend: Backend) -> Self {
        Self { layout: Layout::WholeImage, seed: DEFAULT_SEED, backend, scan: ScanMode::Exact }
    }

    pub fn blocks(height: usize, width: usize, seed: u64, backend: Backend) -> Self {
        Self { layout: Layout::Blocks { height, width }, seed, backend, scan: ScanMode::Exact }
    }
}

/// Grid, reference pixels and bit addressing of an `N1 x N2` carrier.
#[derive(Debug, Clone)]
pub struct Frame {
    pub grid: BlockGrid,
    pub plan: ReferencePlan,
    pub cursor: BitCursor,
    pixels: usize,
}

impl Frame {
    pub fn new(height: usize, width: usize, params: &ErgaParams) -> Result<Self> {
        if height < 2 || width < 2 {
            return Err(Error::param(format!("image {height}x{width} is smaller than 2x2")));
        }
        let (grid, plan) = match params.layout {
            Layout::WholeImage => {
                let grid = BlockGrid::whole(height, width)?;
                (grid, ReferencePlan::top_left(&grid))
            }
            Layout::Blocks { height: bh, width: bw } => {
                if bh * bw < 2 {
                    return Err(Error::param("blocks need at least two pixels"));
                }
                let grid = BlockGrid::new(height, width, bh, bw)?;
                (grid, ReferencePlan::seeded(params.seed, &grid))
            }
        };
        let cursor = BitCursor::new(&grid, &plan.pixel_indices(&grid));
        Ok(Self { grid, plan, cursor, pixels: height * width })
    }

    /// Width of the L field.
    pub fn length_bits(&self) -> usize {
        coder::length_field_bits(self.pixels)
    }

    /// Total bits available in the embedding pixels.
    pub fn total_bits(&self) -> usize {
        self.cursor.capacity()
    }

    /// Layout implied by a description length, rejecting lengths that overrun the carrier.
    pub fn layout(&self, description_bits: usize) -> Result<RoomLayout> {
        let layout = RoomLayout { length_bits: self.length_bits(), description_bits, total_bits: self.total_bits() };
        if layout.length_bits + description_bits > layout.total_bits {
            return Err(Error::corrupt(format!(
                "description length {description_bits} overruns the {}-bit carrier",
                layout.total_bits
            )));
        }
        Ok(layout)
    }

    /// Reads the L field as stored (no decryption).
    pub fn read_length_bits(&self, carrier: &GrayImage) -> Result<Vec<bool>> {
        self.cursor.read(carrier, 0, self.length_bits())
    }

    pub fn write_length_bits(&self, carrier: &mut GrayImage, bits: &[bool]) -> Result<()> {
        debug_assert_eq!(bits.len(), self.length_bits());
        self.cursor.write(carrier, 0, bits)
    }

    pub fn length_to_bits(&self, description_bits: usize) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.length_bits());
        push_uint(&mut out, description_bits as u64, self.length_bits() as u32);
        out
    }

    fn check_shape(&self, image: &GrayImage) -> Result<()> {
        if image.height() != self.grid.image_height() || image.width() != self.grid.image_width() {
            return Err(Error::DimensionMismatch(format!(
                "carrier is {}x{}, frame expects {}x{}",
                image.height(),
                image.width(),
                self.grid.image_height(),
                self.grid.image_width()
            )));
        }
        Ok(())
    }

    /// Writes `bits` at the start of the free room.
    pub fn write_room(&self, carrier: &mut GrayImage, layout: &RoomLayout, bits: &[bool]) -> Result<()> {
        if bits.len() > layout.room_bits() {
            return Err(Error::Capacity { requested: bits.len(), available: layout.room_bits() });
        }
        self.cursor.write(carrier, layout.room_start(), bits)
    }

    /// Reads `len` bits from the start of the free room.
    pub fn read_room(&self, carrier: &GrayImage, layout: &RoomLayout, len: usize) -> Result<Vec<bool>> {
        if len > layout.room_bits() {
            return Err(Error::Capacity { requested: len, available: layout.room_bits() });
        }
        self.cursor.read(carrier, layout.room_start(), len)
    }
}

/// Partition of the embedding bits into the L field, the description and free room.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoomLayout {
    pub length_bits: usize,
    pub description_bits: usize,
    pub total_bits: usize,
}

impl RoomLayout {
    pub fn room_start(&self) -> usize {
        self.length_bits + self.description_bits
    }

    /// Net capacity: total bits minus the L field minus L.
    pub fn room_bits(&self) -> usize {
        self.total_bits - self.room_start()
    }
}

/// A carrier with vacated room.
#[derive(Debug, Clone)]
pub struct VacatedImage {
    pub carrier: GrayImage,
    pub frame: Frame,
    pub layout: RoomLayout,
    pub threshold: u32,
    pub backend: Backend,
}

impl VacatedImage {
    /// Free-room size in bits.
    pub fn capacity(&self) -> usize {
        self.layout.room_bits()
    }

    /// Embedding rate in bits per pixel of the whole image.
    pub fn embedding_rate(&self) -> f64 {
        self.capacity() as f64 / self.carrier.len() as f64
    }
}

/// Predicts, codes at the capacity-maximizing threshold and self-embeds the description.
pub fn vacate(image: &GrayImage, params: &ErgaParams) -> Result<VacatedImage> {
    let frame = Frame::new(image.height(), image.width(), params)?;
    let orders = OrderTable::new(&frame.grid, &frame.plan);
    let prediction = predict_image(image, &frame.grid, &frame.plan, &orders);
    let choice = coder::optimize_threshold(&prediction, image.len(), params.backend, params.scan)?;
    let description = choice.stream.to_bits();
    let layout = frame.layout(description.len())?;
    debug_assert_eq!(layout.room_bits() as i64, choice.capacity);
    let mut carrier = image.clone();
    frame.write_length_bits(&mut carrier, &frame.length_to_bits(description.len()))?;
    frame.cursor.write(&mut carrier, layout.length_bits, &description)?;
    Ok(VacatedImage { carrier, frame, layout, threshold: choice.stream.threshold(), backend: params.backend })
}

/// Net capacity in bits of `image` under `params`, with the chosen threshold.
pub fn capacity(image: &GrayImage, params: &ErgaParams) -> Result<(u32, usize)> {
    let v = vacate(image, params)?;
    Ok((v.threshold, v.capacity()))
}

/// Reads the L field of a plaintext carrier and returns the room layout.
pub fn read_layout(carrier: &GrayImage, params: &ErgaParams) -> Result<(Frame, RoomLayout)> {
    let frame = Frame::new(carrier.height(), carrier.width(), params)?;
    let length = to_uint(&frame.read_length_bits(carrier)?) as usize;
    let layout = frame.layout(length)?;
    Ok((frame, layout))
}

/// Rebuilds the original image from a carrier whose L field is intact.
pub fn restore(carrier: &GrayImage, params: &ErgaParams) -> Result<GrayImage> {
    let (frame, layout) = read_layout(carrier, params)?;
    restore_in(carrier, params, &frame, &layout)
}

/// Rebuilds the original image when L is supplied separately; the L field is ignored.
pub fn restore_with_length(carrier: &GrayImage, params: &ErgaParams, description_bits: usize) -> Result<GrayImage> {
    let frame = Frame::new(carrier.height(), carrier.width(), params)?;
    let layout = frame.layout(description_bits)?;
    restore_in(carrier, params, &frame, &layout)
}

fn restore_in(carrier: &GrayImage, params: &ErgaParams, frame: &Frame, layout: &RoomLayout) -> Result<GrayImage> {
    frame.check_shape(carrier)?;
    let description = frame.cursor.read(carrier, layout.length_bits, layout.description_bits)?;
    let decoded = coder::decode(&description, frame.cursor.pixel_count(), carrier.len(), params.backend)?;
    let grid = &frame.grid;
    let orders = OrderTable::new(grid, &frame.plan);
    let mut out = carrier.clone();
    let mut codes = decoded.codes.iter().copied();
    let mut block = vec![0i32; grid.block_pixels()];
    let width = grid.block_width();
    for (i, &reference) in frame.plan.positions().iter().enumerate() {
        let indices: Vec<usize> = grid.block_pixel_indices(i).collect();
        block[reference.0 * width + reference.1] = carrier.pixels()[indices[reference.0 * width + reference.1]] as i32;
        for step in orders.get(reference) {
            let code: PixelCode = codes.next().ok_or_else(|| Error::corrupt("symbol stream shorter than the image"))?;
            block[step.target as usize] = reconstruct(step, &block, code)?;
        }
        for (&p, &v) in indices.iter().zip(&block) {
            out.pixels_mut()[p] = v as u8;
        }
    }
    Ok(out)
}
