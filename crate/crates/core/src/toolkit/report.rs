//! Owner → hider → receiver benchmark with one CSV row per (image, configuration).

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::metrics::{abnormal_count, psnr, ssim};
use crate::coder::{Backend, ScanMode};
use crate::crypto::{Key, Modulation, SplitMix64};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::pgm::read_pgm_file;
use crate::schemes::{vrae, vrbe, VraeConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Vrbe,
    Vrae { block_height: usize, block_width: usize, modulation: Modulation },
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Vrbe => "vrbe",
            Scheme::Vrae { .. } => "vrae",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub scheme: Scheme,
    pub backend: Backend,
    pub scan: ScanMode,
    /// Seed of the random payload and of the bench keys.
    pub seed: u64,
}

impl BenchConfig {
    pub fn new(scheme: Scheme, backend: Backend) -> Self {
        Self { scheme, backend, scan: ScanMode::Exact, seed: 1 }
    }
}

/// One report line. Metric fields are `None` when the run failed before producing them.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub image: String,
    pub scheme: String,
    pub backend: Backend,
    pub block: String,
    pub zeta: String,
    pub threshold: Option<u32>,
    pub capacity_bits: Option<usize>,
    pub pixels: usize,
    pub psnr_encrypted: Option<f64>,
    pub ssim_encrypted: Option<f64>,
    pub psnr_marked: Option<f64>,
    pub ssim_marked: Option<f64>,
    pub abnormal: Option<usize>,
    pub round_trip: bool,
    pub error: Option<String>,
}

impl Row {
    /// Embedding rate in bits per pixel.
    pub fn er(&self) -> Option<f64> {
        self.capacity_bits.map(|c| c as f64 / self.pixels as f64)
    }
}

pub const REPORT_HEADER: [&str; 15] = [
    "image",
    "scheme",
    "backend",
    "block",
    "zeta",
    "t_opt",
    "ec_bits",
    "er_bpp",
    "psnr_encrypted",
    "ssim_encrypted",
    "psnr_marked",
    "ssim_marked",
    "abnormal",
    "round_trip",
    "error",
];

fn bench_keys(seed: u64) -> [Key; 5] {
    let mut rng = SplitMix64::new(seed ^ 0xB5AD_4ECE_DA1C_E2A9);
    [(); 5].map(|_| Key::from_seed(rng.next_u64()))
}

fn random_bits(seed: u64, n: usize) -> Vec<bool> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = rng.next_u64();
        out.extend((0..64).map(|i| (w >> i) & 1 == 1).take(n - out.len()));
    }
    out
}

/// Runs the full pipeline on one image with a capacity-filling random payload.
pub fn run_one(name: &str, image: &GrayImage, config: &BenchConfig) -> Row {
    let (block, zeta) = match config.scheme {
        Scheme::Vrbe => ("whole".to_string(), String::new()),
        Scheme::Vrae { block_height, block_width, modulation } => (format!("{block_height}x{block_width}"), modulation.to_string()),
    };
    let mut row = Row {
        image: name.to_string(),
        scheme: config.scheme.to_string(),
        backend: config.backend,
        block,
        zeta,
        threshold: None,
        capacity_bits: None,
        pixels: image.len(),
        psnr_encrypted: None,
        ssim_encrypted: None,
        psnr_marked: None,
        ssim_marked: None,
        abnormal: None,
        round_trip: false,
        error: None,
    };
    if let Err(e) = fill_row(&mut row, image, config) {
        row.round_trip = false;
        row.error = Some(e.to_string());
    }
    row
}

fn fill_row(row: &mut Row, x: &GrayImage, config: &BenchConfig) -> Result<()> {
    let [k1, k2, k3, k4, kh] = bench_keys(config.seed);
    let (encrypted, marked, recovered, payload, extracted) = match config.scheme {
        Scheme::Vrbe => {
            let prepared = vrbe::prepare(x, &k1, &k2, config.backend)?;
            row.threshold = Some(prepared.threshold);
            row.capacity_bits = Some(prepared.capacity);
            let payload = random_bits(config.seed, prepared.capacity);
            let marked = vrbe::embed(&prepared.image, &payload, &k2, &kh, config.backend)?;
            let extracted = vrbe::extract(&marked, &k2, &kh, payload.len(), config.backend)?;
            let recovered = vrbe::recover(&marked, &k1, &k2, config.backend)?;
            (prepared.image, marked, recovered, payload, extracted)
        }
        Scheme::Vrae { block_height, block_width, modulation } => {
            let mut vc = VraeConfig::new(block_height, block_width, modulation, config.backend);
            vc.scan = config.scan;
            let enc = vrae::encrypt(x, &k3, &k4, &vc)?;
            row.abnormal = Some(abnormal_count(x, &enc.shifts, &vc.grid(x)?)?);
            let (threshold, capacity) = vrae::capacity(&enc.image, &vc)?;
            row.threshold = Some(threshold);
            row.capacity_bits = Some(capacity);
            let payload = random_bits(config.seed, capacity);
            let marked = vrae::embed(&enc.image, &payload, &kh, &vc)?.image;
            let extracted = vrae::extract(&marked, &kh, payload.len(), &vc)?;
            let recovered = vrae::recover(&marked, &k3, &k4, &vc)?;
            (enc.image, marked, recovered, payload, extracted)
        }
    };
    row.psnr_encrypted = Some(psnr(x, &encrypted)?);
    row.psnr_marked = Some(psnr(x, &marked)?);
    if let (Ok(a), Ok(b)) = (ssim(x, &encrypted), ssim(x, &marked)) {
        row.ssim_encrypted = Some(a);
        row.ssim_marked = Some(b);
    }
    row.round_trip = recovered == *x && extracted == payload;
    Ok(())
}

/// Runs every configuration on every `.pgm` file in `dir` (sorted by name).
/// Unreadable images and failed runs become rows with an error message.
pub fn bench(dir: &Path, configs: &[BenchConfig]) -> Result<Vec<Row>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    files.sort();
    let images: Vec<(String, Result<GrayImage>)> = files
        .par_iter()
        .map(|p| (p.file_name().unwrap_or_default().to_string_lossy().into_owned(), read_pgm_file(p)))
        .collect();
    let jobs: Vec<(usize, &BenchConfig)> = (0..images.len()).flat_map(|i| configs.iter().map(move |c| (i, c))).collect();
    Ok(jobs
        .par_iter()
        .map(|&(i, config)| {
            let (name, image) = &images[i];
            match image {
                Ok(img) => run_one(name, img, config),
                Err(e) => {
                    let mut row = run_one(name, &GrayImage::filled(1, 1, 0).expect("1x1"), config);
                    row.pixels = 0;
                    row.error = Some(e.to_string());
                    row
                }
            }
        })
        .collect())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the header and all rows as RFC 4180 CSV.
pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(REPORT_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.image.clone(),
            r.scheme.clone(),
            r.backend.to_string(),
            r.block.clone(),
            r.zeta.clone(),
            opt(r.threshold),
            opt(r.capacity_bits),
            opt(r.er()),
            opt(r.psnr_encrypted),
            opt(r.ssim_encrypted),
            opt(r.psnr_marked),
            opt(r.ssim_marked),
            opt(r.abnormal),
            r.round_trip.to_string(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
