//! `rdhei` command-line tool. Carriers are binary PGM files; payloads are raw
//! files read and written MSB first. The payload length travels out of band in
//! a `<marked>.meta` sidecar with one `payload_bits=<n>` line.

mod args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use rdhei::schemes::{vrae, vrbe};
use rdhei::toolkit::{bench, psnr, ssim, write_csv, BenchConfig, Scheme};
use rdhei::{erga, read_pgm_file, write_pgm_file, Error, ErgaParams, GrayImage, Result};

use args::{Cli, Command, PayloadBits, PayloadIn};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::NoRoom { .. } | Error::Capacity { .. } | Error::DimensionMismatch(_) => 2,
        Error::Corrupt(_) => 3,
        Error::Io(_) | Error::Format { .. } => 4,
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::VrbePrepare { input, keys, coder, out } => {
            let prepared = vrbe::prepare(&read_pgm_file(&input)?, &keys.key_e1, &keys.key_e2, coder.coder)?;
            write_pgm_file(&out.out, &prepared.image)?;
            report_capacity(prepared.threshold, prepared.capacity, &prepared.image);
        }
        Command::VrbeEmbed { input, key_e2, key_h, payload, coder, out } => {
            let bits = read_payload(&payload)?;
            let marked = vrbe::embed(&read_pgm_file(&input)?, &bits, &key_e2, &key_h.key_h, coder.coder)?;
            write_pgm_file(&out.out, &marked)?;
            write_meta(&out.out, bits.len())?;
            println!("embedded {} bits", bits.len());
        }
        Command::VrbeExtract { input, key_e2, key_h, bits, coder, out } => {
            let len = payload_len(&bits, &input)?;
            let payload = vrbe::extract(&read_pgm_file(&input)?, &key_e2, &key_h.key_h, len, coder.coder)?;
            std::fs::write(&out.out, bits_to_bytes(&payload))?;
            println!("extracted {len} bits");
        }
        Command::VrbeRecover { input, keys, coder, out } => {
            let image = vrbe::recover(&read_pgm_file(&input)?, &keys.key_e1, &keys.key_e2, coder.coder)?;
            write_pgm_file(&out.out, &image)?;
        }
        Command::VraeEncrypt { input, keys, vrae: v, out } => {
            let encrypted = vrae::encrypt(&read_pgm_file(&input)?, &keys.key_m, &keys.key_p, &v.config())?;
            write_pgm_file(&out.out, &encrypted.image)?;
        }
        Command::VraeEmbed { input, key_h, payload, vrae: v, out } => {
            let bits = read_payload(&payload)?;
            let marked = vrae::embed(&read_pgm_file(&input)?, &bits, &key_h.key_h, &v.config())?;
            write_pgm_file(&out.out, &marked.image)?;
            write_meta(&out.out, bits.len())?;
            println!("embedded {} bits", bits.len());
            report_capacity(marked.threshold, marked.capacity, &marked.image);
        }
        Command::VraeExtract { input, key_h, bits, vrae: v, out } => {
            let len = payload_len(&bits, &input)?;
            let payload = vrae::extract(&read_pgm_file(&input)?, &key_h.key_h, len, &v.config())?;
            std::fs::write(&out.out, bits_to_bytes(&payload))?;
            println!("extracted {len} bits");
        }
        Command::VraeRecover { input, keys, vrae: v, out } => {
            let image = vrae::recover(&read_pgm_file(&input)?, &keys.key_m, &keys.key_p, &v.config())?;
            write_pgm_file(&out.out, &image)?;
        }
        Command::Capacity { input, block, seed, coder } => {
            let image = read_pgm_file(&input)?;
            let params = match block {
                None => ErgaParams::whole_image(coder.coder),
                Some((h, w)) => ErgaParams::blocks(h, w, seed, coder.coder),
            };
            let (threshold, capacity) = erga::capacity(&image, &params)?;
            report_capacity(threshold, capacity, &image);
        }
        Command::Metrics { reference, test } => {
            let (a, b) = (read_pgm_file(reference)?, read_pgm_file(test)?);
            println!("psnr={:.4}", psnr(&a, &b)?);
            println!("ssim={:.6}", ssim(&a, &b)?);
        }
        Command::Bench { dir, block, zeta, coder, seed, csv } => {
            let mut configs = Vec::new();
            for &backend in &coder {
                configs.push(BenchConfig::new(Scheme::Vrbe, backend));
                for &(block_height, block_width) in &block {
                    for &modulation in &zeta {
                        configs.push(BenchConfig::new(Scheme::Vrae { block_height, block_width, modulation }, backend));
                    }
                }
            }
            for c in &mut configs {
                c.seed = seed;
            }
            let rows = bench(&dir, &configs)?;
            match csv {
                Some(path) => write_csv(std::fs::File::create(path)?, &rows)?,
                None => write_csv(std::io::stdout().lock(), &rows)?,
            }
        }
    }
    Ok(())
}

fn report_capacity(threshold: u32, capacity: usize, image: &GrayImage) {
    println!("threshold={threshold}");
    println!("capacity_bits={capacity}");
    println!("er_bpp={:.4}", capacity as f64 / image.len() as f64);
}

fn read_payload(p: &PayloadIn) -> Result<Vec<bool>> {
    let bits = bytes_to_bits(&std::fs::read(&p.payload)?);
    match p.payload_bits {
        None => Ok(bits),
        Some(n) if n <= bits.len() => Ok(bits[..n].to_vec()),
        Some(n) => Err(Error::Parameter(format!("--payload-bits {n} exceeds the {} bits in the payload file", bits.len()))),
    }
}

fn meta_path(image: &Path) -> PathBuf {
    let mut name = image.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

fn write_meta(image: &Path, bits: usize) -> Result<()> {
    Ok(std::fs::write(meta_path(image), format!("payload_bits={bits}\n"))?)
}

fn payload_len(bits: &PayloadBits, input: &Path) -> Result<usize> {
    if let Some(n) = bits.payload_bits {
        return Ok(n);
    }
    let meta = meta_path(input);
    let text = std::fs::read_to_string(&meta).map_err(|e| {
        Error::Parameter(format!("--payload-bits not given and {} unreadable: {e}", meta.display()))
    })?;
    text.lines()
        .find_map(|l| l.trim().strip_prefix("payload_bits="))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Parameter(format!("{} has no payload_bits line", meta.display())))
}

fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes.iter().flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1)).collect()
}

/// Packs bits MSB first, zero-padding the last byte.
fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8).map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_packing_round_trips() {
        let bytes = [0b1010_0001, 0xFF, 0x00];
        let bits = bytes_to_bits(&bytes);
        assert_eq!(&bits[..8], &[true, false, true, false, false, false, false, true]);
        assert_eq!(bits_to_bytes(&bits), bytes);
        assert_eq!(bits_to_bytes(&[true, true, false]), vec![0b1100_0000]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Parameter(String::new())), 2);
        assert_eq!(exit_code(&Error::Capacity { requested: 2, available: 1 }), 2);
        assert_eq!(exit_code(&Error::Corrupt(String::new())), 3);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 4);
    }

    #[test]
    fn meta_sidecar_sits_next_to_the_image() {
        assert_eq!(meta_path(Path::new("a/marked.pgm")), PathBuf::from("a/marked.pgm.meta"));
    }
}
