use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rdhei::{Backend, Key, Modulation, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "rdhei", version, about = "Reversible data hiding in encrypted grayscale PGM images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Owner: vacate room in a plain image and encrypt it (room before encryption).
    VrbePrepare {
        input: PathBuf,
        #[command(flatten)]
        keys: VrbeKeys,
        #[command(flatten)]
        coder: CoderArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Hider: write a payload into the room of a prepared image.
    VrbeEmbed {
        input: PathBuf,
        #[arg(long, env = "RDHEI_KEY_E2", hide_env_values = true, value_parser = parse_key)]
        key_e2: Key,
        #[command(flatten)]
        key_h: HidingKey,
        #[command(flatten)]
        payload: PayloadIn,
        #[command(flatten)]
        coder: CoderArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Receiver: read the payload from a marked image.
    VrbeExtract {
        input: PathBuf,
        #[arg(long, env = "RDHEI_KEY_E2", hide_env_values = true, value_parser = parse_key)]
        key_e2: Key,
        #[command(flatten)]
        key_h: HidingKey,
        #[command(flatten)]
        bits: PayloadBits,
        #[command(flatten)]
        coder: CoderArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Receiver: recover the original image from a marked image.
    VrbeRecover {
        input: PathBuf,
        #[command(flatten)]
        keys: VrbeKeys,
        #[command(flatten)]
        coder: CoderArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Owner: encrypt by block modulation and Arnold permutation (room after encryption).
    VraeEncrypt {
        input: PathBuf,
        #[command(flatten)]
        keys: VraeKeys,
        #[command(flatten)]
        vrae: VraeArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Hider: vacate room in an encrypted image and embed a payload.
    VraeEmbed {
        input: PathBuf,
        #[command(flatten)]
        key_h: HidingKey,
        #[command(flatten)]
        payload: PayloadIn,
        #[command(flatten)]
        vrae: VraeArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Receiver: read the payload from a marked image.
    VraeExtract {
        input: PathBuf,
        #[command(flatten)]
        key_h: HidingKey,
        #[command(flatten)]
        bits: PayloadBits,
        #[command(flatten)]
        vrae: VraeArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Receiver: recover the original image from a marked image.
    VraeRecover {
        input: PathBuf,
        #[command(flatten)]
        keys: VraeKeys,
        #[command(flatten)]
        vrae: VraeArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Report the optimal threshold and net capacity of an image.
    ///
    /// Without --block the whole image is one block (the room a VRBE owner
    /// vacates); with --block it is the room a VRAE hider finds.
    Capacity {
        input: PathBuf,
        #[arg(long, value_parser = parse_block)]
        block: Option<(usize, usize)>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        coder: CoderArg,
    },
    /// PSNR and SSIM between two images of equal size.
    Metrics { reference: PathBuf, test: PathBuf },
    /// Run the full pipeline on every .pgm in a directory and write a CSV report.
    Bench {
        dir: PathBuf,
        /// VRAE block sizes (repeatable).
        #[arg(long, value_parser = parse_block, default_values = ["8x8"])]
        block: Vec<(usize, usize)>,
        /// VRAE modulation levels (repeatable).
        #[arg(long, value_parser = parse_modulation, default_values = ["0.5"])]
        zeta: Vec<Modulation>,
        /// Coders to run (repeatable).
        #[arg(long, value_parser = parse_backend, default_values = ["arith", "huffman"])]
        coder: Vec<Backend>,
        /// Seed of the bench keys and random payloads.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct VrbeKeys {
    #[arg(long, env = "RDHEI_KEY_E1", hide_env_values = true, value_parser = parse_key)]
    pub key_e1: Key,
    #[arg(long, env = "RDHEI_KEY_E2", hide_env_values = true, value_parser = parse_key)]
    pub key_e2: Key,
}

#[derive(Debug, Args)]
pub struct VraeKeys {
    #[arg(long, env = "RDHEI_KEY_M", hide_env_values = true, value_parser = parse_key)]
    pub key_m: Key,
    #[arg(long, env = "RDHEI_KEY_P", hide_env_values = true, value_parser = parse_key)]
    pub key_p: Key,
}

#[derive(Debug, Args)]
pub struct HidingKey {
    #[arg(long, env = "RDHEI_KEY_H", hide_env_values = true, value_parser = parse_key)]
    pub key_h: Key,
}

#[derive(Debug, Args)]
pub struct CoderArg {
    #[arg(long, value_parser = parse_backend, default_value = "arith")]
    pub coder: Backend,
}

#[derive(Debug, Args)]
pub struct VraeArgs {
    #[arg(long, value_parser = parse_block, default_value = "8x8")]
    pub block: (usize, usize),
    /// Modulation level in [0, 1], or "none" for unconstrained shifts.
    #[arg(long, value_parser = parse_modulation, default_value = "0.5")]
    pub zeta: Modulation,
    /// Public seed of the per-block reference positions.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub coder: CoderArg,
}

impl VraeArgs {
    pub fn config(&self) -> rdhei::VraeConfig {
        let mut c = rdhei::VraeConfig::new(self.block.0, self.block.1, self.zeta, self.coder.coder);
        c.seed = self.seed;
        c
    }
}

#[derive(Debug, Args)]
pub struct PayloadIn {
    /// Payload file; its bytes are embedded MSB first.
    #[arg(long)]
    pub payload: PathBuf,
    /// Embed only the first n bits of the payload file.
    #[arg(long)]
    pub payload_bits: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PayloadBits {
    /// Payload length in bits; read from `<input>.meta` when absent.
    #[arg(long)]
    pub payload_bits: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutArg {
    #[arg(long, short)]
    pub out: PathBuf,
}

fn parse_key(s: &str) -> Result<Key, String> {
    s.parse().map_err(|e: rdhei::Error| e.to_string())
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: rdhei::Error| e.to_string())
}

fn parse_modulation(s: &str) -> Result<Modulation, String> {
    s.parse().map_err(|e: rdhei::Error| e.to_string())
}

fn parse_block(s: &str) -> Result<(usize, usize), String> {
    let (h, w) = s.split_once(['x', 'X']).ok_or_else(|| format!("block must look like 8x8, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad block size {v:?}: {e}"));
    Ok((parse(h)?, parse(w)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn block_sizes() {
        assert_eq!(parse_block("8x8"), Ok((8, 8)));
        assert_eq!(parse_block("4X6"), Ok((4, 6)));
        assert!(parse_block("8").is_err());
        assert!(parse_block("ax8").is_err());
    }
}
