//! Bit sources for the command line: a seeded generator and bit files.
//!
//! The generator is xoshiro256** seeded through SplitMix64 from a `u64`
//! (the reference `seed_from_u64` expansion). Each 64-bit output is consumed
//! most significant bit first.

use std::path::Path;

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rescode_core::encoder::BitSource;

use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct PrngBits {
    rng: Xoshiro256StarStar,
    word: u64,
    left: u32,
}

impl PrngBits {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256StarStar::seed_from_u64(seed),
            word: 0,
            left: 0,
        }
    }
}

impl BitSource for PrngBits {
    fn next_bit(&mut self) -> Option<bool> {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        self.left -= 1;
        Some(self.word >> self.left & 1 == 1)
    }
}

/// How a bit file is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BitsFormat {
    /// ASCII if the file holds only `0`, `1` and whitespace, raw otherwise.
    Auto,
    /// Characters `0` and `1`; whitespace is skipped.
    Ascii,
    /// Raw bytes, most significant bit first.
    Raw,
}

/// Bits held in memory, one `bool` per bit.
#[derive(Debug, Clone, Default)]
pub struct FileBits {
    bits: Vec<bool>,
    pos: usize,
}

impl FileBits {
    pub fn from_bytes(bytes: &[u8], format: BitsFormat) -> Result<Self> {
        let ascii = |b: &u8| matches!(b, b'0' | b'1') || b.is_ascii_whitespace();
        let as_ascii = match format {
            BitsFormat::Ascii => true,
            BitsFormat::Raw => false,
            BitsFormat::Auto => !bytes.is_empty() && bytes.iter().all(ascii),
        };
        let bits = if as_ascii {
            if let Some(bad) = bytes.iter().find(|b| !ascii(b)) {
                return Err(CliError::usage(format!(
                    "bit file contains byte {bad:#04x}; expected only 0, 1 and whitespace"
                )));
            }
            bytes
                .iter()
                .filter(|b| !b.is_ascii_whitespace())
                .map(|&b| b == b'1')
                .collect()
        } else {
            bytes
                .iter()
                .flat_map(|&b| (0..8).rev().map(move |i| b >> i & 1 == 1))
                .collect()
        };
        Ok(Self { bits, pos: 0 })
    }

    pub fn load(path: &Path, format: BitsFormat) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Self::from_bytes(&bytes, format)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl BitSource for FileBits {
    fn next_bit(&mut self) -> Option<bool> {
        let bit = *self.bits.get(self.pos)?;
        self.pos += 1;
        Some(bit)
    }
}
