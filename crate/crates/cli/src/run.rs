//! Stream generation and empirical validation.

use rescode_core::encoder::{exhaustive_histogram, BitSource, Exhausted, Generator, Stream};
use rescode_core::metrics::rate_report;
use rescode_core::probdist::variational_distance;
use rescode_core::{Pmf, ResolutionCode};

use crate::bits::{FileBits, PrngBits};
use crate::error::{CliError, Result};

/// Where the fair bits come from.
#[derive(Debug, Clone)]
pub enum Source {
    Seed(u64),
    File(FileBits),
}

/// Runs the encoder until at least `min_symbols` symbols are out. Without a
/// target the source is drained (only bit files are finite). Symbols are kept
/// only when `keep` is set.
pub fn drive(
    code: &ResolutionCode,
    source: Source,
    min_symbols: Option<u64>,
    keep: bool,
) -> Result<Stream> {
    match source {
        Source::Seed(seed) => {
            let target =
                min_symbols.ok_or_else(|| CliError::usage("--symbols is required with --seed"))?;
            drive_bits(code, PrngBits::new(seed), Some(target), keep)
        }
        Source::File(bits) => drive_bits(code, bits, min_symbols, keep),
    }
}

fn drive_bits<B: BitSource>(
    code: &ResolutionCode,
    bits: B,
    min_symbols: Option<u64>,
    keep: bool,
) -> Result<Stream> {
    let mut generator = Generator::new(code, bits);
    let mut symbols = Vec::new();
    while min_symbols.is_none_or(|t| generator.stats().output_symbols < t) {
        match generator.next_codeword() {
            Some(leaf) if keep => symbols.extend_from_slice(leaf),
            Some(_) => {}
            None if min_symbols.is_none() => break,
            None => {
                let partial = Stream {
                    symbols,
                    stats: generator.into_stats(),
                };
                return Err(Box::new(Exhausted { partial }).into());
            }
        }
    }
    Ok(Stream {
        symbols,
        stats: generator.into_stats(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    /// `sum |empirical - counts/2^m|` over codewords.
    pub tv: f64,
    pub threshold: f64,
    pub codewords: u64,
    pub output_symbols: u64,
    pub empirical_rate: f64,
    /// Resolution rate of the code.
    pub rate: f64,
    /// Whether enumerating every input reproduced the counts; `None` above
    /// 16 input bits.
    pub exhaustive: Option<bool>,
}

/// Largest input length for which validation enumerates every input.
pub const EXHAUSTIVE_VALIDATE_BITS: u32 = 16;

impl Validation {
    pub fn passed(&self) -> bool {
        self.tv <= self.threshold && self.exhaustive != Some(false)
    }

    pub fn rate_gap(&self) -> f64 {
        (self.empirical_rate - self.rate).abs() / self.rate
    }
}

pub fn validate(
    code: &ResolutionCode,
    p: &Pmf,
    source: Source,
    min_symbols: Option<u64>,
    threshold: f64,
) -> Result<Validation> {
    let stream = drive(code, source, min_symbols, false)?;
    let stats = stream.stats;
    if stats.codewords == 0 {
        return Err(CliError::usage("no codewords generated"));
    }
    let tv = variational_distance(&stats.leaf_frequencies(), code.counts())?;
    let exhaustive = if code.m() <= EXHAUSTIVE_VALIDATE_BITS {
        exhaustive_histogram(code).map(|h| &h == code.counts())
    } else {
        None
    };
    Ok(Validation {
        tv,
        threshold,
        codewords: stats.codewords,
        output_symbols: stats.output_symbols,
        empirical_rate: stats.empirical_rate(),
        rate: rate_report(code, p).rate,
        exhaustive,
    })
}
