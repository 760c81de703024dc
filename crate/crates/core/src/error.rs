use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

pub type Result<T> = core::result::Result<T, Error>;

/// Exact rational amount by which a Kraft sum falls short of one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KraftDeficit {
    pub numerator: BigUint,
    pub denominator: BigUint,
}

impl fmt::Display for KraftDeficit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("probability at index {index} is not a finite non-negative number: {value}")]
    InvalidProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1 within 1e-9")]
    NotNormalized { sum: f64 },
    #[error("distribution has no symbols")]
    EmptyDistribution,
    #[error("distribution has no positive mass")]
    DegenerateTarget,
    #[error("type denominator must be at least 1")]
    ZeroDenominator,
    #[error("counts sum to {sum}, expected denominator {denominator}")]
    CountSumMismatch { sum: u128, denominator: u64 },
    #[error("index sets differ: {left} vs {right} symbols")]
    DimensionMismatch { left: usize, right: usize },
    #[error("symbol {index} has positive mass in p but zero mass in q; log-ratio is unbounded")]
    UnboundedRatio { index: usize },
    #[error("variational distance {tv} is not below 1")]
    VariationalDistanceTooLarge { tv: f64 },
    #[error("alphabet size {d} is not supported (need 2..=256)")]
    InvalidAlphabet { d: usize },
    #[error("codebook is empty")]
    EmptyCodebook,
    #[error("leaf {index} is the empty path")]
    EmptyPath { index: usize },
    #[error("symbol {symbol} out of range for alphabet size {d}")]
    SymbolOutOfRange { symbol: u8, d: usize },
    #[error("path {prefix:?} is a prefix of path {path:?}")]
    PrefixViolation { prefix: Vec<u8>, path: Vec<u8> },
    #[error("duplicate leaf {path:?}")]
    DuplicateLeaf { path: Vec<u8> },
    #[error("codebook is incomplete: Kraft sum falls short of 1 by {deficit}")]
    Incomplete { deficit: KraftDeficit },
    #[error("path length {len} exceeds the cap of {cap}")]
    PathTooLong { len: usize, cap: usize },
    #[error("codebook alphabet has {code} symbols, distribution has {dist}")]
    AlphabetMismatch { code: usize, dist: usize },
    #[error("symbol {symbol} has zero probability; remove it from the alphabet")]
    ZeroProbabilitySymbol { symbol: usize },
    #[error("codebook size {size} exceeds the cap of {cap}")]
    SizeCapExceeded { size: u128, cap: u64 },
    #[error("codebook size {size} is not of the form {d} + k*({d}-1)")]
    InvalidTunstallSize { size: u64, d: usize },
    #[error("brute-force instance too large: {compositions} compositions over {support} symbols")]
    InstanceTooLarge { compositions: u128, support: usize },
    #[error("input length m = {m} is outside 1..={max}")]
    InputLengthOutOfRange { m: u32, max: u32 },
    #[error("input word {word} does not fit in {m} bits")]
    WordOutOfRange { word: u64, m: u32 },
}
