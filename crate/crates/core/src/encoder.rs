//! The fixed-to-variable length resolution code.
//!
//! The encoder reads `m` fair bits as an integer `u` in `[0, 2^m)` and emits
//! the leaf `f(u)` of a complete codebook. Leaf `i` owns the contiguous input
//! range `[cum[i], cum[i+1])`, where the range sizes are the counts of the
//! KL-optimal `2^m`-type approximation of the target leaf distribution. The
//! generated leaf distribution is therefore exactly `counts / 2^m`.

use alloc::vec::Vec;

use crate::codetree::{Codebook, LeafDistribution};
use crate::error::{Error, Result};
use crate::mtype;
use crate::probdist::{Pmf, TypedPmf};
use crate::tunstall;

/// Largest supported input length; keeps `2^m` exact in a `u64`.
pub const MAX_INPUT_BITS: u32 = 62;

/// Largest input length for which [`exhaustive_histogram`] enumerates inputs.
pub const EXHAUSTIVE_MAX_BITS: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    /// Tunstall codebook, variable-length output.
    F2v,
    /// Product codebook `Y^n`, block-to-block.
    B2b,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::F2v => "f2v",
            Scheme::B2b => "b2b",
        }
    }
}

/// A deterministic many-to-one map from `m`-bit words onto codebook leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionCode {
    scheme: Scheme,
    m: u32,
    target: LeafDistribution,
    counts: TypedPmf,
    cum: Vec<u64>,
    n_bits: f64,
}

impl ResolutionCode {
    /// Quantizes the target leaf distribution to `2^m`-type and lays out the
    /// input ranges in canonical leaf order.
    pub(crate) fn from_target(
        scheme: Scheme,
        target: LeafDistribution,
        m: u32,
        n_bits: f64,
    ) -> Result<Self> {
        check_input_bits(m)?;
        let counts = mtype::quantize(target.leaf_probs(), 1u64 << m)?;
        let mut cum = Vec::with_capacity(counts.counts().len() + 1);
        let mut acc = 0u64;
        cum.push(0);
        for &c in counts.counts() {
            acc += c;
            cum.push(acc);
        }
        Ok(Self {
            scheme,
            m,
            target,
            counts,
            cum,
            n_bits,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Input length in bits.
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn codebook(&self) -> &Codebook {
        self.target.codebook()
    }

    pub fn target(&self) -> &LeafDistribution {
        &self.target
    }

    /// The generated leaf distribution, `2^m`-type.
    pub fn counts(&self) -> &TypedPmf {
        &self.counts
    }

    /// Range offsets: leaf `i` owns inputs `cum[i]..cum[i+1]`.
    pub fn cum(&self) -> &[u64] {
        &self.cum
    }

    pub fn size(&self) -> usize {
        self.codebook().len()
    }

    /// `log2` of the codebook size (real valued).
    pub fn n_bits(&self) -> f64 {
        self.n_bits
    }

    /// Excess input bits `m - n_bits`.
    pub fn q(&self) -> f64 {
        self.m as f64 - self.n_bits
    }

    /// Leaf index `i` with `cum[i] <= word < cum[i+1]`.
    pub fn encode_index(&self, word: u64) -> Result<usize> {
        if word >> self.m != 0 {
            return Err(Error::WordOutOfRange { word, m: self.m });
        }
        Ok(self.cum[1..].partition_point(|&end| end <= word))
    }

    pub fn encode_word(&self, word: u64) -> Result<&[u8]> {
        Ok(self.codebook().leaf(self.encode_index(word)?))
    }

    /// Distribution of `f(U)` for uniform `U`, read off the range layout.
    pub fn induced_distribution(&self) -> TypedPmf {
        let counts = self.cum.windows(2).map(|w| w[1] - w[0]).collect();
        TypedPmf::new(counts, 1u64 << self.m).expect("ranges partition the input space")
    }
}

fn check_input_bits(m: u32) -> Result<()> {
    if m == 0 || m > MAX_INPUT_BITS {
        return Err(Error::InputLengthOutOfRange {
            m,
            max: MAX_INPUT_BITS,
        });
    }
    Ok(())
}

/// Fixed-to-variable length code: Tunstall codebook of `size` leaves for `p`,
/// driven by `m` input bits.
pub fn build_code(p: &Pmf, size: u64, m: u32) -> Result<ResolutionCode> {
    check_input_bits(m)?;
    let target = tunstall::build(p, size)?;
    ResolutionCode::from_target(Scheme::F2v, target, m, libm::log2(size as f64))
}

/// Histogram of `encode_index` over every one of the `2^m` inputs, or `None`
/// when `m` exceeds [`EXHAUSTIVE_MAX_BITS`].
pub fn exhaustive_histogram(code: &ResolutionCode) -> Option<TypedPmf> {
    if code.m > EXHAUSTIVE_MAX_BITS {
        return None;
    }
    let mut hist = alloc::vec![0u64; code.size()];
    for word in 0..(1u64 << code.m) {
        hist[code.encode_index(word).expect("word in range")] += 1;
    }
    Some(TypedPmf::new(hist, 1u64 << code.m).expect("every input counted once"))
}

/// A source of fair bits.
pub trait BitSource {
    fn next_bit(&mut self) -> Option<bool>;

    /// Reads `bits` bits, most significant first.
    fn read_word(&mut self, bits: u32) -> Option<u64> {
        let mut word = 0u64;
        for _ in 0..bits {
            word = (word << 1) | self.next_bit()? as u64;
        }
        Some(word)
    }
}

impl<B: BitSource + ?Sized> BitSource for &mut B {
    fn next_bit(&mut self) -> Option<bool> {
        (**self).next_bit()
    }
    fn read_word(&mut self, bits: u32) -> Option<u64> {
        (**self).read_word(bits)
    }
}

/// Bits of a byte slice, most significant bit of each byte first.
#[derive(Debug, Clone)]
pub struct SliceBits<'a> {
    bytes: &'a [u8],
    len: usize,
    pos: usize,
}

impl<'a> SliceBits<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self::with_len(bytes, bytes.len() * 8)
    }

    /// Only the first `len` bits of `bytes` are available.
    pub fn with_len(bytes: &'a [u8], len: usize) -> Self {
        Self {
            bytes,
            len: len.min(bytes.len() * 8),
            pos: 0,
        }
    }

    pub fn remaining(&self) -> usize {
        self.len - self.pos
    }
}

impl BitSource for SliceBits<'_> {
    fn next_bit(&mut self) -> Option<bool> {
        if self.pos >= self.len {
            return None;
        }
        let bit = self.bytes[self.pos / 8] >> (7 - self.pos % 8) & 1;
        self.pos += 1;
        Some(bit == 1)
    }
}

/// Running totals of a generated stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamStats {
    pub input_bits: u64,
    pub output_symbols: u64,
    pub codewords: u64,
    /// How often each leaf was emitted, in canonical leaf order.
    pub leaf_counts: Vec<u64>,
}

impl StreamStats {
    fn new(size: usize) -> Self {
        Self {
            input_bits: 0,
            output_symbols: 0,
            codewords: 0,
            leaf_counts: alloc::vec![0; size],
        }
    }

    /// Input bits per output symbol.
    pub fn empirical_rate(&self) -> f64 {
        self.input_bits as f64 / self.output_symbols as f64
    }

    /// Empirical leaf frequencies.
    pub fn leaf_frequencies(&self) -> Vec<f64> {
        let n = self.codewords as f64;
        self.leaf_counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Streams codewords from a bit source, `m` bits per codeword.
#[derive(Debug)]
pub struct Generator<'c, B> {
    code: &'c ResolutionCode,
    bits: B,
    stats: StreamStats,
}

impl<'c, B: BitSource> Generator<'c, B> {
    pub fn new(code: &'c ResolutionCode, bits: B) -> Self {
        Self {
            code,
            bits,
            stats: StreamStats::new(code.size()),
        }
    }

    /// Next codeword, or `None` once fewer than `m` bits remain.
    pub fn next_codeword(&mut self) -> Option<&'c [u8]> {
        let word = self.bits.read_word(self.code.m)?;
        let index = self.code.encode_index(word).expect("m-bit word");
        let leaf = self.code.codebook().leaf(index);
        self.stats.input_bits += self.code.m as u64;
        self.stats.output_symbols += leaf.len() as u64;
        self.stats.codewords += 1;
        self.stats.leaf_counts[index] += 1;
        Some(leaf)
    }

    pub fn stats(&self) -> &StreamStats {
        &self.stats
    }

    pub fn into_stats(self) -> StreamStats {
        self.stats
    }
}

/// A generated symbol sequence with its statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    pub symbols: Vec<u8>,
    pub stats: StreamStats,
}

/// The bit source ran dry; `partial` holds everything emitted before that.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bit source exhausted after {} codewords ({} symbols)", partial.stats.codewords, partial.stats.output_symbols)]
pub struct Exhausted {
    pub partial: Stream,
}

/// Emits `codewords` codewords, consuming exactly `m` bits for each.
pub fn generate_stream<B: BitSource>(
    code: &ResolutionCode,
    bits: B,
    codewords: u64,
) -> core::result::Result<Stream, Exhausted> {
    let mut generator = Generator::new(code, bits);
    let mut symbols = Vec::new();
    for _ in 0..codewords {
        match generator.next_codeword() {
            Some(leaf) => symbols.extend_from_slice(leaf),
            None => {
                return Err(Exhausted {
                    partial: Stream {
                        symbols,
                        stats: generator.into_stats(),
                    },
                })
            }
        }
    }
    Ok(Stream {
        symbols,
        stats: generator.into_stats(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codetree::parse_path;
    use alloc::vec;

    fn running_code() -> ResolutionCode {
        build_code(&Pmf::new(vec![0.8, 0.2]).unwrap(), 3, 3).unwrap()
    }

    #[test]
    fn running_example_layout() {
        let code = running_code();
        assert_eq!(code.counts().counts(), &[5, 1, 2]);
        assert_eq!(code.cum(), &[0, 5, 6, 8]);
        for word in 0..5 {
            assert_eq!(code.encode_word(word).unwrap(), &[0, 0]);
        }
        assert_eq!(code.encode_word(5).unwrap(), &[0, 1]);
        assert_eq!(code.encode_word(6).unwrap(), &[1]);
        assert_eq!(code.encode_word(7).unwrap(), &[1]);
        assert!(matches!(
            code.encode_word(8),
            Err(Error::WordOutOfRange { word: 8, m: 3 })
        ));
        assert_eq!(code.induced_distribution().counts(), &[5, 1, 2]);
        assert_eq!(exhaustive_histogram(&code).unwrap(), *code.counts());
    }

    #[test]
    fn uniform_identity_code() {
        let code = build_code(&Pmf::uniform(2).unwrap(), 2, 1).unwrap();
        assert_eq!(code.counts().counts(), &[1, 1]);
        assert_eq!(code.encode_word(0).unwrap(), &[0]);
        assert_eq!(code.encode_word(1).unwrap(), &[1]);
        assert_eq!(code.q(), 0.0);
    }

    #[test]
    fn size_3072_excess_bits() {
        let code = build_code(&Pmf::new(vec![0.211, 0.789]).unwrap(), 3072, 12).unwrap();
        assert!((code.q() - 0.41504).abs() < 1e-5);
        assert_eq!(code.counts().counts().iter().sum::<u64>(), 4096);
        assert_eq!(exhaustive_histogram(&code).unwrap(), *code.counts());
    }

    #[test]
    fn zero_count_leaves_are_skipped() {
        // Fewer inputs than leaves: some leaves get no range.
        let code = build_code(&Pmf::new(vec![0.7, 0.3]).unwrap(), 16, 2).unwrap();
        assert!(code.counts().counts().contains(&0));
        let hist = exhaustive_histogram(&code).unwrap();
        assert_eq!(hist, *code.counts());
    }

    #[test]
    fn input_length_limits() {
        let p = Pmf::uniform(2).unwrap();
        assert!(matches!(
            build_code(&p, 2, 0),
            Err(Error::InputLengthOutOfRange { m: 0, .. })
        ));
        assert!(matches!(
            build_code(&p, 2, 63),
            Err(Error::InputLengthOutOfRange { m: 63, .. })
        ));
        let code = build_code(&p, 4, 62).unwrap();
        assert_eq!(code.counts().counts(), &[1 << 60; 4]);
        assert_eq!(code.encode_word((1 << 62) - 1).unwrap(), &[1, 1]);
    }

    #[test]
    fn stream_from_bits() {
        let code = running_code();
        // 000 101 -> "00", "01"
        let bytes = [0b0001_0100];
        let stream = generate_stream(&code, SliceBits::with_len(&bytes, 6), 2).unwrap();
        assert_eq!(stream.symbols, vec![0, 0, 0, 1]);
        assert_eq!(stream.stats.input_bits, 6);
        assert_eq!(stream.stats.output_symbols, 4);
        assert_eq!(stream.stats.leaf_counts, vec![1, 1, 0]);
        assert!((stream.stats.empirical_rate() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn exhaustion_keeps_partial_output() {
        let code = running_code();
        let bytes = [0b1110_0000];
        let err = generate_stream(&code, SliceBits::with_len(&bytes, 5), 3).unwrap_err();
        assert_eq!(err.partial.symbols, vec![1]);
        assert_eq!(err.partial.stats.codewords, 1);
    }

    #[test]
    fn slice_bits_msb_first() {
        let mut bits = SliceBits::new(&[0b1010_0001]);
        assert_eq!(bits.read_word(3), Some(0b101));
        assert_eq!(bits.remaining(), 5);
        assert_eq!(bits.read_word(5), Some(0b00001));
        assert_eq!(bits.next_bit(), None);
    }

    #[test]
    fn codebook_order_is_canonical() {
        let code = running_code();
        let leaves: Vec<_> = ["00", "01", "1"]
            .iter()
            .map(|s| parse_path(s).unwrap())
            .collect();
        assert_eq!(code.codebook().leaves(), leaves.as_slice());
    }
}
