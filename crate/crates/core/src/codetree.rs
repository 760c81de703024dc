//! Complete prefix-free D-ary codebooks and the leaf distributions a
//! branching source induces on them.

use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, KraftDeficit, Result};
use crate::probdist::Pmf;

/// Default cap on the length of a validated leaf path.
pub const DEFAULT_MAX_DEPTH: usize = 64;

/// Default cap on the number of leaves of a product codebook.
pub const DEFAULT_PRODUCT_CAP: u64 = 1 << 20;

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// A complete prefix-free codebook. Leaves are kept in lexicographic order of
/// their paths; leaf indices everywhere else in the crate refer to this order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codebook {
    d: usize,
    leaves: Vec<Vec<u8>>,
}

impl Codebook {
    /// Caller guarantees the leaves are sorted, prefix-free and complete.
    pub(crate) fn from_sorted_unchecked(d: usize, leaves: Vec<Vec<u8>>) -> Self {
        debug_assert!(leaves.windows(2).all(|w| w[0] < w[1]));
        Self { d, leaves }
    }

    pub fn alphabet_size(&self) -> usize {
        self.d
    }

    pub fn leaves(&self) -> &[Vec<u8>] {
        &self.leaves
    }

    pub fn leaf(&self, index: usize) -> &[u8] {
        &self.leaves[index]
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.leaves.iter().map(Vec::len)
    }

    pub fn max_len(&self) -> usize {
        self.lengths().max().unwrap_or(0)
    }

    /// Index of `path` in canonical order, if it is a leaf.
    pub fn index_of(&self, path: &[u8]) -> Option<usize> {
        self.leaves
            .binary_search_by(|leaf| leaf.as_slice().cmp(path))
            .ok()
    }
}

/// Target probabilities of the leaves of a codebook under a branching source.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafDistribution {
    codebook: Codebook,
    leaf_probs: Vec<f64>,
    expected_len: f64,
}

impl LeafDistribution {
    pub(crate) fn from_parts(codebook: Codebook, leaf_probs: Vec<f64>) -> Self {
        let expected_len = codebook
            .lengths()
            .zip(&leaf_probs)
            .map(|(len, p)| len as f64 * p)
            .sum();
        Self {
            codebook,
            leaf_probs,
            expected_len,
        }
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn leaf_probs(&self) -> &[f64] {
        &self.leaf_probs
    }

    /// Expected leaf length in symbols under the target.
    pub fn expected_len(&self) -> f64 {
        self.expected_len
    }

    pub fn min_prob(&self) -> f64 {
        self.leaf_probs
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_prob(&self) -> f64 {
        self.leaf_probs.iter().copied().fold(0.0, f64::max)
    }
}

/// Validates a leaf set with the default depth cap. See
/// [`validate_complete_with_cap`].
pub fn validate_complete(leaves: Vec<Vec<u8>>, d: usize) -> Result<Codebook> {
    validate_complete_with_cap(leaves, d, DEFAULT_MAX_DEPTH)
}

/// Sorts `leaves` into canonical order and checks that they form a complete
/// prefix-free D-ary codebook. Completeness is checked exactly: the Kraft sum
/// is accumulated over the common denominator `D^l_max` in big integers.
pub fn validate_complete_with_cap(
    mut leaves: Vec<Vec<u8>>,
    d: usize,
    max_depth: usize,
) -> Result<Codebook> {
    if !(2..=256).contains(&d) {
        return Err(Error::InvalidAlphabet { d });
    }
    if leaves.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    for (index, path) in leaves.iter().enumerate() {
        if path.is_empty() {
            return Err(Error::EmptyPath { index });
        }
        if path.len() > max_depth {
            return Err(Error::PathTooLong {
                len: path.len(),
                cap: max_depth,
            });
        }
        if let Some(&symbol) = path.iter().find(|&&s| s as usize >= d) {
            return Err(Error::SymbolOutOfRange { symbol, d });
        }
    }
    leaves.sort_unstable();
    // In sorted order a path that prefixes any other path prefixes its successor.
    for w in leaves.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateLeaf { path: w[0].clone() });
        }
        if w[1].starts_with(&w[0]) {
            return Err(Error::PrefixViolation {
                prefix: w[0].clone(),
                path: w[1].clone(),
            });
        }
    }

    let max_len = leaves.iter().map(Vec::len).max().unwrap_or(0);
    let mut per_len = alloc::vec![0u64; max_len + 1];
    for path in &leaves {
        per_len[path.len()] += 1;
    }
    // Horner evaluation of sum_l per_len[l] * D^(max_len - l).
    let base = BigUint::from(d);
    let mut kraft = BigUint::zero();
    for &count in &per_len[1..] {
        kraft = kraft * &base + BigUint::from(count);
    }
    let total = num_traits::pow(base, max_len);
    if kraft != total {
        let numerator = &total - &kraft;
        let g = numerator.gcd(&total);
        return Err(Error::Incomplete {
            deficit: KraftDeficit {
                numerator: numerator / &g,
                denominator: total / g,
            },
        });
    }
    Ok(Codebook { d, leaves })
}

/// Product probabilities `prod_i p(x_i)` of every leaf, plus the expected length.
pub fn leaf_distribution(p: &Pmf, codebook: &Codebook) -> Result<LeafDistribution> {
    check_target(p, codebook.d)?;
    let probs = p.probs();
    let leaf_probs = codebook
        .leaves
        .iter()
        .map(|path| path.iter().fold(1.0, |acc, &s| acc * probs[s as usize]))
        .collect();
    Ok(LeafDistribution::from_parts(codebook.clone(), leaf_probs))
}

pub(crate) fn check_target(p: &Pmf, d: usize) -> Result<()> {
    if p.alphabet_size() != d {
        return Err(Error::AlphabetMismatch {
            code: d,
            dist: p.alphabet_size(),
        });
    }
    if let Some(symbol) = p.probs().iter().position(|&x| x <= 0.0) {
        return Err(Error::ZeroProbabilitySymbol { symbol });
    }
    Ok(())
}

/// All `D^n` paths of length `n` in lexicographic order, with the default cap.
pub fn product_codebook(d: usize, n: usize) -> Result<Codebook> {
    product_codebook_with_cap(d, n, DEFAULT_PRODUCT_CAP)
}

pub fn product_codebook_with_cap(d: usize, n: usize, cap: u64) -> Result<Codebook> {
    if !(2..=256).contains(&d) {
        return Err(Error::InvalidAlphabet { d });
    }
    if n == 0 {
        return Err(Error::EmptyPath { index: 0 });
    }
    let size = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if n > u32::MAX as usize || size > cap as u128 {
        return Err(Error::SizeCapExceeded { size, cap });
    }
    let size = size as usize;
    let mut leaves = Vec::with_capacity(size);
    let mut path = alloc::vec![0u8; n];
    for _ in 0..size {
        leaves.push(path.clone());
        // Increment as a base-D counter, most significant symbol first.
        for pos in (0..n).rev() {
            if (path[pos] as usize) + 1 < d {
                path[pos] += 1;
                break;
            }
            path[pos] = 0;
        }
    }
    Ok(Codebook::from_sorted_unchecked(d, leaves))
}

/// Renders a path as digits `0-9a-z`. Panics for symbols of 36 and above.
pub fn format_path(path: &[u8]) -> String {
    path.iter().map(|&s| DIGITS[s as usize] as char).collect()
}

/// Parses a digit string written by [`format_path`].
pub fn parse_path(s: &str) -> Option<Vec<u8>> {
    s.bytes()
        .map(|b| match b {
            b'0'..=b'9' => Some(b - b'0'),
            b'a'..=b'z' => Some(b - b'a' + 10),
            _ => None,
        })
        .collect()
}
