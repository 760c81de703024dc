//! Finite distributions, exact `M`-type distributions, and the divergence
//! functionals used throughout the crate.
//!
//! Logarithms are base 2 unless a function says otherwise. Terms with zero
//! mass contribute nothing (`0 log 0 = 0`).

use alloc::string::ToString;
use alloc::vec::Vec;
use core::str::FromStr;

use num_integer::Integer;

use crate::error::{Error, Result};

/// Tolerance on the sum of an input probability vector before renormalization.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Read-only view of a vector of probability masses indexed by symbol.
pub trait Masses {
    fn len(&self) -> usize;
    fn mass(&self, index: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Masses for [f64] {
    fn len(&self) -> usize {
        <[f64]>::len(self)
    }
    fn mass(&self, index: usize) -> f64 {
        self[index]
    }
}

impl Masses for Vec<f64> {
    fn len(&self) -> usize {
        Vec::len(self)
    }
    fn mass(&self, index: usize) -> f64 {
        self[index]
    }
}

impl<const N: usize> Masses for [f64; N] {
    fn len(&self) -> usize {
        N
    }
    fn mass(&self, index: usize) -> f64 {
        self[index]
    }
}

/// A probability mass function over `{0, .., D-1}`.
///
/// Construction checks that the input sums to one within
/// [`NORMALIZATION_TOLERANCE`] and then renormalizes once; the stored vector is
/// treated as exact from then on.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        for (index, &value) in probs.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidProbability { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        let probs = probs.into_iter().map(|p| p / sum).collect();
        Ok(Self { probs })
    }

    pub fn uniform(alphabet_size: usize) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::EmptyDistribution);
        }
        Self::new(alloc::vec![1.0 / alphabet_size as f64; alphabet_size])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
    }

    pub fn has_full_support(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    /// Smallest probability over the support.
    pub fn mu(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn entropy(&self) -> f64 {
        entropy(self)
    }
}

impl Masses for Pmf {
    fn len(&self) -> usize {
        self.probs.len()
    }
    fn mass(&self, index: usize) -> f64 {
        self.probs[index]
    }
}

/// Parses the comma-separated decimal format, e.g. `"0.211,0.789"`.
impl FromStr for Pmf {
    type Err = ParsePmfError;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        let probs = s
            .split(',')
            .map(|field| {
                let field = field.trim();
                field
                    .parse::<f64>()
                    .map_err(|_| ParsePmfError::BadNumber(field.to_string()))
            })
            .collect::<core::result::Result<Vec<_>, _>>()?;
        Pmf::new(probs).map_err(ParsePmfError::Invalid)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParsePmfError {
    #[error("not a decimal number: {0:?}")]
    BadNumber(alloc::string::String),
    #[error(transparent)]
    Invalid(Error),
}

/// An exact `M`-type distribution: integer counts over a common denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedPmf {
    denominator: u64,
    counts: Vec<u64>,
}

impl TypedPmf {
    pub fn new(counts: Vec<u64>, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::ZeroDenominator);
        }
        if counts.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let sum: u128 = counts.iter().map(|&c| c as u128).sum();
        if sum != denominator as u128 {
            return Err(Error::CountSumMismatch { sum, denominator });
        }
        Ok(Self {
            denominator,
            counts,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.counts[index] as f64 / self.denominator as f64
    }

    pub fn probs(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|i| self.prob(i)).collect()
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Smallest `M` for which this distribution is `M`-type.
    pub fn min_type_order(&self) -> u64 {
        min_type_order(self)
    }

    /// The same distribution over its minimal denominator.
    pub fn reduced(&self) -> TypedPmf {
        let g = self.counts.iter().fold(self.denominator, |g, &c| g.gcd(&c));
        TypedPmf {
            denominator: self.denominator / g,
            counts: self.counts.iter().map(|&c| c / g).collect(),
        }
    }

    /// Entropy computed as `log2 M - (1/M) sum c log2 c` over the reduced
    /// denominator, so the result never exceeds `log2 M_X`.
    pub fn entropy(&self) -> f64 {
        let reduced = self.reduced();
        let m = reduced.denominator as f64;
        let weighted: f64 = reduced
            .counts
            .iter()
            .filter(|&&c| c > 1)
            .map(|&c| c as f64 * libm::log2(c as f64))
            .sum();
        let h = libm::log2(m) - weighted / m;
        if h < 0.0 {
            0.0
        } else {
            h
        }
    }
}

impl Masses for TypedPmf {
    fn len(&self) -> usize {
        self.counts.len()
    }
    fn mass(&self, index: usize) -> f64 {
        self.prob(index)
    }
}

/// Shannon entropy in bits.
pub fn entropy<P: Masses + ?Sized>(p: &P) -> f64 {
    let mut h = 0.0;
    for i in 0..p.len() {
        let x = p.mass(i);
        if x > 0.0 {
            h -= x * libm::log2(x);
        }
    }
    if h < 0.0 {
        0.0
    } else {
        h
    }
}

fn check_same_len<P: Masses + ?Sized, Q: Masses + ?Sized>(p: &P, q: &Q) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(())
}

/// `D(p || q)` in bits. Returns `f64::INFINITY` when `p` puts mass where `q`
/// has none.
pub fn kl_divergence<P: Masses + ?Sized, Q: Masses + ?Sized>(p: &P, q: &Q) -> Result<f64> {
    check_same_len(p, q)?;
    let mut d = 0.0;
    for i in 0..p.len() {
        let pi = p.mass(i);
        if pi > 0.0 {
            let qi = q.mass(i);
            if qi <= 0.0 {
                return Ok(f64::INFINITY);
            }
            d += pi * libm::log2(pi / qi);
        }
    }
    Ok(d)
}

/// `sum |p(a) - q(a)|`, in `[0, 2]`.
pub fn variational_distance<P: Masses + ?Sized, Q: Masses + ?Sized>(p: &P, q: &Q) -> Result<f64> {
    check_same_len(p, q)?;
    Ok((0..p.len()).map(|i| (p.mass(i) - q.mass(i)).abs()).sum())
}

/// Upper bound on `D(p || q)` in nats from the variational distance:
/// `sqrt(d) * (1 + d_max)` with `d_max` the largest natural log-ratio
/// `ln(p(a)/q(a))` over the support of `p`, clamped below at zero.
///
/// Requires `supp p` to lie inside `supp q` and `d < 1`.
pub fn kl_tv_bound<P: Masses + ?Sized, Q: Masses + ?Sized>(p: &P, q: &Q) -> Result<f64> {
    check_same_len(p, q)?;
    let mut d_max = 0.0f64;
    for i in 0..p.len() {
        let pi = p.mass(i);
        if pi > 0.0 {
            let qi = q.mass(i);
            if qi <= 0.0 {
                return Err(Error::UnboundedRatio { index: i });
            }
            d_max = d_max.max(libm::log(pi / qi));
        }
    }
    let tv = variational_distance(p, q)?;
    if tv >= 1.0 {
        return Err(Error::VariationalDistanceTooLarge { tv });
    }
    Ok(libm::sqrt(tv) * (1.0 + d_max))
}

/// Least `M_X` such that every `counts[a] / M` is a multiple of `1 / M_X`.
pub fn min_type_order(p: &TypedPmf) -> u64 {
    let g = p.counts.iter().fold(p.denominator, |g, &c| g.gcd(&c));
    p.denominator / g
}
