//! Rate and divergence figures of a resolution code, and the finite-length
//! bounds they satisfy.
//!
//! With `P_X = counts / 2^m` the generated leaf distribution and `l(x)` the
//! leaf length:
//!
//! | quantity | definition |
//! |---|---|
//! | resolution rate `R` | `m / E[l(X)]` |
//! | entropy rate | `H(P_X) / E[l(X)]` |
//! | Han-Verdu rate | `log2(M_X) / E[l(X)]`, `M_X` the minimal type order of `P_X` |
//! | divergence | `D(P_X || P_Y^X)` |
//! | divergence bound | `2^-q log2(e) / mu` |
//! | entropy lower bound | `n - log2(1/mu + 2^-q)` |
//!
//! Expectations are taken under `P_X`, the distribution the encoder actually
//! generates.

use alloc::vec::Vec;
use core::f64::consts::LOG2_E;

use crate::encoder::{build_code, ResolutionCode, Scheme};
use crate::error::Result;
use crate::probdist::{kl_divergence, Pmf};
use crate::tunstall::round_down_size;

/// Relative slack used by [`bound_suite`].
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub scheme: Scheme,
    pub m: u32,
    /// Codebook size `N`.
    pub size: usize,
    pub n_bits: f64,
    pub q: f64,
    /// Input bits per expected output symbol.
    pub rate: f64,
    pub entropy_rate: f64,
    pub hv_rate: f64,
    /// `D(P_X || P_Y^X)` in bits.
    pub kl: f64,
    /// `kl / exp_len`, bits per symbol.
    pub kl_normalized: f64,
    /// `2^-q log2(e) / mu`; guaranteed only for Tunstall codebooks.
    pub kl_bound: f64,
    /// `n_bits - log2(1/mu + 2^-q)`; guaranteed only for Tunstall codebooks.
    pub entropy_lower: f64,
    /// `H(P_X)` in bits.
    pub generated_entropy: f64,
    /// `E[l(X)]` under the generated distribution.
    pub exp_len: f64,
    /// `E[l(X)]` under the target leaf distribution.
    pub target_exp_len: f64,
    pub target_entropy: f64,
    pub mu: f64,
    /// Minimal type order `M_X` of the generated distribution.
    pub min_type_order: u64,
    /// Largest generated leaf probability.
    pub max_generated_prob: f64,
}

pub fn rate_report(code: &ResolutionCode, p: &Pmf) -> RateReport {
    let counts = code.counts();
    let total = counts.denominator() as f64;
    let exp_len = code
        .codebook()
        .lengths()
        .zip(counts.counts())
        .map(|(len, &c)| len as f64 * c as f64)
        .sum::<f64>()
        / total;
    let generated_entropy = counts.entropy();
    let min_type_order = counts.min_type_order();
    let kl = kl_divergence(counts, code.target().leaf_probs())
        .expect("counts and target share the codebook");
    let mu = p.mu();
    let q = code.q();
    let excess = libm::exp2(-q);
    RateReport {
        scheme: code.scheme(),
        m: code.m(),
        size: code.size(),
        n_bits: code.n_bits(),
        q,
        rate: code.m() as f64 / exp_len,
        entropy_rate: generated_entropy / exp_len,
        hv_rate: libm::log2(min_type_order as f64) / exp_len,
        kl,
        kl_normalized: kl / exp_len,
        kl_bound: excess * LOG2_E / mu,
        entropy_lower: code.n_bits() - libm::log2(1.0 / mu + excess),
        generated_entropy,
        exp_len,
        target_exp_len: code.target().expected_len(),
        target_entropy: p.entropy(),
        mu,
        min_type_order,
        max_generated_prob: counts.max_count() as f64 / total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// The bound relies on Tunstall balance and the code is block-to-block.
    NotApplicable,
}

/// One inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub outcome: Outcome,
}

impl BoundCheck {
    fn new(name: &'static str, lhs: f64, rhs: f64, applicable: bool) -> Self {
        let outcome = if !applicable {
            Outcome::NotApplicable
        } else if holds(lhs, rhs) {
            Outcome::Pass
        } else {
            Outcome::Fail
        };
        Self {
            name,
            lhs,
            rhs,
            outcome,
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome != Outcome::Fail
    }
}

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + BOUND_SLACK * lhs.abs().max(rhs.abs())
}

/// Evaluates the finite-length inequalities on a code. Bounds that depend
/// on the Tunstall balance are marked [`Outcome::NotApplicable`] for
/// block-to-block codes.
pub fn bound_suite(code: &ResolutionCode, p: &Pmf) -> Vec<BoundCheck> {
    let r = rate_report(code, p);
    let f2v = code.scheme() == Scheme::F2v;
    let max_prob_bound = 1.0 / (r.size as f64 * r.mu) + libm::exp2(-(r.m as f64));
    alloc::vec![
        BoundCheck::new("kl <= 2^-q log2(e) / mu", r.kl, r.kl_bound, f2v),
        BoundCheck::new(
            "n - log2(1/mu + 2^-q) <= H(P_X)",
            r.entropy_lower,
            r.generated_entropy,
            f2v
        ),
        BoundCheck::new("entropy_rate <= rate", r.entropy_rate, r.rate, true),
        BoundCheck::new("hv_rate <= rate", r.hv_rate, r.rate, true),
        BoundCheck::new("entropy_rate <= hv_rate", r.entropy_rate, r.hv_rate, true),
        BoundCheck::new(
            "max P_X <= 1/(N mu) + 2^-m",
            r.max_generated_prob,
            max_prob_bound,
            f2v
        ),
        BoundCheck::new("kl / E[l] <= kl", r.kl_normalized, r.kl, true),
    ]
}

/// How the codebook grows with the input length in a convergence sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthPolicy {
    /// `n = m - ceil(sqrt(m))`, so `q -> inf` while `q / n -> 0`.
    SqrtGap,
    /// `n = m - gap`.
    ConstantGap(u32),
}

impl GrowthPolicy {
    /// Codebook size `2^n` for input length `m`, rounded down to a size the
    /// Tunstall construction can reach for alphabet size `d`.
    pub fn size(self, m: u32, d: usize) -> u64 {
        let gap = match self {
            GrowthPolicy::SqrtGap => ceil_sqrt(m),
            GrowthPolicy::ConstantGap(gap) => gap,
        };
        let n = m.saturating_sub(gap).min(63);
        let raw = (1u64 << n).max(d as u64);
        round_down_size(d, raw).unwrap_or(d as u64)
    }
}

fn ceil_sqrt(m: u32) -> u32 {
    let mut s = 0u32;
    while s * s < m {
        s += 1;
    }
    s
}

/// Rate reports of f2v codes for each input length in `ms`.
pub fn convergence_probe(p: &Pmf, ms: &[u32], policy: GrowthPolicy) -> Result<Vec<RateReport>> {
    let d = p.alphabet_size();
    convergence_probe_with(p, ms, |m| policy.size(m, d))
}

pub fn convergence_probe_with<F: Fn(u32) -> u64>(
    p: &Pmf,
    ms: &[u32],
    size_for: F,
) -> Result<Vec<RateReport>> {
    ms.iter()
        .map(|&m| {
            let code = build_code(p, size_for(m), m)?;
            Ok(rate_report(&code, p))
        })
        .collect()
}
