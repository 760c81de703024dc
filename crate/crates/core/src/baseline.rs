//! Optimal block-to-block baseline: `m` input bits mapped onto the product
//! codebook `Y^n`, with the generated distribution chosen as the KL-optimal
//! `2^m`-type approximation of `P_Y^n`.

use crate::codetree::{leaf_distribution, product_codebook_with_cap, DEFAULT_PRODUCT_CAP};
use crate::encoder::{ResolutionCode, Scheme};
use crate::error::Result;
use crate::probdist::Pmf;

pub fn build_block_code(p: &Pmf, n: usize, m: u32) -> Result<ResolutionCode> {
    build_block_code_with_cap(p, n, m, DEFAULT_PRODUCT_CAP)
}

pub fn build_block_code_with_cap(p: &Pmf, n: usize, m: u32, cap: u64) -> Result<ResolutionCode> {
    let d = p.alphabet_size();
    let codebook = product_codebook_with_cap(d, n, cap)?;
    let target = leaf_distribution(p, &codebook)?;
    let n_bits = n as f64 * libm::log2(d as f64);
    ResolutionCode::from_target(Scheme::B2b, target, m, n_bits)
}
