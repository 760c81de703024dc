//! Tunstall codebooks: grow a complete tree by repeatedly splitting the most
//! probable leaf. The resulting leaf distribution is nearly uniform; the
//! largest and smallest leaf probabilities differ by at most a factor
//! `1 / mu` where `mu` is the smallest symbol probability.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::codetree::{check_target, Codebook, LeafDistribution};
use crate::error::{Error, Result};
use crate::probdist::Pmf;

/// Relative slack used by [`check_balance`].
pub const BALANCE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Leaf {
    prob: f64,
    path: Vec<u8>,
    composition: Vec<u32>,
}

// Max-heap order: larger probability first, then lexicographically smaller path.
impl Ord for Leaf {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob
            .total_cmp(&other.prob)
            .then_with(|| other.path.cmp(&self.path))
    }
}

impl PartialOrd for Leaf {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Leaf {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Leaf {}

/// Whether a tree with `size` leaves can be grown from the root by `D`-way
/// splits, i.e. `size = D + k (D - 1)` for some `k >= 0`.
pub fn is_valid_size(d: usize, size: u64) -> bool {
    let d = d as u64;
    d >= 2 && size >= d && (size - d).is_multiple_of(d - 1)
}

/// Largest valid size not exceeding `size`.
pub fn round_down_size(d: usize, size: u64) -> Option<u64> {
    let d64 = d as u64;
    if d64 < 2 || size < d64 {
        return None;
    }
    Some(size - (size - d64) % (d64 - 1))
}

/// Incremental Tunstall construction. Each call to [`split`](Self::split)
/// replaces the most probable leaf by its `D` children, so every intermediate
/// state is itself the Tunstall tree of that size.
#[derive(Debug, Clone)]
pub struct TunstallBuilder {
    probs: Vec<f64>,
    heap: BinaryHeap<Leaf>,
    min_prob: f64,
}

impl TunstallBuilder {
    /// Starts from the root split into its `D` children.
    pub fn new(p: &Pmf) -> Result<Self> {
        let d = p.alphabet_size();
        if !(2..=256).contains(&d) {
            return Err(Error::InvalidAlphabet { d });
        }
        check_target(p, d)?;
        let mut builder = Self {
            probs: p.probs().to_vec(),
            heap: BinaryHeap::new(),
            min_prob: f64::INFINITY,
        };
        builder.push_children(Vec::new(), alloc::vec![0; d]);
        Ok(builder)
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.heap.len()
    }

    pub fn max_prob(&self) -> f64 {
        self.heap.peek().map_or(0.0, |leaf| leaf.prob)
    }

    pub fn min_prob(&self) -> f64 {
        self.min_prob
    }

    /// Splits the most probable leaf (ties go to the lexicographically
    /// smallest path) and returns the probability of the split leaf.
    pub fn split(&mut self) -> f64 {
        let leaf = self.heap.pop().expect("tree always has leaves");
        self.push_children(leaf.path, leaf.composition);
        leaf.prob
    }

    fn push_children(&mut self, path: Vec<u8>, composition: Vec<u32>) {
        for symbol in 0..self.probs.len() {
            let mut child_path = Vec::with_capacity(path.len() + 1);
            child_path.extend_from_slice(&path);
            child_path.push(symbol as u8);
            let mut child_comp = composition.clone();
            child_comp[symbol] += 1;
            let prob = self.composition_prob(&child_comp);
            self.min_prob = self.min_prob.min(prob);
            self.heap.push(Leaf {
                prob,
                path: child_path,
                composition: child_comp,
            });
        }
    }

    // A leaf's probability depends only on how often each symbol occurs on
    // its path; computing it from the composition in a fixed order makes
    // equiprobable leaves compare exactly equal.
    fn composition_prob(&self, composition: &[u32]) -> f64 {
        composition
            .iter()
            .zip(&self.probs)
            .filter(|(&n, _)| n > 0)
            .fold(1.0, |acc, (&n, &p)| acc * libm::pow(p, n as f64))
    }

    /// Canonical codebook and leaf probabilities of the current tree.
    pub fn finish(self) -> LeafDistribution {
        let d = self.probs.len();
        let mut leaves = self.heap.into_vec();
        leaves.sort_unstable_by(|a, b| a.path.cmp(&b.path));
        debug_assert!(leaves.iter().all(|leaf| {
            let log_prob: f64 = leaf
                .path
                .iter()
                .map(|&s| libm::log(self.probs[s as usize]))
                .sum();
            (libm::exp(log_prob) - leaf.prob).abs() <= 1e-9 * leaf.prob
        }));
        let (paths, probs): (Vec<_>, Vec<_>) = leaves
            .into_iter()
            .map(|leaf| (leaf.path, leaf.prob))
            .unzip();
        LeafDistribution::from_parts(Codebook::from_sorted_unchecked(d, paths), probs)
    }
}

/// Tunstall codebook with exactly `size` leaves for the branching
/// distribution `p`.
pub fn build(p: &Pmf, size: u64) -> Result<LeafDistribution> {
    let d = p.alphabet_size();
    if !is_valid_size(d, size) {
        return Err(Error::InvalidTunstallSize { size, d });
    }
    let mut builder = TunstallBuilder::new(p)?;
    while (builder.leaf_count() as u64) < size {
        builder.split();
    }
    Ok(builder.finish())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceReport {
    /// `max_prob / min_prob`.
    pub ratio: f64,
    pub min_prob: f64,
    pub max_prob: f64,
    pub ok: bool,
}

/// Checks the Tunstall balance bounds for a tree with `N` leaves:
/// `max/min <= 1/mu`, `min >= mu/N` and `max <= 1/(N mu)`.
pub fn check_balance(ld: &LeafDistribution, mu: f64) -> BalanceReport {
    balance(ld.min_prob(), ld.max_prob(), ld.codebook().len() as f64, mu)
}

pub(crate) fn balance(min_prob: f64, max_prob: f64, size: f64, mu: f64) -> BalanceReport {
    let ratio = max_prob / min_prob;
    let ok = ratio <= (1.0 + BALANCE_SLACK) / mu
        && min_prob >= (1.0 - BALANCE_SLACK) * mu / size
        && max_prob <= (1.0 + BALANCE_SLACK) / (size * mu);
    BalanceReport {
        ratio,
        min_prob,
        max_prob,
        ok,
    }
}

impl TunstallBuilder {
    /// Balance check of the current tree without materializing it.
    pub fn balance(&self, mu: f64) -> BalanceReport {
        balance(self.min_prob, self.max_prob(), self.leaf_count() as f64, mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codetree::{leaf_distribution, parse_path, validate_complete_with_cap};
    use alloc::vec;

    fn paths(list: &[&str]) -> Vec<Vec<u8>> {
        list.iter().map(|s| parse_path(s).unwrap()).collect()
    }

    fn assert_probs(ld: &LeafDistribution, want: &[f64]) {
        assert_eq!(ld.leaf_probs().len(), want.len());
        for (a, b) in ld.leaf_probs().iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn skewed_binary_examples() {
        let p = Pmf::new(vec![0.8, 0.2]).unwrap();
        let ld = build(&p, 3).unwrap();
        assert_eq!(ld.codebook().leaves(), paths(&["00", "01", "1"]).as_slice());
        assert_probs(&ld, &[0.64, 0.16, 0.2]);

        let ld = build(&p, 4).unwrap();
        assert_eq!(
            ld.codebook().leaves(),
            paths(&["000", "001", "01", "1"]).as_slice()
        );
        assert_probs(&ld, &[0.512, 0.128, 0.16, 0.2]);
    }

    #[test]
    fn uniform_ties_split_lexicographically() {
        let p = Pmf::uniform(2).unwrap();
        let ld = build(&p, 4).unwrap();
        assert_eq!(
            ld.codebook().leaves(),
            paths(&["00", "01", "10", "11"]).as_slice()
        );
        let ld = build(&p, 3).unwrap();
        assert_eq!(ld.codebook().leaves(), paths(&["00", "01", "1"]).as_slice());
    }

    #[test]
    fn ternary_sizes() {
        assert!(is_valid_size(3, 3));
        assert!(is_valid_size(3, 5));
        assert!(!is_valid_size(3, 4));
        assert!(!is_valid_size(2, 1));
        assert_eq!(round_down_size(3, 4), Some(3));
        assert_eq!(round_down_size(3, 8), Some(7));
        assert_eq!(round_down_size(4, 12), Some(10));
        assert_eq!(round_down_size(2, 3072), Some(3072));
        assert_eq!(round_down_size(3, 2), None);

        let p = Pmf::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert!(matches!(
            build(&p, 4),
            Err(Error::InvalidTunstallSize { size: 4, d: 3 })
        ));
        let ld = build(&p, 5).unwrap();
        assert_eq!(
            ld.codebook().leaves(),
            paths(&["00", "01", "02", "1", "2"]).as_slice()
        );
    }

    #[test]
    fn zero_probability_symbol_rejected() {
        let p = Pmf::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            build(&p, 2),
            Err(Error::ZeroProbabilitySymbol { symbol: 1 })
        ));
    }

    #[test]
    fn balance_examples() {
        let p = Pmf::new(vec![0.8, 0.2]).unwrap();
        let report = check_balance(&build(&p, 3).unwrap(), p.mu());
        assert!(report.ok);
        assert!((report.ratio - 4.0).abs() < 1e-12);
        assert!((report.min_prob - 0.16).abs() < 1e-12);
        assert!((report.max_prob - 0.64).abs() < 1e-12);

        let u = Pmf::uniform(2).unwrap();
        for size in [2, 5, 8, 100] {
            let report = check_balance(&build(&u, size).unwrap(), u.mu());
            assert!(report.ok);
        }
        let u = Pmf::uniform(2).unwrap();
        assert_eq!(check_balance(&build(&u, 64).unwrap(), u.mu()).ratio, 1.0);

        let p = Pmf::new(vec![0.211, 0.789]).unwrap();
        let ld = build(&p, 3072).unwrap();
        let report = check_balance(&ld, p.mu());
        assert!(report.ok);
        assert!(report.ratio <= (1.0 + BALANCE_SLACK) / 0.211);
    }

    #[test]
    fn balance_detects_violation() {
        let p = Pmf::new(vec![0.8, 0.2]).unwrap();
        // A depth-two product tree is not a Tunstall tree for this source.
        let c = crate::codetree::product_codebook(2, 2).unwrap();
        let ld = leaf_distribution(&p, &c).unwrap();
        assert!(!check_balance(&ld, p.mu()).ok);
    }

    #[test]
    fn builder_agrees_with_recomputed_products() {
        let p = Pmf::new(vec![0.211, 0.789]).unwrap();
        let ld = build(&p, 3072).unwrap();
        let c = validate_complete_with_cap(ld.codebook().leaves().to_vec(), 2, 128).unwrap();
        assert_eq!(&c, ld.codebook());
        let again = leaf_distribution(&p, &c).unwrap();
        for (a, b) in ld.leaf_probs().iter().zip(again.leaf_probs()) {
            assert!((a - b).abs() <= 1e-12);
        }
        let sum: f64 = ld.leaf_probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn incremental_balance_matches_materialized() {
        let p = Pmf::new(vec![0.6, 0.25, 0.15]).unwrap();
        let mut builder = TunstallBuilder::new(&p).unwrap();
        for _ in 0..50 {
            builder.split();
            let live = builder.balance(p.mu());
            let done = check_balance(&builder.clone().finish(), p.mu());
            assert_eq!(live, done);
            assert!(live.ok);
        }
    }

    #[test]
    fn rebuild_is_identical() {
        let p = Pmf::new(vec![0.37, 0.63]).unwrap();
        assert_eq!(build(&p, 777).unwrap(), build(&p, 777).unwrap());
    }
}
