//! KL-optimal `M`-type approximation of a distribution.
//!
//! [`quantize`] finds integer counts `c` summing to `M` that minimize
//! `D(c/M || q)`. The objective separates into convex per-symbol terms
//! `f_a(c) = c ln(c / (M q_a))`, so handing out the `M` units one at a time,
//! each to the symbol with the smallest marginal cost `f_a(c+1) - f_a(c)`, is
//! optimal. Each count is additionally capped at `floor(M q_a) + 1`, so
//! `c_a / M <= q_a + 1/M` always holds; the KL optimum alone can overshoot
//! this by a fraction of a unit. For large `M` the greedy pass is preceded by a warm start that
//! hands out, in one step, every unit whose marginal cost lies below a
//! threshold the greedy pass provably reaches.
//!
//! [`brute_force_quantize`] enumerates all compositions and serves as an
//! independent oracle for small instances.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::error::{Error, Result};
use crate::probdist::{TypedPmf, NORMALIZATION_TOLERANCE};

/// Relative tolerance under which two marginal costs count as tied.
pub const TIE_EPSILON: f64 = 1e-15;

/// Largest number of compositions [`brute_force_quantize`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

/// Largest support [`brute_force_quantize`] accepts.
pub const BRUTE_FORCE_MAX_SUPPORT: usize = 8;

fn validate(q: &[f64], m: u64) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::ZeroDenominator);
    }
    if q.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    for (index, &value) in q.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidProbability { index, value });
        }
    }
    if q.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateTarget);
    }
    let sum: f64 = q.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized { sum });
    }
    Ok(q.iter().map(|&x| x / sum).collect())
}

/// Marginal cost of raising a count from `c` to `c + 1` for a symbol whose
/// target count is `x = M q`, scaled by `M` and offset by `-1`.
///
/// Costs of large counts cluster around 1; subtracting it keeps neighbouring
/// counts distinguishable in `f64` up to `M = 2^62`.
fn marginal_cost(c: u64, x: f64) -> f64 {
    if c == 0 {
        return -libm::log(x) - 1.0;
    }
    // ln((c+1)/x) with the numerator difference formed exactly.
    let whole = libm::floor(x);
    let diff = ((c as i128 + 1) - whole as i128) as f64 - (x - whole);
    let ratio_term = libm::log1p(diff / x);
    // c ln(1 + 1/c) - 1
    let c = c as f64;
    let tail = if c > 1e4 {
        let r = 1.0 / c;
        r * (-0.5 + r * (1.0 / 3.0 - r * 0.25))
    } else {
        c * libm::log1p(1.0 / c) - 1.0
    };
    ratio_term + tail
}

/// Number of units a symbol receives when every unit of marginal cost below
/// `lambda` is handed out, capped at `cap`.
fn units_below(x: f64, lambda: f64, cap: u64) -> u64 {
    if marginal_cost(0, x) >= lambda {
        return 0;
    }
    // Starting guess: root of ln((c+1)/x) + c ln(1 + 1/c) = lambda + 1 by
    // fixed-point iteration; the second term varies slowly in c.
    let mut c = (x * libm::exp(lambda) - 1.0).max(1.0);
    for _ in 0..4 {
        let h = c * libm::log1p(1.0 / c);
        c = (x * libm::exp(lambda + 1.0 - h) - 1.0).max(1.0);
    }
    let guess = if c >= cap as f64 {
        cap
    } else {
        (libm::ceil(c) as u64).clamp(1, cap)
    };
    let mut lo = guess;
    // Galloping search for the first count whose marginal cost reaches lambda.
    let mut step = 1u64;
    while lo > 1 && marginal_cost(lo - 1, x) >= lambda {
        lo = lo.saturating_sub(step).max(1);
        step = step.saturating_mul(2);
    }
    let mut hi = lo;
    step = 1;
    while hi < cap && marginal_cost(hi, x) < lambda {
        lo = hi;
        hi = hi.saturating_add(step).min(cap);
        step = step.saturating_mul(2);
    }
    if hi == cap && marginal_cost(hi - 1, x) < lambda {
        return cap;
    }
    // First count in lo..=hi whose cost reaches lambda.
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if marginal_cost(mid, x) < lambda {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Largest count each symbol may receive: `floor(M q_a) + 1`, bounded by
/// `M`. `sizes[g]` symbols share target `targets[g]`. Rounding in the targets
/// can never leave the caps short of `M`.
fn unit_caps(targets: &[f64], sizes: &[u64], m: u64) -> Vec<u64> {
    let mut caps: Vec<u64> = targets
        .iter()
        .map(|&x| {
            if x >= m as f64 {
                m
            } else {
                (libm::floor(x) as u64 + 1).min(m)
            }
        })
        .collect();
    let total: u128 = caps
        .iter()
        .zip(sizes)
        .map(|(&c, &s)| c as u128 * s as u128)
        .sum();
    if total < m as u128 {
        let top = (0..targets.len())
            .max_by(|&a, &b| targets[a].total_cmp(&targets[b]))
            .expect("support is non-empty");
        let short = (m as u128 - total).div_ceil(sizes[top] as u128);
        caps[top] = (caps[top] as u128 + short).min(m as u128) as u64;
    }
    caps
}

fn total_units(targets: &[f64], sizes: &[u64], caps: &[u64], lambda: f64) -> u128 {
    targets
        .iter()
        .zip(sizes)
        .zip(caps)
        .map(|((&x, &size), &cap)| units_below(x, lambda, cap) as u128 * size as u128)
        .sum()
}

/// Per-target counts that all lie below the greedy solution. `sizes[g]`
/// symbols share target `targets[g]`.
fn warm_start(targets: &[f64], sizes: &[u64], caps: &[u64], m: u64) -> Vec<u64> {
    let k: u128 = sizes.iter().map(|&s| s as u128).sum();
    if (m as u128) <= 4 * k {
        return alloc::vec![0; targets.len()];
    }
    let total = |lambda| total_units(targets, sizes, caps, lambda);
    let mut lo = targets
        .iter()
        .map(|&x| marginal_cost(0, x))
        .fold(f64::INFINITY, f64::min);
    let mut width = 1.0;
    let mut hi = lo + width;
    while total(hi) < m as u128 {
        lo = hi;
        width *= 2.0;
        hi = lo + width;
    }
    for _ in 0..200 {
        if m as u128 - total(lo) <= k {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) <= m as u128 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Back off so no unit near a tie with the final threshold is pre-assigned.
    let lambda = lo - 4.0 * TIE_EPSILON * lo.abs() - f64::MIN_POSITIVE;
    targets
        .iter()
        .zip(caps)
        .map(|(&x, &cap)| units_below(x, lambda, cap))
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    index: usize,
    group: usize,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_EPSILON * a.abs().max(b.abs())
}

/// Symbols with one shared target value. Their cost curves coincide, so the
/// greedy pass fills them in index order: the first `filled` members hold
/// `base + 1` units and the rest hold `base`.
struct Group {
    x: f64,
    cap: u64,
    members: Vec<usize>,
    base: u64,
    filled: usize,
}

impl Group {
    fn next(&self, group: usize) -> Option<Candidate> {
        (self.base < self.cap).then(|| Candidate {
            cost: marginal_cost(self.base, self.x),
            index: self.members[self.filled],
            group,
        })
    }

    fn give(&mut self) {
        self.filled += 1;
        if self.filled == self.members.len() {
            self.filled = 0;
            self.base += 1;
        }
    }
}

/// KL-optimal `M`-type approximation of `q` subject to
/// `c_a <= floor(M q_a) + 1`.
///
/// Symbols with `q[a] = 0` receive no units. Ties between marginal costs
/// (within [`TIE_EPSILON`] relative) go to the lower index.
pub fn quantize(q: &[f64], m: u64) -> Result<TypedPmf> {
    let q = validate(q, m)?;
    let mut support: Vec<usize> = (0..q.len()).filter(|&a| q[a] > 0.0).collect();
    support.sort_by(|&a, &b| q[a].total_cmp(&q[b]).then(a.cmp(&b)));
    let mut groups: Vec<Group> = Vec::new();
    for a in support {
        match groups.last_mut() {
            Some(g) if g.x == m as f64 * q[a] => g.members.push(a),
            _ => groups.push(Group {
                x: m as f64 * q[a],
                cap: 0,
                members: alloc::vec![a],
                base: 0,
                filled: 0,
            }),
        }
    }
    let targets: Vec<f64> = groups.iter().map(|g| g.x).collect();
    let sizes: Vec<u64> = groups.iter().map(|g| g.members.len() as u64).collect();
    let caps = unit_caps(&targets, &sizes, m);
    let bases = warm_start(&targets, &sizes, &caps, m);
    let mut assigned = 0u64;
    for ((g, cap), base) in groups.iter_mut().zip(caps).zip(bases) {
        g.cap = cap;
        g.base = base;
        assigned += base * g.members.len() as u64;
    }
    debug_assert!(assigned <= m);

    let mut heap: BinaryHeap<Reverse<Candidate>> = groups
        .iter()
        .enumerate()
        .filter_map(|(i, g)| g.next(i).map(Reverse))
        .collect();
    let mut cluster = Vec::new();
    for _ in assigned..m {
        let Reverse(first) = heap.pop().expect("caps cover M");
        let mut best = first;
        while let Some(&Reverse(next)) = heap.peek() {
            if !tied(first.cost, next.cost) {
                break;
            }
            heap.pop();
            if next.index < best.index {
                cluster.push(best);
                best = next;
            } else {
                cluster.push(next);
            }
        }
        heap.extend(cluster.drain(..).map(Reverse));
        let group = &mut groups[best.group];
        group.give();
        if let Some(c) = group.next(best.group) {
            heap.push(Reverse(c));
        }
    }

    let mut full = alloc::vec![0u64; q.len()];
    for g in &groups {
        for (i, &a) in g.members.iter().enumerate() {
            full[a] = g.base + (i < g.filled) as u64;
        }
    }
    TypedPmf::new(full, m)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
        if acc > BRUTE_FORCE_LIMIT * 1000 {
            return u128::MAX;
        }
    }
    acc
}

/// Exhaustive minimizer of `D(c/M || q)` over all compositions of `M` on the
/// support of `q` with `c_a <= floor(M q_a) + 1`. Among exact ties the composition that puts more units on
/// earlier symbols wins (the first one met when enumerating the first
/// symbol's count from `M` downwards).
pub fn brute_force_quantize(q: &[f64], m: u64) -> Result<TypedPmf> {
    let q = validate(q, m)?;
    let support: Vec<usize> = (0..q.len()).filter(|&a| q[a] > 0.0).collect();
    let k = support.len();
    let compositions = binomial(m as u128 + k as u128 - 1, k as u128 - 1);
    if k > BRUTE_FORCE_MAX_SUPPORT || compositions > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge {
            compositions,
            support: k,
        });
    }
    let q_supp: Vec<f64> = support.iter().map(|&a| q[a]).collect();

    struct Search<'a> {
        q: &'a [f64],
        caps: Vec<u64>,
        m: u64,
        current: Vec<u64>,
        best: Vec<u64>,
        best_kl: f64,
    }

    impl Search<'_> {
        fn visit(&mut self, pos: usize, remaining: u64) {
            if pos + 1 == self.current.len() {
                if remaining > self.caps[pos] {
                    return;
                }
                self.current[pos] = remaining;
                let mut kl = 0.0;
                for (&c, &qa) in self.current.iter().zip(self.q) {
                    if c > 0 {
                        let p = c as f64 / self.m as f64;
                        kl += p * libm::log2(p / qa);
                    }
                }
                if kl < self.best_kl - 1e-14 {
                    self.best_kl = kl;
                    self.best.copy_from_slice(&self.current);
                }
                return;
            }
            for c in (0..=remaining.min(self.caps[pos])).rev() {
                self.current[pos] = c;
                self.visit(pos + 1, remaining - c);
            }
        }
    }

    let mut search = Search {
        caps: unit_caps(
            &q_supp.iter().map(|&qa| m as f64 * qa).collect::<Vec<_>>(),
            &alloc::vec![1; k],
            m,
        ),
        q: &q_supp,
        m,
        current: alloc::vec![0; k],
        best: alloc::vec![0; k],
        best_kl: f64::INFINITY,
    };
    search.visit(0, m);

    let mut full = alloc::vec![0u64; q.len()];
    for (&a, &c) in support.iter().zip(&search.best) {
        full[a] = c;
    }
    TypedPmf::new(full, m)
}
