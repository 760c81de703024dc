use proptest::prelude::*;
use rescode_core::codetree::{leaf_distribution, validate_complete_with_cap};
use rescode_core::encoder::{build_code, exhaustive_histogram};
use rescode_core::metrics::{bound_suite, rate_report, Outcome};
use rescode_core::mtype::{brute_force_quantize, quantize};
use rescode_core::probdist::{
    entropy, kl_divergence, kl_tv_bound, min_type_order, variational_distance,
};
use rescode_core::tunstall::{self, check_balance, TunstallBuilder};
use rescode_core::{Pmf, TypedPmf};

fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let s: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / s).collect()
}

/// Distribution over `len` symbols with every probability at least `floor`.
fn pmf_with_floor(len: std::ops::RangeInclusive<usize>, floor: f64) -> impl Strategy<Value = Pmf> {
    len.prop_flat_map(move |d| prop::collection::vec(0.0f64..1.0, d))
        .prop_map(move |w| {
            let w = normalized(w.into_iter().map(|x| x + 1e-3).collect());
            let d = w.len() as f64;
            let mixed: Vec<f64> = w.iter().map(|x| floor + (1.0 - d * floor) * x).collect();
            Pmf::new(mixed).unwrap()
        })
}

/// Probability vector of length 1..=5, possibly with zero entries.
fn sparse_q() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.001f64..1.0], 1..=5)
        .prop_filter("some mass", |w| w.iter().any(|&x| x > 0.0))
        .prop_map(normalized)
}

// Change of M * D(c/M || q) in nats when one unit moves from `from` to `to`.
fn exchange_gain(t: &TypedPmf, q: &[f64], from: usize, to: usize) -> f64 {
    let m = t.denominator() as f64;
    let term = |c: u64, qa: f64| {
        if c == 0 {
            0.0
        } else {
            c as f64 * (c as f64 / (m * qa)).ln()
        }
    };
    let c = t.counts();
    term(c[to] + 1, q[to]) - term(c[to], q[to]) + term(c[from] - 1, q[from])
        - term(c[from], q[from])
}

fn exchange_optimal(t: &TypedPmf, q: &[f64]) -> bool {
    let c = t.counts();
    (0..c.len()).filter(|&a| c[a] > 0).all(|a| {
        (0..c.len())
            .filter(|&b| b != a && q[b] > 0.0)
            .filter(|&b| (c[b] + 1) as f64 <= t.denominator() as f64 * q[b] + 1.0)
            .all(|b| exchange_gain(t, q, a, b) >= -1e-9)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn kl_nonnegative_and_zero_on_identity(
        (p, q) in (2usize..8).prop_flat_map(|d| (
            prop::collection::vec(0.01f64..1.0, d),
            prop::collection::vec(0.01f64..1.0, d),
        ))
    ) {
        let p = normalized(p);
        let q = normalized(q);
        let d = kl_divergence(&p, &q).unwrap();
        prop_assert!(d >= -1e-12);
        prop_assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        if d.abs() < 1e-12 {
            prop_assert!(variational_distance(&p, &q).unwrap() < 1e-5);
        }
    }

    #[test]
    fn tv_bound_dominates_kl(
        (p, q) in (2usize..8).prop_flat_map(|d| (
            prop::collection::vec(prop_oneof![1 => Just(0.0), 6 => 0.001f64..1.0], d),
            prop::collection::vec(0.001f64..1.0, d),
        ))
    ) {
        prop_assume!(p.iter().any(|&x| x > 0.0));
        let p = normalized(p);
        let q = normalized(q);
        prop_assume!(variational_distance(&p, &q).unwrap() < 1.0);
        let bound = kl_tv_bound(&p, &q).unwrap();
        let kl_nats = kl_divergence(&p, &q).unwrap() * std::f64::consts::LN_2;
        prop_assert!(bound >= kl_nats - 1e-12, "bound {} < kl {}", bound, kl_nats);
    }

    #[test]
    fn min_type_order_is_minimal(
        (counts, extra) in (prop::collection::vec(0u64..64, 1..6), 1u64..8)
    ) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        // Scale up so the denominator has spare common factors.
        let counts: Vec<u64> = counts.iter().map(|c| c * extra).collect();
        let m: u64 = counts.iter().sum();
        let t = TypedPmf::new(counts.clone(), m).unwrap();
        let mx = min_type_order(&t);
        prop_assert!(mx <= 4096);
        prop_assert_eq!(m % mx, 0);
        let fits = |k: u64| counts.iter().all(|&c| (c * k).is_multiple_of(m));
        prop_assert!(fits(mx));
        for k in 1..mx {
            prop_assert!(!fits(k), "{} also works", k);
        }
        prop_assert!(t.entropy() <= (mx as f64).log2());
        prop_assert!((t.entropy() - entropy(&t)).abs() < 1e-9);
    }
}

/// Random complete tree grown by splitting uniformly chosen leaves.
fn random_tree(d: usize, splits: Vec<usize>) -> Vec<Vec<u8>> {
    let mut leaves: Vec<Vec<u8>> = (0..d as u8).map(|s| vec![s]).collect();
    for pick in splits {
        let leaf = leaves.swap_remove(pick % leaves.len());
        for s in 0..d as u8 {
            let mut child = leaf.clone();
            child.push(s);
            leaves.push(child);
        }
    }
    leaves
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_trees_are_complete_and_sum_to_one(
        p in pmf_with_floor(2..=4, 0.02),
        splits in prop::collection::vec(any::<usize>(), 0..60),
    ) {
        let d = p.alphabet_size();
        let leaves = random_tree(d, splits);
        let c = validate_complete_with_cap(leaves, d, 128).unwrap();
        let ld = leaf_distribution(&p, &c).unwrap();
        let sum: f64 = ld.leaf_probs().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(ld.expected_len() >= 1.0 - 1e-12);
    }

    #[test]
    fn removing_a_leaf_breaks_completeness(
        splits in prop::collection::vec(any::<usize>(), 1..30),
        drop in any::<usize>(),
    ) {
        let mut leaves = random_tree(2, splits);
        leaves.swap_remove(drop % leaves.len());
        let incomplete = matches!(
            validate_complete_with_cap(leaves, 2, 128),
            Err(rescode_core::Error::Incomplete { .. })
        );
        prop_assert!(incomplete);
    }

    #[test]
    fn quantizer_matches_brute_force(q in sparse_q(), m in prop::sample::select(vec![4u64, 8, 16, 32])) {
        let greedy = quantize(&q, m).unwrap();
        let oracle = brute_force_quantize(&q, m).unwrap();
        let kg = kl_divergence(&greedy, &q).unwrap();
        let ko = kl_divergence(&oracle, &q).unwrap();
        prop_assert!((kg - ko).abs() <= 1e-12, "{:?} {} vs {:?} {}", greedy.counts(), kg, oracle.counts(), ko);
    }

    #[test]
    fn quantizer_contract(q in sparse_q(), m in 1u64..5000) {
        let t = quantize(&q, m).unwrap();
        let mu = q.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
        for (a, &c) in t.counts().iter().enumerate() {
            if q[a] == 0.0 {
                prop_assert_eq!(c, 0);
            }
            prop_assert!(c as f64 <= m as f64 * q[a] + 1.0);
        }
        prop_assert!(exchange_optimal(&t, &q));
        let kl = kl_divergence(&t, &q).unwrap();
        prop_assert!(kl <= 1.0 / (mu * m as f64), "kl {} bound {}", kl, 1.0 / (mu * m as f64));
    }
}

#[test]
fn tunstall_balance_for_every_size() {
    // Deterministic sweep: 60 binary and 60 ternary targets, every size up to 4096.
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for d in [2usize, 3] {
        for _ in 0..60 {
            let w: Vec<f64> = (0..d).map(|_| next()).collect();
            let w = normalized(w);
            let floor = 0.05;
            let p = Pmf::new(
                w.iter()
                    .map(|x| floor + (1.0 - d as f64 * floor) * x)
                    .collect(),
            )
            .unwrap();
            let mut builder = TunstallBuilder::new(&p).unwrap();
            while builder.leaf_count() < 4096 {
                let report = builder.balance(p.mu());
                assert!(
                    report.ok,
                    "{p:?} at {} leaves: {report:?}",
                    builder.leaf_count()
                );
                builder.split();
            }
        }
    }
}

#[test]
fn tunstall_prefix_property() {
    // The tree with N leaves is an intermediate state of the tree with N' > N.
    let p = Pmf::new(vec![0.3, 0.7]).unwrap();
    let small = tunstall::build(&p, 100).unwrap();
    let mut builder = TunstallBuilder::new(&p).unwrap();
    while builder.leaf_count() < 100 {
        builder.split();
    }
    assert_eq!(builder.finish(), small);
    assert!(check_balance(&small, p.mu()).ok);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn f2v_bounds_hold(
        p in pmf_with_floor(2..=3, 0.05),
        n_raw in 2u64..600,
        m in 1u32..=16,
    ) {
        let d = p.alphabet_size();
        let size = tunstall::round_down_size(d, n_raw.max(d as u64)).unwrap();
        let code = build_code(&p, size, m).unwrap();
        for check in bound_suite(&code, &p) {
            prop_assert_eq!(check.outcome, Outcome::Pass, "{:?}", check);
        }
        let r = rate_report(&code, &p);
        prop_assert!(r.generated_entropy <= m as f64);
        prop_assert!(r.hv_rate <= r.rate * (1.0 + 1e-12));
        let hist = exhaustive_histogram(&code).unwrap();
        prop_assert_eq!(&hist, code.counts());
        prop_assert_eq!(code.counts(), &quantize(code.target().leaf_probs(), 1 << m).unwrap());
    }
}
