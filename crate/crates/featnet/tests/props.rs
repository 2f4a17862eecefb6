//! Randomized property tests across the library.

use std::collections::HashSet;

use proptest::prelude::*;

use featnet::estimators::{
    build_example_sequence, llama_fit, llama_step, naive_estimate, LlamaConfig, NaiveSmoothing,
    NodeOrdering,
};
use featnet::eval::{aupr, pr_curve, split_folds, ScoredPair};
use featnet::model::{activate, score, ActivationSpec};
use featnet::{FeatureAssignment, FeatureGraph, InteractionMatrix};

mod oracle;

fn arb_activation() -> impl Strategy<Value = ActivationSpec> {
    prop_oneof![
        (-3.0f64..3.0, 0.1f64..20.0)
            .prop_map(|(theta, k)| ActivationSpec::Sigmoid { theta, k }),
        (-3.0f64..3.0).prop_map(|threshold| ActivationSpec::Step { threshold }),
        Just(ActivationSpec::ExpClipped),
    ]
}

/// A random sparse graph on `n` nodes with fewer arcs than non-arcs.
fn arb_graph(max_n: usize) -> impl Strategy<Value = FeatureGraph> {
    (2..max_n).prop_flat_map(|n| {
        let max_arcs = (n * n) / 2 - 1;
        proptest::collection::vec((0..n as u32, 0..n as u32), 1..=max_arcs.max(2))
            .prop_map(move |arcs| FeatureGraph::new(n, arcs).unwrap())
    })
}

fn arb_scored(max_len: usize) -> impl Strategy<Value = Vec<ScoredPair>> {
    // coarse score grid so ties actually happen
    proptest::collection::vec((0i8..=1, -3i32..=3), 1..max_len).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (pos, level))| ScoredPair {
                src: i as u32,
                dst: i as u32,
                score: level as f64 / 2.0,
                label: if pos > 0 { 1 } else { -1 },
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn activation_is_monotone_into_unit_interval(
        spec in arb_activation(),
        mut xs in proptest::collection::vec(-50.0f64..50.0, 2..20),
    ) {
        xs.sort_by(f64::total_cmp);
        let mut prev = -1.0;
        for &x in &xs {
            let y = activate(spec, x);
            prop_assert!((0.0..=1.0).contains(&y));
            prop_assert!(y >= prev);
            prev = y;
        }
    }

    #[test]
    fn score_is_additive_in_feature_sets(
        features in proptest::collection::hash_set(0u32..20, 1..10),
        fj in proptest::collection::vec(0u32..20, 1..6),
        entries in proptest::collection::vec((0u32..20, 0u32..20, -5.0f64..5.0), 0..40),
    ) {
        let mut w = InteractionMatrix::zeros(20);
        for (h, k, v) in entries {
            w.set(h, k, v);
        }
        let all: Vec<u32> = features.iter().copied().collect();
        let (left, right) = all.split_at(all.len() / 2);
        let total = score(&all, &fj, &w).unwrap();
        let parts = score(left, &fj, &w).unwrap() + score(right, &fj, &w).unwrap();
        prop_assert!((total - parts).abs() < 1e-9);
    }

    #[test]
    fn example_sequence_is_balanced_and_distinct(g in arb_graph(12), seed in 0u64..1000) {
        let seq = build_example_sequence(&g, &NodeOrdering::Random, seed).unwrap();
        prop_assert_eq!(seq.len() as u64, 2 * g.num_arcs());
        let pos: Vec<_> = seq.iter().filter(|e| e.label > 0).collect();
        let neg: Vec<_> = seq.iter().filter(|e| e.label < 0).collect();
        prop_assert_eq!(pos.len(), neg.len());
        let pos_set: HashSet<(u32, u32)> = pos.iter().map(|e| (e.src, e.dst)).collect();
        let arc_set: HashSet<(u32, u32)> = g.arcs().collect();
        prop_assert_eq!(pos_set, arc_set);
        let neg_set: HashSet<(u32, u32)> = neg.iter().map(|e| (e.src, e.dst)).collect();
        prop_assert_eq!(neg_set.len(), neg.len());
        for &(src, dst) in &neg_set {
            prop_assert!(!g.has_arc(src, dst));
        }
    }

    #[test]
    fn llama_step_is_passive_and_capped(
        fi in proptest::collection::hash_set(0u32..10, 1..5),
        fj in proptest::collection::hash_set(0u32..10, 1..5),
        entries in proptest::collection::vec((0u32..10, 0u32..10, -2.0f64..2.0), 0..30),
        label in prop_oneof![Just(1i8), Just(-1i8)],
        kappa in 0.1f64..5.0,
    ) {
        let mut w = InteractionMatrix::zeros(10);
        for (h, k, v) in entries {
            w.set(h, k, v);
        }
        let fi: Vec<u32> = fi.into_iter().collect();
        let fj: Vec<u32> = fj.into_iter().collect();
        let mu = score(&fi, &fj, &w).unwrap();
        let cfg = LlamaConfig { kappa, ..LlamaConfig::default() };
        let (delta, updated) = llama_step(&mut w, &fi, &fj, label, &cfg).unwrap();
        let rho = 1.0 / (fi.len() * fj.len()) as f64;
        // no update when the margin is already met
        if label as f64 * mu >= 1.0 {
            prop_assert_eq!(delta, 0.0);
            prop_assert!(!updated);
        }
        prop_assert!(delta.abs() <= kappa.min(rho * (1.0 + mu.abs())) + 1e-12);
        if delta != 0.0 {
            prop_assert_eq!(delta.signum() as i8, label);
            // the new margin moves toward the target
            let mu_after = score(&fi, &fj, &w).unwrap();
            prop_assert!((mu_after - mu - delta / rho).abs() < 1e-9);
        }
    }

    #[test]
    fn fits_touch_only_cooccurring_features(g in arb_graph(10), seed in 0u64..100) {
        let n = g.n();
        // deterministic features derived from the seed keep the strategy simple
        let z = FeatureAssignment::new(
            n,
            6,
            (0..n as u32).flat_map(|i| {
                let a = (i as u64 * 7 + seed) % 6;
                let b = (i as u64 * 13 + seed / 2) % 6;
                [(i, a as u32), (i, b as u32)]
            }),
        ).unwrap();
        let (w, _) = llama_fit(&g, &z, &LlamaConfig { seed, ..LlamaConfig::default() }).unwrap();
        for (h, k, _) in w.entries() {
            prop_assert!(!z.owners_of(h).is_empty());
            prop_assert!(!z.owners_of(k).is_empty());
        }
        let w = naive_estimate(&g, &z, NaiveSmoothing::AddOne).unwrap();
        for (h, k, v) in w.entries() {
            prop_assert!(v > 0.0); // AddOne only lifts observed co-occurrences
            let co_occurs = g.arcs().any(|(i, j)| {
                z.features_of(i).contains(&h) && z.features_of(j).contains(&k)
            });
            prop_assert!(co_occurs);
        }
    }

    #[test]
    fn folds_partition_the_nodes(n in 4usize..200, k in 2usize..10, seed in 0u64..100) {
        prop_assume!(k <= n);
        let folds = split_folds(n, k, seed).unwrap();
        let mut seen = vec![0u32; n];
        let mut sizes = vec![0usize; k];
        for node in 0..n as u32 {
            let f = folds.fold_of(node) as usize;
            prop_assert!(f < k);
            seen[node as usize] += 1;
            sizes[f] += 1;
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        let (min, max) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(max - min <= 1);
    }

    #[test]
    fn aupr_in_unit_interval_and_rank_invariant(scored in arb_scored(25)) {
        prop_assume!(scored.iter().any(|p| p.label > 0));
        let base = aupr(&pr_curve(&scored).unwrap());
        prop_assert!((0.0..=1.0 + 1e-12).contains(&base));
        for transform in [
            |x: f64| 3.0 * x + 7.0,
            |x: f64| x.exp(),
            |x: f64| x * x * x + 2.0 * x,
        ] {
            let mapped: Vec<ScoredPair> = scored
                .iter()
                .map(|p| ScoredPair { score: transform(p.score), ..*p })
                .collect();
            let transformed = aupr(&pr_curve(&mapped).unwrap());
            prop_assert!((base - transformed).abs() < 1e-12);
        }
    }

    #[test]
    fn aupr_matches_unit_step_oracle(scored in arb_scored(30)) {
        prop_assume!(scored.iter().any(|p| p.label > 0));
        let exact = aupr(&pr_curve(&scored).unwrap());
        let reference = oracle::aupr_oracle(&scored);
        prop_assert!((exact - reference).abs() <= 1e-9, "{} vs {}", exact, reference);
    }

    #[test]
    fn naive_is_invariant_under_arc_permutation(g in arb_graph(10), seed in 0u64..50) {
        let n = g.n();
        let z = FeatureAssignment::new(
            n,
            5,
            (0..n as u32).map(|i| (i, ((i as u64 + seed) % 5) as u32)),
        ).unwrap();
        let mut arcs: Vec<(u32, u32)> = g.arcs().collect();
        arcs.reverse();
        let rotation = arcs.len() / 3;
        arcs.rotate_left(rotation);
        let permuted = FeatureGraph::new(n, arcs).unwrap();
        let a = naive_estimate(&g, &z, NaiveSmoothing::Floor(-50.0)).unwrap();
        let b = naive_estimate(&permuted, &z, NaiveSmoothing::Floor(-50.0)).unwrap();
        prop_assert!(a.same_values(&b));
    }
}

/// Splitting a tie block with tiny random jitters and averaging over many
/// jitter draws converges to the tie-block curve value.
#[test]
fn jittered_ties_average_to_tie_block_aupr() {
    use rand::{Rng, SeedableRng};

    // three sizable tie blocks; the equivalence is asymptotic in block size
    let mut raw: Vec<(i8, f64)> = Vec::new();
    for i in 0..150 {
        raw.push((if i % 3 == 0 { -1 } else { 1 }, 1.0));
        raw.push((if i % 2 == 0 { 1 } else { -1 }, 0.5));
        raw.push((if i % 4 == 0 { 1 } else { -1 }, 0.2));
    }
    let scored: Vec<ScoredPair> = raw
        .iter()
        .enumerate()
        .map(|(i, &(label, score))| ScoredPair {
            src: i as u32,
            dst: i as u32,
            score,
            label,
        })
        .collect();
    let tied = aupr(&pr_curve(&scored).unwrap());

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let trials = 4_000;
    let mut total = 0.0;
    for _ in 0..trials {
        let jittered: Vec<ScoredPair> = scored
            .iter()
            .map(|p| ScoredPair {
                score: p.score + rng.random::<f64>() * 1e-6,
                ..*p
            })
            .collect();
        total += aupr(&pr_curve(&jittered).unwrap());
    }
    let averaged = total / trials as f64;
    assert!(
        (averaged - tied).abs() < 0.01 * tied.max(1e-9),
        "tie-block {tied} vs jitter average {averaged}"
    );
}
