//! Randomised invariant checks, one function per invariant. Every check runs
//! a deterministic proptest runner for the requested number of cases and
//! returns the runner's failure message on the first counterexample.

use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rflbat_core::aggregators::{
    build_aggregator, krum_scores, multi_krum_aggregate, rflbat_aggregate, AggregatorConfig, AggregatorKind,
    UpdateBatch,
};
use rflbat_core::data::{
    apply_trigger, partition_dirichlet, partition_iid, poison_shard, synth_dataset, ClientShard, LabeledDataset,
    TriggerCell, TriggerPattern, TriggeredTestSet,
};
use rflbat_core::learners::{
    build_model, flatten, loss_and_gradient, train_local, unflatten, Architecture, FlatUpdate, ModelParams,
    TrainerConfig,
};
use rflbat_core::numerics::{
    choose_k, cosine_similarity, distance_sum_scores, kmeans, median_ratio_filter, pca_project, weiszfeld, Matrix,
    WeiszfeldConfig,
};
use rflbat_core::simulator::{
    format_metrics_csv, AttackerSchedule, DatasetConfig, PartitionKind, ScenarioConfig, Seeds, Simulation,
};

use super::oracles::{krum_oracle, krum_selection_oracle};

pub const CASES: u32 = 1000;

pub type Property = fn(u32) -> Result<(), String>;

pub const ALL: &[(&str, Property)] = &[
    ("pca reprojection is exact", pca_reprojection),
    ("pca is row-permutation equivariant", pca_row_equivariance),
    ("distance sums are permutation equivariant and translation invariant", distance_sum_symmetries),
    ("ratio filter is invariant under positive score scaling", ratio_filter_scaling),
    ("kmeans and choose_k are reproducible", kmeans_reproducible),
    ("cosine similarity ignores positive rescaling", cosine_scaling),
    ("weiszfeld objective never increases", weiszfeld_monotone),
    ("local training is deterministic", training_deterministic),
    ("zero learning rate gives a zero delta", zero_learning_rate),
    ("flatten and unflatten are inverse", flatten_bijection),
    ("toy logistic regression loss does not increase", toy_loss_decreases),
    ("partitions are disjoint and cover the data", partition_cover),
    ("dirichlet partition is reproducible", dirichlet_reproducible),
    ("triggering never touches labels", trigger_keeps_labels),
    ("rflbat decisions ignore uniform delta scaling", rflbat_scale_invariance),
    ("rflbat ignores client order", rflbat_permutation_invariance),
    ("every aggregator returns a finite delta of input length", aggregators_finite),
    ("identical updates aggregate to themselves", identical_updates),
    ("multi-krum matches the brute-force oracle", krum_matches_oracle),
    ("simulation is bit-reproducible with constant parameter count", simulation_reproducible),
    ("attacker schedules draw the right sets", attacker_schedules),
];

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        max_global_rejects: cases * 4,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, m: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..m).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect())
        .collect()
}

fn batch(rows: &[Vec<f64>], counts: &[usize], order: &[usize]) -> UpdateBatch {
    let updates = order
        .iter()
        .map(|&i| FlatUpdate {
            client_id: i as u32,
            delta: rows[i].clone(),
            sample_count: counts[i],
        })
        .collect();
    UpdateBatch::new(updates, 1).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn pca_reprojection(cases: u32) -> Result<(), String> {
    run(cases, (3usize..9, 2usize..12, 1usize..4, any::<u64>(), 0.01f64..100.0), |(n, m, h, seed, scale)| {
        let h = h.min(n - 1).min(m);
        let rows = gaussian(&mut ChaCha8Rng::seed_from_u64(seed), n, m, scale);
        let p = pca_project(&Matrix::from_rows(&rows).unwrap(), h).unwrap();
        for (i, row) in rows.iter().enumerate() {
            let again = p.project_row(row);
            prop_assert_eq!(again.as_slice(), p.projected.row(i));
        }
        Ok(())
    })
}

pub fn pca_row_equivariance(cases: u32) -> Result<(), String> {
    run(cases, (4usize..9, 3usize..12, any::<u64>()), |(n, m, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = gaussian(&mut rng, n, m, 1.0);
        let full = pca_project(&Matrix::from_rows(&rows).unwrap(), (n - 1).min(m)).unwrap();
        let ev = &full.explained_variance;
        // The top-2 basis is only defined up to sign when the spectrum separates.
        let gap = |a: f64, b: f64| (a - b) / a;
        prop_assume!(gap(ev[0], ev[1]) > 1e-3 && (ev.len() < 3 || gap(ev[1], ev[2]) > 1e-3));

        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let a = pca_project(&Matrix::from_rows(&rows).unwrap(), 2).unwrap();
        let b = pca_project(&Matrix::from_rows(&permuted).unwrap(), 2).unwrap();
        for (x, y) in a.component_basis.as_slice().iter().zip(b.component_basis.as_slice()) {
            prop_assert!((x - y).abs() < 1e-7, "basis {x} vs {y}");
        }
        for (new, &old) in perm.iter().enumerate() {
            for (x, y) in a.projected.row(old).iter().zip(b.projected.row(new)) {
                prop_assert!((x - y).abs() < 1e-7, "row {old}: {x} vs {y}");
            }
        }
        Ok(())
    })
}

pub fn distance_sum_symmetries(cases: u32) -> Result<(), String> {
    run(cases, (2usize..10, 1usize..8, any::<u64>(), 0.0f64..10.0), |(n, m, seed, shift)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = gaussian(&mut rng, n, m, 1.0);
        let base = distance_sum_scores(&Matrix::from_rows(&rows).unwrap()).unwrap();

        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let p = distance_sum_scores(&Matrix::from_rows(&permuted).unwrap()).unwrap();
        for (new, &old) in perm.iter().enumerate() {
            prop_assert!(close(p[new], base[old], 1e-12), "{} vs {}", p[new], base[old]);
        }

        let t: Vec<f64> = (0..m).map(|_| shift * rng.sample::<f64, _>(StandardNormal)).collect();
        let moved: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().zip(&t).map(|(x, d)| x + d).collect())
            .collect();
        let s = distance_sum_scores(&Matrix::from_rows(&moved).unwrap()).unwrap();
        for (x, y) in s.iter().zip(&base) {
            prop_assert!(close(*x, *y, 1e-9), "{x} vs {y}");
        }
        Ok(())
    })
}

pub fn ratio_filter_scaling(cases: u32) -> Result<(), String> {
    let scores = prop::collection::vec(0.0f64..100.0, 1..20);
    run(cases, (scores, 1.0f64..20.0, 1e-3f64..1e3), |(scores, eps, c)| {
        let scaled: Vec<f64> = scores.iter().map(|s| s * c).collect();
        prop_assert_eq!(median_ratio_filter(&scores, eps), median_ratio_filter(&scaled, eps));
        Ok(())
    })
}

pub fn kmeans_reproducible(cases: u32) -> Result<(), String> {
    run(cases, (2usize..15, 1usize..4, any::<u64>(), any::<u64>(), 0.0f64..1.0), |(n, m, data, seed, kf)| {
        let rows = gaussian(&mut ChaCha8Rng::seed_from_u64(data), n, m, 1.0);
        let pts = Matrix::from_rows(&rows).unwrap();
        let k = 1 + ((n - 1) as f64 * kf) as usize;
        prop_assert_eq!(kmeans(&pts, k, seed).unwrap(), kmeans(&pts, k, seed).unwrap());
        prop_assert_eq!(choose_k(&pts, seed).unwrap(), choose_k(&pts, seed).unwrap());
        Ok(())
    })
}

pub fn cosine_scaling(cases: u32) -> Result<(), String> {
    let vecs = (1usize..10).prop_flat_map(|m| {
        (
            prop::collection::vec(-10.0f64..10.0, m),
            prop::collection::vec(-10.0f64..10.0, m),
        )
    });
    run(cases, (vecs, 1e-3f64..1e3, 1e-3f64..1e3), |((a, b), alpha, beta)| {
        prop_assume!(a.iter().any(|&x| x != 0.0) && b.iter().any(|&x| x != 0.0));
        let sa: Vec<f64> = a.iter().map(|x| alpha * x).collect();
        let sb: Vec<f64> = b.iter().map(|x| beta * x).collect();
        let c0 = cosine_similarity(&a, &b).unwrap();
        let c1 = cosine_similarity(&sa, &sb).unwrap();
        prop_assert!((c0 - c1).abs() <= 1e-12, "{c0} vs {c1}");
        Ok(())
    })
}

pub fn weiszfeld_monotone(cases: u32) -> Result<(), String> {
    run(cases, (1usize..9, 1usize..6, any::<u64>(), 0.01f64..100.0), |(n, m, seed, scale)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = gaussian(&mut rng, n, m, scale);
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let r = weiszfeld(&Matrix::from_rows(&rows).unwrap(), &weights, &WeiszfeldConfig::default()).unwrap();
        for w in r.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "objective rose {} -> {}", w[0], w[1]);
        }
        Ok(())
    })
}

/// Small shard on a 2x3 "image" so a trigger cell fits.
fn toy_shard(seed: u64, n: usize, poisoned: bool) -> ClientShard {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features: Vec<f64> = (0..n * 6).map(|_| rng.sample(StandardNormal)).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
    let ds = Arc::new(LabeledDataset::new(6, 3, features, labels).unwrap());
    let shard = ClientShard::new(0, ds, (0..n).collect());
    if !poisoned {
        return shard;
    }
    let pattern = TriggerPattern {
        width: 3,
        cells: vec![TriggerCell { row: 1, col: 2, intensity: 3.0 }],
        target_label: 0,
    };
    poison_shard(&shard, 0.5, &pattern, seed).unwrap()
}

fn toy_arch(mlp: bool) -> Architecture {
    if mlp {
        Architecture::Mlp { inputs: 6, hidden: 4, classes: 3 }
    } else {
        Architecture::LogisticRegression { inputs: 6, classes: 3 }
    }
}

pub fn training_deterministic(cases: u32) -> Result<(), String> {
    let s = (any::<u64>(), 2usize..30, any::<bool>(), any::<bool>(), 1usize..6, 0.01f64..0.5, 2usize..9);
    run(cases, s, |(seed, n, poisoned, mlp, e, lr, b)| {
        let shard = toy_shard(seed, n, poisoned);
        let start = build_model(toy_arch(mlp), seed);
        let cfg = TrainerConfig { local_iterations: e, learning_rate: lr, batch_size: b, seed };
        let a = train_local(&start, &shard, &cfg).unwrap();
        let c = train_local(&start, &shard, &cfg).unwrap();
        let bits = |u: &FlatUpdate| u.delta.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a), bits(&c));
        prop_assert_eq!(a.sample_count, c.sample_count);
        Ok(())
    })
}

pub fn zero_learning_rate(cases: u32) -> Result<(), String> {
    run(cases, (any::<u64>(), 2usize..30, any::<bool>(), any::<bool>(), 1usize..6), |(seed, n, poisoned, mlp, e)| {
        let shard = toy_shard(seed, n, poisoned);
        let start = build_model(toy_arch(mlp), seed);
        let cfg = TrainerConfig { local_iterations: e, learning_rate: 0.0, batch_size: 4, seed };
        let u = train_local(&start, &shard, &cfg).unwrap();
        prop_assert!(u.delta.iter().all(|&d| d == 0.0));
        Ok(())
    })
}

pub fn flatten_bijection(cases: u32) -> Result<(), String> {
    run(cases, (any::<bool>(), 1usize..7, 1usize..6, 2usize..6, any::<u64>()), |(mlp, i, h, c, seed)| {
        let arch = if mlp {
            Architecture::Mlp { inputs: i, hidden: h, classes: c }
        } else {
            Architecture::LogisticRegression { inputs: i, classes: c }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..arch.param_count()).map(|_| rng.sample(StandardNormal)).collect();
        prop_assert_eq!(&flatten(&unflatten(&v, arch).unwrap()), &v);
        let p = build_model(arch, seed);
        prop_assert_eq!(unflatten(&flatten(&p), arch).unwrap(), p);
        Ok(())
    })
}

fn shard_loss(model: &ModelParams, shard: &ClientShard) -> f64 {
    let batch: Vec<_> = (0..shard.len()).map(|p| shard.sample(p)).collect();
    loss_and_gradient(model, &batch).0
}

pub fn toy_loss_decreases(cases: u32) -> Result<(), String> {
    run(cases, any::<u64>(), |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: [f64; 2] = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let (mut feats, mut labels) = (Vec::new(), Vec::new());
        while labels.len() < 40 {
            let x: [f64; 2] = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let s = w[0] * x[0] + w[1] * x[1] + 0.3;
            if s.abs() > 0.2 {
                feats.extend(x);
                labels.push(usize::from(s > 0.0));
            }
        }
        let ds = Arc::new(LabeledDataset::new(2, 2, feats, labels).unwrap());
        let shard = ClientShard::new(0, ds, (0..40).collect());
        let start = build_model(Architecture::LogisticRegression { inputs: 2, classes: 2 }, seed);
        let steps = 50;
        let initial = shard_loss(&start, &shard);
        let tail: Vec<f64> = (steps - steps / 10 + 1..=steps)
            .map(|e| {
                let cfg = TrainerConfig { local_iterations: e, learning_rate: 0.5, batch_size: 8, seed };
                let mut m = start.clone();
                m.add_scaled(1.0, &train_local(&start, &shard, &cfg).unwrap().delta).unwrap();
                shard_loss(&m, &shard)
            })
            .collect();
        let late = tail.iter().sum::<f64>() / tail.len() as f64;
        prop_assert!(late <= initial, "late loss {late} above initial {initial}");
        Ok(())
    })
}

fn labelled(seed: u64, n: usize, classes: usize) -> Arc<LabeledDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
    Arc::new(LabeledDataset::new(1, classes, (0..n).map(|i| i as f64).collect(), labels).unwrap())
}

pub fn partition_cover(cases: u32) -> Result<(), String> {
    let s = (10usize..200, 2usize..6, 1usize..20, any::<bool>(), 0.05f64..10.0, any::<u64>());
    run(cases, s, |(n, classes, clients, iid, alpha, seed)| {
        let ds = labelled(seed, n, classes);
        let clients = clients.min(n);
        let shards = if iid {
            partition_iid(&ds, clients, seed).unwrap()
        } else {
            partition_dirichlet(&ds, clients, alpha, seed).unwrap()
        };
        prop_assert_eq!(shards.len(), clients);
        let mut all: Vec<usize> = shards.iter().flat_map(|s| s.indices.iter().copied()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert!(shards.iter().all(|s| !s.is_empty()));
        Ok(())
    })
}

pub fn dirichlet_reproducible(cases: u32) -> Result<(), String> {
    run(cases, (10usize..200, 2usize..6, 1usize..20, 0.05f64..10.0, any::<u64>()), |(n, classes, clients, alpha, seed)| {
        let ds = labelled(seed, n, classes);
        let clients = clients.min(n);
        let a = partition_dirichlet(&ds, clients, alpha, seed).unwrap();
        let b = partition_dirichlet(&ds, clients, alpha, seed).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&x.indices, &y.indices);
        }
        Ok(())
    })
}

pub fn trigger_keeps_labels(cases: u32) -> Result<(), String> {
    run(cases, (any::<u64>(), 1usize..40, 0usize..3, 1usize..5), |(seed, n, target, cells)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let features: Vec<f64> = (0..n * 6).map(|_| rng.sample(StandardNormal)).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let ds = LabeledDataset::new(6, 3, features, labels.clone()).unwrap();
        let pattern = TriggerPattern {
            width: 3,
            cells: (0..cells)
                .map(|_| TriggerCell { row: rng.random_range(0..2), col: rng.random_range(0..3), intensity: 5.0 })
                .collect(),
            target_label: target,
        };
        let triggered = TriggeredTestSet::build(&ds, &pattern).unwrap();
        let kept: Vec<usize> = labels.iter().copied().filter(|&l| l != target).collect();
        prop_assert_eq!(triggered.samples.labels(), kept.as_slice());
        prop_assert_eq!(ds.labels(), labels.as_slice());
        for i in 0..n {
            let t = apply_trigger(ds.row(i), &pattern).unwrap();
            prop_assert_eq!(t.len(), 6);
        }
        let shared = Arc::new(ds);
        let shard = ClientShard::new(0, Arc::clone(&shared), (0..n).collect());
        let poisoned = poison_shard(&shard, 1.0, &pattern, seed).unwrap();
        prop_assert_eq!(poisoned.dataset.labels(), labels.as_slice());
        for p in 0..n {
            prop_assert_eq!(poisoned.sample(p).1, target);
            prop_assert_eq!(shard.sample(p).1, labels[p]);
        }
        Ok(())
    })
}

fn random_batch(seed: u64, n: usize, m: usize, scale: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = gaussian(&mut rng, n, m, scale);
    let counts = (0..n).map(|_| rng.random_range(1..100)).collect();
    (rows, counts)
}

pub fn rflbat_scale_invariance(cases: u32) -> Result<(), String> {
    run(cases, (3usize..13, 2usize..10, any::<u64>(), 1e-2f64..1e2), |(n, m, seed, c)| {
        let (rows, counts) = random_batch(seed, n, m, 1.0);
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| c * x).collect()).collect();
        let order: Vec<usize> = (0..n).collect();
        let cfg = AggregatorConfig::default();
        let a = rflbat_aggregate(&batch(&rows, &counts, &order), &cfg).unwrap();
        let b = rflbat_aggregate(&batch(&scaled, &counts, &order), &cfg).unwrap();
        prop_assert_eq!(&a.selected_ids, &b.selected_ids);
        prop_assert_eq!(&a.excluded_pass1, &b.excluded_pass1);
        prop_assert_eq!(&a.excluded_pass2, &b.excluded_pass2);
        Ok(())
    })
}

pub fn rflbat_permutation_invariance(cases: u32) -> Result<(), String> {
    run(cases, (3usize..13, 2usize..10, any::<u64>()), |(n, m, seed)| {
        let (rows, counts) = random_batch(seed, n, m, 1.0);
        let mut order: Vec<usize> = (0..n).collect();
        let cfg = AggregatorConfig::default();
        let a = rflbat_aggregate(&batch(&rows, &counts, &order), &cfg).unwrap();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(!seed));
        let b = rflbat_aggregate(&batch(&rows, &counts, &order), &cfg).unwrap();
        prop_assert_eq!(&a.selected_ids, &b.selected_ids);
        prop_assert_eq!(&a.excluded_pass1, &b.excluded_pass1);
        prop_assert_eq!(&a.excluded_pass2, &b.excluded_pass2);
        for (x, y) in a.global_delta.iter().zip(&b.global_delta) {
            prop_assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
        }
        Ok(())
    })
}

const KINDS: [AggregatorKind; 6] = [
    AggregatorKind::Rflbat,
    AggregatorKind::Fedavg,
    AggregatorKind::Multikrum,
    AggregatorKind::Geomed,
    AggregatorKind::Rfa,
    AggregatorKind::Foolsgold,
];

fn config_for(n: usize, f_frac: f64) -> AggregatorConfig {
    AggregatorConfig {
        krum_f: Some(((n - 3) as f64 * f_frac) as usize),
        ..AggregatorConfig::default()
    }
}

pub fn aggregators_finite(cases: u32) -> Result<(), String> {
    run(cases, (3usize..11, 1usize..9, any::<u64>(), 0.0f64..1.0, 1e-3f64..1e3), |(n, m, seed, ff, scale)| {
        let (rows, counts) = random_batch(seed, n, m, scale);
        let order: Vec<usize> = (0..n).collect();
        let b = batch(&rows, &counts, &order);
        for kind in KINDS {
            let mut agg = build_aggregator(kind, config_for(n, ff), &b.ids(), m);
            let out = agg.aggregate(&b).unwrap();
            prop_assert_eq!(out.global_delta.len(), m);
            prop_assert!(out.global_delta.iter().all(|x| x.is_finite()), "{:?}: {:?}", kind, out.global_delta);
        }
        Ok(())
    })
}

/// FoolsGold is the exception: a batch of identical histories is a batch of
/// sybils, so every weight drops to zero and the delta vanishes.
pub fn identical_updates(cases: u32) -> Result<(), String> {
    run(cases, (3usize..11, 1usize..9, any::<u64>(), 0.0f64..1.0), |(n, m, seed, ff)| {
        let (rows, counts) = random_batch(seed, 1, m, 5.0);
        let rows = vec![rows[0].clone(); n];
        let counts = vec![counts[0]; n];
        let order: Vec<usize> = (0..n).collect();
        let b = batch(&rows, &counts, &order);
        for kind in KINDS {
            let mut agg = build_aggregator(kind, config_for(n, ff), &b.ids(), m);
            let out = agg.aggregate(&b).unwrap();
            if kind == AggregatorKind::Foolsgold {
                prop_assert!(out.global_delta.iter().all(|&x| x == 0.0));
                prop_assert!(out.selected_ids.is_empty());
                continue;
            }
            for (x, v) in out.global_delta.iter().zip(&rows[0]) {
                prop_assert!((x - v).abs() <= 1e-9 * v.abs().max(1.0), "{:?}: {x} vs {v}", kind);
            }
        }
        Ok(())
    })
}

pub fn krum_matches_oracle(cases: u32) -> Result<(), String> {
    run(cases, (3usize..9, 1usize..7, any::<u64>(), 0.0f64..1.0), |(n, m, seed, ff)| {
        let (rows, counts) = random_batch(seed, n, m, 1.0);
        let f = ((n - 3) as f64 * ff).round() as usize;
        let order: Vec<usize> = (0..n).collect();
        let b = batch(&rows, &counts, &order);
        prop_assert_eq!(krum_scores(&b, f).unwrap(), krum_oracle(&rows, f));
        let sel: Vec<u32> = multi_krum_aggregate(&b, f).unwrap().selected_ids.into_iter().collect();
        prop_assert_eq!(sel, krum_selection_oracle(&rows, f));
        Ok(())
    })
}

/// 784-feature toy data so the standard trigger fits.
fn tiny_data(seed: u64) -> (LabeledDataset, LabeledDataset) {
    let all = synth_dataset(3, 16, 784, 5.0, seed).unwrap();
    let mut seen = [0usize; 3];
    let (mut train, mut test) = ((Vec::new(), Vec::new()), (Vec::new(), Vec::new()));
    for i in 0..all.len() {
        let l = all.label(i);
        seen[l] += 1;
        let dst = if seen[l] <= 4 { &mut test } else { &mut train };
        dst.0.extend_from_slice(all.row(i));
        dst.1.push(l);
    }
    (
        LabeledDataset::new(784, 3, train.0, train.1).unwrap(),
        LabeledDataset::new(784, 3, test.0, test.1).unwrap(),
    )
}

fn tiny_scenario(kind: AggregatorKind, frac: f64, resampled: bool, dba: bool, dirichlet: bool, seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(DatasetConfig::synthetic(), kind);
    cfg.n_clients = 6;
    cfg.rounds = 2;
    cfg.attacker_fraction = frac;
    cfg.attacker_schedule = if resampled { AttackerSchedule::Resampled } else { AttackerSchedule::Static };
    cfg.trigger.dba = dba;
    if dirichlet {
        cfg.partition.kind = PartitionKind::Dirichlet;
    }
    cfg.trainer.local_iterations = 2;
    cfg.trainer.batch_size = 4;
    cfg.seeds = Seeds { data: seed, attack: seed ^ 1, train: seed ^ 2 };
    cfg
}

pub fn simulation_reproducible(cases: u32) -> Result<(), String> {
    let s = (0usize..6, 0.0f64..0.6, any::<bool>(), any::<bool>(), any::<bool>(), any::<u64>());
    run(cases, s, |(k, frac, resampled, dba, dirichlet, seed)| {
        // Multi-Krum's default f is the attacker count, which must stay below N-2.
        let frac = if KINDS[k] == AggregatorKind::Multikrum { frac.min(0.49) } else { frac };
        let cfg = tiny_scenario(KINDS[k], frac, resampled, dba && frac >= 0.3, dirichlet, seed);
        let (train, test) = tiny_data(seed);
        let mut runs = Vec::new();
        for _ in 0..2 {
            let mut sim = Simulation::with_data(cfg.clone(), train.clone(), test.clone()).unwrap();
            let params = sim.model().param_count();
            let mut metrics = Vec::new();
            let mut flat = Vec::new();
            while !sim.is_finished() {
                let rec = sim.step().unwrap();
                prop_assert_eq!(sim.model().param_count(), params);
                metrics.push(rec.metrics);
                flat.push(sim.flat_model().iter().map(|x| x.to_bits()).collect::<Vec<_>>());
            }
            runs.push((format_metrics_csv(&metrics), flat));
        }
        prop_assert_eq!(&runs[0], &runs[1]);
        Ok(())
    })
}

pub fn attacker_schedules(cases: u32) -> Result<(), String> {
    run(cases, (2usize..12, 0.0f64..1.0, any::<u64>()), |(n, frac, seed)| {
        let (train, test) = tiny_data(seed % 64);
        for resampled in [false, true] {
            let mut cfg = tiny_scenario(AggregatorKind::Fedavg, frac, resampled, false, false, seed);
            cfg.n_clients = n;
            let k = cfg.attacker_count();
            let sim = Simulation::with_data(cfg, train.clone(), test.clone()).unwrap();
            let first = sim.attackers_for_round(1);
            for t in 1..=6 {
                let set = sim.attackers_for_round(t);
                prop_assert_eq!(set.len(), k);
                prop_assert!(set.iter().all(|&id| (id as usize) < n));
                if !resampled {
                    prop_assert_eq!(&set, &first);
                }
            }
        }
        Ok(())
    })
}
