use ndarray::Array2;
use proptest::prelude::*;
use qsmote_core::channels::ChannelKind;
use qsmote_core::eval::{
    compute_metrics, prepare_fold, run_experiment, run_holdout, stratified_kfold, ExperimentConfig, NoiseCell,
    Phase, Summary,
};
use qsmote_core::learn::ModelKind;
use qsmote_core::LabeledDataset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn blobs(counts: &[usize], seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nd = Normal::new(0.0, 1.0).unwrap();
    let n: usize = counts.iter().sum();
    let mut x = Array2::zeros((n, 3));
    let mut y = Vec::new();
    let mut row = 0;
    for (c, &k) in counts.iter().enumerate() {
        for _ in 0..k {
            for j in 0..3 {
                x[[row, j]] = nd.sample(&mut rng) + if j == c % 3 { 3.0 } else { 0.0 };
            }
            y.push(c);
            row += 1;
        }
    }
    LabeledDataset::new(x, y, counts.len()).unwrap()
}

fn quick() -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.model_params.forest.n_trees = 15;
    c
}

#[test]
fn clean_run_has_fifty_rows() {
    let data = blobs(&[60, 20, 15], 1);
    let r = run_experiment(&data, &quick()).unwrap();
    assert_eq!(r.rows.len(), 5 * 5 * 2);
    assert_eq!(r.aggregates.len(), 10);
    for row in &r.rows {
        assert!(row.metrics.values().iter().all(|v| (0.0..=1.0).contains(v)));
        assert!((row.metrics.recall_weighted - row.metrics.accuracy).abs() < 1e-12);
    }
}

#[test]
fn zero_probability_cell_equals_clean() {
    let data = blobs(&[60, 20, 15], 2);
    let mut cfg = quick();
    cfg.noise_grid = vec![NoiseCell {
        kind: ChannelKind::BitFlip,
        probability: 0.0,
    }];
    for corrupt_train in [false, true] {
        cfg.corrupt_train = corrupt_train;
        let r = run_experiment(&data, &cfg).unwrap();
        for pair in r.rows.chunks(2) {
            assert!(pair[0].channel.is_none());
            assert_eq!(pair[1].channel, Some(ChannelKind::BitFlip));
            assert_eq!(pair[0].metrics, pair[1].metrics);
        }
    }
}

#[test]
fn grid_coverage_and_order() {
    let data = blobs(&[40, 15, 10], 3);
    let mut cfg = quick();
    cfg.models = vec![ModelKind::NB, ModelKind::DT];
    cfg.noise_grid = ExperimentConfig::grid(&[ChannelKind::Depolarizing, ChannelKind::PhaseDamping], &[0.25, 1.0]);
    cfg.k_folds = 3;
    let r = run_experiment(&data, &cfg).unwrap();
    assert_eq!(r.rows.len(), 2 * 2 * (1 + 4) * 3);
    let keys: Vec<(usize, ModelKind, Phase)> = r.rows.iter().map(|x| (x.fold, x.model, x.phase)).collect();
    let mut sorted = keys.clone();
    sorted.sort_by_key(|k| (k.0, cfg.models.iter().position(|m| *m == k.1), k.2));
    assert_eq!(keys, sorted);
}

#[test]
fn aggregates_recompute_from_rows() {
    let data = blobs(&[50, 20, 12], 4);
    let mut cfg = quick();
    cfg.noise_grid = ExperimentConfig::grid(&[ChannelKind::AmplitudeDamping], &[0.5]);
    let r = run_experiment(&data, &cfg).unwrap();
    for a in &r.aggregates {
        let acc: Vec<f64> = r
            .rows
            .iter()
            .filter(|x| x.model == a.model && x.phase == a.phase && x.channel == a.channel)
            .map(|x| x.metrics.accuracy)
            .collect();
        assert_eq!(acc.len(), 5);
        let mean = acc.iter().sum::<f64>() / 5.0;
        let std = (acc.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 5.0).sqrt();
        assert!((a.accuracy.mean - mean).abs() < 1e-12);
        assert!((a.accuracy.std - std).abs() < 1e-12);
    }
    assert_eq!(Summary::of(&[1.0, 3.0]).std, 1.0);
}

#[test]
fn fitted_state_ignores_test_rows() {
    let data = blobs(&[50, 20, 12], 5);
    let cfg = ExperimentConfig {
        pca_components: 2,
        ..quick()
    };
    let plan = stratified_kfold(&data.y, 5, 42).unwrap();
    let (train, test) = (plan.train_indices(0), plan.test_indices(0));
    let a = prepare_fold(&data, &train, &test, 0, &cfg).unwrap();
    let mut mutated = data.clone();
    for &i in &test {
        for v in mutated.x.row_mut(i) {
            *v = *v * 100.0 - 7.0;
        }
    }
    let b = prepare_fold(&mutated, &train, &test, 0, &cfg).unwrap();
    assert_eq!(a.pca, b.pca);
    assert_eq!(a.scaler, b.scaler);
    assert_eq!(a.bounds, b.bounds);
    assert_eq!(a.oversampled, b.oversampled);
    assert_eq!(a.after_base, b.after_base);
    assert_ne!(a.test_base, b.test_base);
}

#[test]
fn after_phase_trains_on_balanced_split_only() {
    let data = blobs(&[50, 20, 12], 6);
    let plan = stratified_kfold(&data.y, 5, 42).unwrap();
    let (train, test) = (plan.train_indices(1), plan.test_indices(1));
    let art = prepare_fold(&data, &train, &test, 1, &quick()).unwrap();
    assert_eq!(art.after_y.iter().filter(|&&l| l == 0).count(), 40);
    assert_eq!(art.after_y.iter().filter(|&&l| l == 2).count(), 40);
    assert_eq!(art.test_y.len(), test.len());
    assert_eq!(art.after_base.nrows(), art.after_scaled.nrows());
    // originals lead, unchanged
    assert_eq!(art.after_base.slice(ndarray::s![..train.len(), ..]), art.train_base);
}

#[test]
fn end_to_end_determinism_and_variants() {
    let data = blobs(&[45, 15, 10], 7);
    let mut cfg = quick();
    cfg.noise_grid = ExperimentConfig::grid(&[ChannelKind::BitPhaseFlip], &[0.3]);
    assert_eq!(run_experiment(&data, &cfg).unwrap(), run_experiment(&data, &cfg).unwrap());
    cfg.fold_internal = false;
    let r = run_experiment(&data, &cfg).unwrap();
    assert_eq!(r.rows.len(), 5 * 2 * 2 * 5);
    let h = run_holdout(&data, &quick(), 0.3).unwrap();
    assert_eq!(h.rows.len(), 5 * 2);
    assert!(h.rows.iter().all(|r| r.fold == 0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn recall_equals_accuracy_with_full_support(
        pairs in prop::collection::vec((0usize..4, 0usize..4), 4..200)
    ) {
        let mut truth: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let pred: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        truth[..4].copy_from_slice(&[0, 1, 2, 3]);
        let r = compute_metrics(&truth, &pred, 4).unwrap();
        prop_assert!((r.recall_weighted - r.accuracy).abs() < 1e-12);
        for v in r.values() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
