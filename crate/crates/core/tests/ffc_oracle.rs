use medge_core::ffc::{
    cross_validate, eval_gamma_sweep, fit_bounds, gamma_grid, normalize, stratified_folds, threshold_accuracy,
    train_gamma, ClassifierKind, FfcError, LabeledFeatures, NormalizationBounds, NormalizedFeatures, Status,
};
use medge_core::signal::gen_synthetic_eeg;
use medge_core::spectral::{window_features, Band, FeatureVector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit_bounds() -> NormalizationBounds {
    NormalizationBounds {
        min: [0.0; 5],
        max: [1.0; 5],
    }
}

fn synthetic_set(n_per_class: usize, len: usize) -> Vec<LabeledFeatures> {
    let set = gen_synthetic_eeg(n_per_class, len, 173.61, 7).unwrap();
    LabeledFeatures::from_rows(set.records().iter().map(|r| {
        (
            window_features(&r.as_window().unwrap(), Band::default()).unwrap(),
            r.label(),
        )
    }))
    .unwrap()
}

/// Smallest grid point with the highest count of correct decisions.
fn counting_oracle(samples: &[(f64, Status)], grid: &[f64]) -> f64 {
    let mut best = (f64::NAN, 0usize);
    for &g in grid {
        let mut correct = 0;
        for (score, truth) in samples {
            let predicted_normal = *score <= g;
            if predicted_normal == (*truth == Status::Normal) {
                correct += 1;
            }
        }
        if best.0.is_nan() || correct > best.1 {
            best = (g, correct);
        }
    }
    best.0
}

#[test]
fn gamma_training_on_separated_scores() {
    let mut samples = Vec::new();
    for i in 0..10 {
        samples.push((NormalizedFeatures::with_score(0.03 * i as f64), Status::Normal));
        samples.push((NormalizedFeatures::with_score(0.9 + 0.01 * i as f64), Status::Seizure));
    }
    let model = train_gamma(&samples, 0.01, unit_bounds()).unwrap();
    assert_eq!(model.gamma, 0.27);
    let wide = [
        (NormalizedFeatures::with_score(0.3), Status::Normal),
        (NormalizedFeatures::with_score(0.1), Status::Normal),
        (NormalizedFeatures::with_score(0.9), Status::Seizure),
    ];
    assert_eq!(train_gamma(&wide, 0.01, unit_bounds()).unwrap().gamma, 0.3);
}

#[test]
fn gamma_training_rejects_single_class() {
    let samples = [(NormalizedFeatures::with_score(0.2), Status::Normal)];
    assert_eq!(
        train_gamma(&samples, 0.01, unit_bounds()).unwrap_err(),
        FfcError::SingleClass
    );
}

#[test]
fn cross_validation_on_synthetic_eeg() {
    let set = synthetic_set(100, 4097);
    let report = cross_validate(&set, 5, ClassifierKind::Ffc { grid_step: 0.01 }, 7).unwrap();
    assert_eq!(report.fold_accuracy.len(), 5);
    assert_eq!(report.confusion.total(), 300);
    assert!(report.mean_accuracy >= 0.99, "{}", report.mean_accuracy);
    for kind in [ClassifierKind::Knn { neighbors: 3 }, ClassifierKind::Gnb] {
        assert!(cross_validate(&set, 5, kind, 7).unwrap().mean_accuracy >= 0.95);
    }
}

#[test]
fn permuted_labels_fall_to_chance() {
    let mut set = synthetic_set(50, 1024);
    let mut statuses: Vec<Status> = set.iter().map(|s| s.status).collect();
    statuses.shuffle(&mut ChaCha8Rng::seed_from_u64(99));
    for (s, st) in set.iter_mut().zip(statuses) {
        s.status = st;
    }
    let report = cross_validate(&set, 5, ClassifierKind::Ffc { grid_step: 0.01 }, 7).unwrap();
    assert!(report.mean_accuracy < 0.8, "{}", report.mean_accuracy);
}

#[test]
fn sweep_endpoints_follow_class_counts() {
    let set = synthetic_set(100, 2048);
    let grid = gamma_grid(0.05).unwrap();
    assert_eq!(grid.len(), 21);
    let sweep = eval_gamma_sweep(&set, 5, &grid, 7).unwrap();
    assert_eq!(sweep.last().unwrap().accuracy, 2.0 / 3.0);
    assert!(sweep[0].accuracy <= 0.40);
}

#[test]
fn trained_gamma_matches_counting_oracle() {
    let set = synthetic_set(30, 1024);
    let feats: Vec<FeatureVector> = set.iter().map(|s| s.features).collect();
    let bounds = fit_bounds(&feats).unwrap();
    let samples: Vec<(NormalizedFeatures, Status)> = set
        .iter()
        .map(|s| (normalize(&s.features, &bounds), s.status))
        .collect();
    let scores: Vec<(f64, Status)> = samples.iter().map(|(n, s)| (n.score, *s)).collect();
    let grid = gamma_grid(0.01).unwrap();
    let model = train_gamma(&samples, 0.01, bounds).unwrap();
    assert_eq!(model.gamma, counting_oracle(&scores, &grid));
}

#[test]
fn folds_partition_and_stratify() {
    let statuses: Vec<Status> = (0..300)
        .map(|i| if i < 200 { Status::Normal } else { Status::Seizure })
        .collect();
    let folds = stratified_folds(&statuses, 5, 3).unwrap();
    let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..300).collect::<Vec<_>>());
    for f in &folds {
        assert_eq!(f.len(), 60);
        assert_eq!(f.iter().filter(|&&i| statuses[i] == Status::Seizure).count(), 20);
    }
    assert_eq!(folds, stratified_folds(&statuses, 5, 3).unwrap());
    assert_ne!(folds, stratified_folds(&statuses, 5, 4).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalized_scores_in_unit_interval(values in prop::collection::vec(prop::array::uniform5(0.0f64..1e6), 2..40)) {
        let feats: Vec<FeatureVector> = values.iter().map(|v| FeatureVector::from_array(*v, Band::default())).collect();
        let bounds = fit_bounds(&feats).unwrap();
        for f in &feats {
            let n = normalize(f, &bounds);
            prop_assert!((0.0..=1.0).contains(&n.score));
            prop_assert!(n.values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn normalization_is_scale_invariant(values in prop::collection::vec(prop::array::uniform5(1.0f64..1e3), 2..30), k in 0.01f64..100.0) {
        let feats: Vec<FeatureVector> = values.iter().map(|v| FeatureVector::from_array(*v, Band::default())).collect();
        let scaled: Vec<FeatureVector> = feats.iter().map(|f| f.scaled(k)).collect();
        let b1 = fit_bounds(&feats).unwrap();
        let b2 = fit_bounds(&scaled).unwrap();
        for (f, g) in feats.iter().zip(&scaled) {
            prop_assert!((normalize(f, &b1).score - normalize(g, &b2).score).abs() < 1e-9);
        }
    }

    #[test]
    fn score_is_monotone_in_each_feature(base in prop::array::uniform5(0.0f64..1.0), idx in 0usize..5, bump in 0.0f64..0.5) {
        let bounds = unit_bounds();
        let mut higher = base;
        higher[idx] += bump;
        let a = normalize(&FeatureVector::from_array(base, Band::default()), &bounds).score;
        let b = normalize(&FeatureVector::from_array(higher, Band::default()), &bounds).score;
        prop_assert!(b >= a);
    }

    #[test]
    fn accuracy_at_gamma_one_is_normal_fraction(scores in prop::collection::vec((0.0f64..=1.0, any::<bool>()), 1..60)) {
        let samples: Vec<(NormalizedFeatures, Status)> = scores
            .iter()
            .map(|(s, seiz)| (NormalizedFeatures::with_score(*s), if *seiz { Status::Seizure } else { Status::Normal }))
            .collect();
        let normal = samples.iter().filter(|(_, s)| *s == Status::Normal).count();
        prop_assert_eq!(threshold_accuracy(&samples, 1.0), normal as f64 / samples.len() as f64);
    }
}
