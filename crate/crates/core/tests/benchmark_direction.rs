use medge_core::benchmark::{run_modality_benchmark, BenchConfig, Scheme};
use medge_core::signal::gen_synthetic_multimodal;

fn eeg_advantage(cross_gain: f64) -> f64 {
    let mm = gen_synthetic_multimodal(200, 32, cross_gain, 0.1, 11).unwrap();
    let table = run_modality_benchmark(&mm, &[4], &BenchConfig::default()).unwrap();
    assert_eq!((table.n_train, table.n_test), (160, 40));
    assert_eq!(table.rows.len(), 4);
    table.prd(4, Scheme::Separate, "EEG").unwrap() - table.prd(4, Scheme::Joint, "EEG").unwrap()
}

#[test]
fn joint_code_helps_only_when_modalities_correlate() {
    let coupled = eeg_advantage(0.9);
    let independent = eeg_advantage(0.0);
    assert!(coupled > 0.0, "coupled advantage {coupled}");
    assert!(coupled > independent, "coupled {coupled} independent {independent}");
}

#[test]
fn benchmark_is_deterministic() {
    let mm = gen_synthetic_multimodal(60, 16, 0.5, 0.1, 2).unwrap();
    let cfg = BenchConfig {
        train: medge_core::sae::TrainConfig {
            epochs: 5,
            ..BenchConfig::default().train
        },
        ..BenchConfig::default()
    };
    let a = run_modality_benchmark(&mm, &[2, 4], &cfg).unwrap();
    let b = run_modality_benchmark(&mm, &[2, 4], &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv().lines().count(), 1 + 2 * 4);
}
