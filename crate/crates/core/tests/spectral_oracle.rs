use std::f64::consts::PI;

use medge_core::signal::{gen_synthetic_eeg, Label, SignalWindow};
use medge_core::spectral::{
    band_bins, extract_ff, magnitude_spectrum, magnitude_spectrum_of, read_feature_table, window_features,
    write_feature_table, Band, FeatureRow,
};
use proptest::prelude::*;

/// O(N^2) single-sided magnitudes of the mean-removed signal, bins 1..=N/2.
fn brute_force_magnitudes(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    (1..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let ang = -2.0 * PI * (k * t) as f64 / n as f64;
                re += (v - mean) * ang.cos();
                im += (v - mean) * ang.sin();
            }
            2.0 / n as f64 * (re * re + im * im).sqrt()
        })
        .collect()
}

fn pseudo_signal(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}

#[test]
fn bin_aligned_sinusoid_has_single_peak_of_amplitude() {
    let n = 256;
    let rate = 256.0;
    let x: Vec<f64> = (0..n)
        .map(|t| 3.0 * (2.0 * PI * 16.0 * t as f64 / n as f64).sin())
        .collect();
    let spectrum = magnitude_spectrum_of(&x, rate).unwrap();
    let m = spectrum.magnitudes();
    assert_eq!(m.len(), 128);
    assert!((spectrum.frequency(15) - 16.0).abs() < 1e-12);
    assert!((m[15] - 3.0).abs() < 1e-9);
    for (i, v) in m.iter().enumerate() {
        if i != 15 {
            assert!(v.abs() < 1e-9, "bin {i}: {v}");
        }
    }
}

#[test]
fn fft_matches_brute_force_dft() {
    for (n, seed) in [(64, 1), (100, 2), (257, 3), (4097, 4)] {
        let x = pseudo_signal(n, seed);
        let fast = magnitude_spectrum_of(&x, 173.61).unwrap();
        let slow = brute_force_magnitudes(&x);
        assert_eq!(fast.magnitudes().len(), slow.len());
        for (a, b) in fast.magnitudes().iter().zip(&slow) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b), "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn parseval_for_odd_length() {
    let x = pseudo_signal(255, 9);
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let time_energy: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    let spectrum = magnitude_spectrum_of(&x, 100.0).unwrap();
    // each single-sided bin a_k carries (n * a_k / 2)^2 * 2 / n of energy
    let freq_energy: f64 = spectrum.magnitudes().iter().map(|a| n * a * a / 2.0).sum();
    assert!((time_energy - freq_energy).abs() < 1e-9 * time_energy);
}

#[test]
fn features_of_known_spectrum() {
    let x: Vec<f64> = (0..200)
        .map(|t| {
            let t = t as f64 / 100.0;
            2.0 * (2.0 * PI * 5.0 * t).sin() + (2.0 * PI * 20.0 * t).cos()
        })
        .collect();
    let spectrum = magnitude_spectrum_of(&x, 100.0).unwrap();
    let band = Band { lo: 1.0, hi: 30.0 };
    let fv = extract_ff(&spectrum, band).unwrap();
    let range = band_bins(&spectrum, band).unwrap();
    let k = range.len() as f64;
    assert_eq!(range.len(), 59);
    assert!((fv.peak - 2.0).abs() < 1e-9);
    assert!((fv.energy - 5.0).abs() < 1e-9);
    assert!((fv.mu - 3.0 / k).abs() < 1e-9);
    assert!(fv.med.abs() < 1e-9);
    assert!((fv.rms - (5.0 / k).sqrt()).abs() < 1e-9);
}

#[test]
fn seizure_windows_carry_more_in_band_energy() {
    let set = gen_synthetic_eeg(10, 1024, 173.61, 3).unwrap();
    let band = Band::default();
    let mut normal = Vec::new();
    let mut seizure = Vec::new();
    for r in set.records() {
        let oracle: f64 = brute_force_magnitudes(r.samples())
            .iter()
            .enumerate()
            .filter(|(i, _)| band.contains((i + 1) as f64 * r.rate() / r.len() as f64))
            .map(|(_, a)| a * a)
            .sum();
        let fv = window_features(&r.as_window().unwrap(), band).unwrap();
        assert!((fv.energy - oracle).abs() < 1e-8 * oracle);
        match r.label() {
            Label::Seizure => seizure.push(oracle),
            _ => normal.push(oracle),
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&seizure) > mean(&normal));
}

#[test]
fn feature_table_round_trip() {
    let set = gen_synthetic_eeg(2, 512, 173.61, 1).unwrap();
    let rows: Vec<FeatureRow> = set
        .records()
        .iter()
        .map(|r| FeatureRow {
            source_id: r.source_id().to_string(),
            label: r.label(),
            features: window_features(&r.as_window().unwrap(), Band::default()).unwrap(),
        })
        .collect();
    let text = write_feature_table(&rows);
    let back = read_feature_table(text.as_bytes(), Band::default()).unwrap();
    assert_eq!(back.len(), rows.len());
    for (a, b) in rows.iter().zip(&back) {
        assert_eq!(a.source_id, b.source_id);
        assert_eq!(a.label, b.label);
        for (x, y) in a.features.to_array().iter().zip(b.features.to_array()) {
            assert!((x - y).abs() <= 1e-8 * x.abs());
        }
    }
    assert_eq!(write_feature_table(&back), text);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_is_linear_in_amplitude(xs in prop::collection::vec(-100.0f64..100.0, 16..300), k in 0.01f64..50.0) {
        let a = magnitude_spectrum_of(&xs, 128.0).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|v| v * k).collect();
        let b = magnitude_spectrum_of(&scaled, 128.0).unwrap();
        for (p, q) in a.magnitudes().iter().zip(b.magnitudes()) {
            prop_assert!((p * k - q).abs() <= 1e-9 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn spectrum_ignores_dc_offset(xs in prop::collection::vec(-100.0f64..100.0, 16..300), c in -1e3f64..1e3) {
        let a = magnitude_spectrum_of(&xs, 128.0).unwrap();
        let shifted: Vec<f64> = xs.iter().map(|v| v + c).collect();
        let b = magnitude_spectrum_of(&shifted, 128.0).unwrap();
        for (p, q) in a.magnitudes().iter().zip(b.magnitudes()) {
            prop_assert!((p - q).abs() <= 1e-8 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn circular_shift_preserves_magnitudes(xs in prop::collection::vec(-10.0f64..10.0, 16..200), shift in 0usize..200) {
        let mut rotated = xs.clone();
        rotated.rotate_left(shift % xs.len());
        let a = magnitude_spectrum_of(&xs, 64.0).unwrap();
        let b = magnitude_spectrum_of(&rotated, 64.0).unwrap();
        for (p, q) in a.magnitudes().iter().zip(b.magnitudes()) {
            prop_assert!((p - q).abs() <= 1e-9 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn features_are_ordered_and_non_negative(xs in prop::collection::vec(-10.0f64..10.0, 64..400)) {
        let w = SignalWindow::from_slice(&xs, 100.0, Label::Unlabeled, "p").unwrap();
        let spectrum = magnitude_spectrum(&w).unwrap();
        let fv = extract_ff(&spectrum, Band { lo: 0.5, hi: 40.0 }).unwrap();
        prop_assert!(fv.mu >= 0.0 && fv.med >= 0.0 && fv.energy >= 0.0);
        prop_assert!(fv.peak >= fv.rms - 1e-12);
        prop_assert!(fv.rms >= fv.mu - 1e-12);
        prop_assert!(fv.peak >= fv.med);
    }
}
