use gencs::qrs::{
    bandstop_cascade, cascade_samples, detect_r_peaks_with, filter_matrix, highpass_samples,
    DetectorConfig, FilterVariant,
};
use gencs::signal::{synthesize_ecg, SampledSignal, SyntheticEcgSpec};
use proptest::prelude::*;

fn variant() -> impl Strategy<Value = FilterVariant> {
    prop_oneof![Just(FilterVariant::Canonical), Just(FilterVariant::Verbatim)]
}

fn samples(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, len)
}

/// Agreement within `tol`, relative to magnitudes above one.
fn close(a: &[f64], b: &[f64], tol: f64) -> Result<(), TestCaseError> {
    prop_assert_eq!(a.len(), b.len());
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let scale = x.abs().max(y.abs()).max(1.0);
        prop_assert!((x - y).abs() <= tol * scale, "index {}: {} vs {}", i, x, y);
    }
    Ok(())
}

pub fn cascade_is_linear() {
    proptest!(super::config(), |((x, y) in (1usize..300).prop_flat_map(|n| (samples(n..n + 1), samples(n..n + 1))), a in -3.0..3.0f64, b in -3.0..3.0f64, v in variant())| {
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (cx, cy) = (cascade_samples(&x, v), cascade_samples(&y, v));
        let sum: Vec<f64> = cx.iter().zip(&cy).map(|(p, q)| a * p + b * q).collect();
        close(&cascade_samples(&mix, v), &sum, 1e-9)?;
    });
}

pub fn matrix_equals_stream() {
    proptest!(super::config(), |(x in samples(33..200), v in variant())| {
        let f = filter_matrix::<f64>(x.len(), v).unwrap();
        close(&f.apply(&x).unwrap(), &cascade_samples(&x, v), 1e-9)?;
    });
}

pub fn canonical_highpass_rejects_dc() {
    proptest!(super::config(), |(c in -100.0..100.0f64, len in 40usize..400)| {
        let z = highpass_samples(&vec![c; len], FilterVariant::Canonical);
        for &v in &z[32..] {
            prop_assert!(v.abs() <= 1e-9, "steady state {}", v);
        }
    });
}

pub fn zero_prefix_shifts_output() {
    proptest!(super::config(), |(x in samples(1..200), k in 0usize..64, v in variant())| {
        let mut shifted = vec![0.0; k];
        shifted.extend_from_slice(&x);
        let out = cascade_samples(&shifted, v);
        prop_assert!(out[..k].iter().all(|&s| s == 0.0));
        prop_assert_eq!(&out[k..], &cascade_samples(&x, v)[..]);
    });
}

pub fn detections_respect_refractory() {
    proptest!(super::config(), |(seed in any::<u64>(), hr in 40.0..180.0f64, jitter in 0.0..0.15f64, noise in 0.0..0.3f64, threshold in 0.1..0.9f64, refractory in 0.05..0.4f64)| {
        let spec = SyntheticEcgSpec { mean_hr: hr, hr_jitter: jitter, noise_std: noise, ..SyntheticEcgSpec::clean(8.0, seed) };
        let (x, _) = synthesize_ecg(&spec).unwrap();
        let z = bandstop_cascade(&x, FilterVariant::Canonical).unwrap();
        let cfg = DetectorConfig { threshold_fraction: threshold, refractory_s: refractory, ..DetectorConfig::default() };
        let gap = (refractory * 200.0).round() as usize;
        let peaks = detect_r_peaks_with(&z, &cfg).unwrap().r_peaks;
        for w in peaks.windows(2) {
            prop_assert!(w[1] > w[0] && w[1] - w[0] >= gap, "{:?} closer than {}", w, gap);
        }
        // Pure noise too.
        let noisy = SampledSignal::new(x.samples().iter().map(|v| v.sin() * noise).collect(), 200.0).unwrap();
        let peaks = detect_r_peaks_with(&noisy, &cfg).unwrap().r_peaks;
        prop_assert!(peaks.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] >= gap));
    });
}
