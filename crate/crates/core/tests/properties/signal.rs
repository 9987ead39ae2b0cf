use gencs::model::BeatTemplate;
use gencs::signal::{resample, synthesize_ecg, SampledSignal, SyntheticEcgSpec};
use proptest::prelude::*;

fn spec() -> impl Strategy<Value = SyntheticEcgSpec<f64>> {
    (4.0..20.0f64, 40.0..150.0f64, 0.0..0.1f64, 0.0..0.05f64, any::<u64>()).prop_map(
        |(duration, mean_hr, hr_jitter, noise_std, seed)| SyntheticEcgSpec {
            duration,
            fs: 200.0,
            mean_hr,
            hr_jitter,
            noise_std,
            template: BeatTemplate::default_ecg(),
            seed,
        },
    )
}

pub fn synthesis_is_a_function_of_the_spec() {
    proptest!(super::config(), |(s in spec())| {
        let a = synthesize_ecg(&s).unwrap();
        let b = synthesize_ecg(&s.clone()).unwrap();
        prop_assert_eq!(a.0.samples(), b.0.samples());
        prop_assert_eq!(a.1.r_peaks, b.1.r_peaks);
    });
}

pub fn truth_sits_on_local_maxima() {
    proptest!(super::config(), |(mut s in spec())| {
        s.noise_std = 0.0;
        let (x, gt) = synthesize_ecg(&s).unwrap();
        let v = x.samples();
        for &p in &gt.r_peaks {
            if p < 2 || p + 2 >= v.len() {
                continue;
            }
            let is_max = (p - 1..=p + 1).any(|i| v[i] >= v[i - 1] && v[i] >= v[i + 1]);
            prop_assert!(is_max, "no local maximum within 1 sample of {}", p);
        }
    });
}

pub fn resample_round_trip_keeps_slow_sinusoids() {
    proptest!(super::config(), |(rates in prop::sample::subsequence(vec![200.0, 250.0, 360.0, 500.0, 1000.0f64], 2), swap in any::<bool>(), frac in 0.001..0.04f64, phase in 0.0..std::f64::consts::TAU, secs in 2.0..6.0f64)| {
        let (a, b) = if swap { (rates[1], rates[0]) } else { (rates[0], rates[1]) };
        let f = frac * a.min(b);
        let n = (secs * a) as usize;
        let x: Vec<f64> = (0..n)
            .map(|i| (std::f64::consts::TAU * f * i as f64 / a + phase).sin())
            .collect();
        let sig = SampledSignal::new(x.clone(), a).unwrap();
        let back = resample(&resample(&sig, b).unwrap(), a).unwrap();
        prop_assert_eq!(back.fs(), a);
        // The final source interval is held, not interpolated.
        let tail = (a / b).ceil() as usize + 2;
        let len = back.len().min(n) - tail;
        let err: f64 = (0..len).map(|i| (back.samples()[i] - x[i]).powi(2)).sum();
        let energy: f64 = x[..len].iter().map(|v| v * v).sum();
        prop_assert!((err / energy).sqrt() < 1e-2, "relative rms {}", (err / energy).sqrt());
    });
}
