use gencs::model::{
    beat_center, decoded_peaks, gemrem_decode, gemrem_encode_with_peaks, reconstruct,
    render_beat, BeatTemplate, GemremConfig, RR_RANGE,
};
use gencs::qrs::{locate_r_peaks, FilterVariant};
use gencs::signal::{synthesize_ecg, GroundTruth, SyntheticEcgSpec};
use proptest::prelude::*;

/// Default morphology with the R wave rescaled and optionally inverted.
fn template() -> impl Strategy<Value = BeatTemplate<f64>> {
    (0.7..1.6f64, any::<bool>()).prop_map(|(scale, invert)| {
        let mut t = BeatTemplate::<f64>::default_ecg();
        let r = t.r_index().unwrap();
        t.gaussians[r].amplitude *= scale;
        if invert {
            for g in &mut t.gaussians {
                g.amplitude = -g.amplitude;
            }
        }
        t
    })
}

/// Peaks at RR intervals drawn from `[0.45, 1.3]` s, clear of both edges.
fn peak_train() -> impl Strategy<Value = (Vec<usize>, usize)> {
    (prop::collection::vec(90usize..260, 6..40), 100usize..300).prop_map(|(rr, first)| {
        let mut peaks = vec![first];
        for d in rr {
            peaks.push(peaks.last().unwrap() + d);
        }
        let n = peaks.last().unwrap() + 150;
        (peaks, n)
    })
}

pub fn rendered_beat_peaks_at_centre() {
    proptest!(super::config(), |(t in template(), rr in RR_RANGE.0..RR_RANGE.1, fs in prop_oneof![Just(200.0), Just(250.0), Just(360.0)])| {
        let beat = render_beat(&t, rr, fs).unwrap();
        let pol = t.polarity();
        let v = beat.samples();
        let arg = (0..v.len()).max_by(|&a, &b| (pol * v[a]).total_cmp(&(pol * v[b]))).unwrap();
        prop_assert!(arg.abs_diff(beat_center(rr, fs)) <= 1, "argmax {} centre {}", arg, beat_center(rr, fs));
    });
}

pub fn reconstruction_keeps_its_peaks() {
    proptest!(super::config(), |(t in template(), (peaks, n) in peak_train())| {
        let gt = GroundTruth::from_peaks(peaks.clone(), 200.0).unwrap();
        let y = reconstruct(&t, &gt, n, 200.0).unwrap().signal;
        let found = locate_r_peaks(&y, FilterVariant::Canonical, t.polarity()).unwrap().r_peaks;
        prop_assert_eq!(found.len(), peaks.len());
        for (f, p) in found.iter().zip(&peaks) {
            prop_assert!(f.abs_diff(*p) <= 1, "{} vs {}", f, p);
        }
    });
}

pub fn steady_rhythm_round_trips() {
    proptest!(super::config(), |(hr in 45.0..150.0f64, seed in any::<u64>(), duration in 60.0..90.0f64)| {
        let spec = SyntheticEcgSpec { mean_hr: hr, ..SyntheticEcgSpec::clean(duration, seed) };
        let (x, gt) = synthesize_ecg(&spec).unwrap();
        let cfg = GemremConfig::default();
        let s = gemrem_encode_with_peaks(&x, &gt, &spec.template, &cfg).unwrap();
        let dec = decoded_peaks(&s).unwrap();
        prop_assert_eq!(dec.len(), gt.len());
        // Sample rounding of a steady rate is absorbed by the tolerance.
        let slack = (cfg.hr_tol * 60.0 / hr * 200.0).ceil() as usize;
        for (d, t) in dec.iter().zip(&gt.r_peaks) {
            prop_assert!(d.abs_diff(*t) <= slack, "{} vs {}", d, t);
        }
        prop_assert!(s.escapes.is_empty());
        prop_assert!(s.compression_ratio(&cfg) >= 30.0, "cr {}", s.compression_ratio(&cfg));
        prop_assert_eq!(gemrem_decode(&s, x.len(), 200.0).unwrap().len(), x.len());
    });
}

pub fn zero_tolerance_reproduces_every_interval() {
    proptest!(super::config(), |(t in template(), (peaks, n) in peak_train())| {
        let gt = GroundTruth::from_peaks(peaks.clone(), 200.0).unwrap();
        let x = reconstruct(&t, &gt, n, 200.0).unwrap().signal;
        let cfg = GemremConfig { hr_tol: 0.0, ..GemremConfig::default() };
        let s = gemrem_encode_with_peaks(&x, &gt, &t, &cfg).unwrap();
        prop_assert_eq!(decoded_peaks(&s).unwrap(), peaks);
    });
}

pub fn looser_tolerances_send_less() {
    proptest!(super::config(), |(seed in any::<u64>(), jitter in 0.0..0.1f64, noise in 0.0..0.08f64, tols in (0.0..0.1f64, 0.0..0.1f64), morphs in (0.0..0.2f64, 0.0..0.2f64))| {
        let spec = SyntheticEcgSpec { hr_jitter: jitter, noise_std: noise, mean_hr: 75.0, ..SyntheticEcgSpec::clean(30.0, seed) };
        let (x, gt) = synthesize_ecg(&spec).unwrap();
        let (lo_h, hi_h) = if tols.0 <= tols.1 { tols } else { (tols.1, tols.0) };
        let (lo_m, hi_m) = if morphs.0 <= morphs.1 { morphs } else { (morphs.1, morphs.0) };
        let enc = |hr_tol, morph_tol| {
            let cfg = GemremConfig { hr_tol, morph_tol, ..GemremConfig::default() };
            gemrem_encode_with_peaks(&x, &gt, &spec.template, &cfg).unwrap()
        };
        prop_assert!(enc(hi_h, lo_m).updates.len() <= enc(lo_h, lo_m).updates.len());
        prop_assert!(enc(lo_h, hi_m).escapes.len() <= enc(lo_h, lo_m).escapes.len());
    });
}
