//! Ground-truth synthetic ECG from a sum-of-Gaussians beat model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{GroundTruth, SampledSignal};
use crate::error::{Error, Result};
use crate::model::{local_rr_samples, BeatTemplate, RR_RANGE};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticEcgSpec<T> {
    /// Seconds.
    pub duration: T,
    /// Hz.
    pub fs: T,
    /// Beats per minute, 30 to 220.
    pub mean_hr: T,
    /// Standard deviation of RR intervals as a fraction of the mean.
    pub hr_jitter: T,
    /// Additive white noise, millivolts.
    pub noise_std: T,
    pub template: BeatTemplate<T>,
    pub seed: u64,
}

impl<T: Real> SyntheticEcgSpec<T> {
    /// Clean 60 bpm recording with the default morphology.
    pub fn clean(duration: T, seed: u64) -> Self {
        Self {
            duration,
            fs: T::lit(200.0),
            mean_hr: T::lit(60.0),
            hr_jitter: T::zero(),
            noise_std: T::zero(),
            template: BeatTemplate::default_ecg(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fs > T::zero()) || !self.fs.is_finite() {
            return Err(Error::invalid("fs", "must be positive"));
        }
        let hr = self.mean_hr.to_f64_lossy();
        if !(30.0..=220.0).contains(&hr) {
            return Err(Error::invalid("mean_hr", format!("{hr} bpm outside [30, 220]")));
        }
        if !(self.hr_jitter >= T::zero()) || !self.hr_jitter.is_finite() {
            return Err(Error::invalid("hr_jitter", "must be non-negative"));
        }
        if !(self.noise_std >= T::zero()) || !self.noise_std.is_finite() {
            return Err(Error::invalid("noise_std", "must be non-negative"));
        }
        if !(self.duration > T::zero()) || !self.duration.is_finite() {
            return Err(Error::invalid("duration", "must be positive"));
        }
        let beat = T::lit(60.0) / self.mean_hr;
        if self.duration * self.fs < beat * self.fs {
            return Err(Error::invalid(
                "duration",
                "shorter than one beat at the mean heart rate",
            ));
        }
        self.template
            .validate()
            .map_err(|e| Error::invalid("template", e.to_string()))
    }

    pub fn len(&self) -> usize {
        (self.duration * self.fs).round().to_usize().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Draws the RR sequence in seconds until the accumulated peak times pass
/// `len` samples. The first R peak sits half an interval after time zero.
fn draw_peaks<T: Real>(spec: &SyntheticEcgSpec<T>, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let fs = spec.fs.to_f64_lossy();
    let mean_rr = 60.0 / spec.mean_hr.to_f64_lossy();
    let sd = spec.hr_jitter.to_f64_lossy() * mean_rr;
    let len = spec.len();
    let mut draw = || {
        let z: f64 = StandardNormal.sample(&mut *rng);
        (mean_rr + sd * z).clamp(RR_RANGE.0, RR_RANGE.1)
    };
    let mut peaks = Vec::new();
    let mut t = draw() / 2.0;
    loop {
        let idx = (t * fs).round();
        if idx >= len as f64 {
            break;
        }
        peaks.push(idx as usize);
        t += draw();
    }
    peaks
}

/// Generates an ECG-like signal and the exact R-peak positions used.
///
/// R peaks fall on sample instants; each beat is rendered with its local RR
/// (mean of the adjacent intervals) and neighbouring beats are superposed.
pub fn synthesize_ecg<T: Real>(
    spec: &SyntheticEcgSpec<T>,
) -> Result<(SampledSignal<T>, GroundTruth<T>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let peaks = draw_peaks(spec, &mut rng);
    let n = spec.len();
    let fs = spec.fs;
    let mut samples = vec![T::zero(); n];

    let default_rr = T::lit(60.0) / spec.mean_hr;
    for k in 0..peaks.len() {
        let rr = local_rr_samples(&peaks, k)
            .map(|s| T::lit(s) / fs)
            .unwrap_or(default_rr);
        // Beyond 1.5 intervals every wave has decayed below f64 resolution.
        let reach = (T::lit(1.5) * rr.max(spec.template.reference_rr) * fs)
            .ceil()
            .to_usize()
            .unwrap_or(0);
        let p = peaks[k];
        let lo = p.saturating_sub(reach);
        let hi = (p + reach + 1).min(n);
        for (i, s) in samples.iter_mut().enumerate().take(hi).skip(lo) {
            let offset = (T::from_usize_lossy(i) - T::from_usize_lossy(p)) / fs;
            *s += spec.template.value_at(offset, rr);
        }
    }

    if spec.noise_std > T::zero() {
        let sd = spec.noise_std.to_f64_lossy();
        for s in samples.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *s += T::lit(sd * z);
        }
    }

    let signal = SampledSignal::new(samples, fs)?;
    let truth = GroundTruth::from_peaks(peaks, fs)?;
    Ok((signal, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_case_has_evenly_spaced_peaks() {
        let spec = SyntheticEcgSpec::<f64>::clean(10.0, 1);
        let (sig, gt) = synthesize_ecg(&spec).unwrap();
        assert_eq!(sig.len(), 2000);
        let expected: Vec<usize> = (0..10).map(|k| 100 + 200 * k).collect();
        assert_eq!(gt.r_peaks, expected);
        assert!(gt.rr_intervals.iter().all(|&rr| rr == 1.0));
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let mut spec = SyntheticEcgSpec::<f64>::clean(10.0, 1);
        spec.hr_jitter = 0.05;
        spec.noise_std = 0.02;
        let a = synthesize_ecg(&spec).unwrap();
        let b = synthesize_ecg(&spec).unwrap();
        assert_eq!(a, b);
        spec.seed = 2;
        assert_ne!(synthesize_ecg(&spec).unwrap().1, a.1);
    }

    #[test]
    fn jitter_statistics_match_rng_draws() {
        let mut spec = SyntheticEcgSpec::<f64>::clean(302.0, 7);
        spec.hr_jitter = 0.05;
        let (_, gt) = synthesize_ecg(&spec).unwrap();
        assert!(gt.r_peaks.len() >= 300);

        // Independent replay of the RNG stream.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws: Vec<f64> = (0..gt.r_peaks.len())
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (1.0 + 0.05 * z).clamp(0.3, 2.0)
            })
            .collect();
        let mut t = draws[0] / 2.0;
        let mut replay = vec![(t * 200.0).round() as usize];
        for d in &draws[1..] {
            t += d;
            replay.push((t * 200.0).round() as usize);
        }
        assert_eq!(replay, gt.r_peaks);

        let rr: Vec<f64> = gt.r_peaks[..301]
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64)
            .collect();
        let mean = rr.iter().sum::<f64>() / rr.len() as f64;
        let sd = (rr.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (rr.len() - 1) as f64).sqrt();
        assert!((sd - 10.0).abs() <= 2.0, "RR sd {sd} samples");
    }

    #[test]
    fn peaks_are_local_maxima() {
        let mut spec = SyntheticEcgSpec::<f64>::clean(20.0, 3);
        spec.hr_jitter = 0.1;
        spec.mean_hr = 95.0;
        let (sig, gt) = synthesize_ecg(&spec).unwrap();
        let s = sig.samples();
        for &p in &gt.r_peaks {
            let lo = p.saturating_sub(3);
            let hi = (p + 4).min(s.len());
            let best = (lo..hi).max_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap()).unwrap();
            assert!((best as i64 - p as i64).abs() <= 1);
        }
    }

    #[test]
    fn validation_names_field() {
        let mut spec = SyntheticEcgSpec::<f64>::clean(10.0, 1);
        spec.mean_hr = 250.0;
        match synthesize_ecg(&spec) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "mean_hr"),
            other => panic!("{other:?}"),
        }
        let mut spec = SyntheticEcgSpec::<f64>::clean(0.5, 1);
        spec.mean_hr = 60.0;
        assert!(matches!(
            synthesize_ecg(&spec),
            Err(Error::Validation { field: "duration", .. })
        ));
        let mut spec = SyntheticEcgSpec::<f64>::clean(10.0, 1);
        spec.noise_std = -0.1;
        assert!(matches!(
            synthesize_ecg(&spec),
            Err(Error::Validation { field: "noise_std", .. })
        ));
    }
}
