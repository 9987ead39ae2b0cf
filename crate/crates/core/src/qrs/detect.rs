use std::collections::VecDeque;

use super::{group_delay, FilterVariant};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::{GroundTruth, SampledSignal};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Fraction of the trailing maximum a candidate must exceed.
    pub threshold_fraction: f64,
    pub refractory_s: f64,
    /// Length of the trailing maximum window; also the minimum input length.
    pub window_s: f64,
    /// Subtracted from every detected index.
    pub delay: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            threshold_fraction: 0.5,
            refractory_s: 0.2,
            window_s: 2.0,
            delay: group_delay(FilterVariant::Canonical),
        }
    }
}

impl DetectorConfig {
    pub fn with_delay(delay: usize) -> Self {
        Self {
            delay,
            ..Self::default()
        }
    }
}

/// Detects R peaks on the output of the canonical cascade, compensating its
/// group delay.
pub fn detect_r_peaks<T: Real>(z: &SampledSignal<T>) -> Result<GroundTruth<T>> {
    detect_r_peaks_with(z, &DetectorConfig::default())
}

/// Local maxima of `|z|` above `threshold_fraction` of the trailing-window
/// maximum, at least `refractory_s` apart. Within a refractory period the
/// larger candidate wins. The first window doubles as the learning period.
pub fn detect_r_peaks_with<T: Real>(
    z: &SampledSignal<T>,
    cfg: &DetectorConfig,
) -> Result<GroundTruth<T>> {
    let fs = z.fs().to_f64_lossy();
    let win = (cfg.window_s * fs).round() as usize;
    if z.len() < win {
        return Err(Error::invalid(
            "z",
            format!("{} samples; detection needs at least {win}", z.len()),
        ));
    }
    let refractory = (cfg.refractory_s * fs).round() as usize;
    let theta = T::lit(cfg.threshold_fraction);
    let a: Vec<T> = z.samples().iter().map(|v| v.abs()).collect();
    let n = a.len();
    let initial_max = a[..win.max(1)].iter().copied().fold(T::zero(), T::max);

    let mut accepted: Vec<usize> = Vec::new();
    let mut deque: VecDeque<usize> = VecDeque::new();
    for i in 0..n {
        while deque.back().is_some_and(|&j| a[j] <= a[i]) {
            deque.pop_back();
        }
        deque.push_back(i);
        while deque.front().is_some_and(|&j| j + win <= i) {
            deque.pop_front();
        }
        let running = if i + 1 < win { initial_max } else { a[deque[0]] };

        let left = if i > 0 { a[i - 1] } else { T::zero() };
        let right = if i + 1 < n { a[i + 1] } else { T::zero() };
        let is_peak = a[i] > T::zero() && a[i] >= left && a[i] > right;
        if !is_peak || !(a[i] > theta * running) {
            continue;
        }
        match accepted.last_mut() {
            Some(last) if i - *last < refractory => {
                if a[i] > a[*last] {
                    *last = i;
                }
            }
            _ => accepted.push(i),
        }
    }
    let peaks = accepted
        .into_iter()
        .filter_map(|i| i.checked_sub(cfg.delay))
        .collect();
    GroundTruth::from_peaks(peaks, z.fs())
}

/// Moves each peak to the extremum of `polarity · x` within `±radius` samples,
/// dropping any that collapse onto an earlier one.
pub fn refine_peaks<T: Real>(
    x: &SampledSignal<T>,
    peaks: &GroundTruth<T>,
    radius: usize,
    polarity: T,
) -> Result<GroundTruth<T>> {
    let s = x.samples();
    let mut out: Vec<usize> = Vec::with_capacity(peaks.len());
    for &p in &peaks.r_peaks {
        if p >= s.len() {
            continue;
        }
        let lo = p.saturating_sub(radius);
        let hi = (p + radius + 1).min(s.len());
        let mut best = p;
        for i in lo..hi {
            if polarity * s[i] > polarity * s[best] {
                best = i;
            }
        }
        if out.last().is_none_or(|&q| best > q) {
            out.push(best);
        }
    }
    GroundTruth::from_peaks(out, x.fs())
}

/// Peaks of a raw signal: cascade, detect with the cascade's delay removed,
/// then snap to the raw extremum within ±50 ms.
pub fn locate_r_peaks<T: Real>(
    x: &SampledSignal<T>,
    variant: FilterVariant,
    polarity: T,
) -> Result<GroundTruth<T>> {
    let z = super::bandstop_cascade(x, variant)?;
    let coarse = detect_r_peaks_with(&z, &DetectorConfig::with_delay(group_delay(variant)))?;
    let radius = (0.05 * x.fs().to_f64_lossy()).round() as usize;
    refine_peaks(x, &coarse, radius, polarity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qrs::bandstop_cascade;
    use crate::signal::{synthesize_ecg, SyntheticEcgSpec};

    #[test]
    fn zero_signal_has_no_peaks() {
        let z = SampledSignal::new(vec![0.0f64; 1000], 200.0).unwrap();
        assert!(detect_r_peaks(&z).unwrap().is_empty());
    }

    #[test]
    fn short_signal_rejected() {
        let z = SampledSignal::new(vec![0.0f64; 399], 200.0).unwrap();
        assert!(detect_r_peaks(&z).is_err());
    }

    #[test]
    fn clean_ecg_constant_offset() {
        let (x, gt) = synthesize_ecg(&SyntheticEcgSpec::<f64>::clean(10.0, 1)).unwrap();
        let z = bandstop_cascade(&x, FilterVariant::Canonical).unwrap();
        let det = detect_r_peaks(&z).unwrap();
        assert_eq!(det.len(), 10);
        let offset = det.r_peaks[0] as i64 - gt.r_peaks[0] as i64;
        for (d, t) in det.r_peaks.iter().zip(&gt.r_peaks) {
            assert!((*d as i64 - *t as i64 - offset).abs() <= 1);
        }
    }

    #[test]
    fn fast_rhythm_not_merged() {
        let mut spec = SyntheticEcgSpec::<f64>::clean(10.0, 1);
        spec.mean_hr = 180.0;
        let (x, gt) = synthesize_ecg(&spec).unwrap();
        let z = bandstop_cascade(&x, FilterVariant::Canonical).unwrap();
        let det = detect_r_peaks(&z).unwrap();
        assert_eq!(det.len(), gt.len());
        for w in det.r_peaks.windows(2) {
            assert!(w[1] - w[0] >= 40);
        }
    }

    #[test]
    fn locate_on_raw_signal_is_exact() {
        let mut spec = SyntheticEcgSpec::<f64>::clean(20.0, 4);
        spec.hr_jitter = 0.05;
        let (x, gt) = synthesize_ecg(&spec).unwrap();
        assert_eq!(locate_r_peaks(&x, FilterVariant::Canonical, 1.0).unwrap(), gt);
    }

    #[test]
    fn refine_snaps_to_raw_maximum() {
        let (x, gt) = synthesize_ecg(&SyntheticEcgSpec::<f64>::clean(10.0, 1)).unwrap();
        let shifted = GroundTruth::from_peaks(gt.r_peaks.iter().map(|p| p + 3).collect(), 200.0).unwrap();
        assert_eq!(refine_peaks(&x, &shifted, 5, 1.0).unwrap(), gt);
    }
}
