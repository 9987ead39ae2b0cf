//! Signal containers, resampling and framing.

mod synth;

pub use synth::{synthesize_ecg, SyntheticEcgSpec};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Processing rate the QRS filter recurrences are designed for.
pub const CANONICAL_FS: f64 = 200.0;

/// Uniformly sampled real waveform, amplitude in millivolts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal<T> {
    samples: Vec<T>,
    fs: T,
}

impl<T: Real> SampledSignal<T> {
    pub fn new(samples: Vec<T>, fs: T) -> Result<Self> {
        if !(fs > T::zero()) || !fs.is_finite() {
            return Err(Error::invalid("fs", format!("{fs} is not a positive rate")));
        }
        if samples.is_empty() {
            return Err(Error::invalid("samples", "signal must not be empty"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "samples",
                format!("non-finite value at index {i}"),
            ));
        }
        Ok(Self { samples, fs })
    }

    pub fn zeros(len: usize, fs: T) -> Result<Self> {
        Self::new(vec![T::zero(); len], fs)
    }

    #[inline]
    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    #[inline]
    pub fn fs(&self) -> T {
        self.fs
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false for a constructed signal; kept for API symmetry with `len`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> T {
        T::from_usize_lossy(self.len()) / self.fs
    }

    /// Same rate, new samples.
    pub fn with_samples(&self, samples: Vec<T>) -> Result<Self> {
        Self::new(samples, self.fs)
    }

    /// Errors unless the rate equals `expected` to within one part in 10⁹.
    pub fn require_rate(&self, expected: f64) -> Result<()> {
        let actual = self.fs.to_f64_lossy();
        if (actual - expected).abs() > 1e-9 * expected {
            return Err(Error::Rate { expected, actual });
        }
        Ok(())
    }
}

/// R-peak sample indices and the RR intervals between them.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T> {
    pub r_peaks: Vec<usize>,
    pub rr_intervals: Vec<T>,
}

impl<T: Real> GroundTruth<T> {
    pub fn from_peaks(r_peaks: Vec<usize>, fs: T) -> Result<Self> {
        if let Some(w) = r_peaks.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "r_peaks",
                format!("indices not strictly increasing at position {}", w + 1),
            ));
        }
        let rr_intervals = r_peaks
            .windows(2)
            .map(|w| T::from_usize_lossy(w[1] - w[0]) / fs)
            .collect();
        Ok(Self {
            r_peaks,
            rr_intervals,
        })
    }

    pub fn empty() -> Self {
        Self {
            r_peaks: Vec::new(),
            rr_intervals: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.r_peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_peaks.is_empty()
    }
}

/// Linear-interpolation resampling to `target_fs`.
pub fn resample<T: Real>(sig: &SampledSignal<T>, target_fs: T) -> Result<SampledSignal<T>> {
    if !(target_fs > T::zero()) || !target_fs.is_finite() {
        return Err(Error::invalid(
            "target_fs",
            format!("{target_fs} is not a positive rate"),
        ));
    }
    if target_fs == sig.fs {
        return Ok(sig.clone());
    }
    let src = sig.samples();
    let ratio = sig.fs / target_fs;
    let out_len = (T::from_usize_lossy(src.len()) * target_fs / sig.fs)
        .round()
        .to_usize()
        .unwrap_or(0)
        .max(1);
    let last = src.len() - 1;
    let out = (0..out_len)
        .map(|j| {
            let pos = T::from_usize_lossy(j) * ratio;
            let i = pos.floor().to_usize().unwrap_or(0);
            if i >= last {
                return src[last];
            }
            let frac = pos - T::from_usize_lossy(i);
            src[i] + (src[i + 1] - src[i]) * frac
        })
        .collect();
    SampledSignal::new(out, target_fs)
}

/// Contiguous sub-signal `[start, start + length)`.
pub fn window<T: Real>(
    sig: &SampledSignal<T>,
    start: usize,
    length: usize,
) -> Result<SampledSignal<T>> {
    if length == 0 {
        return Err(Error::invalid("length", "window must not be empty"));
    }
    let end = start
        .checked_add(length)
        .filter(|&e| e <= sig.len())
        .ok_or_else(|| {
            Error::Bounds(format!(
                "window [{start}, {start}+{length}) exceeds signal length {}",
                sig.len()
            ))
        })?;
    SampledSignal::new(sig.samples[start..end].to_vec(), sig.fs)
}
