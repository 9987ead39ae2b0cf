use super::local_rr_samples;
use super::template::BeatTemplate;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::{GroundTruth, SampledSignal};

/// Width of the linear crossfade centred on each beat boundary.
pub const CROSSFADE_S: f64 = 0.010;

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction<T> {
    pub signal: SampledSignal<T>,
    /// Set when no peaks were supplied and the output is isoelectric.
    pub isoelectric: bool,
}

/// Re-synthesises a full signal by placing a rendered beat on every R peak.
///
/// Beat `k` owns the samples between the midpoints to its neighbours and is
/// scaled to its local RR; boundaries are blended over [`CROSSFADE_S`]. The
/// first and last beats extend to the signal edges. A single peak yields one
/// beat at the template's reference interval and zeros elsewhere.
pub fn reconstruct<T: Real>(
    template: &BeatTemplate<T>,
    temporal: &GroundTruth<T>,
    n: usize,
    fs: T,
) -> Result<Reconstruction<T>> {
    template.validate()?;
    if n == 0 {
        return Err(Error::invalid("n", "output length must be positive"));
    }
    let peaks = &temporal.r_peaks;
    if let Some(&bad) = peaks.iter().find(|&&p| p >= n) {
        return Err(Error::Bounds(format!("peak {bad} beyond length {n}")));
    }
    if peaks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("temporal", "peaks not strictly increasing"));
    }
    let mut out = vec![T::zero(); n];
    if peaks.is_empty() {
        return Ok(Reconstruction {
            signal: SampledSignal::new(out, fs)?,
            isoelectric: true,
        });
    }

    let offset = |i: usize, p: usize| (T::from_usize_lossy(i) - T::from_usize_lossy(p)) / fs;

    if peaks.len() == 1 {
        let rr = template.reference_rr;
        let half = (rr * fs / T::lit(2.0)).round().to_usize().unwrap_or(0);
        let p = peaks[0];
        let lo = p.saturating_sub(half);
        let hi = (p + half).min(n);
        for (i, o) in out.iter_mut().enumerate().take(hi).skip(lo) {
            *o = template.value_at(offset(i, p), rr);
        }
        return Ok(Reconstruction {
            signal: SampledSignal::new(out, fs)?,
            isoelectric: false,
        });
    }

    let rrs: Vec<T> = (0..peaks.len())
        .map(|k| T::lit(local_rr_samples(peaks, k).unwrap_or(0.0)) / fs)
        .collect();
    let beat = |k: usize, i: usize| template.value_at(offset(i, peaks[k]), rrs[k]);
    let half_fade = CROSSFADE_S * fs.to_f64_lossy() / 2.0;

    let mut k = 0usize;
    for (i, o) in out.iter_mut().enumerate() {
        let x = i as f64;
        while k + 1 < peaks.len() && x >= (peaks[k] + peaks[k + 1]) as f64 / 2.0 + half_fade {
            k += 1;
        }
        let mut v = beat(k, i);
        if k + 1 < peaks.len() {
            let boundary = (peaks[k] + peaks[k + 1]) as f64 / 2.0;
            if x > boundary - half_fade {
                let w = T::lit((x - (boundary - half_fade)) / (2.0 * half_fade));
                v = (T::one() - w) * v + w * beat(k + 1, i);
            }
        }
        *o = v;
    }
    Ok(Reconstruction {
        signal: SampledSignal::new(out, fs)?,
        isoelectric: false,
    })
}
