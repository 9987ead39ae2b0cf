//! GeMREM: transmit a beat template once, then only the beats that disagree
//! with it.
//!
//! Every detected beat other than the first is one of
//! - accepted: its interval is within `hr_tol` of the previous interval and
//!   its shape within `morph_tol` of the rendered template; nothing is sent;
//! - updated: the interval drifted; one `U` record is sent for it and one for
//!   the beat before;
//! - escaped: the shape deviates; a `U` record plus the raw beat samples.
//!
//! The last beat is always updated. Decisions use the true intervals only, so
//! raising a tolerance can only shrink the set of beats that are sent. A `U`
//! record carries the exact distance from the previous updated beat; the
//! decoder spaces the accepted beats in between evenly, so timing errors never
//! carry past an update.

use super::local_rr_samples;
use super::reconstruct::reconstruct;
use super::template::{beat_center, BeatTemplate};
use crate::error::{Error, Result};
use crate::qrs::{locate_r_peaks, FilterVariant};
use crate::scalar::Real;
use crate::signal::{GroundTruth, SampledSignal};

#[derive(Debug, Clone, PartialEq)]
pub struct GemremConfig {
    /// Accepted relative interval deviation.
    pub hr_tol: f64,
    /// Accepted beat RMS error against the rendered template, in mV.
    pub morph_tol: f64,
    pub bits_per_sample: u32,
    /// Cost of each header parameter.
    pub header_bits_per_param: u32,
    /// Cost of a `U` record, and of the record overhead of an escape.
    pub update_bits: u32,
}

impl Default for GemremConfig {
    fn default() -> Self {
        Self {
            hr_tol: 0.02,
            morph_tol: 0.05,
            bits_per_sample: 12,
            header_bits_per_param: 32,
            update_bits: 16,
        }
    }
}

impl GemremConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hr_tol >= 0.0) || !self.hr_tol.is_finite() {
            return Err(Error::invalid("hr_tol", "must be a non-negative fraction"));
        }
        if !(self.morph_tol >= 0.0) || !self.morph_tol.is_finite() {
            return Err(Error::invalid("morph_tol", "must be non-negative"));
        }
        if self.bits_per_sample == 0 || self.update_bits == 0 || self.header_bits_per_param == 0 {
            return Err(Error::invalid("bits", "bit widths must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrUpdate<T> {
    pub beat: usize,
    /// Seconds from the previous updated beat, or the first peak, to this one.
    pub rr: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawEscape<T> {
    pub beat: usize,
    /// Raw samples of one beat interval, R peak at `beat_center(len / fs)`.
    pub samples: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GemremStream<T> {
    pub template: BeatTemplate<T>,
    pub n_samples: usize,
    pub fs: T,
    pub beat_count: usize,
    pub first_peak: usize,
    pub updates: Vec<RrUpdate<T>>,
    pub escapes: Vec<RawEscape<T>>,
}

impl<T: Real> GemremStream<T> {
    /// Template parameters plus beat count and first peak.
    pub fn header_bits(&self, cfg: &GemremConfig) -> u64 {
        (self.template.parameter_count() as u64 + 2) * cfg.header_bits_per_param as u64
    }

    /// Bits of all `U` and `E` records.
    pub fn payload_bits(&self, cfg: &GemremConfig) -> u64 {
        let raw: u64 = self.escapes.iter().map(|e| e.samples.len() as u64).sum();
        (self.updates.len() + self.escapes.len()) as u64 * cfg.update_bits as u64
            + raw * cfg.bits_per_sample as u64
    }

    pub fn stream_bits(&self, cfg: &GemremConfig) -> u64 {
        self.header_bits(cfg) + self.payload_bits(cfg)
    }

    pub fn raw_bits(&self, cfg: &GemremConfig) -> u64 {
        self.n_samples as u64 * cfg.bits_per_sample as u64
    }

    /// Compression ratio counting the header.
    pub fn compression_ratio(&self, cfg: &GemremConfig) -> f64 {
        self.raw_bits(cfg) as f64 / self.stream_bits(cfg) as f64
    }

    /// Compression ratio of the records alone; infinite for a header-only
    /// stream.
    pub fn compression_ratio_without_header(&self, cfg: &GemremConfig) -> f64 {
        match self.payload_bits(cfg) {
            0 => f64::INFINITY,
            p => self.raw_bits(cfg) as f64 / p as f64,
        }
    }

    /// Structural checks a decoder relies on.
    pub fn check(&self) -> Result<()> {
        self.template.validate()?;
        if self.beat_count > 0 && self.first_peak >= self.n_samples {
            return Err(Error::parse(0, "first peak beyond stream length"));
        }
        let in_range = |b: usize| b >= 1 && b < self.beat_count;
        if !self.updates.windows(2).all(|w| w[0].beat < w[1].beat)
            || !self.updates.iter().all(|u| in_range(u.beat))
        {
            return Err(Error::parse(0, "updates out of order or beyond beat count"));
        }
        if !self.escapes.windows(2).all(|w| w[0].beat < w[1].beat)
            || !self.escapes.iter().all(|e| e.beat < self.beat_count)
        {
            return Err(Error::parse(0, "escapes out of order or beyond beat count"));
        }
        Ok(())
    }
}

/// Encodes `sig`, locating its beats with the canonical QRS cascade.
pub fn gemrem_encode<T: Real>(
    sig: &SampledSignal<T>,
    template: &BeatTemplate<T>,
    cfg: &GemremConfig,
) -> Result<GemremStream<T>> {
    template.validate()?;
    let peaks = locate_r_peaks(sig, FilterVariant::Canonical, template.polarity())?;
    gemrem_encode_with_peaks(sig, &peaks, template, cfg)
}

/// Encodes `sig` given its R peaks.
pub fn gemrem_encode_with_peaks<T: Real>(
    sig: &SampledSignal<T>,
    peaks: &GroundTruth<T>,
    template: &BeatTemplate<T>,
    cfg: &GemremConfig,
) -> Result<GemremStream<T>> {
    template.validate()?;
    cfg.validate()?;
    let p = &peaks.r_peaks;
    let n = sig.len();
    if p.iter().any(|&q| q >= n) {
        return Err(Error::Bounds("peak beyond signal length".into()));
    }
    let fs = sig.fs();
    let fs64 = fs.to_f64_lossy();
    let x = sig.samples();
    let mut stream = GemremStream {
        template: template.clone(),
        n_samples: n,
        fs,
        beat_count: p.len(),
        first_peak: p.first().copied().unwrap_or(0),
        updates: Vec::new(),
        escapes: Vec::new(),
    };

    let ref_samples = template.reference_rr.to_f64_lossy() * fs64;
    let mut send = vec![false; p.len()];
    for k in 0..p.len() {
        let rr_local = match local_rr_samples(p, k) {
            Some(s) => s / fs64,
            None => template.reference_rr.to_f64_lossy(),
        };
        let len = (rr_local * fs64).round() as usize;
        let start = p[k] as isize - beat_center(rr_local, fs64) as isize;
        let escape = beat_rms(x, template, T::lit(rr_local), start, len, fs, p[k]) > cfg.morph_tol;
        if escape {
            let samples = (0..len)
                .map(|i| {
                    let j = start + i as isize;
                    if j >= 0 && (j as usize) < n {
                        x[j as usize]
                    } else {
                        T::zero()
                    }
                })
                .collect();
            stream.escapes.push(RawEscape { beat: k, samples });
        }
        if k == 0 {
            continue;
        }
        let actual = (p[k] - p[k - 1]) as f64;
        let previous = if k == 1 {
            ref_samples
        } else {
            (p[k - 1] - p[k - 2]) as f64
        };
        if (actual - previous).abs() > cfg.hr_tol * previous {
            // Close the accepted run at the beat before, so every run the
            // decoder interpolates keeps a steady interval.
            send[k - 1] = true;
            send[k] = true;
        }
        send[k] |= escape || k + 1 == p.len();
    }

    let mut anchor = stream.first_peak;
    for k in (1..p.len()).filter(|&k| send[k]) {
        stream.updates.push(RrUpdate {
            beat: k,
            rr: T::from_usize_lossy(p[k] - anchor) / fs,
        });
        anchor = p[k];
    }
    Ok(stream)
}

/// RMS of `x − rendered` over the in-range part of one beat window.
fn beat_rms<T: Real>(
    x: &[T],
    template: &BeatTemplate<T>,
    rr: T,
    start: isize,
    len: usize,
    fs: T,
    peak: usize,
) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for i in 0..len {
        let j = start + i as isize;
        if j < 0 || j as usize >= x.len() {
            continue;
        }
        let j = j as usize;
        let offset = (T::from_usize_lossy(j) - T::from_usize_lossy(peak)) / fs;
        let d = (x[j] - template.value_at(offset, rr)).to_f64_lossy();
        acc += d * d;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        (acc / count as f64).sqrt()
    }
}

/// Peak positions the decoder derives from a stream.
///
/// Updated beats land exactly; the beats between two of them are spaced
/// evenly. Beats after the last update continue at the last spacing, or at
/// the template's reference interval when nothing was sent.
pub fn decoded_peaks<T: Real>(stream: &GemremStream<T>) -> Result<Vec<usize>> {
    stream.check()?;
    if stream.beat_count == 0 {
        return Ok(Vec::new());
    }
    let fs = stream.fs.to_f64_lossy();
    let mut peaks = vec![stream.first_peak];
    let mut spacing = stream.template.reference_rr.to_f64_lossy() * fs;
    for u in &stream.updates {
        let gap = (u.rr.to_f64_lossy() * fs).round();
        if !(gap >= 1.0) {
            return Err(Error::parse(0, format!("non-positive interval at beat {}", u.beat)));
        }
        let (from, start) = (peaks.len() - 1, peaks[peaks.len() - 1]);
        let beats = u.beat - from;
        spacing = gap / beats as f64;
        for j in 1..=beats {
            peaks.push(start + (j as f64 * spacing).round() as usize);
        }
    }
    let (from, start) = (peaks.len() - 1, peaks[peaks.len() - 1]);
    for j in 1..stream.beat_count - from {
        peaks.push(start + (j as f64 * spacing).round() as usize);
    }
    if let Some(&last) = peaks.last().filter(|&&q| q >= stream.n_samples) {
        return Err(Error::parse(0, format!("decoded peak {last} beyond stream length")));
    }
    Ok(peaks)
}

/// Rebuilds `n` samples from a stream: the template placed on the decoded
/// peaks, with escaped beats spliced in verbatim.
pub fn gemrem_decode<T: Real>(stream: &GemremStream<T>, n: usize, fs: T) -> Result<SampledSignal<T>> {
    if n != stream.n_samples {
        return Err(Error::Dimension(format!(
            "stream encodes {} samples, {n} requested",
            stream.n_samples
        )));
    }
    let peaks = decoded_peaks(stream)?;
    let truth = GroundTruth::from_peaks(peaks.clone(), fs)?;
    let mut out = reconstruct(&stream.template, &truth, n, fs)?.signal.into_samples();
    let fs64 = fs.to_f64_lossy();
    for e in &stream.escapes {
        let Some(&p) = peaks.get(e.beat) else {
            continue;
        };
        let rr = e.samples.len() as f64 / fs64;
        let start = p as isize - beat_center(rr, fs64) as isize;
        for (i, &v) in e.samples.iter().enumerate() {
            let j = start + i as isize;
            if j >= 0 && (j as usize) < n {
                out[j as usize] = v;
            }
        }
    }
    SampledSignal::new(out, fs)
}
