//! Frame-wise compressive sensing codecs and the end-to-end pipelines.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{
    decoded_peaks, gemrem_decode, gemrem_encode, reconstruct, render_beat, BeatTemplate,
    GemremConfig, GemremStream,
};
use crate::qrs::{
    cascade_samples, centered_filter_matrix, detect_r_peaks_with, group_delay, locate_r_peaks,
    refine_peaks, DetectorConfig, FilterVariant,
};
use crate::recovery::{RecoveryDictionary, WaveletBasis, WaveletFamily};
use crate::scalar::Real;
use crate::sensing::{bernoulli_matrix, measure_with, measurements_for_ratio, MeasurementVector};
use crate::signal::{GroundTruth, SampledSignal, CANONICAL_FS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Gemrem,
    Gencs,
    PlainCs,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Gemrem, Method::Gencs, Method::PlainCs];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Gemrem => "gemrem",
            Method::Gencs => "gencs",
            Method::PlainCs => "plain_cs",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid("method", format!("unknown method `{s}`")))
    }
}

/// Settings shared by both compressive sensing codecs.
#[derive(Debug, Clone, PartialEq)]
pub struct CsConfig {
    pub frame_len: usize,
    /// Basis for the filtered frames.
    pub gencs_wavelet: WaveletFamily,
    /// Basis for the raw frames.
    pub plain_wavelet: WaveletFamily,
    pub levels: usize,
    pub variant: FilterVariant,
    /// OMP stops at this relative residual.
    pub tol: f64,
    /// Overrides the per-method default support limit.
    pub max_support: Option<usize>,
    /// GenCS default support per expected beat in a frame.
    pub support_per_beat: usize,
    pub bits_per_sample: u32,
    pub measurement_bits: u32,
    pub threshold_fraction: f64,
    pub refractory_s: f64,
}

impl Default for CsConfig {
    fn default() -> Self {
        Self {
            frame_len: crate::sensing::DEFAULT_FRAME_LEN,
            gencs_wavelet: WaveletFamily::Haar,
            plain_wavelet: WaveletFamily::Daubechies4,
            levels: 5,
            variant: FilterVariant::Canonical,
            tol: 0.01,
            max_support: None,
            support_per_beat: 4,
            bits_per_sample: 12,
            measurement_bits: 24,
            threshold_fraction: 0.5,
            refractory_s: 0.2,
        }
    }
}

impl CsConfig {
    fn detector(&self, delay: usize) -> DetectorConfig {
        DetectorConfig {
            threshold_fraction: self.threshold_fraction,
            refractory_s: self.refractory_s,
            delay,
            ..DetectorConfig::default()
        }
    }
}

/// Solver statistics of one recovered frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStat {
    pub frame_id: usize,
    pub residual_norm: f64,
    pub iterations: usize,
    pub mac_count: u64,
}

/// Sensing and recovery matrices for one method, frame length and seed.
#[derive(Debug, Clone)]
pub struct CsCodec<T> {
    pub method: Method,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub max_support: usize,
    pub tol: T,
    acquisition: Matrix<T>,
    dictionary: RecoveryDictionary<T>,
}

impl<T: Real> CsCodec<T> {
    /// GenCS codec: senses `Φ·F·x`, recovers the filtered frame.
    ///
    /// The default support limit is `support_per_beat` times the number of
    /// beats a frame holds at the template's reference rate.
    pub fn gencs(m: usize, seed: u64, template: &BeatTemplate<T>, cfg: &CsConfig) -> Result<Self> {
        let n = cfg.frame_len;
        let max_support = cfg.max_support.unwrap_or_else(|| {
            let frame_s = n as f64 / CANONICAL_FS;
            let beats = (frame_s / template.reference_rr.to_f64_lossy()).ceil().max(1.0) as usize;
            cfg.support_per_beat * beats
        });
        check_support(m, max_support)?;
        let phi = bernoulli_matrix::<T>(m, n, seed)?;
        let f = centered_filter_matrix::<T>(n, cfg.variant)?;
        let basis = basis(cfg.gencs_wavelet, cfg)?;
        let acquisition = phi.entries.matmul(&f.entries)?;
        let dictionary = RecoveryDictionary::filtered(&phi, &f, &basis)?;
        Self::assemble(Method::Gencs, phi.n(), m, seed, max_support, cfg, acquisition, dictionary)
    }

    /// Plain codec: senses `Φ·x`, recovers the raw frame. Default support
    /// limit `m / 4`.
    pub fn plain(m: usize, seed: u64, cfg: &CsConfig) -> Result<Self> {
        let max_support = cfg.max_support.unwrap_or((m / 4).max(1));
        check_support(m, max_support)?;
        let phi = bernoulli_matrix::<T>(m, cfg.frame_len, seed)?;
        let dictionary = RecoveryDictionary::plain(&phi, &basis(cfg.plain_wavelet, cfg)?)?;
        let n = phi.n();
        Self::assemble(Method::PlainCs, n, m, seed, max_support, cfg, phi.entries, dictionary)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        method: Method,
        n: usize,
        m: usize,
        seed: u64,
        max_support: usize,
        cfg: &CsConfig,
        acquisition: Matrix<T>,
        dictionary: RecoveryDictionary<T>,
    ) -> Result<Self> {
        if !(cfg.tol >= 0.0) {
            return Err(Error::invalid("tol", "must be non-negative"));
        }
        Ok(Self {
            method,
            n,
            m,
            seed,
            max_support,
            tol: T::lit(cfg.tol),
            acquisition,
            dictionary,
        })
    }

    /// Number of frames covering `len` samples; the last one is zero-padded.
    pub fn frame_count(&self, len: usize) -> usize {
        len.div_ceil(self.n)
    }

    /// Non-overlapping frame measurements.
    pub fn compress(&self, x: &[T]) -> Result<Vec<MeasurementVector<T>>> {
        (0..self.frame_count(x.len()))
            .map(|f| {
                let lo = f * self.n;
                let hi = (lo + self.n).min(x.len());
                let mut frame = x[lo..hi].to_vec();
                frame.resize(self.n, T::zero());
                measure_with(&self.acquisition, &frame, f)
            })
            .collect()
    }

    /// Recovers and stitches frames into `len` samples.
    pub fn recover(&self, ys: &[MeasurementVector<T>], len: usize) -> Result<(Vec<T>, Vec<FrameStat>)> {
        if ys.len() != self.frame_count(len) {
            return Err(Error::Dimension(format!(
                "{} frames of measurements for {len} samples of {}-sample frames",
                ys.len(),
                self.n
            )));
        }
        let mut out = Vec::with_capacity(ys.len() * self.n);
        let mut stats = Vec::with_capacity(ys.len());
        for y in ys {
            if y.values.len() != self.m {
                return Err(Error::Dimension(format!(
                    "frame {} has {} measurements, codec expects {}",
                    y.frame_id,
                    y.values.len(),
                    self.m
                )));
            }
            let (frame, sol) = self.dictionary.recover(&y.values, self.max_support, self.tol)?;
            out.extend(frame);
            stats.push(FrameStat {
                frame_id: y.frame_id,
                residual_norm: sol.residual_norm.to_f64_lossy(),
                iterations: sol.iterations,
                mac_count: sol.mac_count,
            });
        }
        out.truncate(len);
        Ok((out, stats))
    }

    pub fn transmitted_bits(&self, frames: usize, measurement_bits: u32) -> u64 {
        (frames * self.m) as u64 * measurement_bits as u64
    }

    /// Sensing-side multiply-accumulates for `frames` frames (dense matrix).
    pub fn sensing_macs(&self, frames: usize) -> u64 {
        (frames * self.m * self.n) as u64
    }
}

fn basis<T: Real>(family: WaveletFamily, cfg: &CsConfig) -> Result<WaveletBasis<T>> {
    WaveletBasis::new(family, cfg.levels, WaveletBasis::<T>::padded_len(cfg.frame_len))
}

fn check_support(m: usize, max_support: usize) -> Result<()> {
    if max_support == 0 {
        return Err(Error::invalid("max_support", "must be positive"));
    }
    if m < max_support {
        return Err(Error::invalid(
            "cr",
            format!("{m} measurements per frame cannot hold a support of {max_support}"),
        ));
    }
    Ok(())
}

/// Main lobe of the centred cascade applied to a rendered template beat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainLobe<T> {
    /// Samples from the template R peak to the lobe extremum.
    pub offset: isize,
    /// Sign of the lobe: `1` or `-1`.
    pub polarity: T,
}

/// Locates the largest `|F_c·beat|` sample relative to the template R peak.
pub fn template_main_lobe<T: Real>(template: &BeatTemplate<T>, variant: FilterVariant) -> Result<MainLobe<T>> {
    let fs = T::lit(CANONICAL_FS);
    let beat = render_beat(template, template.reference_rr, fs)?;
    let pad = 64usize;
    let mut x = vec![T::zero(); pad];
    x.extend_from_slice(beat.samples());
    x.extend(std::iter::repeat_n(T::zero(), pad));
    let z = cascade_samples(&x, variant);
    let mut best = 0;
    for (i, v) in z.iter().enumerate() {
        if v.abs() > z[best].abs() {
            best = i;
        }
    }
    let r = pad + crate::model::beat_center(template.reference_rr, fs);
    Ok(MainLobe {
        offset: best as isize - group_delay(variant) as isize - r as isize,
        polarity: if z[best] < T::zero() { -T::one() } else { T::one() },
    })
}

/// Offset of [`template_main_lobe`].
pub fn template_detection_offset<T: Real>(template: &BeatTemplate<T>, variant: FilterVariant) -> Result<isize> {
    Ok(template_main_lobe(template, variant)?.offset)
}

/// Search radius when snapping detections to a lobe extremum.
const REFINE_RADIUS_S: f64 = 0.05;

/// Output of one pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineRun<T> {
    pub method: Method,
    /// Nominal ratio: `n / m` for the CS codecs, bit ratio for GeMREM.
    pub cr: f64,
    pub seed: u64,
    /// Re-synthesised (GenCS, GeMREM) or recovered (plain CS) signal.
    pub signal: SampledSignal<T>,
    /// The recovered filtered signal for GenCS, otherwise equal to `signal`.
    pub recovered: SampledSignal<T>,
    pub peaks: Vec<usize>,
    pub frames: Vec<FrameStat>,
    /// Receiver-side multiply-accumulates.
    pub mac_count: u64,
    pub sensing_macs: u64,
    pub transmitted_bits: u64,
    pub wall_time_s: f64,
}

fn shift_peaks(peaks: &[usize], offset: isize, n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(peaks.len());
    for &p in peaks {
        let q = p as isize - offset;
        if q < 0 || q as usize >= n {
            continue;
        }
        let q = q as usize;
        if out.last().is_none_or(|&l| q > l) {
            out.push(q);
        }
    }
    out
}

fn render_macs<T: Real>(template: &BeatTemplate<T>, n: usize) -> u64 {
    (template.gaussians.len() * n) as u64
}

/// Peaks and re-synthesis from recovered GenCS frames.
///
/// Detections on `|ẑ|` are snapped to the extremum of the template's main
/// lobe sign within ±50 ms, so an opposite-sign side lobe cannot stand in
/// for the QRS, then shifted back by the lobe offset.
pub fn gencs_resynthesise<T: Real>(
    z: &SampledSignal<T>,
    template: &BeatTemplate<T>,
    cfg: &CsConfig,
) -> Result<(Vec<usize>, SampledSignal<T>)> {
    let lobe = template_main_lobe(template, cfg.variant)?;
    let det = detect_r_peaks_with(z, &cfg.detector(0))?;
    let radius = (REFINE_RADIUS_S * z.fs().to_f64_lossy()).round() as usize;
    let det = refine_peaks(z, &det, radius, lobe.polarity)?;
    let peaks = shift_peaks(&det.r_peaks, lobe.offset, z.len());
    let truth = GroundTruth::from_peaks(peaks.clone(), z.fs())?;
    let signal = reconstruct(template, &truth, z.len(), z.fs())?.signal;
    Ok((peaks, signal))
}

/// GenCS end to end at a nominal ratio `cr = n/m`.
pub fn gencs_pipeline<T: Real>(
    x: &SampledSignal<T>,
    template: &BeatTemplate<T>,
    cr: f64,
    seed: u64,
    cfg: &CsConfig,
) -> Result<PipelineRun<T>> {
    x.require_rate(CANONICAL_FS)?;
    let m = measurements_for_ratio(cfg.frame_len, cr)?;
    let codec = CsCodec::gencs(m, seed, template, cfg)?;
    let start = Instant::now();
    let ys = codec.compress(x.samples())?;
    let (zhat, frames) = codec.recover(&ys, x.len())?;
    let z = x.with_samples(zhat)?;
    let (peaks, signal) = gencs_resynthesise(&z, template, cfg)?;
    let mac_count = frames.iter().map(|f| f.mac_count).sum::<u64>() + render_macs(template, x.len());
    Ok(PipelineRun {
        method: Method::Gencs,
        cr: cfg.frame_len as f64 / m as f64,
        seed,
        signal,
        recovered: z,
        peaks,
        mac_count,
        sensing_macs: codec.sensing_macs(ys.len()),
        transmitted_bits: codec.transmitted_bits(ys.len(), cfg.measurement_bits),
        frames,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Plain CS end to end at a nominal ratio `cr = n/m`.
pub fn plain_cs_pipeline<T: Real>(
    x: &SampledSignal<T>,
    cr: f64,
    seed: u64,
    cfg: &CsConfig,
) -> Result<PipelineRun<T>> {
    x.require_rate(CANONICAL_FS)?;
    let m = measurements_for_ratio(cfg.frame_len, cr)?;
    let codec = CsCodec::plain(m, seed, cfg)?;
    let start = Instant::now();
    let ys = codec.compress(x.samples())?;
    let (xhat, frames) = codec.recover(&ys, x.len())?;
    let signal = x.with_samples(xhat)?;
    let peaks = locate_r_peaks(&signal, cfg.variant, T::one())?.r_peaks;
    Ok(PipelineRun {
        method: Method::PlainCs,
        cr: cfg.frame_len as f64 / m as f64,
        seed,
        recovered: signal.clone(),
        signal,
        peaks,
        mac_count: frames.iter().map(|f| f.mac_count).sum(),
        sensing_macs: codec.sensing_macs(ys.len()),
        transmitted_bits: codec.transmitted_bits(ys.len(), cfg.measurement_bits),
        frames,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// GeMREM end to end; `cr` of the run is the achieved bit ratio.
pub fn gemrem_pipeline<T: Real>(
    x: &SampledSignal<T>,
    template: &BeatTemplate<T>,
    seed: u64,
    cfg: &GemremConfig,
) -> Result<(PipelineRun<T>, GemremStream<T>)> {
    let start = Instant::now();
    let stream = gemrem_encode(x, template, cfg)?;
    let signal = gemrem_decode(&stream, x.len(), x.fs())?;
    let peaks = decoded_peaks(&stream)?;
    let run = PipelineRun {
        method: Method::Gemrem,
        cr: stream.compression_ratio(cfg),
        seed,
        recovered: signal.clone(),
        signal,
        peaks,
        frames: Vec::new(),
        mac_count: render_macs(template, x.len()),
        // Template comparison over every sample.
        sensing_macs: render_macs(template, x.len()) + x.len() as u64,
        transmitted_bits: stream.stream_bits(cfg),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((run, stream))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::rpeak_f1;
    use crate::signal::{synthesize_ecg, SyntheticEcgSpec};

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("cs".parse::<Method>().is_err());
    }

    #[test]
    fn detection_offset_is_small() {
        let off = template_detection_offset(&BeatTemplate::<f64>::default_ecg(), FilterVariant::Canonical).unwrap();
        assert!(off.abs() <= 5, "{off}");
    }

    #[test]
    fn infeasible_ratio_is_rejected_up_front() {
        let t = BeatTemplate::<f64>::default_ecg();
        let (x, _) = synthesize_ecg(&SyntheticEcgSpec::clean(10.0, 1)).unwrap();
        // 400 / 100 = 4 measurements against a support of 8.
        let err = gencs_pipeline(&x, &t, 100.0, 1, &CsConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Validation { field: "cr", .. }));
    }

    #[test]
    fn gencs_full_information() {
        let t = BeatTemplate::<f64>::default_ecg();
        let (x, gt) = synthesize_ecg(&SyntheticEcgSpec::clean(20.0, 1)).unwrap();
        let run = gencs_pipeline(&x, &t, 1.0, 1, &CsConfig::default()).unwrap();
        let s = rpeak_f1(&run.peaks, &gt.r_peaks, 0.05, 200.0).unwrap();
        assert!(s.f1 >= 0.99, "{s:?}");
    }

    #[test]
    fn gencs_at_ratio_eight() {
        let t = BeatTemplate::<f64>::default_ecg();
        let mut spec = SyntheticEcgSpec::clean(30.0, 2);
        spec.hr_jitter = 0.05;
        let (x, gt) = synthesize_ecg(&spec).unwrap();
        let run = gencs_pipeline(&x, &t, 8.0, 3, &CsConfig::default()).unwrap();
        let s = rpeak_f1(&run.peaks, &gt.r_peaks, 0.05, 200.0).unwrap();
        assert!(s.f1 >= 0.95, "{s:?}");
        let again = gencs_pipeline(&x, &t, 8.0, 3, &CsConfig::default()).unwrap();
        assert_eq!(run.signal, again.signal);
    }
}
