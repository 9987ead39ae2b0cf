//! Flat `key = value` settings shared by the library entry points and the
//! command line.

use std::io::Read;
use std::str::FromStr;

use crate::bench::{BenchConfig, Recording};
use crate::error::{Error, Result};
use crate::io::read_key_values;
use crate::pipeline::Method;
use crate::qrs::FilterVariant;
use crate::recovery::WaveletFamily;

/// Every recognised key with its description, in documentation order.
pub const KEYS: &[(&str, &str)] = &[
    ("duration_s", "synthetic record length, seconds"),
    ("mean_hr", "synthetic mean heart rate, bpm"),
    ("hr_jitter", "RR standard deviation as a fraction of the mean"),
    ("noise_std", "additive white noise, mV"),
    ("seed", "seed for synthesis and the sensing matrix"),
    ("cr", "nominal compression ratio n/m for compress"),
    ("method", "gencs or plain_cs for compress and recover"),
    ("frame_len", "samples per frame"),
    ("gencs_wavelet", "haar or daubechies4"),
    ("plain_wavelet", "haar or daubechies4"),
    ("levels", "wavelet decomposition levels"),
    ("filter_variant", "canonical or verbatim high-pass"),
    ("tol", "OMP relative residual stop"),
    ("max_support", "OMP support limit; `auto` for the per-method default"),
    ("support_per_beat", "GenCS support per expected beat in a frame"),
    ("bits_per_sample", "raw sample width"),
    ("measurement_bits", "transmitted measurement width"),
    ("threshold_fraction", "detector threshold as a fraction of the running peak"),
    ("refractory_s", "detector refractory period, seconds"),
    ("hr_tol", "GeMREM RR drift tolerance, fraction"),
    ("morph_tol", "GeMREM morphology RMS tolerance, mV"),
    ("header_bits_per_param", "GeMREM header width per template parameter"),
    ("update_bits", "GeMREM bits per update or escape record"),
    ("methods", "comma list of benchmarked methods"),
    ("cr_grid", "comma list of nominal ratios"),
    ("seeds", "comma list of corpus seeds"),
    ("learn_s", "seconds at the start of each record used to learn the template"),
    ("recording", "signal CSV benchmarked instead of the synthetic corpus"),
    ("recording_truth", "r_peak_index CSV for `recording`"),
    ("tol_s", "R-peak match tolerance, seconds"),
    ("mac_budget", "multiply-accumulate budget for the lifetime proxy"),
    ("record_timing", "write measured wall time instead of 0"),
];

/// Parsed settings. Start from [`Settings::default`], then apply a file and
/// overrides with [`Settings::set`].
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Corpus, codec and sweep settings.
    pub bench: BenchConfig,
    pub seed: u64,
    pub cr: f64,
    pub method: Method,
    pub mac_budget: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            bench: BenchConfig::default(),
            seed: 1,
            cr: 8.0,
            method: Method::Gencs,
            mac_budget: 1_000_000_000,
        }
    }
}

fn num<F: FromStr>(key: &'static str, v: &str) -> Result<F> {
    v.parse()
        .map_err(|_| Error::invalid(key, format!("cannot parse `{v}`")))
}

fn list<F: FromStr>(key: &'static str, v: &str) -> Result<Vec<F>> {
    let out: Vec<F> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::invalid(key, "list must not be empty"));
    }
    Ok(out)
}

fn boolean(key: &'static str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::invalid(key, format!("`{v}` is not a boolean"))),
    }
}

fn wavelet(key: &'static str, v: &str) -> Result<WaveletFamily> {
    match v {
        "haar" => Ok(WaveletFamily::Haar),
        "daubechies4" | "db4" => Ok(WaveletFamily::Daubechies4),
        _ => Err(Error::invalid(key, format!("unknown wavelet `{v}`"))),
    }
}

fn recording(b: &mut BenchConfig) -> &mut Recording {
    b.recording.get_or_insert_with(|| Recording {
        signal: Default::default(),
        truth: Default::default(),
    })
}

impl Settings {
    /// Applies one key. Unknown keys are validation errors.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let b = &mut self.bench;
        let (corpus, cs, g) = (&mut b.corpus, &mut b.cs, &mut b.gemrem);
        match key {
            "duration_s" => corpus.duration_s = num("duration_s", v)?,
            "mean_hr" => corpus.mean_hr = num("mean_hr", v)?,
            "hr_jitter" => corpus.hr_jitter = num("hr_jitter", v)?,
            "noise_std" => corpus.noise_std = num("noise_std", v)?,
            "seed" => self.seed = num("seed", v)?,
            "cr" => self.cr = num("cr", v)?,
            "method" => self.method = v.parse()?,
            "frame_len" => cs.frame_len = num("frame_len", v)?,
            "gencs_wavelet" => cs.gencs_wavelet = wavelet("gencs_wavelet", v)?,
            "plain_wavelet" => cs.plain_wavelet = wavelet("plain_wavelet", v)?,
            "levels" => cs.levels = num("levels", v)?,
            "filter_variant" => {
                cs.variant = match v {
                    "canonical" => FilterVariant::Canonical,
                    "verbatim" => FilterVariant::Verbatim,
                    _ => return Err(Error::invalid("filter_variant", format!("unknown variant `{v}`"))),
                }
            }
            "tol" => cs.tol = num("tol", v)?,
            "max_support" => {
                cs.max_support = match v {
                    "auto" => None,
                    _ => Some(num("max_support", v)?),
                }
            }
            "support_per_beat" => cs.support_per_beat = num("support_per_beat", v)?,
            "bits_per_sample" => {
                cs.bits_per_sample = num("bits_per_sample", v)?;
                g.bits_per_sample = cs.bits_per_sample;
            }
            "measurement_bits" => cs.measurement_bits = num("measurement_bits", v)?,
            "threshold_fraction" => cs.threshold_fraction = num("threshold_fraction", v)?,
            "refractory_s" => cs.refractory_s = num("refractory_s", v)?,
            "hr_tol" => g.hr_tol = num("hr_tol", v)?,
            "morph_tol" => g.morph_tol = num("morph_tol", v)?,
            "header_bits_per_param" => g.header_bits_per_param = num("header_bits_per_param", v)?,
            "update_bits" => g.update_bits = num("update_bits", v)?,
            "methods" => {
                b.methods = list::<String>("methods", v)?
                    .iter()
                    .map(|m| m.parse())
                    .collect::<Result<_>>()?
            }
            "cr_grid" => b.cr_grid = list("cr_grid", v)?,
            "seeds" => b.seeds = list("seeds", v)?,
            "learn_s" => b.learn_s = num("learn_s", v)?,
            "tol_s" => b.tol_s = num("tol_s", v)?,
            "recording" => recording(b).signal = v.into(),
            "recording_truth" => recording(b).truth = v.into(),
            "mac_budget" => self.mac_budget = num("mac_budget", v)?,
            "record_timing" => b.record_timing = boolean("record_timing", v)?,
            _ => {
                return Err(Error::invalid("config", format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }

    /// Applies every line of a key-value file; errors carry the line number.
    pub fn apply_file<R: Read>(&mut self, r: R) -> Result<()> {
        for (line, k, v) in read_key_values(r)? {
            self.set(&k, &v).map_err(|e| match e {
                Error::Validation { field, reason } => {
                    Error::invalid(field, format!("line {line}: {reason}"))
                }
                other => other,
            })?;
        }
        Ok(())
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<'a>(&mut self, pairs: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for p in pairs {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::invalid("config", format!("override `{p}` is not key=value")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }
}
