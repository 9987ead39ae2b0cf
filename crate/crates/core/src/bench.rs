//! Benchmark sweep over methods, ratios and seeded corpora, and the
//! operation-count lifetime proxy.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{prd, rpeak_f1, rr_rmse};
use crate::model::{learn_template, BeatTemplate, GemremConfig};
use crate::pipeline::{gemrem_pipeline, gencs_pipeline, plain_cs_pipeline, CsConfig, Method, PipelineRun};
use crate::signal::{synthesize_ecg, window, GroundTruth, SampledSignal, SyntheticEcgSpec, CANONICAL_FS};

pub const BENCH_HEADER: [&str; 9] = [
    "method",
    "cr",
    "seed",
    "rpeak_f1",
    "rr_rmse_s",
    "prd_pct",
    "mac_count",
    "transmitted_bits",
    "wall_time_s",
];

pub const LIFETIME_HEADER: [&str; 4] = ["method", "cr", "frames_per_budget", "fidelity"];

/// Synthetic corpus shared by every seed; the seed picks the RR sequence,
/// noise and sensing matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub duration_s: f64,
    pub mean_hr: f64,
    pub hr_jitter: f64,
    pub noise_std: f64,
}

impl Default for Corpus {
    fn default() -> Self {
        Self {
            duration_s: 60.0,
            mean_hr: 72.0,
            hr_jitter: 0.05,
            noise_std: 0.01,
        }
    }
}

impl Corpus {
    pub fn spec(&self, seed: u64) -> SyntheticEcgSpec<f64> {
        SyntheticEcgSpec {
            duration: self.duration_s,
            fs: CANONICAL_FS,
            mean_hr: self.mean_hr,
            hr_jitter: self.hr_jitter,
            noise_std: self.noise_std,
            template: BeatTemplate::default_ecg(),
            seed,
        }
    }
}

/// A recording supplied by the user, used in place of the synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub signal: PathBuf,
    pub truth: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    /// Nominal `n / m` ratios for the CS methods. GeMREM runs once per seed.
    pub cr_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    pub corpus: Corpus,
    pub recording: Option<Recording>,
    /// Leading seconds of each record, with their true peaks, used to learn
    /// the template.
    pub learn_s: f64,
    /// R-peak match tolerance.
    pub tol_s: f64,
    pub cs: CsConfig,
    pub gemrem: GemremConfig,
    /// Writes measured wall time; otherwise 0 so output is byte-stable.
    pub record_timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::Gencs, Method::PlainCs, Method::Gemrem],
            cr_grid: vec![2.0, 4.0, 8.0, 12.0],
            seeds: (1..=5).collect(),
            corpus: Corpus::default(),
            recording: None,
            learn_s: 10.0,
            tol_s: 0.05,
            cs: CsConfig::default(),
            gemrem: GemremConfig::default(),
            record_timing: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("methods", "must not be empty"));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("seeds", "must not be empty"));
        }
        if self.methods.iter().any(|&m| m != Method::Gemrem) && self.cr_grid.is_empty() {
            return Err(Error::invalid("cr_grid", "must not be empty"));
        }
        if let Some(cr) = self.cr_grid.iter().find(|c| !(**c >= 1.0) || !c.is_finite()) {
            return Err(Error::invalid("cr_grid", format!("{cr} is not a ratio >= 1")));
        }
        if !(self.learn_s > 0.0) {
            return Err(Error::invalid("learn_s", "must be positive"));
        }
        if !(self.tol_s > 0.0) {
            return Err(Error::invalid("tol_s", "must be positive"));
        }
        if let Some(r) = &self.recording {
            if r.signal.as_os_str().is_empty() || r.truth.as_os_str().is_empty() {
                return Err(Error::invalid("recording", "needs both a signal and a truth file"));
            }
        }
        if self.cs.frame_len == 0 {
            return Err(Error::invalid("frame_len", "must be positive"));
        }
        self.gemrem.validate()
    }
}

/// Metrics of a completed grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub rpeak_f1: f64,
    /// `None` when no true interval had both ends detected.
    pub rr_rmse_s: Option<f64>,
    pub prd_pct: f64,
    /// Receiver-side multiply-accumulates.
    pub mac_count: u64,
    pub transmitted_bits: u64,
    pub wall_time_s: f64,
    pub n_samples: usize,
    /// Frames of `frame_len` samples covering the record.
    pub frames: usize,
}

impl RunMetrics {
    pub fn mac_per_frame(&self) -> f64 {
        self.mac_count as f64 / self.frames as f64
    }

    pub fn mac_per_second(&self, fs: f64) -> f64 {
        self.mac_count as f64 * fs / self.n_samples as f64
    }
}

/// One row of `bench.csv`. `metrics` is `None` for a skipped point.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub cr: f64,
    pub seed: u64,
    pub metrics: Option<RunMetrics>,
}

impl BenchRecord {
    pub fn is_skipped(&self) -> bool {
        self.metrics.is_none()
    }

    /// Fidelity on the common diagnostic task: R-peak F1.
    pub fn fidelity(&self) -> Option<f64> {
        self.metrics.as_ref().map(|m| m.rpeak_f1)
    }

    /// Whether the point meets the diagnostic-equivalence threshold of its
    /// method: F1 ≥ 0.95 and RR RMSE ≤ 10 ms for GenCS and GeMREM, PRD ≤ 30%
    /// for plain CS.
    pub fn holds(&self) -> bool {
        self.metrics.as_ref().is_some_and(|m| match self.method {
            Method::PlainCs => m.prd_pct <= PLAIN_PRD_LIMIT,
            _ => m.rpeak_f1 >= F1_LIMIT && m.rr_rmse_s.is_some_and(|e| e <= RR_RMSE_LIMIT_S),
        })
    }
}

pub const F1_LIMIT: f64 = 0.95;
pub const RR_RMSE_LIMIT_S: f64 = 0.010;
pub const PLAIN_PRD_LIMIT: f64 = 30.0;

/// A record of the corpus with its learned template.
#[derive(Debug, Clone)]
pub struct PreparedRecord {
    pub seed: u64,
    pub signal: SampledSignal<f64>,
    pub truth: GroundTruth<f64>,
    pub template: BeatTemplate<f64>,
}

/// Learns a template from the first `learn_s` seconds of `x`.
pub fn learn_from_prefix(
    x: &SampledSignal<f64>,
    truth: &GroundTruth<f64>,
    learn_s: f64,
) -> Result<BeatTemplate<f64>> {
    let len = ((learn_s * x.fs()).round() as usize).min(x.len());
    let snippet = window(x, 0, len)?;
    let peaks: Vec<usize> = truth.r_peaks.iter().copied().filter(|&p| p < len).collect();
    let gt = GroundTruth::from_peaks(peaks, x.fs())?;
    Ok(learn_template(&snippet, &gt)?.template)
}

fn load_recording(rec: &Recording) -> Result<(SampledSignal<f64>, GroundTruth<f64>)> {
    let x: SampledSignal<f64> = crate::io::read_signal(std::fs::File::open(&rec.signal)?)?;
    let truth = crate::io::read_ground_truth(std::fs::File::open(&rec.truth)?, x.fs())?;
    if x.require_rate(CANONICAL_FS).is_ok() {
        return Ok((x, truth));
    }
    let scale = CANONICAL_FS / x.fs();
    let y = crate::signal::resample(&x, CANONICAL_FS)?;
    let mut peaks: Vec<usize> = truth
        .r_peaks
        .iter()
        .map(|&p| ((p as f64 * scale).round() as usize).min(y.len() - 1))
        .collect();
    peaks.dedup();
    Ok((y, GroundTruth::from_peaks(peaks, CANONICAL_FS)?))
}

/// Synthesises (or loads) and learns a template for every seed.
pub fn prepare_corpus(cfg: &BenchConfig) -> Result<Vec<PreparedRecord>> {
    let loaded = cfg.recording.as_ref().map(load_recording).transpose()?;
    cfg.seeds
        .par_iter()
        .map(|&seed| {
            let (signal, truth) = match &loaded {
                Some((x, t)) => (x.clone(), t.clone()),
                None => synthesize_ecg(&cfg.corpus.spec(seed))?,
            };
            let template = learn_from_prefix(&signal, &truth, cfg.learn_s)?;
            Ok(PreparedRecord {
                seed,
                signal,
                truth,
                template,
            })
        })
        .collect()
}

fn score(run: &PipelineRun<f64>, rec: &PreparedRecord, cfg: &BenchConfig) -> Result<RunMetrics> {
    let fs = rec.signal.fs();
    let f1 = rpeak_f1(&run.peaks, &rec.truth.r_peaks, cfg.tol_s, fs)?;
    Ok(RunMetrics {
        rpeak_f1: f1.f1,
        rr_rmse_s: rr_rmse(&run.peaks, &rec.truth.r_peaks, cfg.tol_s, fs),
        prd_pct: prd(rec.signal.samples(), run.signal.samples())?,
        mac_count: run.mac_count,
        transmitted_bits: run.transmitted_bits,
        wall_time_s: if cfg.record_timing { run.wall_time_s } else { 0.0 },
        n_samples: rec.signal.len(),
        frames: rec.signal.len().div_ceil(cfg.cs.frame_len),
    })
}

/// Runs one grid point. Ratios the codec cannot hold become skipped rows.
pub fn run_point(cfg: &BenchConfig, method: Method, cr: f64, rec: &PreparedRecord) -> Result<BenchRecord> {
    let run = match method {
        Method::Gencs => gencs_pipeline(&rec.signal, &rec.template, cr, rec.seed, &cfg.cs),
        Method::PlainCs => plain_cs_pipeline(&rec.signal, cr, rec.seed, &cfg.cs),
        Method::Gemrem => gemrem_pipeline(&rec.signal, &rec.template, rec.seed, &cfg.gemrem).map(|r| r.0),
    };
    let run = match run {
        Ok(run) => run,
        Err(Error::Validation { field: "cr", .. }) => {
            return Ok(BenchRecord {
                method,
                cr,
                seed: rec.seed,
                metrics: None,
            })
        }
        Err(e) => return Err(e),
    };
    Ok(BenchRecord {
        method,
        cr: run.cr,
        seed: rec.seed,
        metrics: Some(score(&run, rec, cfg)?),
    })
}

/// Every (method, cr, seed) point of `cfg`, sorted by that key.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let corpus = prepare_corpus(cfg)?;
    run_bench_on(cfg, &corpus)
}

/// [`run_bench`] on an already prepared corpus.
pub fn run_bench_on(cfg: &BenchConfig, corpus: &[PreparedRecord]) -> Result<Vec<BenchRecord>> {
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let mut points = Vec::new();
    for &method in &methods {
        let crs: &[f64] = if method == Method::Gemrem { &[f64::NAN] } else { &cfg.cr_grid };
        for &cr in crs {
            for rec in corpus {
                points.push((method, cr, rec));
            }
        }
    }
    let mut records = points
        .into_par_iter()
        .map(|(method, cr, rec)| run_point(cfg, method, cr, rec))
        .collect::<Result<Vec<_>>>()?;
    sort_records(&mut records);
    Ok(records)
}

pub fn sort_records(records: &mut [BenchRecord]) {
    records.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.cr.total_cmp(&b.cr))
            .then(a.seed.cmp(&b.seed))
    });
}

fn opt(v: Option<String>) -> String {
    v.unwrap_or_default()
}

/// `bench.csv`; metric columns of skipped rows are empty.
pub fn write_bench_csv<W: Write>(w: W, records: &[BenchRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(BENCH_HEADER)?;
    for r in records {
        let m = r.metrics.as_ref();
        wtr.write_record([
            r.method.to_string(),
            r.cr.to_string(),
            r.seed.to_string(),
            opt(m.map(|m| m.rpeak_f1.to_string())),
            opt(m.and_then(|m| m.rr_rmse_s).map(|v| v.to_string())),
            opt(m.map(|m| m.prd_pct.to_string())),
            opt(m.map(|m| m.mac_count.to_string())),
            opt(m.map(|m| m.transmitted_bits.to_string())),
            opt(m.map(|m| m.wall_time_s.to_string())),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `bench.csv`. The file has no length columns, so every record is
/// taken to cover `n_samples` samples in `frame_len` frames.
pub fn read_bench_csv<R: Read>(r: R, n_samples: usize, frame_len: usize) -> Result<Vec<BenchRecord>> {
    if n_samples == 0 || frame_len == 0 {
        return Err(Error::invalid("n_samples", "record length and frame length must be positive"));
    }
    let mut rdr = csv::Reader::from_reader(r);
    if rdr.headers()?.iter().collect::<Vec<_>>() != BENCH_HEADER {
        return Err(Error::parse(1, format!("expected header `{}`", BENCH_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let get = |j: usize| rec.get(j).unwrap_or("").trim();
        let parse = |j: usize| -> Result<f64> {
            get(j).parse().map_err(|_| Error::parse(line, format!("bad value `{}`", get(j))))
        };
        let parse_u = |j: usize| -> Result<u64> {
            get(j).parse().map_err(|_| Error::parse(line, format!("bad value `{}`", get(j))))
        };
        let method: Method = get(0).parse()?;
        let metrics = if get(3).is_empty() {
            None
        } else {
            Some(RunMetrics {
                rpeak_f1: parse(3)?,
                rr_rmse_s: if get(4).is_empty() { None } else { Some(parse(4)?) },
                prd_pct: parse(5)?,
                mac_count: parse_u(6)?,
                transmitted_bits: parse_u(7)?,
                wall_time_s: parse(8)?,
                n_samples,
                frames: n_samples.div_ceil(frame_len),
            })
        };
        out.push(BenchRecord {
            method,
            cr: parse(1)?,
            seed: parse_u(2)?,
            metrics,
        });
    }
    Ok(out)
}

/// One row of the lifetime table.
#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeRow {
    pub method: Method,
    pub cr: f64,
    pub frames_per_budget: f64,
    pub fidelity: f64,
}

/// Frames a `mac_budget` recovers per (method, cr), with mean fidelity.
///
/// Seeds are averaged; skipped rows are ignored. GeMREM rows, whose ratio is
/// an outcome rather than a setting, collapse to one row at their mean ratio.
pub fn lifetime_proxy(records: &[BenchRecord], mac_budget: u64) -> Result<Vec<LifetimeRow>> {
    if records.is_empty() {
        return Err(Error::invalid("records", "no benchmark records"));
    }
    if mac_budget == 0 {
        return Err(Error::invalid("mac_budget", "must be positive"));
    }
    // (method, cr bits) -> (sum cr, sum mac/frame, sum fidelity, count)
    let mut groups: BTreeMap<(Method, u64), (f64, f64, f64, usize)> = BTreeMap::new();
    for r in records {
        let (Some(m), Some(fid)) = (r.metrics.as_ref(), r.fidelity()) else {
            continue;
        };
        let per_frame = m.mac_per_frame();
        if !(per_frame > 0.0) {
            return Err(Error::invalid(
                "mac_count",
                format!("{} at cr {} seed {} has no operations", r.method, r.cr, r.seed),
            ));
        }
        let key = if r.method == Method::Gemrem { 0 } else { r.cr.to_bits() };
        let g = groups.entry((r.method, key)).or_insert((0.0, 0.0, 0.0, 0));
        g.0 += r.cr;
        g.1 += per_frame;
        g.2 += fid;
        g.3 += 1;
    }
    if groups.is_empty() {
        return Err(Error::invalid("records", "every record was skipped"));
    }
    let mut rows: Vec<LifetimeRow> = groups
        .into_iter()
        .map(|((method, _), (cr, per_frame, fid, n))| {
            let n = n as f64;
            LifetimeRow {
                method,
                cr: cr / n,
                frames_per_budget: mac_budget as f64 / (per_frame / n),
                fidelity: fid / n,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.method.cmp(&b.method).then(a.cr.total_cmp(&b.cr)));
    Ok(rows)
}

pub fn write_lifetime_csv<W: Write>(w: W, rows: &[LifetimeRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(LIFETIME_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.method.to_string(),
            r.cr.to_string(),
            r.frames_per_budget.to_string(),
            r.fidelity.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Largest ratio in the grid at which every seed of `method` holds its
/// threshold; `None` if no ratio does.
pub fn max_holding_cr(records: &[BenchRecord], method: Method) -> Option<f64> {
    let mut by_cr: BTreeMap<u64, (f64, bool)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.method == method) {
        let e = by_cr.entry(r.cr.to_bits()).or_insert((r.cr, true));
        e.1 &= r.holds();
    }
    by_cr
        .values()
        .filter(|(_, ok)| *ok)
        .map(|(cr, _)| *cr)
        .max_by(f64::total_cmp)
}

/// [`max_holding_cr`] restricted to one seed.
pub fn max_holding_cr_for_seed(records: &[BenchRecord], method: Method, seed: u64) -> Option<f64> {
    records
        .iter()
        .filter(|r| r.method == method && r.seed == seed && r.holds())
        .map(|r| r.cr)
        .max_by(f64::total_cmp)
}
