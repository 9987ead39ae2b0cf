//! File formats: signal, ground-truth, measurement and sidecar CSVs, the
//! template key-value file and the GeMREM stream file.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::model::{BeatTemplate, GaussianWave, GemremStream, RawEscape, RrUpdate};
use crate::pipeline::FrameStat;
use crate::scalar::Real;
use crate::sensing::MeasurementVector;
use crate::signal::{GroundTruth, SampledSignal};

/// Largest deviation of any timestamp from the uniform grid, seconds.
pub const TIME_TOLERANCE_S: f64 = 1e-6;

/// Rates within this relative distance of an integer are snapped to it.
const RATE_SNAP: f64 = 1e-6;

/// Seventeen significant digits: round-trips every `f64`.
fn exact(v: f64) -> String {
    format!("{v:.16e}")
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let h = rdr.headers()?;
    let got: Vec<&str> = h.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::parse(
            1,
            format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn field<F: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<F> {
    let raw = rec
        .get(i)
        .ok_or_else(|| Error::parse(line, format!("missing column {}", i + 1)))?;
    raw.trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("cannot parse `{raw}`")))
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(r)
}

/// Reads a `time_s,mv` CSV. Timestamps must be uniform to within
/// [`TIME_TOLERANCE_S`]; the rate is their mean spacing.
pub fn read_signal<T: Real, R: Read>(r: R) -> Result<SampledSignal<T>> {
    let mut rdr = csv_reader(r);
    check_header(&mut rdr, &["time_s", "mv"])?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        times.push(field::<f64>(&rec, 0, line)?);
        values.push(T::lit(field::<f64>(&rec, 1, line)?));
    }
    if times.len() < 2 {
        return Err(Error::InsufficientData(
            "a signal needs at least two samples to fix its rate".into(),
        ));
    }
    let span = times[times.len() - 1] - times[0];
    let dt = span / (times.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::parse(2, "timestamps must increase"));
    }
    for (i, &t) in times.iter().enumerate() {
        let grid = times[0] + dt * i as f64;
        if (t - grid).abs() > TIME_TOLERANCE_S {
            return Err(Error::parse(
                i + 2,
                format!("non-uniform sampling: t = {t} s, grid {grid} s"),
            ));
        }
    }
    let mut fs = 1.0 / dt;
    if (fs - fs.round()).abs() <= RATE_SNAP * fs {
        fs = fs.round();
    }
    SampledSignal::new(values, T::lit(fs))
}

pub fn write_signal<T: Real, W: Write>(w: W, sig: &SampledSignal<T>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["time_s", "mv"])?;
    let fs = sig.fs().to_f64_lossy();
    for (i, v) in sig.samples().iter().enumerate() {
        wtr.write_record([(i as f64 / fs).to_string(), v.to_f64_lossy().to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads an `r_peak_index` CSV.
pub fn read_ground_truth<T: Real, R: Read>(r: R, fs: T) -> Result<GroundTruth<T>> {
    let mut rdr = csv_reader(r);
    check_header(&mut rdr, &["r_peak_index"])?;
    let mut peaks = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        peaks.push(field::<usize>(&rec?, 0, i + 2)?);
    }
    GroundTruth::from_peaks(peaks, fs)
}

pub fn write_ground_truth<W: Write>(w: W, peaks: &[usize]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["r_peak_index"])?;
    for p in peaks {
        wtr.write_record([p.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a `frame_id,k,value` dump. Frames must be contiguous from 0 and
/// each holds `k = 0..m` in order.
pub fn read_measurements<T: Real, R: Read>(r: R) -> Result<Vec<MeasurementVector<T>>> {
    let mut rdr = csv_reader(r);
    check_header(&mut rdr, &["frame_id", "k", "value"])?;
    let mut frames: Vec<MeasurementVector<T>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let frame_id: usize = field(&rec, 0, line)?;
        let k: usize = field(&rec, 1, line)?;
        let value = T::lit(field::<f64>(&rec, 2, line)?);
        if frames.last().is_none_or(|f| f.frame_id != frame_id) {
            if frame_id != frames.len() {
                return Err(Error::parse(line, format!("frame {frame_id} out of sequence")));
            }
            frames.push(MeasurementVector {
                values: Vec::new(),
                frame_id,
            });
        }
        let f = frames.last_mut().expect("pushed above");
        if k != f.values.len() {
            return Err(Error::parse(line, format!("measurement index {k} out of sequence")));
        }
        f.values.push(value);
    }
    if let Some(m) = frames.first().map(|f| f.values.len()) {
        if let Some(bad) = frames.iter().find(|f| f.values.len() != m) {
            return Err(Error::Dimension(format!(
                "frame {} has {} measurements, frame 0 has {m}",
                bad.frame_id,
                bad.values.len()
            )));
        }
    }
    Ok(frames)
}

pub fn write_measurements<T: Real, W: Write>(w: W, frames: &[MeasurementVector<T>]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["frame_id", "k", "value"])?;
    for f in frames {
        for (k, v) in f.values.iter().enumerate() {
            wtr.write_record([f.frame_id.to_string(), k.to_string(), exact(v.to_f64_lossy())])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Per-frame solver statistics next to a recovered signal.
pub fn write_sidecar<W: Write>(w: W, stats: &[FrameStat]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["frame_id", "residual_norm", "iterations", "mac_count"])?;
    for s in stats {
        wtr.write_record([
            s.frame_id.to_string(),
            s.residual_norm.to_string(),
            s.iterations.to_string(),
            s.mac_count.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_sidecar<R: Read>(r: R) -> Result<Vec<FrameStat>> {
    let mut rdr = csv_reader(r);
    check_header(&mut rdr, &["frame_id", "residual_norm", "iterations", "mac_count"])?;
    rdr.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let line = i + 2;
            Ok(FrameStat {
                frame_id: field(&rec, 0, line)?,
                residual_norm: field(&rec, 1, line)?,
                iterations: field(&rec, 2, line)?,
                mac_count: field(&rec, 3, line)?,
            })
        })
        .collect()
}

/// Flat `key = value` lines; `#` starts a comment. Returns pairs with their
/// line numbers, in file order.
pub fn read_key_values<R: Read>(r: R) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| Error::parse(i + 1, format!("expected `key = value`, found `{body}`")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::parse(i + 1, "empty key"));
        }
        out.push((i + 1, k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn write_template<T: Real, W: Write>(mut w: W, t: &BeatTemplate<T>) -> Result<()> {
    let mut s = String::new();
    for (k, g) in t.gaussians.iter().enumerate() {
        let _ = writeln!(s, "g{k}.amp = {}", exact(g.amplitude.to_f64_lossy()));
        let _ = writeln!(s, "g{k}.center = {}", exact(g.center.to_f64_lossy()));
        let _ = writeln!(s, "g{k}.width = {}", exact(g.width.to_f64_lossy()));
    }
    let _ = writeln!(s, "reference_rr = {}", exact(t.reference_rr.to_f64_lossy()));
    let _ = writeln!(s, "fit_residual = {}", exact(t.fit_residual.to_f64_lossy()));
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_template<T: Real, R: Read>(r: R) -> Result<BeatTemplate<T>> {
    let mut waves: Vec<[Option<f64>; 3]> = Vec::new();
    let mut reference_rr = None;
    let mut fit_residual = None;
    for (line, key, value) in read_key_values(r)? {
        let v: f64 = value
            .parse()
            .map_err(|_| Error::parse(line, format!("`{value}` is not a number")))?;
        let slot = match key.as_str() {
            "reference_rr" => &mut reference_rr,
            "fit_residual" => &mut fit_residual,
            _ => {
                let (g, part) = key
                    .strip_prefix('g')
                    .and_then(|r| r.split_once('.'))
                    .ok_or_else(|| Error::parse(line, format!("unknown key `{key}`")))?;
                let k: usize = g
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad wave index in `{key}`")))?;
                let p = match part {
                    "amp" => 0,
                    "center" => 1,
                    "width" => 2,
                    _ => return Err(Error::parse(line, format!("unknown key `{key}`"))),
                };
                if k >= waves.len() {
                    waves.resize(k + 1, [None; 3]);
                }
                &mut waves[k][p]
            }
        };
        if slot.replace(v).is_some() {
            return Err(Error::parse(line, format!("duplicate key `{key}`")));
        }
    }
    let gaussians = waves
        .iter()
        .enumerate()
        .map(|(k, w)| match w {
            [Some(a), Some(c), Some(wd)] => Ok(GaussianWave {
                amplitude: T::lit(*a),
                center: T::lit(*c),
                width: T::lit(*wd),
            }),
            _ => Err(Error::parse(0, format!("wave g{k} is incomplete"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let reference_rr = reference_rr.ok_or_else(|| Error::parse(0, "missing `reference_rr`"))?;
    let fit_residual = fit_residual.unwrap_or(0.0);
    BeatTemplate::new(gaussians, T::lit(reference_rr), T::lit(fit_residual))
}

/// `H n_samples fs beat_count first_peak reference_rr fit_residual (amp center width)*`,
/// then one `U beat rr_s` or `E beat s0 s1 ...` line per record, beats ascending.
pub fn write_stream<T: Real, W: Write>(mut w: W, s: &GemremStream<T>) -> Result<()> {
    let mut out = String::new();
    let _ = write!(
        out,
        "H {} {} {} {} {} {}",
        s.n_samples,
        exact(s.fs.to_f64_lossy()),
        s.beat_count,
        s.first_peak,
        exact(s.template.reference_rr.to_f64_lossy()),
        exact(s.template.fit_residual.to_f64_lossy())
    );
    for g in &s.template.gaussians {
        for v in [g.amplitude, g.center, g.width] {
            let _ = write!(out, " {}", exact(v.to_f64_lossy()));
        }
    }
    out.push('\n');
    let mut u = s.updates.iter().peekable();
    let mut e = s.escapes.iter().peekable();
    loop {
        let take_u = match (u.peek(), e.peek()) {
            (None, None) => break,
            (Some(a), Some(b)) => a.beat <= b.beat,
            (Some(_), None) => true,
            (None, Some(_)) => false,
        };
        if take_u {
            let r = u.next().expect("peeked");
            let _ = writeln!(out, "U {} {}", r.beat, exact(r.rr.to_f64_lossy()));
        } else {
            let r = e.next().expect("peeked");
            let _ = write!(out, "E {}", r.beat);
            for v in &r.samples {
                let _ = write!(out, " {}", exact(v.to_f64_lossy()));
            }
            out.push('\n');
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_stream<T: Real, R: Read>(r: R) -> Result<GemremStream<T>> {
    let mut header: Option<(usize, f64, usize, usize, BeatTemplate<T>)> = None;
    let mut updates = Vec::new();
    let mut escapes = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let mut tok = line.split_whitespace();
        let Some(tag) = tok.next() else { continue };
        let rest: Vec<&str> = tok.collect();
        let num = |j: usize| -> Result<f64> {
            rest.get(j)
                .ok_or_else(|| Error::parse(n, "record too short"))?
                .parse()
                .map_err(|_| Error::parse(n, format!("bad number `{}`", rest[j])))
        };
        let int = |j: usize| -> Result<usize> {
            rest.get(j)
                .ok_or_else(|| Error::parse(n, "record too short"))?
                .parse()
                .map_err(|_| Error::parse(n, format!("bad integer `{}`", rest[j])))
        };
        match tag {
            "H" => {
                if header.is_some() {
                    return Err(Error::parse(n, "second header"));
                }
                if rest.len() < 6 || (rest.len() - 6) % 3 != 0 {
                    return Err(Error::parse(n, "header needs 6 fields plus 3 per wave"));
                }
                let gaussians = (6..rest.len())
                    .step_by(3)
                    .map(|j| {
                        Ok(GaussianWave {
                            amplitude: T::lit(num(j)?),
                            center: T::lit(num(j + 1)?),
                            width: T::lit(num(j + 2)?),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let template = BeatTemplate::new(gaussians, T::lit(num(4)?), T::lit(num(5)?))
                    .map_err(|e| Error::parse(n, e.to_string()))?;
                header = Some((int(0)?, num(1)?, int(2)?, int(3)?, template));
            }
            _ if header.is_none() => return Err(Error::parse(n, "record before header")),
            "U" => {
                if rest.len() != 2 {
                    return Err(Error::parse(n, "`U` takes a beat and an interval"));
                }
                updates.push(RrUpdate {
                    beat: int(0)?,
                    rr: T::lit(num(1)?),
                });
            }
            "E" => {
                if rest.len() < 2 {
                    return Err(Error::parse(n, "`E` needs a beat and samples"));
                }
                let samples = (1..rest.len()).map(|j| num(j).map(T::lit)).collect::<Result<_>>()?;
                escapes.push(RawEscape {
                    beat: int(0)?,
                    samples,
                });
            }
            other => return Err(Error::parse(n, format!("unknown record `{other}`"))),
        }
    }
    let (n_samples, fs, beat_count, first_peak, template) =
        header.ok_or_else(|| Error::parse(0, "missing header"))?;
    if !(fs > 0.0) {
        return Err(Error::parse(1, "rate must be positive"));
    }
    let s = GemremStream {
        template,
        n_samples,
        fs: T::lit(fs),
        beat_count,
        first_peak,
        updates,
        escapes,
    };
    s.check()?;
    Ok(s)
}
