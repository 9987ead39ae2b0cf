use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use gencs::bench::{lifetime_proxy, max_holding_cr, read_bench_csv, run_bench, write_bench_csv, write_lifetime_csv};
use gencs::config::Settings;
use gencs::io;
use gencs::model::{gemrem_decode, gemrem_encode, learn_template, BeatTemplate};
use gencs::pipeline::{gencs_resynthesise, CsCodec, Method};
use gencs::qrs::{bandstop_cascade, locate_r_peaks};
use gencs::sensing::measurements_for_ratio;
use gencs::signal::{synthesize_ecg, CANONICAL_FS};
use gencs::{Error as CoreError, Signal, Template};

use crate::{Command, Common, CONFIG_ENV};

#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    File(PathBuf, std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::File(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// 1 validation, 2 I/O, 3 numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::File(..) => 2,
            CliError::Core(e) => match e {
                CoreError::Io(_) => 2,
                CoreError::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => 2,
                CoreError::Numerical(_) | CoreError::ZeroColumn(_) => 3,
                _ => 1,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn open(p: &Path) -> Result<BufReader<File>> {
    File::open(p)
        .map(BufReader::new)
        .map_err(|e| CliError::File(p.to_path_buf(), e))
}

fn create(p: &Path) -> Result<BufWriter<File>> {
    File::create(p)
        .map(BufWriter::new)
        .map_err(|e| CliError::File(p.to_path_buf(), e))
}

/// Writes through a buffered file, reporting failures against its path.
fn write_to(p: &Path, f: impl FnOnce(&mut BufWriter<File>) -> gencs::Result<()>) -> Result<()> {
    let mut w = create(p)?;
    f(&mut w).map_err(|e| match e {
        CoreError::Io(io) => CliError::File(p.to_path_buf(), io),
        other => CliError::Core(other),
    })?;
    w.flush().map_err(|e| CliError::File(p.to_path_buf(), e))
}

fn settings(common: &Common) -> Result<Settings> {
    let mut s = Settings::default();
    let path = common
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    if let Some(p) = path {
        s.apply_file(open(&p)?)?;
    }
    s.apply_overrides(common.set.iter().map(String::as_str))?;
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn read_signal(p: &Path) -> Result<Signal> {
    Ok(io::read_signal(open(p)?)?)
}

fn read_template(p: &Path) -> Result<Template> {
    Ok(io::read_template(open(p)?)?)
}

fn need_template(t: &Option<PathBuf>, what: &str) -> Result<Template> {
    match t {
        Some(p) => read_template(p),
        None => Err(CoreError::Validation {
            field: "template",
            reason: format!("{what} needs --template"),
        }
        .into()),
    }
}

fn method(s: &Settings, flag: &Option<String>) -> Result<Method> {
    let m = match flag {
        Some(v) => v.parse()?,
        None => s.method,
    };
    if m == Method::Gemrem {
        return Err(CoreError::Validation {
            field: "method",
            reason: "use the gemrem subcommand for gemrem".into(),
        }
        .into());
    }
    Ok(m)
}

fn codec(s: &Settings, method: Method, m: usize, template: Option<&BeatTemplate<f64>>) -> Result<CsCodec<f64>> {
    let cs = &s.bench.cs;
    Ok(match (method, template) {
        (Method::Gencs, Some(t)) => CsCodec::gencs(m, s.seed, t, cs)?,
        (Method::Gencs, None) => {
            return Err(CoreError::Validation {
                field: "template",
                reason: "gencs needs --template".into(),
            }
            .into())
        }
        _ => CsCodec::plain(m, s.seed, cs)?,
    })
}

pub fn run(common: &Common, cmd: &Command) -> Result<()> {
    let mut s = settings(common)?;
    match cmd {
        Command::Synth { out, truth, duration } => {
            if let Some(d) = duration {
                s.bench.corpus.duration_s = *d;
            }
            let (x, gt) = synthesize_ecg(&s.bench.corpus.spec(s.seed))?;
            write_to(out, |w| io::write_signal(w, &x))?;
            if let Some(p) = truth {
                write_to(p, |w| io::write_ground_truth(w, &gt.r_peaks))?;
            }
            println!("samples={} beats={}", x.len(), gt.len());
        }
        Command::Learn { signal, truth, out } => {
            let x = read_signal(signal)?;
            let gt = io::read_ground_truth(open(truth)?, x.fs())?;
            let fit = learn_template(&x, &gt)?;
            write_to(out, |w| io::write_template(w, &fit.template))?;
            println!(
                "beats={} iterations={} converged={} fit_residual={}",
                fit.beats, fit.iterations, fit.converged, fit.template.fit_residual
            );
        }
        Command::Filter { signal, out, peaks } => {
            let x = read_signal(signal)?;
            let z = bandstop_cascade(&x, s.bench.cs.variant)?;
            write_to(out, |w| io::write_signal(w, &z))?;
            if let Some(p) = peaks {
                let gt = locate_r_peaks(&x, s.bench.cs.variant, 1.0)?;
                write_to(p, |w| io::write_ground_truth(w, &gt.r_peaks))?;
            }
        }
        Command::Compress { signal, template, out, cr, method: flag } => {
            let m_kind = method(&s, flag)?;
            let cr = cr.unwrap_or(s.cr);
            let x = read_signal(signal)?;
            x.require_rate(CANONICAL_FS)?;
            let t = match m_kind {
                Method::Gencs => Some(need_template(template, "gencs")?),
                _ => None,
            };
            let m = measurements_for_ratio(s.bench.cs.frame_len, cr)?;
            let c = codec(&s, m_kind, m, t.as_ref())?;
            let ys = c.compress(x.samples())?;
            write_to(out, |w| io::write_measurements(w, &ys))?;
            let bits = c.transmitted_bits(ys.len(), s.bench.cs.measurement_bits);
            println!(
                "method={} frames={} m={} n={} transmitted_bits={} samples={}",
                m_kind,
                ys.len(),
                m,
                c.n,
                bits,
                x.len()
            );
        }
        Command::Recover {
            measurements,
            template,
            out,
            sidecar,
            peaks,
            filtered,
            samples,
            method: flag,
        } => {
            let m_kind = method(&s, flag)?;
            let ys: Vec<_> = io::read_measurements(open(measurements)?)?;
            let m = ys.first().map(|y| y.values.len()).ok_or_else(|| CoreError::InsufficientData("no measurements".into()))?;
            let t = match m_kind {
                Method::Gencs => Some(need_template(template, "gencs")?),
                _ => None,
            };
            let c = codec(&s, m_kind, m, t.as_ref())?;
            let len = samples.unwrap_or(ys.len() * c.n);
            let (xhat, stats) = c.recover(&ys, len)?;
            let xhat = Signal::new(xhat, CANONICAL_FS)?;
            let (signal, detected) = match &t {
                Some(t) => {
                    if let Some(p) = filtered {
                        write_to(p, |w| io::write_signal(w, &xhat))?;
                    }
                    let (pk, sig) = gencs_resynthesise(&xhat, t, &s.bench.cs)?;
                    (sig, pk)
                }
                None => {
                    let pk = locate_r_peaks(&xhat, s.bench.cs.variant, 1.0)?.r_peaks;
                    (xhat, pk)
                }
            };
            write_to(out, |w| io::write_signal(w, &signal))?;
            if let Some(p) = sidecar {
                write_to(p, |w| io::write_sidecar(w, &stats))?;
            }
            if let Some(p) = peaks {
                write_to(p, |w| io::write_ground_truth(w, &detected))?;
            }
            let macs: u64 = stats.iter().map(|f| f.mac_count).sum();
            println!("frames={} peaks={} mac_count={}", stats.len(), detected.len(), macs);
        }
        Command::Gemrem { signal, template, stream, out, decode } => {
            let g = &s.bench.gemrem;
            let st = match (signal, stream) {
                (Some(sig), _) => {
                    let x = read_signal(sig)?;
                    let t = need_template(template, "encoding")?;
                    let st = gemrem_encode(&x, &t, g)?;
                    if let Some(p) = out {
                        write_to(p, |w| io::write_stream(w, &st))?;
                    }
                    st
                }
                (None, Some(p)) => io::read_stream(open(p)?)?,
                (None, None) => {
                    return Err(CoreError::Validation {
                        field: "gemrem",
                        reason: "give --signal to encode or --stream to decode".into(),
                    }
                    .into())
                }
            };
            if let Some(p) = decode {
                let y = gemrem_decode(&st, st.n_samples, st.fs)?;
                write_to(p, |w| io::write_signal(w, &y))?;
            }
            println!(
                "beats={} updates={} escapes={} stream_bits={} cr={} cr_without_header={}",
                st.beat_count,
                st.updates.len(),
                st.escapes.len(),
                st.stream_bits(g),
                st.compression_ratio(g),
                st.compression_ratio_without_header(g)
            );
        }
        Command::Bench { out, lifetime } => {
            let records = run_bench(&s.bench)?;
            write_to(out, |w| write_bench_csv(w, &records))?;
            if let Some(p) = lifetime {
                let rows = lifetime_proxy(&records, s.mac_budget)?;
                write_to(p, |w| write_lifetime_csv(w, &rows))?;
            }
            let show = |m| max_holding_cr(&records, m).map_or("none".to_string(), |c: f64| c.to_string());
            println!(
                "rows={} gencs_max_cr={} plain_cs_max_cr={}",
                records.len(),
                show(Method::Gencs),
                show(Method::PlainCs)
            );
        }
        Command::Lifetime { bench, out, mac_budget } => {
            let n_samples = match &s.bench.recording {
                Some(r) => {
                    let x = read_signal(&r.signal)?;
                    (x.len() as f64 * CANONICAL_FS / x.fs()).round() as usize
                }
                None => (s.bench.corpus.duration_s * CANONICAL_FS).round() as usize,
            };
            let records = read_bench_csv(open(bench)?, n_samples, s.bench.cs.frame_len)?;
            let rows = lifetime_proxy(&records, mac_budget.unwrap_or(s.mac_budget))?;
            write_to(out, |w| write_lifetime_csv(w, &rows))?;
        }
    }
    Ok(())
}
