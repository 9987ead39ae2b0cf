//! Learning a beat template from a Nyquist-rate snippet.

use super::template::{beat_center, BeatTemplate, GaussianWave};
use super::local_rr_samples;
use crate::error::{Error, Result};
use crate::linalg::{solve_dense, Matrix};
use crate::scalar::Real;
use crate::signal::{GroundTruth, SampledSignal, CANONICAL_FS};

const MIN_BEATS: usize = 5;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateFit<T> {
    pub template: BeatTemplate<T>,
    pub converged: bool,
    pub iterations: usize,
    /// Number of beats averaged.
    pub beats: usize,
    /// Phase-normalised average beat the Gaussians were fitted to, sampled
    /// like `render_beat(template, reference_rr, fs)`.
    pub average_beat: Vec<T>,
}

fn sample_linear<T: Real>(s: &[T], pos: f64) -> T {
    let i = pos.floor() as usize;
    if i + 1 >= s.len() {
        return s[s.len() - 1];
    }
    let frac = T::lit(pos - i as f64);
    s[i] + (s[i + 1] - s[i]) * frac
}

/// Segments beats around each peak, normalises them to a common phase grid,
/// averages them and fits a five-wave Gaussian sum by Gauss-Newton.
pub fn learn_template<T: Real>(
    snippet: &SampledSignal<T>,
    peaks: &GroundTruth<T>,
) -> Result<TemplateFit<T>> {
    snippet.require_rate(CANONICAL_FS)?;
    let p = &peaks.r_peaks;
    if p.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} peaks; at least {MIN_BEATS} complete beats required",
            p.len()
        )));
    }
    let fs = snippet.fs().to_f64_lossy();
    let ref_samples = (p[p.len() - 1] - p[0]) as f64 / (p.len() - 1) as f64;
    let reference_rr = T::lit(ref_samples / fs);
    let len = (reference_rr * snippet.fs()).round().to_usize().unwrap_or(0);
    let center = beat_center(reference_rr, snippet.fs());
    let last = (snippet.len() - 1) as f64;

    let mut sum = vec![T::zero(); len];
    let mut beats = 0usize;
    for (k, &pk) in p.iter().enumerate() {
        let Some(local) = local_rr_samples(p, k) else {
            continue;
        };
        let scale = local / ref_samples;
        let first = pk as f64 + (0.0 - center as f64) * scale;
        let end = pk as f64 + ((len - 1) as f64 - center as f64) * scale;
        if first < 0.0 || end > last {
            continue;
        }
        for (j, acc) in sum.iter_mut().enumerate() {
            let pos = pk as f64 + (j as f64 - center as f64) * scale;
            *acc += sample_linear(snippet.samples(), pos);
        }
        beats += 1;
    }
    if beats < MIN_BEATS {
        return Err(Error::InsufficientData(format!(
            "{beats} complete beats; at least {MIN_BEATS} required"
        )));
    }
    let average: Vec<T> = sum
        .iter()
        .map(|&v| v / T::from_usize_lossy(beats))
        .collect();
    if average.iter().all(|v| v.abs() <= T::epsilon()) {
        return Err(Error::InsufficientData("average beat is flat".into()));
    }

    let two_pi = T::lit(2.0) * T::PI();
    let phases: Vec<T> = (0..len)
        .map(|j| two_pi * (T::from_usize_lossy(j) - T::from_usize_lossy(center)) / (reference_rr * snippet.fs()))
        .collect();

    let mut init = BeatTemplate::from_table(reference_rr, |a| a);
    for g in init.gaussians.iter_mut() {
        let j = phases
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (*a.1 - g.center)
                    .abs()
                    .partial_cmp(&(*b.1 - g.center).abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(j, _)| j)
            .unwrap_or(center);
        g.amplitude = average[j];
    }

    let (waves, converged, iterations, rms) = gauss_newton(init.gaussians, &phases, &average);
    let template = BeatTemplate::new(waves, reference_rr, rms)?;
    Ok(TemplateFit {
        template,
        converged,
        iterations,
        beats,
        average_beat: average,
    })
}

fn flatten<T: Real>(waves: &[GaussianWave<T>]) -> Vec<T> {
    waves
        .iter()
        .flat_map(|g| [g.amplitude, g.center, g.width])
        .collect()
}

fn unflatten<T: Real>(p: &[T]) -> Vec<GaussianWave<T>> {
    p.chunks(3)
        .map(|c| GaussianWave {
            amplitude: c[0],
            center: c[1],
            width: c[2],
        })
        .collect()
}

fn residuals<T: Real>(p: &[T], phases: &[T], data: &[T]) -> Vec<T> {
    let waves = unflatten(p);
    phases
        .iter()
        .zip(data)
        .map(|(&th, &d)| waves.iter().map(|g| g.eval(th)).sum::<T>() - d)
        .collect()
}

fn cost<T: Real>(r: &[T]) -> T {
    r.iter().map(|&v| v * v).sum::<T>()
}

fn valid<T: Real>(p: &[T]) -> bool {
    p.chunks(3).all(|c| c[2] > T::zero() && c.iter().all(|v| v.is_finite()))
}

/// Returns (waves, converged, iterations, RMS residual).
fn gauss_newton<T: Real>(
    init: Vec<GaussianWave<T>>,
    phases: &[T],
    data: &[T],
) -> (Vec<GaussianWave<T>>, bool, usize, T) {
    let two = T::lit(2.0);
    let mut p = flatten(&init);
    let np = p.len();
    let mut r = residuals(&p, phases, data);
    let mut c = cost(&r);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Normal equations JᵀJ δ = -Jᵀr.
        let mut jtj = Matrix::<T>::zeros(np, np);
        let mut jtr = vec![T::zero(); np];
        let mut row = vec![T::zero(); np];
        for (&th, &ri) in phases.iter().zip(&r) {
            for (k, chunk) in p.chunks(3).enumerate() {
                let (a, cen, w) = (chunk[0], chunk[1], chunk[2]);
                let d = th - cen;
                let e = (-(d * d) / (two * w * w)).exp();
                row[3 * k] = e;
                row[3 * k + 1] = a * e * d / (w * w);
                row[3 * k + 2] = a * e * d * d / (w * w * w);
            }
            for i in 0..np {
                if row[i] == T::zero() {
                    continue;
                }
                jtr[i] += row[i] * ri;
                for j in 0..np {
                    jtj[(i, j)] += row[i] * row[j];
                }
            }
        }
        let grad = jtr.iter().map(|v| v.abs()).fold(T::zero(), T::max);
        if grad <= T::epsilon() * T::lit(16.0) * (T::one() + c) {
            converged = true;
            break;
        }
        let diag_max = (0..np).map(|i| jtj[(i, i)]).fold(T::zero(), T::max);
        let ridge = diag_max * T::epsilon().sqrt() * T::lit(1e-3);
        for i in 0..np {
            jtj[(i, i)] += ridge;
        }
        let rhs: Vec<T> = jtr.iter().map(|&v| -v).collect();
        let Some(step) = solve_dense(&jtj, &rhs) else {
            break;
        };

        let mut alpha = T::one();
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<T> = p.iter().zip(&step).map(|(&a, &s)| a + alpha * s).collect();
            if valid(&trial) {
                let tr = residuals(&trial, phases, data);
                let tc = cost(&tr);
                if tc < c {
                    accepted = Some((trial, tr, tc));
                    break;
                }
            }
            alpha = alpha / two;
        }
        let Some((np_, nr, nc)) = accepted else {
            // No descent along the Gauss-Newton direction: stationary to
            // working precision.
            converged = true;
            break;
        };
        let decrease = c - nc;
        let step_norm = step.iter().map(|&s| (alpha * s).abs()).fold(T::zero(), T::max);
        p = np_;
        r = nr;
        c = nc;
        if decrease <= T::lit(1e-14) * c || step_norm <= T::lit(1e-12) {
            converged = true;
            break;
        }
    }

    let mut waves = unflatten(&p);
    for g in waves.iter_mut() {
        g.width = g.width.abs();
        // keep centers in [-π, π)
        let pi = T::PI();
        while g.center >= pi {
            g.center -= two * pi;
        }
        while g.center < -pi {
            g.center += two * pi;
        }
    }
    let rms = (c / T::from_usize_lossy(data.len().max(1))).sqrt();
    (waves, converged, iterations, rms)
}
