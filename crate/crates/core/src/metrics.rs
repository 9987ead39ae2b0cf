//! Fidelity and compression metrics.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionScore {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub true_positives: usize,
}

/// Pairs `(detected, truth)` matched one-to-one within `tol` samples.
///
/// Greedy on distance: all candidate pairs are visited from closest to
/// farthest (ties by truth index, then detected index) and a pair is kept
/// when neither side is taken yet.
pub fn match_peaks(detected: &[usize], truth: &[usize], tol: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (ti, &t) in truth.iter().enumerate() {
        let lo = detected.partition_point(|&d| d + tol < t);
        for (di, &d) in detected.iter().enumerate().skip(lo) {
            if d > t + tol {
                break;
            }
            pairs.push((d.abs_diff(t), ti, di));
        }
    }
    pairs.sort_unstable();
    let mut used_t = vec![false; truth.len()];
    let mut used_d = vec![false; detected.len()];
    let mut out = Vec::new();
    for (_, ti, di) in pairs {
        if !used_t[ti] && !used_d[di] {
            used_t[ti] = true;
            used_d[di] = true;
            out.push((di, ti));
        }
    }
    out.sort_unstable_by_key(|&(_, ti)| ti);
    out
}

/// R-peak detection score at `tol_s` seconds.
///
/// Two empty lists score 1; exactly one empty list scores 0.
pub fn rpeak_f1(detected: &[usize], truth: &[usize], tol_s: f64, fs: f64) -> Result<DetectionScore> {
    if !(tol_s > 0.0) || !(fs > 0.0) {
        return Err(Error::invalid("tol_s", "tolerance and rate must be positive"));
    }
    if detected.is_empty() && truth.is_empty() {
        return Ok(DetectionScore {
            f1: 1.0,
            precision: 1.0,
            recall: 1.0,
            true_positives: 0,
        });
    }
    let tol = (tol_s * fs).round() as usize;
    let tp = match_peaks(detected, truth, tol).len();
    let ratio = |den: usize| if den == 0 { 0.0 } else { tp as f64 / den as f64 };
    let (precision, recall) = (ratio(detected.len()), ratio(truth.len()));
    let f1 = if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (detected.len() + truth.len()) as f64
    };
    Ok(DetectionScore {
        f1,
        precision,
        recall,
        true_positives: tp,
    })
}

/// RMS error in seconds between true RR intervals and the intervals between
/// the detections matched to both of their ends. `None` when no interval has
/// both ends matched.
pub fn rr_rmse(detected: &[usize], truth: &[usize], tol_s: f64, fs: f64) -> Option<f64> {
    let tol = (tol_s * fs).round() as usize;
    let mut of_truth = vec![None; truth.len()];
    for (di, ti) in match_peaks(detected, truth, tol) {
        of_truth[ti] = Some(detected[di]);
    }
    let errs: Vec<f64> = (1..truth.len())
        .filter_map(|k| {
            let (a, b) = (of_truth[k - 1]?, of_truth[k]?);
            let d = b as f64 - a as f64;
            let t = (truth[k] - truth[k - 1]) as f64;
            Some((d - t) / fs)
        })
        .collect();
    if errs.is_empty() {
        return None;
    }
    Some((errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt())
}

/// Percentage RMS difference `100·‖ref − test‖ / ‖ref − mean(ref)‖`.
pub fn prd<T: Real>(reference: &[T], test: &[T]) -> Result<T> {
    if reference.len() != test.len() {
        return Err(Error::Dimension(format!(
            "reference has {} samples, test has {}",
            reference.len(),
            test.len()
        )));
    }
    if reference.is_empty() {
        return Err(Error::invalid("reference", "must not be empty"));
    }
    let mean = reference.iter().copied().sum::<T>() / T::from_usize_lossy(reference.len());
    let den: T = reference.iter().map(|&r| (r - mean) * (r - mean)).sum();
    if !(den > T::zero()) {
        return Err(Error::Numerical("PRD undefined for a constant reference".into()));
    }
    let num: T = reference.iter().zip(test).map(|(&r, &t)| (r - t) * (r - t)).sum();
    Ok(T::lit(100.0) * (num / den).sqrt())
}

/// Raw bits over transmitted bits.
pub fn compression_ratio(n_samples: u64, bits_per_sample: u32, transmitted_bits: u64) -> Result<f64> {
    if transmitted_bits == 0 {
        return Err(Error::invalid("transmitted_bits", "must be positive"));
    }
    Ok((n_samples as f64 * bits_per_sample as f64) / transmitted_bits as f64)
}
