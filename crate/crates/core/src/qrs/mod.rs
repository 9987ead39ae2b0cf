//! Integer-coefficient QRS filter cascade in streaming and matrix form.
//!
//! Low-pass stage: `y[i] = 2y[i-1] - y[i-2] + x[i] - 2x[i-6] + x[i-12]`.
//! The high-pass stage comes in two flavours, see [`FilterVariant`].
//! All stages assume zero initial conditions.

mod detect;

pub use detect::{detect_r_peaks, detect_r_peaks_with, locate_r_peaks, refine_peaks, DetectorConfig};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;
use crate::signal::{SampledSignal, CANONICAL_FS};

/// Longest tap of the cascade plus one.
pub const MIN_MATRIX_LEN: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FilterVariant {
    /// `z[i] = 32x[i-16] - z[i-1] + x[i] - x[i-32]` exactly as written.
    /// Its pole at -1 is not cancelled, so the output keeps a Nyquist-rate
    /// oscillation.
    Verbatim,
    /// DC-rejecting form: `r[i] = r[i-1] + x[i] - x[i-32]`,
    /// `z[i] = 32x[i-16] - r[i]`.
    #[default]
    Canonical,
}

impl std::str::FromStr for FilterVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "verbatim" => Ok(Self::Verbatim),
            "canonical" => Ok(Self::Canonical),
            other => Err(Error::invalid("variant", format!("unknown filter variant `{other}`"))),
        }
    }
}

impl std::fmt::Display for FilterVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Verbatim => "verbatim",
            Self::Canonical => "canonical",
        })
    }
}

#[inline]
fn at<T: Real>(x: &[T], i: usize, lag: usize) -> T {
    if i >= lag {
        x[i - lag]
    } else {
        T::zero()
    }
}

pub fn lowpass_samples<T: Real>(x: &[T]) -> Vec<T> {
    let two = T::lit(2.0);
    let mut y: Vec<T> = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let v = two * at(&y, i, 1) - at(&y, i, 2) + x[i] - two * at(x, i, 6) + at(x, i, 12);
        y.push(v);
    }
    y
}

pub fn highpass_samples<T: Real>(x: &[T], variant: FilterVariant) -> Vec<T> {
    let k32 = T::lit(32.0);
    let mut z = Vec::with_capacity(x.len());
    match variant {
        FilterVariant::Verbatim => {
            for i in 0..x.len() {
                let v = k32 * at(x, i, 16) - at(&z, i, 1) + x[i] - at(x, i, 32);
                z.push(v);
            }
        }
        FilterVariant::Canonical => {
            let mut r = T::zero();
            for i in 0..x.len() {
                r += x[i] - at(x, i, 32);
                z.push(k32 * at(x, i, 16) - r);
            }
        }
    }
    z
}

pub fn cascade_samples<T: Real>(x: &[T], variant: FilterVariant) -> Vec<T> {
    highpass_samples(&lowpass_samples(x), variant)
}

pub fn lowpass<T: Real>(x: &SampledSignal<T>) -> Result<SampledSignal<T>> {
    x.require_rate(CANONICAL_FS)?;
    x.with_samples(lowpass_samples(x.samples()))
}

pub fn highpass<T: Real>(x: &SampledSignal<T>, variant: FilterVariant) -> Result<SampledSignal<T>> {
    x.require_rate(CANONICAL_FS)?;
    x.with_samples(highpass_samples(x.samples(), variant))
}

/// Low-pass followed by high-pass: keeps the QRS complex, suppresses P and T.
pub fn bandstop_cascade<T: Real>(
    x: &SampledSignal<T>,
    variant: FilterVariant,
) -> Result<SampledSignal<T>> {
    highpass(&lowpass(x)?, variant)
}

/// First `n` samples of the cascade's impulse response.
pub fn impulse_response<T: Real>(n: usize, variant: FilterVariant) -> Vec<T> {
    let mut x = vec![T::zero(); n];
    if n > 0 {
        x[0] = T::one();
    }
    cascade_samples(&x, variant)
}

/// Delay of the cascade in samples: position of the largest impulse-response
/// magnitude (first occurrence): 21 canonical, 20 verbatim.
pub fn group_delay(variant: FilterVariant) -> usize {
    let h = impulse_response::<f64>(64, variant);
    let mut best = 0;
    for (i, v) in h.iter().enumerate() {
        if v.abs() > h[best].abs() {
            best = i;
        }
    }
    best
}

/// Matrix form of the cascade on `n`-sample frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterMatrix<T> {
    pub entries: Matrix<T>,
    pub variant: FilterVariant,
    /// Output row `i` holds cascade output `i + delay`. Zero for the causal
    /// matrix, in which case row `i` depends only on inputs `<= i`.
    pub delay: usize,
}

impl<T: Real> FilterMatrix<T> {
    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        self.entries.matvec(x)
    }

    /// Multiply-accumulates per application.
    pub fn mac_count(&self) -> u64 {
        self.entries.nnz() as u64
    }
}

/// Causal lower-triangular Toeplitz matrix `F` with `F·x = cascade(x)`.
pub fn filter_matrix<T: Real>(n: usize, variant: FilterVariant) -> Result<FilterMatrix<T>> {
    shifted_filter_matrix(n, variant, 0)
}

/// Cascade matrix advanced by the group delay so that filtered features line
/// up with the raw samples inside a frame.
pub fn centered_filter_matrix<T: Real>(n: usize, variant: FilterVariant) -> Result<FilterMatrix<T>> {
    shifted_filter_matrix(n, variant, group_delay(variant))
}

fn shifted_filter_matrix<T: Real>(
    n: usize,
    variant: FilterVariant,
    delay: usize,
) -> Result<FilterMatrix<T>> {
    if n < MIN_MATRIX_LEN {
        return Err(Error::invalid(
            "n",
            format!("{n} samples; filter matrix needs at least {MIN_MATRIX_LEN}"),
        ));
    }
    let h = impulse_response::<T>(n + delay, variant);
    let entries = Matrix::from_fn(n, n, |i, j| {
        let lag = i as isize + delay as isize - j as isize;
        if lag >= 0 {
            h[lag as usize]
        } else {
            T::zero()
        }
    });
    Ok(FilterMatrix {
        entries,
        variant,
        delay,
    })
}
