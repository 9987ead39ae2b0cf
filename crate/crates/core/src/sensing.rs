//! Bernoulli sensing matrices and compressed measurements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qrs::FilterMatrix;
use crate::scalar::Real;
use crate::signal::SampledSignal;

/// Default frame: two seconds at 200 Hz.
pub const DEFAULT_FRAME_LEN: usize = 400;

/// `m × n` matrix of equiprobable `±1/√m` entries drawn from a seeded stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix<T> {
    pub entries: Matrix<T>,
    pub seed: u64,
}

impl<T: Real> SensingMatrix<T> {
    pub fn m(&self) -> usize {
        self.entries.rows()
    }

    pub fn n(&self) -> usize {
        self.entries.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector<T> {
    pub values: Vec<T>,
    pub frame_id: usize,
}

pub fn bernoulli_matrix<T: Real>(m: usize, n: usize, seed: u64) -> Result<SensingMatrix<T>> {
    if m == 0 {
        return Err(Error::invalid("m", "need at least one measurement"));
    }
    if m > n {
        return Err(Error::invalid("m", format!("{m} measurements exceed frame length {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = T::one() / T::from_usize_lossy(m).sqrt();
    let entries = Matrix::from_fn(m, n, |_, _| if rng.random::<bool>() { scale } else { -scale });
    Ok(SensingMatrix { entries, seed })
}

/// Measurement count for a target sample compression ratio `n / m`.
pub fn measurements_for_ratio(n: usize, cr: f64) -> Result<usize> {
    if !(cr >= 1.0) || !cr.is_finite() {
        return Err(Error::invalid("cr", format!("{cr} is not a ratio >= 1")));
    }
    let m = (n as f64 / cr).round() as usize;
    if m == 0 {
        return Err(Error::invalid("cr", format!("ratio {cr} leaves no measurements for n = {n}")));
    }
    Ok(m)
}

/// `y = Φ·x`.
pub fn measure<T: Real>(
    phi: &SensingMatrix<T>,
    x: &SampledSignal<T>,
    frame_id: usize,
) -> Result<MeasurementVector<T>> {
    measure_with(&phi.entries, x.samples(), frame_id)
}

/// `y = A·x` for any acquisition matrix, e.g. the effective matrix `Φ·F`.
pub fn measure_with<T: Real>(
    a: &Matrix<T>,
    x: &[T],
    frame_id: usize,
) -> Result<MeasurementVector<T>> {
    if x.len() != a.cols() {
        return Err(Error::Dimension(format!(
            "frame of {} samples against {} columns",
            x.len(),
            a.cols()
        )));
    }
    Ok(MeasurementVector {
        values: a.matvec(x)?,
        frame_id,
    })
}

/// `A₀ = Φ·F`, so that `A₀·x = Φ·(F·x)`: raw samples are acquired while the
/// measurements describe the filtered signal.
pub fn effective_matrix<T: Real>(phi: &SensingMatrix<T>, f: &FilterMatrix<T>) -> Result<Matrix<T>> {
    if phi.n() != f.n() {
        return Err(Error::Dimension(format!(
            "sensing matrix has {} columns, filter matrix is {}x{}",
            phi.n(),
            f.n(),
            f.n()
        )));
    }
    phi.entries.matmul(&f.entries)
}
