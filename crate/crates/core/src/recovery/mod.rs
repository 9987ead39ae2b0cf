//! Sparse recovery of frames from compressed measurements.
//!
//! Frames of `n` samples are represented by the first `n` rows of an
//! `N`-point wavelet synthesis matrix, `N` being the next power of two.

pub mod omp;
pub mod wavelet;

pub use omp::{column_norms, omp, omp_with_norms, SparseSolution};
pub use wavelet::{dwt_matrix, WaveletBasis, WaveletFamily};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qrs::FilterMatrix;
use crate::scalar::Real;
use crate::sensing::{MeasurementVector, SensingMatrix};
use crate::signal::SampledSignal;

/// Columns whose synthesised norm falls below this fraction of the largest
/// one are left out of the dictionary.
const ACTIVE_COLUMN_FLOOR: f64 = 1e-9;

/// Precomputed recovery dictionary `A = Φ·S` and synthesis `S`, restricted
/// to the wavelet coefficients that reach the frame.
///
/// `S` is `W` truncated to `n` rows for plain recovery and `F·W` for the
/// filtered path. Build once per sensing matrix and reuse across frames.
#[derive(Debug, Clone)]
pub struct RecoveryDictionary<T> {
    a: Matrix<T>,
    synthesis: Matrix<T>,
    norms: Vec<T>,
    active: Vec<usize>,
    coefficients: usize,
}

impl<T: Real> RecoveryDictionary<T> {
    /// `A = Φ·W`: recovers the raw frame.
    pub fn plain(phi: &SensingMatrix<T>, basis: &WaveletBasis<T>) -> Result<Self> {
        let w = truncated_synthesis(basis, phi.n())?;
        Self::from_synthesis(phi, w, basis.n)
    }

    /// `A = Φ·F·W`: recovers the filtered frame from measurements of the raw
    /// frame taken with `Φ·F`.
    pub fn filtered(
        phi: &SensingMatrix<T>,
        f: &FilterMatrix<T>,
        basis: &WaveletBasis<T>,
    ) -> Result<Self> {
        if f.n() != phi.n() {
            return Err(Error::Dimension(format!(
                "filter matrix is {0}x{0}, sensing matrix has {1} columns",
                f.n(),
                phi.n()
            )));
        }
        let w = truncated_synthesis(basis, phi.n())?;
        Self::from_synthesis(phi, f.entries.matmul(&w)?, basis.n)
    }

    fn from_synthesis(phi: &SensingMatrix<T>, s: Matrix<T>, coefficients: usize) -> Result<Self> {
        let mut sq = vec![T::zero(); s.cols()];
        for i in 0..s.rows() {
            for (acc, &v) in sq.iter_mut().zip(s.row(i)) {
                *acc += v * v;
            }
        }
        let peak = sq.iter().fold(T::zero(), |a, &b| a.max(b)).sqrt();
        let floor = peak * T::lit(ACTIVE_COLUMN_FLOOR);
        let active: Vec<usize> = (0..s.cols()).filter(|&j| sq[j].sqrt() > floor).collect();
        if active.is_empty() {
            return Err(Error::Numerical("recovery dictionary has no active columns".into()));
        }
        let synthesis = s.select_columns(&active);
        let a = phi.entries.matmul(&synthesis)?;
        let norms = column_norms(&a)?;
        Ok(Self {
            a,
            synthesis,
            norms,
            active,
            coefficients,
        })
    }

    /// Measurement count `m`.
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// Frame length `n`.
    pub fn n(&self) -> usize {
        self.synthesis.rows()
    }

    /// Wavelet coefficients that survive the activity floor.
    pub fn active_columns(&self) -> &[usize] {
        &self.active
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.a
    }

    /// Solve for the sparse coefficients and synthesise the frame.
    ///
    /// The returned solution is expressed over all `N` wavelet coefficients;
    /// its `mac_count` includes the synthesis of the frame.
    pub fn recover(&self, y: &[T], max_support: usize, tol: T) -> Result<(Vec<T>, SparseSolution<T>)> {
        let mut sol = omp_with_norms(&self.a, &self.norms, y, max_support, tol)?;
        let mut frame = vec![T::zero(); self.n()];
        for &j in &sol.support {
            let c = sol.coefficients[j];
            for (i, out) in frame.iter_mut().enumerate() {
                *out += self.synthesis[(i, j)] * c;
            }
        }
        sol.mac_count += (self.n() * sol.support.len()) as u64;
        if frame.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite recovered frame".into()));
        }
        let mut full = vec![T::zero(); self.coefficients];
        for (&j, &c) in self.active.iter().zip(&sol.coefficients) {
            full[j] = c;
        }
        sol.coefficients = full;
        sol.support = sol.support.iter().map(|&j| self.active[j]).collect();
        Ok((frame, sol))
    }
}

/// First `n` rows of the synthesis matrix of `basis`.
fn truncated_synthesis<T: Real>(basis: &WaveletBasis<T>, n: usize) -> Result<Matrix<T>> {
    if n > basis.n {
        return Err(Error::Dimension(format!(
            "frame of {n} samples exceeds {}-point wavelet basis",
            basis.n
        )));
    }
    Ok(dwt_matrix(basis).truncate_rows(n))
}

/// Recover the filtered frame `ẑ = F·W·s` from `y = Φ·F·x`.
pub fn recover_filtered<T: Real>(
    y: &MeasurementVector<T>,
    phi: &SensingMatrix<T>,
    f: &FilterMatrix<T>,
    basis: &WaveletBasis<T>,
    max_support: usize,
    tol: T,
    fs: T,
) -> Result<(SampledSignal<T>, SparseSolution<T>)> {
    let dict = RecoveryDictionary::filtered(phi, f, basis)?;
    let (frame, sol) = dict.recover(&y.values, max_support, tol)?;
    Ok((SampledSignal::new(frame, fs)?, sol))
}

/// Recover the raw frame `x̂ = W·s` from `y = Φ·x`.
pub fn recover_plain_cs<T: Real>(
    y: &MeasurementVector<T>,
    phi: &SensingMatrix<T>,
    basis: &WaveletBasis<T>,
    max_support: usize,
    tol: T,
    fs: T,
) -> Result<(SampledSignal<T>, SparseSolution<T>)> {
    let dict = RecoveryDictionary::plain(phi, basis)?;
    let (frame, sol) = dict.recover(&y.values, max_support, tol)?;
    Ok((SampledSignal::new(frame, fs)?, sol))
}
