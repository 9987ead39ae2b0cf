use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::SampledSignal;

/// Shortest and longest beat the generative model will render, in seconds.
pub const RR_RANGE: (f64, f64) = (0.3, 2.0);

/// Components whose center lies within this phase of the R wave form the QRS
/// complex and keep their absolute timing when the heart rate changes.
pub const QRS_LOCK_PHASE: f64 = std::f64::consts::FRAC_PI_4;

/// One Gaussian wave of the beat model, in beat-phase units (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianWave<T> {
    pub amplitude: T,
    pub center: T,
    pub width: T,
}

impl<T: Real> GaussianWave<T> {
    #[inline]
    pub fn eval(&self, phase: T) -> T {
        let d = phase - self.center;
        self.amplitude * (-(d * d) / (T::lit(2.0) * self.width * self.width)).exp()
    }

    #[inline]
    pub fn is_qrs_locked(&self) -> bool {
        self.center.abs() <= T::lit(QRS_LOCK_PHASE)
    }
}

/// Sum-of-Gaussians description of a single heartbeat.
///
/// Phase zero is the R wave. Phase is measured against `reference_rr` for the
/// QRS components and against the local RR interval for everything else, so P
/// and T stretch with the heart rate while the QRS complex keeps its width.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatTemplate<T> {
    pub gaussians: Vec<GaussianWave<T>>,
    pub reference_rr: T,
    pub fit_residual: T,
}

/// P, Q, R, S, T: center (degrees), amplitude (mV), width (s at 60 bpm).
const DEFAULT_WAVES: [(f64, f64, f64); 5] = [
    (-70.0, 0.12, 0.045),
    (-15.0, -0.10, 0.010),
    (0.0, 1.00, 0.010),
    (15.0, -0.25, 0.010),
    (100.0, 0.30, 0.080),
];

impl<T: Real> BeatTemplate<T> {
    pub fn new(gaussians: Vec<GaussianWave<T>>, reference_rr: T, fit_residual: T) -> Result<Self> {
        let t = Self {
            gaussians,
            reference_rr,
            fit_residual,
        };
        t.validate()?;
        Ok(t)
    }

    /// Five-wave PQRST morphology at 60 bpm.
    pub fn default_ecg() -> Self {
        Self::from_table(T::one(), |amp| amp)
    }

    /// Default phase table at `reference_rr`, with amplitudes mapped by `amp`.
    pub(crate) fn from_table(reference_rr: T, amp: impl Fn(T) -> T) -> Self {
        let two_pi = T::lit(2.0) * T::PI();
        let gaussians = DEFAULT_WAVES
            .iter()
            .map(|&(deg, a, w_s)| {
                let center = T::lit(deg.to_radians());
                let mut g = GaussianWave {
                    amplitude: amp(T::lit(a)),
                    center,
                    width: T::lit(w_s) * two_pi,
                };
                if g.is_qrs_locked() {
                    g.width = T::lit(w_s) * two_pi / reference_rr;
                }
                g
            })
            .collect();
        Self {
            gaussians,
            reference_rr,
            fit_residual: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gaussians.is_empty() {
            return Err(Error::invalid("gaussians", "template has no waves"));
        }
        if !(self.reference_rr > T::zero()) || !self.reference_rr.is_finite() {
            return Err(Error::invalid("reference_rr", "must be positive"));
        }
        if !(self.fit_residual >= T::zero()) {
            return Err(Error::invalid("fit_residual", "must be non-negative"));
        }
        for (k, g) in self.gaussians.iter().enumerate() {
            if !(g.width > T::zero()) || !g.width.is_finite() {
                return Err(Error::invalid(
                    "gaussians",
                    format!("wave {k} has non-positive width"),
                ));
            }
            if !g.amplitude.is_finite() || !g.center.is_finite() {
                return Err(Error::invalid("gaussians", format!("wave {k} is not finite")));
            }
        }
        if self.r_index().is_none() {
            return Err(Error::invalid("gaussians", "no R wave near phase zero"));
        }
        Ok(())
    }

    /// The R wave: largest |amplitude| among the QRS-locked waves, ties broken
    /// by the center nearest zero.
    pub fn r_index(&self) -> Option<usize> {
        self.gaussians
            .iter()
            .enumerate()
            .filter(|(_, g)| g.is_qrs_locked())
            .max_by(|(_, a), (_, b)| {
                a.amplitude
                    .abs()
                    .partial_cmp(&b.amplitude.abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(
                        b.center
                            .abs()
                            .partial_cmp(&a.center.abs())
                            .unwrap_or(std::cmp::Ordering::Equal),
                    )
            })
            .map(|(k, _)| k)
    }

    /// Sign of the R wave, +1 or -1.
    pub fn polarity(&self) -> T {
        match self.r_index() {
            Some(k) if self.gaussians[k].amplitude < T::zero() => -T::one(),
            _ => T::one(),
        }
    }

    /// Model value `offset` seconds after the R peak of a beat lasting `rr`.
    pub fn value_at(&self, offset: T, rr: T) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        let stretch_phase = two_pi * offset / rr;
        let locked_phase = two_pi * offset / self.reference_rr;
        self.gaussians
            .iter()
            .map(|g| {
                if g.is_qrs_locked() {
                    g.eval(locked_phase)
                } else {
                    g.eval(stretch_phase)
                }
            })
            .sum()
    }

    /// Number of template parameters as transmitted: three per wave plus the
    /// reference interval.
    pub fn parameter_count(&self) -> usize {
        3 * self.gaussians.len() + 1
    }
}

fn check_rr<T: Real>(rr: T) -> Result<()> {
    let v = rr.to_f64_lossy();
    if !(RR_RANGE.0..=RR_RANGE.1).contains(&v) {
        return Err(Error::invalid(
            "rr",
            format!("{v} s outside [{}, {}] s", RR_RANGE.0, RR_RANGE.1),
        ));
    }
    Ok(())
}

/// Index of the R peak inside a rendered beat of `rr` seconds.
pub fn beat_center<T: Real>(rr: T, fs: T) -> usize {
    (rr * fs / T::lit(2.0)).round().to_usize().unwrap_or(0)
}

/// Renders one beat of duration `rr` with its R peak at `round(rr·fs/2)`.
pub fn render_beat<T: Real>(template: &BeatTemplate<T>, rr: T, fs: T) -> Result<SampledSignal<T>> {
    check_rr(rr)?;
    if !(fs > T::zero()) {
        return Err(Error::invalid("fs", "must be positive"));
    }
    let len = (rr * fs).round().to_usize().unwrap_or(0);
    let center = beat_center(rr, fs);
    let samples = (0..len)
        .map(|j| {
            let offset = (T::from_usize_lossy(j) - T::from_usize_lossy(center)) / fs;
            template.value_at(offset, rr)
        })
        .collect();
    SampledSignal::new(samples, fs)
}
