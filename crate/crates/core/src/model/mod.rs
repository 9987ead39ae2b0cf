//! Generative beat model: template learning, rendering, reconstruction and
//! the GeMREM model-matching codec.

mod fit;
pub mod gemrem;
mod reconstruct;
mod template;

pub use fit::{learn_template, TemplateFit};
pub use gemrem::{
    decoded_peaks, gemrem_decode, gemrem_encode, gemrem_encode_with_peaks, GemremConfig,
    GemremStream, RawEscape, RrUpdate,
};
pub use reconstruct::{reconstruct, Reconstruction, CROSSFADE_S};
pub use template::{
    beat_center, render_beat, BeatTemplate, GaussianWave, QRS_LOCK_PHASE, RR_RANGE,
};

/// Local RR of beat `k` in samples: mean of the two adjacent intervals, or the
/// single adjacent interval at either end. `None` with fewer than two peaks.
pub fn local_rr_samples(peaks: &[usize], k: usize) -> Option<f64> {
    let n = peaks.len();
    if n < 2 || k >= n {
        return None;
    }
    Some(if k == 0 {
        (peaks[1] - peaks[0]) as f64
    } else if k == n - 1 {
        (peaks[n - 1] - peaks[n - 2]) as f64
    } else {
        (peaks[k + 1] - peaks[k - 1]) as f64 / 2.0
    })
}
