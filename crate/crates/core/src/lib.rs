//! Generative-model compressive sensing for ECG-like signals.
//!
//! The sensor filters each frame with an integer QRS band-stop cascade before
//! random projection, so only the R-peak train is sensed. The receiver
//! recovers that train by orthogonal matching pursuit in a wavelet basis and
//! re-synthesises the signal from a learned sum-of-Gaussians beat template.
//! Plain compressive sensing and template-matching (GeMREM) codecs serve as
//! baselines.
//!
//! Numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! name the common instantiations.

pub mod bench;
pub mod config;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod qrs;
pub mod recovery;
pub mod scalar;
pub mod sensing;
pub mod signal;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Signal = signal::SampledSignal<f64>;
pub type Signal32 = signal::SampledSignal<f32>;
pub type Peaks = signal::GroundTruth<f64>;
pub type Template = model::BeatTemplate<f64>;
pub type Template32 = model::BeatTemplate<f32>;
pub type Stream = model::GemremStream<f64>;
pub type Codec = pipeline::CsCodec<f64>;
pub type Codec32 = pipeline::CsCodec<f32>;
pub type Measurements = Vec<sensing::MeasurementVector<f64>>;
