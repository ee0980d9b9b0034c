//! Streaming speech bandwidth extension.
//!
//! The engine takes 48 kHz mono speech whose effective bandwidth is unknown
//! (and may change over time), analyses it with a 1536-point STFT, and
//! reconstructs the missing high band with a two-stream network: a magnitude
//! inpainting stream working on ERB bands and a phase refinement stream
//! working on the stacked real/imaginary spectrum. The lite variant keeps the
//! magnitude stream only and uses a mirrored ("flipped") phase for the high
//! band.
//!
//! Besides the engine the crate ships the supporting tooling: the loss
//! functions and objective metrics, a band-limiting simulator, a binary
//! weight format and an analytical complexity counter.

pub mod bench;
pub mod bwsim;
pub mod dsp;
pub mod engine;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod spectral;
pub mod weights_io;

pub use dsp::{ComplexSpectrogram, MagnitudeSpectrogram, PhaseSpectrogram, Waveform};
pub use engine::{Engine, StreamProcessor};
pub use error::{Error, Result, WeightsError};
pub use exec::Exec;
pub use model::{BaeModel, ModelConfig, ModelWeights, Variant};

/// Pipeline sample rate in Hz.
pub const SAMPLE_RATE: u32 = 48_000;
/// Analysis frame length (32 ms).
pub const FFT_SIZE: usize = 1536;
/// Frame hop (50% overlap).
pub const HOP_SIZE: usize = 768;
/// Number of one-sided frequency bins.
pub const NUM_BINS: usize = FFT_SIZE / 2 + 1;
