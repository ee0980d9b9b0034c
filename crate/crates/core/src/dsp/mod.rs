//! Framed spectral analysis and synthesis.
//!
//! Frame `t` covers samples `[t*hop, t*hop + fft_size)` with no centre
//! padding; the final partial frame is zero padded. Analysis uses a periodic
//! Hann window, synthesis is weighted overlap-add with the same window
//! normalised by the accumulated squared-window envelope.

mod audio;
mod stft;
mod stream;

pub use audio::{read_raw_f32, read_wav, write_raw_f32, write_wav, WavFormat};
pub use realfft::num_complex::Complex64;
pub use stft::{hann_periodic, istft, stft, Stft};
pub use stream::{OverlapAdd, StftAnalyzer};

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Mono PCM signal.
#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn zeros(len: usize, sample_rate: u32) -> Self {
        Self {
            samples: vec![0.0; len],
            sample_rate: sample_rate.max(1),
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// `T x F` complex STFT frames, row-major by frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpectrogram {
    data: Vec<Complex64>,
    num_frames: usize,
    num_bins: usize,
    fft_size: usize,
    hop: usize,
}

impl ComplexSpectrogram {
    pub fn zeros(num_frames: usize, fft_size: usize, hop: usize) -> Self {
        let num_bins = fft_size / 2 + 1;
        Self {
            data: vec![Complex64::new(0.0, 0.0); num_frames * num_bins],
            num_frames,
            num_bins,
            fft_size,
            hop,
        }
    }

    pub fn from_data(data: Vec<Complex64>, fft_size: usize, hop: usize) -> Result<Self> {
        let num_bins = fft_size / 2 + 1;
        if !data.len().is_multiple_of(num_bins) {
            return Err(Error::shape("spectrogram data", num_bins, data.len() % num_bins));
        }
        if let Some(i) = data.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self {
            num_frames: data.len() / num_bins,
            data,
            num_bins,
            fft_size,
            hop,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn frame(&self, t: usize) -> &[Complex64] {
        &self.data[t * self.num_bins..(t + 1) * self.num_bins]
    }

    pub fn frame_mut(&mut self, t: usize) -> &mut [Complex64] {
        &mut self.data[t * self.num_bins..(t + 1) * self.num_bins]
    }

    pub fn frames(&self) -> std::slice::ChunksExact<'_, Complex64> {
        self.data.chunks_exact(self.num_bins)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn magnitude(&self) -> MagnitudeSpectrogram {
        MagnitudeSpectrogram(RealFrames {
            data: self.data.iter().map(|c| c.norm()).collect(),
            num_frames: self.num_frames,
            num_bins: self.num_bins,
        })
    }

    pub fn phase(&self) -> PhaseSpectrogram {
        PhaseSpectrogram(RealFrames {
            data: self.data.iter().map(|c| wrap_phase(c.arg())).collect(),
            num_frames: self.num_frames,
            num_bins: self.num_bins,
        })
    }

    /// Recombines polar components into a complex spectrogram.
    pub fn from_polar(
        mag: &MagnitudeSpectrogram,
        phase: &PhaseSpectrogram,
        fft_size: usize,
        hop: usize,
    ) -> Result<Self> {
        check_dims(mag, phase)?;
        let data = mag
            .data()
            .iter()
            .zip(phase.data())
            .map(|(&m, &p)| Complex64::from_polar(m, p))
            .collect();
        let spec = Self::from_data(data, fft_size, hop)?;
        crate::error::check_len("polar bins", spec.num_bins, mag.num_bins())?;
        Ok(spec)
    }
}

/// Real-valued `T x F` grid shared by the magnitude and phase views.
#[derive(Clone, Debug, PartialEq)]
pub struct RealFrames {
    data: Vec<f64>,
    num_frames: usize,
    num_bins: usize,
}

impl RealFrames {
    pub fn new(data: Vec<f64>, num_bins: usize) -> Result<Self> {
        if num_bins == 0 || !data.len().is_multiple_of(num_bins) {
            return Err(Error::shape("real frames", num_bins, data.len()));
        }
        Ok(Self {
            num_frames: data.len() / num_bins,
            data,
            num_bins,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.num_bins..(t + 1) * self.num_bins]
    }

    pub fn frames(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.num_bins)
    }
}

/// Non-negative magnitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct MagnitudeSpectrogram(RealFrames);

/// Phases wrapped to `(-pi, pi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpectrogram(RealFrames);

impl MagnitudeSpectrogram {
    pub fn new(data: Vec<f64>, num_bins: usize) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "magnitudes must be finite and non-negative".into(),
            ));
        }
        Ok(Self(RealFrames::new(data, num_bins)?))
    }
}

impl PhaseSpectrogram {
    pub fn new(data: Vec<f64>, num_bins: usize) -> Result<Self> {
        let data = data.into_iter().map(wrap_phase).collect();
        Ok(Self(RealFrames::new(data, num_bins)?))
    }
}

impl std::ops::Deref for MagnitudeSpectrogram {
    type Target = RealFrames;
    fn deref(&self) -> &RealFrames {
        &self.0
    }
}

impl std::ops::Deref for PhaseSpectrogram {
    type Target = RealFrames;
    fn deref(&self) -> &RealFrames {
        &self.0
    }
}

fn check_dims(a: &RealFrames, b: &RealFrames) -> Result<()> {
    crate::error::check_len("companion frames", a.num_frames, b.num_frames)?;
    crate::error::check_len("companion bins", a.num_bins, b.num_bins)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let two_pi = 2.0 * PI;
    let mut y = (x + PI).rem_euclid(two_pi) - PI;
    if y <= -PI {
        y += two_pi;
    }
    y
}
