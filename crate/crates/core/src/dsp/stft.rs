use std::f64::consts::PI;
use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use super::{Complex64, ComplexSpectrogram, Waveform};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Envelope values below this are treated as uncovered samples and yield 0.
const ENVELOPE_FLOOR: f64 = 1e-10;

/// Periodic (DFT-even) Hann window.
pub fn hann_periodic(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

/// Planned forward/inverse real FFT pair plus analysis window.
#[derive(Clone)]
pub struct Stft {
    fft_size: usize,
    hop: usize,
    window: Arc<[f64]>,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl std::fmt::Debug for Stft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stft")
            .field("fft_size", &self.fft_size)
            .field("hop", &self.hop)
            .finish()
    }
}

impl Stft {
    /// STFT with a periodic Hann window spanning the whole frame.
    pub fn new(fft_size: usize, hop: usize) -> Result<Self> {
        Self::with_window(fft_size, hop, hann_periodic(fft_size))
    }

    /// STFT with a periodic Hann window of `win_length` samples, centred and
    /// zero padded to `fft_size`.
    pub fn with_window_length(fft_size: usize, hop: usize, win_length: usize) -> Result<Self> {
        if win_length == 0 || win_length > fft_size {
            return Err(Error::InvalidStft(format!(
                "window length {win_length} must be in 1..={fft_size}"
            )));
        }
        let mut window = vec![0.0; fft_size];
        let offset = (fft_size - win_length) / 2;
        window[offset..offset + win_length].copy_from_slice(&hann_periodic(win_length));
        Self::with_window(fft_size, hop, window)
    }

    pub fn with_window(fft_size: usize, hop: usize, window: Vec<f64>) -> Result<Self> {
        if fft_size < 2 || !fft_size.is_multiple_of(2) {
            return Err(Error::InvalidStft(format!("fft size {fft_size} must be even")));
        }
        if hop == 0 || hop > fft_size {
            return Err(Error::InvalidStft(format!("hop {hop} must be in 1..={fft_size}")));
        }
        if window.len() != fft_size {
            return Err(Error::shape("stft window", fft_size, window.len()));
        }
        let mut planner = RealFftPlanner::<f64>::new();
        Ok(Self {
            fft_size,
            hop,
            window: window.into(),
            forward: planner.plan_fft_forward(fft_size),
            inverse: planner.plan_fft_inverse(fft_size),
        })
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// `ceil((len - fft_size) / hop) + 1`; errors for signals shorter than one frame.
    pub fn num_frames(&self, len: usize) -> Result<usize> {
        if len < self.fft_size {
            return Err(Error::SignalTooShort {
                len,
                frame: self.fft_size,
            });
        }
        Ok((len - self.fft_size).div_ceil(self.hop) + 1)
    }

    pub fn analyze(&self, samples: &[f64]) -> Result<ComplexSpectrogram> {
        self.analyze_with(samples, Exec::default())
    }

    pub fn analyze_with(&self, samples: &[f64], exec: Exec) -> Result<ComplexSpectrogram> {
        let num_frames = self.num_frames(samples.len())?;
        let mut spec = ComplexSpectrogram::zeros(num_frames, self.fft_size, self.hop);
        let bins = self.num_bins();
        exec.for_each_chunk_mut(spec.data_mut(), bins, |t, out| {
            let start = t * self.hop;
            let end = (start + self.fft_size).min(samples.len());
            let mut frame = vec![0.0; self.fft_size];
            frame[..end - start].copy_from_slice(&samples[start..end]);
            self.transform_frame(&mut frame, out);
        });
        Ok(spec)
    }

    /// Windows `frame` in place and writes its one-sided spectrum to `out`.
    pub(crate) fn transform_frame(&self, frame: &mut [f64], out: &mut [Complex64]) {
        for (x, w) in frame.iter_mut().zip(self.window.iter()) {
            *x *= w;
        }
        self.forward
            .process(frame, out)
            .expect("buffer sizes are fixed by construction");
    }

    /// Inverse FFT of one frame, scaled by `1/N` and multiplied by the
    /// synthesis window.
    pub(crate) fn inverse_frame(&self, spectrum: &[Complex64], out: &mut [f64]) {
        let mut buf = spectrum.to_vec();
        // the DC and Nyquist bins of a real signal carry no imaginary part
        buf[0].im = 0.0;
        let last = buf.len() - 1;
        buf[last].im = 0.0;
        self.inverse
            .process(&mut buf, out)
            .expect("buffer sizes are fixed by construction");
        let scale = 1.0 / self.fft_size as f64;
        for (x, w) in out.iter_mut().zip(self.window.iter()) {
            *x *= scale * w;
        }
    }

    pub fn synthesize(&self, spec: &ComplexSpectrogram) -> Result<Vec<f64>> {
        self.synthesize_with(spec, Exec::default())
    }

    /// Weighted overlap-add. Output length is `(T - 1) * hop + fft_size`.
    pub fn synthesize_with(&self, spec: &ComplexSpectrogram, exec: Exec) -> Result<Vec<f64>> {
        crate::error::check_len("istft fft size", self.fft_size, spec.fft_size())?;
        crate::error::check_len("istft hop", self.hop, spec.hop())?;
        let t_count = spec.num_frames();
        if t_count == 0 {
            return Ok(Vec::new());
        }
        let mut frames = vec![0.0; t_count * self.fft_size];
        exec.for_each_chunk_mut(&mut frames, self.fft_size, |t, out| {
            self.inverse_frame(spec.frame(t), out);
        });
        let len = (t_count - 1) * self.hop + self.fft_size;
        let mut acc = vec![0.0; len];
        let mut env = vec![0.0; len];
        for (t, frame) in frames.chunks_exact(self.fft_size).enumerate() {
            let start = t * self.hop;
            for n in 0..self.fft_size {
                acc[start + n] += frame[n];
                env[start + n] += self.window[n] * self.window[n];
            }
        }
        Ok(acc
            .iter()
            .zip(&env)
            .map(|(&a, &e)| normalize(a, e))
            .collect())
    }
}

#[inline]
pub(crate) fn normalize(acc: f64, env: f64) -> f64 {
    if env > ENVELOPE_FLOOR {
        acc / env
    } else {
        0.0
    }
}

/// Hann-windowed STFT with 50% overlap.
pub fn stft(wave: &Waveform, fft_size: usize, hop: usize) -> Result<ComplexSpectrogram> {
    if !fft_size.is_multiple_of(2) || hop * 2 != fft_size {
        return Err(Error::InvalidStft(format!(
            "expected even fft size and hop = fft/2, got fft {fft_size}, hop {hop}"
        )));
    }
    Stft::new(fft_size, hop)?.analyze(wave.samples())
}

/// Inverse of [`stft`] at 48 kHz.
pub fn istft(spec: &ComplexSpectrogram) -> Result<Waveform> {
    let stft = Stft::new(spec.fft_size(), spec.hop())?;
    Waveform::new(stft.synthesize(spec)?, crate::SAMPLE_RATE)
}
