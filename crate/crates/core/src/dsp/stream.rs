//! Frame-at-a-time counterparts of [`Stft::analyze`] and [`Stft::synthesize`].
//!
//! Pushing hop-sized blocks through [`StftAnalyzer`] yields exactly the frames
//! of the offline analysis, and pushing those frames through [`OverlapAdd`]
//! yields the offline synthesis one hop at a time. Each direction holds back
//! `fft_size - hop` samples.

use super::stft::normalize;
use super::{Complex64, Stft};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct StftAnalyzer {
    stft: Stft,
    buffer: Vec<f64>,
    scratch: Vec<f64>,
    filled: usize,
}

impl StftAnalyzer {
    pub fn new(stft: Stft) -> Result<Self> {
        if !stft.fft_size().is_multiple_of(stft.hop()) {
            return Err(Error::InvalidStft("streaming needs fft_size to be a multiple of hop".into()));
        }
        let n = stft.fft_size();
        Ok(Self {
            stft,
            buffer: vec![0.0; n],
            scratch: vec![0.0; n],
            filled: 0,
        })
    }

    pub fn hop(&self) -> usize {
        self.stft.hop()
    }

    pub fn reset(&mut self) {
        self.buffer.fill(0.0);
        self.filled = 0;
    }

    /// Appends one hop of samples; returns a frame once the window is full.
    pub fn push(&mut self, block: &[f64]) -> Result<Option<Vec<Complex64>>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.stft.num_bins()];
        Ok(self.push_into(block, &mut out)?.then_some(out))
    }

    /// Allocation-free variant of [`push`](Self::push): writes the frame into
    /// `out` and returns whether one was produced.
    pub fn push_into(&mut self, block: &[f64], out: &mut [Complex64]) -> Result<bool> {
        let (n, hop) = (self.stft.fft_size(), self.stft.hop());
        if block.len() != hop {
            return Err(Error::HopMismatch {
                expected: hop,
                got: block.len(),
            });
        }
        crate::error::check_len("analyzer output", self.stft.num_bins(), out.len())?;
        if self.filled < n {
            self.buffer[self.filled..self.filled + hop].copy_from_slice(block);
            self.filled += hop;
            if self.filled < n {
                return Ok(false);
            }
        } else {
            self.buffer.copy_within(hop.., 0);
            self.buffer[n - hop..].copy_from_slice(block);
        }
        self.scratch.copy_from_slice(&self.buffer);
        self.stft.transform_frame(&mut self.scratch, out);
        Ok(true)
    }
}

#[derive(Debug, Clone)]
pub struct OverlapAdd {
    stft: Stft,
    acc: Vec<f64>,
    env: Vec<f64>,
    frame: Vec<f64>,
}

impl OverlapAdd {
    pub fn new(stft: Stft) -> Result<Self> {
        if !stft.fft_size().is_multiple_of(stft.hop()) {
            return Err(Error::InvalidStft("streaming needs fft_size to be a multiple of hop".into()));
        }
        let n = stft.fft_size();
        Ok(Self {
            stft,
            acc: vec![0.0; n],
            env: vec![0.0; n],
            frame: vec![0.0; n],
        })
    }

    pub fn reset(&mut self) {
        self.acc.fill(0.0);
        self.env.fill(0.0);
    }

    pub fn push(&mut self, spectrum: &[Complex64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.stft.hop()];
        self.push_into(spectrum, &mut out)?;
        Ok(out)
    }

    /// Adds one frame and writes the next `hop` finished samples to `out`.
    pub fn push_into(&mut self, spectrum: &[Complex64], out: &mut [f64]) -> Result<()> {
        let (n, hop) = (self.stft.fft_size(), self.stft.hop());
        crate::error::check_len("synthesis frame", self.stft.num_bins(), spectrum.len())?;
        crate::error::check_len("synthesis output", hop, out.len())?;
        self.stft.inverse_frame(spectrum, &mut self.frame);
        let window = self.stft.window();
        for i in 0..n {
            self.acc[i] += self.frame[i];
            self.env[i] += window[i] * window[i];
        }
        for i in 0..hop {
            out[i] = normalize(self.acc[i], self.env[i]);
        }
        self.acc.copy_within(hop.., 0);
        self.env.copy_within(hop.., 0);
        self.acc[n - hop..].fill(0.0);
        self.env[n - hop..].fill(0.0);
        Ok(())
    }
}
