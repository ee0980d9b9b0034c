//! Offline and streaming front ends around [`BaeModel`].

use std::collections::VecDeque;
use std::sync::Arc;

use crate::dsp::{Complex64, ComplexSpectrogram, OverlapAdd, Stft, StftAnalyzer, Waveform};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{BaeModel, BaeState, ModelConfig, ModelWeights};

/// Whole-signal processing: STFT, frame-by-frame model, overlap-add.
#[derive(Clone, Debug)]
pub struct Engine {
    model: Arc<BaeModel>,
    stft: Stft,
}

impl Engine {
    pub fn new(model: BaeModel) -> Result<Self> {
        let c = model.config();
        let stft = Stft::new(c.fft_size, c.hop())?;
        Ok(Self {
            model: Arc::new(model),
            stft,
        })
    }

    pub fn from_weights(config: &ModelConfig, weights: &ModelWeights) -> Result<Self> {
        Self::new(BaeModel::new(config, weights)?)
    }

    pub fn model(&self) -> &BaeModel {
        &self.model
    }

    pub fn stft(&self) -> &Stft {
        &self.stft
    }

    /// Runs the model over every frame of `spec`, in order, from a fresh state.
    pub fn process_spectrogram(&self, spec: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
        self.model.process(spec)
    }

    /// Extends one waveform. The output has the input's length; inputs shorter
    /// than one frame are zero-padded for analysis.
    pub fn extend(&self, wave: &Waveform) -> Result<Waveform> {
        self.extend_with(wave, Exec::default())
    }

    /// As [`extend`](Self::extend), with `exec` applied to analysis and
    /// synthesis. The recurrent frame loop is always sequential.
    pub fn extend_with(&self, wave: &Waveform, exec: Exec) -> Result<Waveform> {
        let sr = self.model.config().sample_rate;
        if wave.sample_rate() != sr {
            return Err(Error::UnsupportedAudio(format!(
                "expected {sr} Hz, got {} Hz",
                wave.sample_rate()
            )));
        }
        if wave.is_empty() {
            return Ok(wave.clone());
        }
        let mut x = wave.samples().to_vec();
        if x.len() < self.stft.fft_size() {
            x.resize(self.stft.fft_size(), 0.0);
        }
        let spec = self.stft.analyze_with(&x, exec)?;
        let out = self.model.process(&spec)?;
        let mut y = self.stft.synthesize_with(&out, exec)?;
        y.truncate(wave.len());
        Waveform::new(y, sr)
    }

    /// Extends independent utterances, spreading them over the pool when
    /// `exec` is parallel.
    pub fn extend_batch(&self, waves: &[Waveform], exec: Exec) -> Vec<Result<Waveform>> {
        exec.map(waves, |w| self.extend_with(w, Exec::Sequential))
    }

    pub fn stream(&self) -> Result<StreamProcessor> {
        StreamProcessor::new(self)
    }
}

/// Sample-count-preserving streaming processor.
///
/// Every call returns exactly as many samples as it consumed. Output sample
/// `n` equals sample `n - latency()` of [`Engine::extend`] over the same
/// input (zeros before that), except near the end of the offline signal where
/// the offline path sees a zero-padded final frame. Memory use is fixed after
/// construction apart from per-frame scratch.
#[derive(Debug)]
pub struct StreamProcessor {
    model: Arc<BaeModel>,
    state: BaeState,
    analyzer: StftAnalyzer,
    synth: OverlapAdd,
    pending: Vec<f64>,
    queue: VecDeque<f64>,
    frame: Vec<Complex64>,
    block: Vec<f64>,
    latency: usize,
}

impl StreamProcessor {
    pub fn new(engine: &Engine) -> Result<Self> {
        let stft = engine.stft.clone();
        let (n, hop, bins) = (stft.fft_size(), stft.hop(), stft.num_bins());
        // one window of analysis fill plus one of synthesis overlap
        let latency = 2 * (n - hop);
        let mut queue = VecDeque::with_capacity(latency + 2 * hop);
        queue.extend(std::iter::repeat_n(0.0, latency));
        Ok(Self {
            model: engine.model.clone(),
            state: engine.model.new_state(),
            analyzer: StftAnalyzer::new(stft.clone())?,
            synth: OverlapAdd::new(stft)?,
            pending: Vec::with_capacity(hop),
            queue,
            frame: vec![Complex64::new(0.0, 0.0); bins],
            block: vec![0.0; hop],
            latency,
        })
    }

    /// Algorithmic delay in samples.
    pub fn latency(&self) -> usize {
        self.latency
    }

    pub fn reset(&mut self) {
        self.state.reset();
        self.analyzer.reset();
        self.synth.reset();
        self.pending.clear();
        self.queue.clear();
        self.queue.extend(std::iter::repeat_n(0.0, self.latency));
    }

    pub fn process(&mut self, input: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; input.len()];
        self.process_into(input, &mut out)?;
        Ok(out)
    }

    /// Consumes `input` and writes the same number of samples to `output`.
    pub fn process_into(&mut self, input: &[f64], output: &mut [f64]) -> Result<()> {
        crate::error::check_len("stream output", input.len(), output.len())?;
        if let Some(i) = input.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        let hop = self.block.len();
        let mut consumed = 0;
        for (x, y) in input.iter().zip(output.iter_mut()) {
            self.pending.push(*x);
            if self.pending.len() == hop {
                self.run_block()?;
            }
            *y = self.queue.pop_front().expect("queue holds at least the latency");
            consumed += 1;
        }
        debug_assert_eq!(consumed, input.len());
        Ok(())
    }

    fn run_block(&mut self) -> Result<()> {
        let ready = self.analyzer.push_into(&self.pending, &mut self.frame)?;
        self.pending.clear();
        if ready {
            let out = self.model.forward_frame(&self.frame, &mut self.state)?;
            self.synth.push_into(&out, &mut self.block)?;
            self.queue.extend(self.block.iter().copied());
        }
        Ok(())
    }
}
