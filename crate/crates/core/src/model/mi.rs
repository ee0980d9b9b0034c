use super::config::ModelConfig;
use super::layers::{BandGuidedMask, ConvBlock, LayerLoader};
use crate::error::{check_len, Result};
use crate::nn::{ConvState, GroupedGru, GruState};
use crate::spectral::ErbFilterBank;

/// Magnitude inpainting stream.
#[derive(Clone, Debug)]
pub struct MiNet {
    erb: ErbFilterBank,
    down: Vec<ConvBlock>,
    gru_down: GroupedGru,
    up: Vec<ConvBlock>,
    gru_up: GroupedGru,
    bgm: BandGuidedMask,
}

/// Per-stream temporal state of [`MiNet`].
#[derive(Clone, Debug)]
pub struct MiState {
    down: Vec<ConvState>,
    up: Vec<ConvState>,
    gru_down: GruState,
    gru_up: GruState,
}

impl MiState {
    pub fn reset(&mut self) {
        self.down.iter_mut().chain(&mut self.up).for_each(ConvState::reset);
        self.gru_down.reset();
        self.gru_up.reset();
    }
}

/// One frame of magnitude-stream output.
#[derive(Clone, Debug)]
pub struct MiOutput {
    /// Full-band magnitude `max(0, |X_lr| + G * |X_up|)`.
    pub magnitude: Vec<f64>,
    /// Band-guided gain `G`.
    pub gain: Vec<f64>,
    /// Output of the last up convolution, `|X_up|`.
    pub estimate: Vec<f64>,
    /// Down-path features handed to the interaction gates.
    pub taps: Vec<Vec<f64>>,
}

impl MiNet {
    pub(crate) fn load(config: &ModelConfig, loader: &LayerLoader<'_>) -> Result<Self> {
        Ok(Self {
            erb: ErbFilterBank::new(config.erb_bands, config.bins, config.sample_rate)?,
            down: (0..4)
                .map(|i| loader.conv_block(&format!("mi.down.{i}")))
                .collect::<Result<_>>()?,
            gru_down: loader.gru("mi.gru_down")?,
            up: (0..4)
                .map(|i| loader.conv_block(&format!("mi.up.{i}")))
                .collect::<Result<_>>()?,
            gru_up: loader.gru("mi.gru_up")?,
            bgm: loader.band_gate("mi.bgm")?,
        })
    }

    pub fn erb(&self) -> &ErbFilterBank {
        &self.erb
    }

    pub fn new_state(&self) -> MiState {
        MiState {
            down: self.down.iter().map(|b| b.conv.new_state()).collect(),
            up: self.up.iter().map(|b| b.conv.new_state()).collect(),
            gru_down: self.gru_down.new_state(),
            gru_up: self.gru_up.new_state(),
        }
    }

    pub fn forward(&self, magnitude: &[f64], state: &mut MiState) -> Result<MiOutput> {
        check_len("magnitude frame", self.erb.num_bins(), magnitude.len())?;
        check_len("magnitude state", self.down.len(), state.down.len())?;
        let mut bands = vec![0.0; self.erb.num_bands()];
        self.erb.apply_frame(magnitude, &mut bands)?;

        let f0 = self.down[0].step(&mut state.down[0], &bands)?;
        let d1 = self.down[1].step(&mut state.down[1], &f0)?;
        let mut f1 = vec![0.0; d1.len()];
        self.gru_down.step(&mut state.gru_down, &d1, &mut f1)?;
        let f2 = self.down[2].step(&mut state.down[2], &f1)?;
        let f3 = self.down[3].step(&mut state.down[3], &f2)?;

        let mut u0 = self.up[0].step(&mut state.up[0], &f3)?;
        add_assign(&mut u0, &f2);
        let mut u1_pre = self.up[1].step(&mut state.up[1], &u0)?;
        add_assign(&mut u1_pre, &f1);
        let mut u1 = vec![0.0; u1_pre.len()];
        self.gru_up.step(&mut state.gru_up, &u1_pre, &mut u1)?;
        let mut u2 = self.up[2].step(&mut state.up[2], &u1)?;
        add_assign(&mut u2, &f0);
        let estimate = self.up[3].step(&mut state.up[3], &u2)?;

        let (gain, masked) = self.bgm.apply(magnitude, &estimate)?;
        let magnitude = magnitude
            .iter()
            .zip(&masked)
            .map(|(x, m)| (x + m).max(0.0))
            .collect();
        Ok(MiOutput {
            magnitude,
            gain,
            estimate,
            taps: vec![f0, f1, f2, f3],
        })
    }
}

pub(crate) fn add_assign(dst: &mut [f64], src: &[f64]) {
    debug_assert_eq!(dst.len(), src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}
