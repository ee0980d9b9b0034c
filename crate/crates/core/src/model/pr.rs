use super::config::ModelConfig;
use super::layers::{ConvBlock, Interaction, LayerLoader};
use super::mi::add_assign;
use crate::error::{check_len, Result};
use crate::nn::{ConvState, GroupedGru, GruState, Linear};

/// Phase refinement stream. Consumes the stacked real/imaginary input frame
/// and the magnitude stream's down-path features, and emits residual real and
/// imaginary spectra.
#[derive(Clone, Debug)]
pub struct PrNet {
    proj: ConvBlock,
    down: Vec<ConvBlock>,
    inter: Vec<Interaction>,
    gru_down: GroupedGru,
    up: Vec<ConvBlock>,
    gru_up: GroupedGru,
    fc_real: Linear,
    fc_imag: Linear,
}

#[derive(Clone, Debug)]
pub struct PrState {
    proj: ConvState,
    down: Vec<ConvState>,
    inter: Vec<ConvState>,
    gru_down: GruState,
    up: Vec<ConvState>,
    gru_up: GruState,
}

impl PrState {
    pub fn reset(&mut self) {
        self.proj.reset();
        self.down
            .iter_mut()
            .chain(&mut self.inter)
            .chain(&mut self.up)
            .for_each(ConvState::reset);
        self.gru_down.reset();
        self.gru_up.reset();
    }
}

impl PrNet {
    pub(crate) fn load(_config: &ModelConfig, loader: &LayerLoader<'_>) -> Result<Self> {
        Ok(Self {
            proj: loader.conv_block("pr.proj")?,
            down: (0..5)
                .map(|i| loader.conv_block(&format!("pr.down.{i}")))
                .collect::<Result<_>>()?,
            inter: (0..4)
                .map(|i| loader.interaction(&format!("pr.inter.{i}")))
                .collect::<Result<_>>()?,
            gru_down: loader.gru("pr.gru_down")?,
            up: (0..3)
                .map(|i| loader.conv_block(&format!("pr.up.{i}")))
                .collect::<Result<_>>()?,
            gru_up: loader.gru("pr.gru_up")?,
            fc_real: loader.linear("pr.fc_real")?,
            fc_imag: loader.linear("pr.fc_imag")?,
        })
    }

    pub fn new_state(&self) -> PrState {
        PrState {
            proj: self.proj.conv.new_state(),
            down: self.down.iter().map(|b| b.conv.new_state()).collect(),
            inter: self.inter.iter().map(|g| g.mask.new_state()).collect(),
            gru_down: self.gru_down.new_state(),
            up: self.up.iter().map(|b| b.conv.new_state()).collect(),
            gru_up: self.gru_up.new_state(),
        }
    }

    /// `ri` holds the real parts followed by the imaginary parts; `taps` are
    /// the four magnitude-stream down features of the same frame.
    pub fn forward(&self, ri: &[f64], taps: &[Vec<f64>], state: &mut PrState) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len("phase input", self.proj.conv.in_channels(), ri.len())?;
        check_len("interaction taps", self.inter.len(), taps.len())?;
        let p = self.proj.step(&mut state.proj, ri)?;
        let q0 = self.down[0].step(&mut state.down[0], &p)?;

        let mut feats = vec![q0];
        for i in 1..5 {
            let raw = self.down[i].step(&mut state.down[i], feats.last().unwrap())?;
            let mut mixed = self.inter[i - 1].apply(&mut state.inter[i - 1], &taps[i - 1], &raw)?;
            if i == 2 {
                let mut h = vec![0.0; mixed.len()];
                self.gru_down.step(&mut state.gru_down, &mixed, &mut h)?;
                mixed = h;
            }
            feats.push(mixed);
        }

        let mut v0 = self.up[0].step(&mut state.up[0], &feats[4])?;
        add_assign(&mut v0, &feats[2]);
        let mut v1_pre = self.up[1].step(&mut state.up[1], &v0)?;
        add_assign(&mut v1_pre, &feats[1]);
        let mut v1 = vec![0.0; v1_pre.len()];
        self.gru_up.step(&mut state.gru_up, &v1_pre, &mut v1)?;
        let mut v2 = self.up[2].step(&mut state.up[2], &v1)?;
        add_assign(&mut v2, &feats[0]);

        let mut re = vec![0.0; self.fc_real.out_features()];
        let mut im = vec![0.0; self.fc_imag.out_features()];
        self.fc_real.forward(&v2, &mut re)?;
        self.fc_imag.forward(&v2, &mut im)?;
        Ok((re, im))
    }
}
