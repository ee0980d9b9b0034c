use std::collections::HashMap;

use super::config::{LayerSpec, ModelConfig};
use super::weights::ModelWeights;
use crate::error::{check_len, Error, Result, WeightsError};
use crate::nn::{sigmoid, ConvLayer, ConvState, GroupedGru, Linear, Prelu};

/// Convolution followed by PReLU.
#[derive(Clone, Debug)]
pub struct ConvBlock {
    pub conv: ConvLayer,
    pub act: Prelu,
}

impl ConvBlock {
    pub fn out_channels(&self) -> usize {
        self.conv.out_channels()
    }

    pub fn step(&self, state: &mut ConvState, input: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.conv.out_channels()];
        self.conv.step(state, input, &mut out)?;
        self.act.apply(&mut out)?;
        Ok(out)
    }
}

/// Dual-path gate: `G = sigmoid(a * lr + a0) * sigmoid(b * up + b0)` with
/// per-bin scales and offsets.
#[derive(Clone, Debug)]
pub struct BandGuidedMask {
    lr_scale: Vec<f64>,
    lr_bias: Vec<f64>,
    up_scale: Vec<f64>,
    up_bias: Vec<f64>,
}

impl BandGuidedMask {
    pub fn new(lr_scale: Vec<f64>, lr_bias: Vec<f64>, up_scale: Vec<f64>, up_bias: Vec<f64>) -> Result<Self> {
        let n = lr_scale.len();
        for v in [&lr_bias, &up_scale, &up_bias] {
            check_len("band gate", n, v.len())?;
        }
        Ok(Self {
            lr_scale,
            lr_bias,
            up_scale,
            up_bias,
        })
    }

    pub fn bins(&self) -> usize {
        self.lr_scale.len()
    }

    /// Returns the gain `G` and the masked estimate `G * up`.
    pub fn apply(&self, lr: &[f64], up: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len("band gate input", self.bins(), lr.len())?;
        check_len("band gate estimate", self.bins(), up.len())?;
        let gain: Vec<f64> = (0..self.bins())
            .map(|k| {
                sigmoid(self.lr_scale[k] * lr[k] + self.lr_bias[k])
                    * sigmoid(self.up_scale[k] * up[k] + self.up_bias[k])
            })
            .collect();
        let masked = gain.iter().zip(up).map(|(g, u)| g * u).collect();
        Ok((gain, masked))
    }
}

/// Interaction gate: `m = sigmoid(conv(mi + pr))`, `out = pr + m * mi`.
#[derive(Clone, Debug)]
pub struct Interaction {
    pub mask: ConvLayer,
}

impl Interaction {
    pub fn channels(&self) -> usize {
        self.mask.out_channels()
    }

    pub fn apply(&self, state: &mut ConvState, mi: &[f64], pr: &[f64]) -> Result<Vec<f64>> {
        check_len("interaction magnitude feature", self.channels(), mi.len())?;
        check_len("interaction phase feature", self.channels(), pr.len())?;
        let sum: Vec<f64> = mi.iter().zip(pr).map(|(a, b)| a + b).collect();
        let mut m = vec![0.0; self.channels()];
        self.mask.step(state, &sum, &mut m)?;
        Ok(pr
            .iter()
            .zip(mi)
            .zip(&m)
            .map(|((p, x), g)| p + sigmoid(*g) * x)
            .collect())
    }
}

/// Builds typed layers out of the named tensor map.
pub(crate) struct LayerLoader<'a> {
    weights: &'a ModelWeights,
    specs: HashMap<String, LayerSpec>,
}

impl<'a> LayerLoader<'a> {
    pub fn new(config: &ModelConfig, weights: &'a ModelWeights) -> Self {
        let specs = config
            .layers()
            .into_iter()
            .map(|l| (l.name().to_string(), l))
            .collect();
        Self { weights, specs }
    }

    fn spec(&self, name: &str) -> Result<&LayerSpec> {
        self.specs
            .get(name)
            .ok_or_else(|| Error::InvalidConfig(format!("configuration has no layer `{name}`")))
    }

    fn tensor(&self, layer: &str, suffix: &str, dims: &[usize]) -> Result<Vec<f64>> {
        let name = format!("{layer}.{suffix}");
        let t = self
            .weights
            .get(&name)
            .ok_or_else(|| WeightsError::MissingTensor(name.clone()))?;
        if t.dims() != dims {
            return Err(WeightsError::ShapeMismatch {
                name,
                expected: dims.to_vec(),
                found: t.dims().to_vec(),
            }
            .into());
        }
        Ok(t.to_f64())
    }

    pub fn conv_block(&self, name: &str) -> Result<ConvBlock> {
        match *self.spec(name)? {
            LayerSpec::Conv {
                in_channels,
                out_channels,
                groups,
                kernel,
                ..
            } => {
                let w = self.tensor(name, "weight", &[out_channels, kernel, in_channels / groups])?;
                let b = self.tensor(name, "bias", &[out_channels])?;
                let a = self.tensor(name, "prelu", &[out_channels])?;
                Ok(ConvBlock {
                    conv: ConvLayer::new(in_channels, out_channels, groups, kernel, w, b)?,
                    act: Prelu::new(a),
                })
            }
            _ => Err(Error::InvalidConfig(format!("`{name}` is not a convolution"))),
        }
    }

    pub fn gru(&self, name: &str) -> Result<GroupedGru> {
        match *self.spec(name)? {
            LayerSpec::Gru { groups, size, .. } => {
                let h = size / groups;
                GroupedGru::new(
                    groups,
                    size,
                    size,
                    self.tensor(name, "w_ih", &[groups, 3 * h, h])?,
                    self.tensor(name, "w_hh", &[groups, 3 * h, h])?,
                    self.tensor(name, "bias", &[groups, 3 * h])?,
                )
            }
            _ => Err(Error::InvalidConfig(format!("`{name}` is not a GRU"))),
        }
    }

    pub fn interaction(&self, name: &str) -> Result<Interaction> {
        match *self.spec(name)? {
            LayerSpec::Gate { channels, kernel, .. } => Ok(Interaction {
                mask: ConvLayer::new(
                    channels,
                    channels,
                    1,
                    kernel,
                    self.tensor(name, "weight", &[channels, kernel, channels])?,
                    self.tensor(name, "bias", &[channels])?,
                )?,
            }),
            _ => Err(Error::InvalidConfig(format!("`{name}` is not a gate"))),
        }
    }

    pub fn linear(&self, name: &str) -> Result<Linear> {
        match *self.spec(name)? {
            LayerSpec::Linear {
                in_features,
                out_features,
                ..
            } => Linear::new(
                in_features,
                out_features,
                self.tensor(name, "weight", &[out_features, in_features])?,
                self.tensor(name, "bias", &[out_features])?,
            ),
            _ => Err(Error::InvalidConfig(format!("`{name}` is not a linear layer"))),
        }
    }

    pub fn band_gate(&self, name: &str) -> Result<BandGuidedMask> {
        match *self.spec(name)? {
            LayerSpec::BandGate { bins, .. } => BandGuidedMask::new(
                self.tensor(name, "lr_scale", &[bins])?,
                self.tensor(name, "lr_bias", &[bins])?,
                self.tensor(name, "up_scale", &[bins])?,
                self.tensor(name, "up_bias", &[bins])?,
            ),
            _ => Err(Error::InvalidConfig(format!("`{name}` is not a band gate"))),
        }
    }
}
