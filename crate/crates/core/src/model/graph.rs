use super::config::{ModelConfig, Variant};
use super::layers::LayerLoader;
use super::mi::{MiNet, MiState};
use super::pr::{PrNet, PrState};
use super::weights::ModelWeights;
use crate::dsp::{Complex64, ComplexSpectrogram};
use crate::error::{check_len, Error, Result};
use crate::spectral::flip_phase_in_place;

/// Frame-level assembly of both streams.
///
/// Holds only immutable weights; all temporal state lives in [`BaeState`], so
/// one model can serve any number of concurrent streams.
#[derive(Clone, Debug)]
pub struct BaeModel {
    config: ModelConfig,
    mi: MiNet,
    pr: Option<PrNet>,
}

/// Per-stream state: convolution frame buffers and GRU hidden vectors.
#[derive(Clone, Debug)]
pub struct BaeState {
    mi: MiState,
    pr: Option<PrState>,
}

impl BaeState {
    pub fn reset(&mut self) {
        self.mi.reset();
        if let Some(pr) = &mut self.pr {
            pr.reset();
        }
    }
}

impl BaeModel {
    /// Builds the model. Weights must hold every tensor `config` needs; for the
    /// lite variant any phase-stream tensors are ignored.
    pub fn new(config: &ModelConfig, weights: &ModelWeights) -> Result<Self> {
        config.validate()?;
        let weights = if config.variant == Variant::Lite {
            weights.subset_for(config)?
        } else {
            weights.validate(config)?;
            weights.clone()
        };
        let loader = LayerLoader::new(config, &weights);
        let mi = MiNet::load(config, &loader)?;
        let pr = match config.variant {
            Variant::Full => Some(PrNet::load(config, &loader)?),
            Variant::Lite => None,
        };
        Ok(Self {
            config: config.clone(),
            mi,
            pr,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn variant(&self) -> Variant {
        self.config.variant
    }

    pub fn new_state(&self) -> BaeState {
        BaeState {
            mi: self.mi.new_state(),
            pr: self.pr.as_ref().map(PrNet::new_state),
        }
    }

    /// Maps one band-limited input frame to a full-band frame.
    ///
    /// The magnitude comes from the magnitude stream. Bins up to the phase base
    /// band keep the input phase (the input bin is rescaled, so a unit gain is
    /// exact); bins above take the mirrored phase. The full variant then adds
    /// the phase stream's real/imaginary residual.
    pub fn forward_frame(&self, input: &[Complex64], state: &mut BaeState) -> Result<Vec<Complex64>> {
        let bins = self.config.bins;
        check_len("input frame", bins, input.len())?;
        let mag: Vec<f64> = input.iter().map(|c| c.norm()).collect();
        let mut phase: Vec<f64> = input.iter().map(|c| c.arg()).collect();
        let mi = self.mi.forward(&mag, &mut state.mi)?;
        let base = self.config.phase_base_bins;
        flip_phase_in_place(&mut phase, base)?;

        let mut out: Vec<Complex64> = (0..bins)
            .map(|k| {
                if k <= base && mag[k] > 0.0 {
                    input[k] * (mi.magnitude[k] / mag[k])
                } else {
                    Complex64::from_polar(mi.magnitude[k], phase[k])
                }
            })
            .collect();

        if let Some(pr) = &self.pr {
            let pr_state = state
                .pr
                .as_mut()
                .ok_or_else(|| Error::InvalidArgument("state was created for the lite variant".into()))?;
            let ri: Vec<f64> = input.iter().map(|c| c.re).chain(input.iter().map(|c| c.im)).collect();
            let (re, im) = pr.forward(&ri, &mi.taps, pr_state)?;
            for ((o, r), i) in out.iter_mut().zip(&re).zip(&im) {
                *o += Complex64::new(*r, *i);
            }
        }
        Ok(out)
    }

    /// Runs a whole spectrogram frame by frame from a fresh state.
    pub fn process(&self, spec: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
        check_len("spectrogram bins", self.config.bins, spec.num_bins())?;
        let mut state = self.new_state();
        let mut out = ComplexSpectrogram::zeros(spec.num_frames(), spec.fft_size(), spec.hop());
        for t in 0..spec.num_frames() {
            let frame = self.forward_frame(spec.frame(t), &mut state)?;
            out.frame_mut(t).copy_from_slice(&frame);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise_frame(seed: u64, bins: usize) -> Vec<Complex64> {
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        (0..bins).map(|_| Complex64::new(next(), next())).collect()
    }

    #[test]
    fn zero_weights_lite_keeps_base_band() {
        let cfg = ModelConfig::lite();
        let model = BaeModel::new(&cfg, &ModelWeights::zeros(&cfg)).unwrap();
        let mut st = model.new_state();
        for s in 0..4 {
            let x = noise_frame(s, cfg.bins);
            let y = model.forward_frame(&x, &mut st).unwrap();
            assert_eq!(&y[..=128], &x[..=128]);
            for k in 129..cfg.bins {
                assert!((y[k].norm() - x[k].norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_weights_full_equals_lite() {
        let full = ModelConfig::full();
        let w = ModelWeights::zeros(&full);
        let a = BaeModel::new(&full, &w).unwrap();
        let b = BaeModel::new(&ModelConfig::lite(), &w).unwrap();
        let (mut sa, mut sb) = (a.new_state(), b.new_state());
        let x = noise_frame(9, full.bins);
        assert_eq!(a.forward_frame(&x, &mut sa).unwrap(), b.forward_frame(&x, &mut sb).unwrap());
    }

    #[test]
    fn lite_state_is_rejected_by_full_model() {
        let full = ModelConfig::full();
        let w = ModelWeights::zeros(&full);
        let a = BaeModel::new(&full, &w).unwrap();
        let b = BaeModel::new(&ModelConfig::lite(), &w).unwrap();
        let mut st = b.new_state();
        assert!(a.forward_frame(&noise_frame(1, full.bins), &mut st).is_err());
    }

    #[test]
    fn full_rejects_lite_weights() {
        let w = ModelWeights::zeros(&ModelConfig::lite());
        assert!(BaeModel::new(&ModelConfig::full(), &w).is_err());
    }
}
