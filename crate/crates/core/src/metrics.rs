//! Objective quality metrics and the generator/discriminator loss terms.

use crate::dsp::{Stft, Waveform};
use crate::error::{Error, Result};
use crate::exec::Exec;

const LSD_FFT: usize = 2048;
const LSD_HOP: usize = 512;
const LSD_EPS: f64 = 1e-10;
/// SegSNR segment length (32 ms at 48 kHz).
pub const SEGSNR_SEGMENT: usize = 1536;
pub const SEGSNR_MIN: f64 = -10.0;
pub const SEGSNR_MAX: f64 = 35.0;
const SEGSNR_SILENCE: f64 = 1e-8;
const MRSTFT_EPS: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiResConfig {
    pub fft_sizes: Vec<usize>,
    pub hops: Vec<usize>,
    pub win_lengths: Vec<usize>,
}

impl Default for MultiResConfig {
    fn default() -> Self {
        Self {
            fft_sizes: vec![512, 1024, 2048],
            hops: vec![50, 120, 240],
            win_lengths: vec![240, 600, 1200],
        }
    }
}

impl MultiResConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.fft_sizes.len();
        if n == 0 || self.hops.len() != n || self.win_lengths.len() != n {
            return Err(Error::InvalidArgument(
                "multi-resolution lists must be non-empty and of equal length".into(),
            ));
        }
        for ((&f, &h), &w) in self.fft_sizes.iter().zip(&self.hops).zip(&self.win_lengths) {
            if w == 0 || w > f || h == 0 {
                return Err(Error::InvalidArgument(format!(
                    "resolution fft={f} hop={h} win={w} is invalid"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossWeights {
    pub wav: f64,
    pub stft: f64,
    pub feat: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            wav: 100.0,
            stft: 0.5,
            feat: 10.0,
        }
    }
}

fn check_pair(reference: &Waveform, degraded: &Waveform) -> Result<()> {
    if reference.len() != degraded.len() {
        return Err(Error::InvalidArgument(format!(
            "signal lengths differ: {} vs {}",
            reference.len(),
            degraded.len()
        )));
    }
    if reference.sample_rate() != degraded.sample_rate() {
        return Err(Error::InvalidArgument(format!(
            "sample rates differ: {} vs {}",
            reference.sample_rate(),
            degraded.sample_rate()
        )));
    }
    if reference.is_empty() {
        return Err(Error::InvalidArgument("signals are empty".into()));
    }
    Ok(())
}

fn padded(x: &[f64], min_len: usize) -> Vec<f64> {
    let mut v = x.to_vec();
    if v.len() < min_len {
        v.resize(min_len, 0.0);
    }
    v
}

fn magnitudes(stft: &Stft, x: &[f64]) -> Result<Vec<f64>> {
    let spec = stft.analyze(&padded(x, stft.fft_size()))?;
    Ok(spec.data().iter().map(|c| c.norm()).collect())
}

/// Log-spectral distance: per frame the RMS over bins of
/// `log10(|S|^2 + eps) - log10(|S'|^2 + eps)`, averaged over frames.
pub fn lsd(reference: &Waveform, degraded: &Waveform) -> Result<f64> {
    check_pair(reference, degraded)?;
    let stft = Stft::new(LSD_FFT, LSD_HOP)?;
    let a = magnitudes(&stft, reference.samples())?;
    let b = magnitudes(&stft, degraded.samples())?;
    let bins = stft.num_bins();
    let frames = a.len() / bins;
    let total: f64 = a
        .chunks_exact(bins)
        .zip(b.chunks_exact(bins))
        .map(|(fa, fb)| {
            let ms = fa
                .iter()
                .zip(fb)
                .map(|(x, y)| {
                    let d = (x * x + LSD_EPS).log10() - (y * y + LSD_EPS).log10();
                    d * d
                })
                .sum::<f64>()
                / bins as f64;
            ms.sqrt()
        })
        .sum();
    Ok(total / frames as f64)
}

/// Segmental SNR over non-overlapping 32 ms segments, each clipped to
/// `[-10, 35]` dB. Segments whose reference energy is below 1e-8 are skipped;
/// if every segment is silent the result is the ceiling when the signals are
/// identical and the floor otherwise.
pub fn segsnr(reference: &Waveform, degraded: &Waveform) -> Result<f64> {
    check_pair(reference, degraded)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (r, d) in reference
        .samples()
        .chunks(SEGSNR_SEGMENT)
        .zip(degraded.samples().chunks(SEGSNR_SEGMENT))
    {
        let sig: f64 = r.iter().map(|v| v * v).sum();
        if sig < SEGSNR_SILENCE {
            continue;
        }
        let err: f64 = r.iter().zip(d).map(|(a, b)| (a - b) * (a - b)).sum();
        let snr = if err == 0.0 {
            SEGSNR_MAX
        } else {
            10.0 * (sig / err).log10()
        };
        sum += snr.clamp(SEGSNR_MIN, SEGSNR_MAX);
        count += 1;
    }
    if count == 0 {
        return Ok(if reference.samples() == degraded.samples() {
            SEGSNR_MAX
        } else {
            SEGSNR_MIN
        });
    }
    Ok(sum / count as f64)
}

/// Mean absolute sample difference.
pub fn wav_loss(reference: &Waveform, degraded: &Waveform) -> Result<f64> {
    check_pair(reference, degraded)?;
    let s: f64 = reference
        .samples()
        .iter()
        .zip(degraded.samples())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(s / reference.len() as f64)
}

/// Spectral convergence and mean log-magnitude L1 of one resolution.
pub fn stft_loss_terms(reference: &[f64], degraded: &[f64], fft_size: usize, hop: usize, win_length: usize) -> Result<(f64, f64)> {
    let stft = Stft::with_window_length(fft_size, hop, win_length)?;
    let a = magnitudes(&stft, reference)?;
    let b = magnitudes(&stft, degraded)?;
    let num: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sc = num / den.max(f64::MIN_POSITIVE);
    let mag = a
        .iter()
        .zip(&b)
        .map(|(x, y)| ((x + MRSTFT_EPS).ln() - (y + MRSTFT_EPS).ln()).abs())
        .sum::<f64>()
        / a.len() as f64;
    Ok((sc, mag))
}

/// Sum over resolutions of spectral convergence plus log-magnitude L1.
pub fn mrstft_loss(reference: &Waveform, degraded: &Waveform, cfg: &MultiResConfig) -> Result<f64> {
    mrstft_loss_with(reference, degraded, cfg, Exec::default())
}

pub fn mrstft_loss_with(reference: &Waveform, degraded: &Waveform, cfg: &MultiResConfig, exec: Exec) -> Result<f64> {
    check_pair(reference, degraded)?;
    cfg.validate()?;
    let terms = exec.map_range(cfg.fft_sizes.len(), |i| {
        stft_loss_terms(
            reference.samples(),
            degraded.samples(),
            cfg.fft_sizes[i],
            cfg.hops[i],
            cfg.win_lengths[i],
        )
    });
    terms.into_iter().try_fold(0.0, |acc, t| t.map(|(sc, mag)| acc + sc + mag))
}

fn mean_sq_offset(scores: &[f64], target: f64, what: &str) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument(format!("no {what} scores")));
    }
    Ok(scores.iter().map(|s| (s - target) * (s - target)).sum::<f64>() / scores.len() as f64)
}

/// Discriminator loss `E[(D(s) - 1)^2] + E[(D(s~) + 1)^2]`, expectations taken
/// as the mean over all pooled scores.
pub fn adv_loss_d(scores_real: &[f64], scores_fake: &[f64]) -> Result<f64> {
    Ok(mean_sq_offset(scores_real, 1.0, "real")? + mean_sq_offset(scores_fake, -1.0, "generated")?)
}

/// Generator loss `E[(D(s~) - 1)^2] + E[(D(s) + 1)^2]`.
pub fn adv_loss_g(scores_fake: &[f64], scores_real: &[f64]) -> Result<f64> {
    Ok(mean_sq_offset(scores_fake, 1.0, "generated")? + mean_sq_offset(scores_real, -1.0, "real")?)
}

/// Mean over layers of the mean absolute difference between feature maps.
pub fn feat_match_loss(feat_real: &[Vec<f64>], feat_fake: &[Vec<f64>]) -> Result<f64> {
    if feat_real.is_empty() || feat_real.len() != feat_fake.len() {
        return Err(Error::InvalidArgument(format!(
            "feature map lists must be non-empty and equal in length ({} vs {})",
            feat_real.len(),
            feat_fake.len()
        )));
    }
    let mut total = 0.0;
    for (i, (a, b)) in feat_real.iter().zip(feat_fake).enumerate() {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::InvalidArgument(format!(
                "feature map {i}: sizes {} and {}",
                a.len(),
                b.len()
            )));
        }
        total += a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;
    }
    Ok(total / feat_real.len() as f64)
}

pub fn total_generator_loss(wav: f64, mrstft: f64, adv_g: f64, feat: f64, weights: &LossWeights) -> f64 {
    weights.wav * wav + weights.stft * mrstft + adv_g + weights.feat * feat
}

/// Metrics selectable for evaluation runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Lsd,
    SegSnr,
    Mrstft,
    Wav,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Lsd, Metric::SegSnr, Metric::Mrstft, Metric::Wav];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Lsd => "lsd",
            Metric::SegSnr => "segsnr",
            Metric::Mrstft => "mrstft",
            Metric::Wav => "wav",
        }
    }

    pub fn compute(self, reference: &Waveform, degraded: &Waveform) -> Result<f64> {
        match self {
            Metric::Lsd => lsd(reference, degraded),
            Metric::SegSnr => segsnr(reference, degraded),
            Metric::Mrstft => mrstft_loss(reference, degraded, &MultiResConfig::default()),
            Metric::Wav => wav_loss(reference, degraded),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric `{s}`")))
    }
}

/// Computes each requested metric, in order.
pub fn evaluate(reference: &Waveform, degraded: &Waveform, metrics: &[Metric], exec: Exec) -> Result<Vec<(Metric, f64)>> {
    exec.map(metrics, |&m| m.compute(reference, degraded).map(|v| (m, v)))
        .into_iter()
        .collect()
}
