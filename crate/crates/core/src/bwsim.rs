//! Band-limiting simulator and effective-bandwidth estimator.

use std::f64::consts::PI;

use crate::dsp::{hann_periodic, Complex64, Stft, Waveform};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Number of FIR taps of the low-pass filter.
pub const LOWPASS_TAPS: usize = 511;
/// Crossfade length between schedule segments, in seconds.
pub const CROSSFADE_SECS: f64 = 0.010;

const WELCH_FFT: usize = 4096;
const WELCH_HOP: usize = 2048;
const SMOOTH_BINS: usize = 5;
/// Power ratio (-50 dB) below the strongest third-octave band at which
/// content no longer counts as bandwidth.
const LEVEL_FLOOR: f64 = 1e-5;

/// Hann-windowed sinc low-pass, normalised to unit DC gain.
pub fn lowpass_kernel(cutoff_hz: f64, sample_rate: u32) -> Vec<f64> {
    let fc = cutoff_hz / sample_rate as f64;
    let mid = (LOWPASS_TAPS / 2) as f64;
    let mut h: Vec<f64> = (0..LOWPASS_TAPS)
        .map(|n| {
            let x = n as f64 - mid;
            let sinc = if x == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * x).sin() / (PI * x)
            };
            let w = 0.5 - 0.5 * (2.0 * PI * n as f64 / (LOWPASS_TAPS - 1) as f64).cos();
            sinc * w
        })
        .collect();
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= sum);
    h
}

fn check_cutoff(cutoff_hz: f64, sample_rate: u32) -> Result<()> {
    let nyquist = sample_rate as f64 / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz <= nyquist) {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff_hz} Hz must be in (0, {nyquist}]"
        )));
    }
    Ok(())
}

/// Zero-phase (delay-compensated) low-pass filter. A cutoff at Nyquist
/// returns the input unchanged.
pub fn lowpass(wave: &Waveform, cutoff_hz: f64) -> Result<Waveform> {
    lowpass_with(wave, cutoff_hz, Exec::default())
}

pub fn lowpass_with(wave: &Waveform, cutoff_hz: f64, exec: Exec) -> Result<Waveform> {
    let sr = wave.sample_rate();
    check_cutoff(cutoff_hz, sr)?;
    if cutoff_hz >= sr as f64 / 2.0 {
        return Ok(wave.clone());
    }
    let h = lowpass_kernel(cutoff_hz, sr);
    let x = wave.samples();
    let n = x.len();
    let delay = LOWPASS_TAPS / 2;
    let mut y = vec![0.0; n];
    exec.for_each_chunk_mut(&mut y, 4096, |c, out| {
        let start = c * 4096;
        for (i, o) in out.iter_mut().enumerate() {
            // y[t] = sum_j h[j] x[t + delay - j]
            let t = start + i + delay;
            let j_lo = (t + 1).saturating_sub(n);
            let j_hi = (t + 1).min(LOWPASS_TAPS);
            let mut acc = 0.0;
            for j in j_lo..j_hi {
                acc += h[j] * x[t - j];
            }
            *o = acc;
        }
    });
    Waveform::new(y, sr)
}

/// Piecewise-constant bandwidth over time.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    segments: Vec<(f64, f64)>,
}

impl Schedule {
    /// `segments` are `(start_seconds, cutoff_hz)`. The first must start at 0
    /// and starts must strictly increase.
    pub fn new(segments: Vec<(f64, f64)>) -> Result<Self> {
        let Some(&(first, _)) = segments.first() else {
            return Err(Error::Schedule("schedule is empty".into()));
        };
        if first != 0.0 {
            return Err(Error::Schedule(format!("first segment starts at {first} s, not 0")));
        }
        for w in segments.windows(2) {
            if w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::Schedule(format!(
                    "segment start {} s does not follow {} s",
                    w[1].0, w[0].0
                )));
            }
        }
        if let Some(&(s, c)) = segments.iter().find(|(s, c)| !s.is_finite() || !c.is_finite() || *c <= 0.0) {
            return Err(Error::Schedule(format!("invalid segment ({s}, {c})")));
        }
        Ok(Self { segments })
    }

    /// Parses lines of `start_seconds cutoff_hz`. Blank lines and `#` comments
    /// are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut segments = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                [a, b] => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
                _ => None,
            };
            let seg = parsed.ok_or_else(|| {
                Error::Schedule(format!("line {}: expected `start_seconds cutoff_hz`, got `{line}`", i + 1))
            })?;
            segments.push(seg);
        }
        Self::new(segments)
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }
}

/// Applies a time-varying low-pass. Each distinct cutoff is filtered over the
/// whole signal and the results are stitched with linear crossfades centred on
/// the segment boundaries.
pub fn fluctuate(wave: &Waveform, schedule: &Schedule) -> Result<Waveform> {
    fluctuate_with(wave, schedule, Exec::default())
}

pub fn fluctuate_with(wave: &Waveform, schedule: &Schedule, exec: Exec) -> Result<Waveform> {
    let sr = wave.sample_rate();
    for &(_, c) in schedule.segments() {
        check_cutoff(c, sr)?;
    }
    let mut cutoffs: Vec<f64> = schedule.segments().iter().map(|s| s.1).collect();
    cutoffs.sort_by(f64::total_cmp);
    cutoffs.dedup();
    let filtered = cutoffs
        .iter()
        .map(|&c| lowpass_with(wave, c, exec).map(Waveform::into_samples))
        .collect::<Result<Vec<_>>>()?;
    let pick = |c: f64| &filtered[cutoffs.iter().position(|&x| x == c).unwrap()];

    let n = wave.len();
    let mut out = pick(schedule.segments()[0].1).clone();
    let fade = (CROSSFADE_SECS * sr as f64).round() as usize;
    for &(start, cutoff) in &schedule.segments()[1..] {
        let boundary = (start * sr as f64).round() as usize;
        let lo = boundary.saturating_sub(fade / 2);
        if lo >= n {
            break;
        }
        let next = pick(cutoff);
        for t in lo..n {
            let a = ((t - lo) as f64 + 0.5) / fade as f64;
            let a = a.min(1.0);
            out[t] = (1.0 - a) * out[t] + a * next[t];
        }
    }
    Waveform::new(out, sr)
}

/// Welch estimate of the power spectral density (4096-point periodic Hann,
/// hop 2048). Short signals are zero-padded to one segment.
pub fn power_spectrum(wave: &Waveform) -> Result<Vec<f64>> {
    let mut x = wave.samples().to_vec();
    if x.len() < WELCH_FFT {
        x.resize(WELCH_FFT, 0.0);
    }
    let stft = Stft::with_window(WELCH_FFT, WELCH_HOP, hann_periodic(WELCH_FFT))?;
    let spec = stft.analyze(&x)?;
    let mut psd = vec![0.0; spec.num_bins()];
    for frame in spec.frames() {
        for (p, c) in psd.iter_mut().zip(frame) {
            *p += Complex64::norm_sqr(c);
        }
    }
    let t = spec.num_frames() as f64;
    psd.iter_mut().for_each(|p| *p /= t);
    Ok(psd)
}

/// Highest frequency carrying meaningful energy.
///
/// The reference level is the strongest third-octave band mean of the Welch
/// PSD; the estimate is the highest bin of the 5-bin smoothed PSD that stays
/// within 50 dB of it. Silence gives 0 Hz.
pub fn estimate_bandwidth(wave: &Waveform) -> Result<f64> {
    let psd = power_spectrum(wave)?;
    let bin_hz = wave.sample_rate() as f64 / WELCH_FFT as f64;
    let nyquist = wave.sample_rate() as f64 / 2.0;

    let mut peak = 0.0f64;
    let mut k = -18i32;
    loop {
        let fc = 1000.0 * 2f64.powf(k as f64 / 3.0);
        let (lo, hi) = (fc * 2f64.powf(-1.0 / 6.0), fc * 2f64.powf(1.0 / 6.0));
        if lo > nyquist {
            break;
        }
        let bins: Vec<f64> = psd
            .iter()
            .enumerate()
            .filter(|&(b, _)| {
                let f = b as f64 * bin_hz;
                f >= lo && f < hi
            })
            .map(|(_, &p)| p)
            .collect();
        if !bins.is_empty() {
            peak = peak.max(bins.iter().sum::<f64>() / bins.len() as f64);
        }
        k += 1;
    }
    if peak <= 0.0 {
        return Ok(0.0);
    }

    let half = SMOOTH_BINS / 2;
    let threshold = peak * LEVEL_FLOOR;
    let top = (0..psd.len()).rev().find(|&b| {
        let lo = b.saturating_sub(half);
        let hi = (b + half + 1).min(psd.len());
        psd[lo..hi].iter().sum::<f64>() / (hi - lo) as f64 >= threshold
    });
    Ok(top.map_or(0.0, |b| b as f64 * bin_hz))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(len: usize, seed: u64) -> Waveform {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Waveform::new((0..len).map(|_| rng.gen_range(-0.5..0.5)).collect(), 48_000).unwrap()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn nyquist_cutoff_is_identity() {
        let w = noise(4800, 1);
        assert_eq!(lowpass(&w, 24_000.0).unwrap(), w);
    }

    #[test]
    fn rejects_bad_cutoffs() {
        let w = noise(100, 1);
        for c in [0.0, -5.0, 24_001.0, f64::NAN] {
            assert!(lowpass(&w, c).is_err());
        }
    }

    #[test]
    fn ten_khz_tone_is_removed() {
        let x: Vec<f64> = (0..48_000)
            .map(|n| (2.0 * PI * 10_000.0 * n as f64 / 48_000.0).sin())
            .collect();
        let y = lowpass(&Waveform::new(x.clone(), 48_000).unwrap(), 4000.0).unwrap();
        // ignore the filter's edge transients
        let inner = 1000..47_000;
        assert!(rms(&y.samples()[inner.clone()]) < 1e-3 * rms(&x[inner]));
    }

    #[test]
    fn passband_tone_survives_aligned() {
        let x: Vec<f64> = (0..48_000)
            .map(|n| (2.0 * PI * 1000.0 * n as f64 / 48_000.0).sin())
            .collect();
        let y = lowpass(&Waveform::new(x.clone(), 48_000).unwrap(), 4000.0).unwrap();
        let err: f64 = x[1000..47_000]
            .iter()
            .zip(&y.samples()[1000..47_000])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.01, "{err}");
    }

    #[test]
    fn half_amplitude_at_cutoff() {
        let h = lowpass_kernel(6000.0, 48_000);
        let w = 2.0 * PI * 6000.0 / 48_000.0;
        let mid = (LOWPASS_TAPS / 2) as f64;
        let g: f64 = h.iter().enumerate().map(|(n, v)| v * (w * (n as f64 - mid)).cos()).sum();
        assert!((20.0 * g.log10() + 6.02).abs() < 0.1, "{g}");
    }

    #[test]
    fn parallel_matches_sequential() {
        let w = noise(20_000, 5);
        let a = lowpass_with(&w, 3000.0, Exec::Sequential).unwrap();
        let b = lowpass_with(&w, 3000.0, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn schedule_parsing_and_validation() {
        let s = Schedule::parse("# demo\n0 4000\n\n1.5 8000  # up\n").unwrap();
        assert_eq!(s.segments(), &[(0.0, 4000.0), (1.5, 8000.0)]);
        assert!(Schedule::parse("").is_err());
        assert!(Schedule::parse("0 4000\n0 8000").is_err());
        assert!(Schedule::parse("1 4000").is_err());
        assert!(Schedule::parse("0 abc").is_err());
        assert!(Schedule::parse("0 4000 1").is_err());
        assert!(Schedule::new(vec![(0.0, 4000.0), (2.0, 3000.0), (1.0, 2000.0)]).is_err());
    }

    #[test]
    fn single_segment_equals_lowpass() {
        let w = noise(10_000, 2);
        let s = Schedule::new(vec![(0.0, 5000.0)]).unwrap();
        assert_eq!(fluctuate(&w, &s).unwrap(), lowpass(&w, 5000.0).unwrap());
    }

    #[test]
    fn silence_has_no_bandwidth() {
        assert_eq!(estimate_bandwidth(&Waveform::zeros(48_000, 48_000)).unwrap(), 0.0);
    }

    #[test]
    fn full_band_noise() {
        assert!(estimate_bandwidth(&noise(96_000, 3)).unwrap() >= 23_000.0);
    }
}
