use std::io::Write;

use crate::dsp::{MagnitudeSpectrogram, RealFrames};
use crate::error::{check_len, Error, Result};

/// Glasberg & Moore ERB-rate (in ERB units) of a frequency in Hz.
pub fn erb_rate(hz: f64) -> f64 {
    21.4 * (1.0 + 0.00437 * hz).log10()
}

pub fn erb_rate_to_hz(rate: f64) -> f64 {
    (10f64.powf(rate / 21.4) - 1.0) / 0.00437
}

/// Triangular filter bank mapping linear STFT bins onto ERB-spaced bands.
///
/// Centres are equally spaced on the ERB-rate scale from 0 Hz to Nyquist,
/// except that neighbouring centres are kept at least one bin apart. At
/// 128 bands over 769 bins the low bands would otherwise be narrower than a
/// bin and cover nothing, so roughly the first sixty centres land on
/// consecutive bins. Each band is a triangle rising from the previous centre
/// and falling to the next one; rows are normalised to sum to one.
#[derive(Clone, Debug)]
pub struct ErbFilterBank {
    matrix: Vec<f64>,
    num_bands: usize,
    num_bins: usize,
    band_centers: Vec<f64>,
    supports: Vec<(usize, usize)>,
}

impl ErbFilterBank {
    pub fn new(num_bands: usize, num_bins: usize, sample_rate: u32) -> Result<Self> {
        if num_bands < 2 || num_bands >= num_bins {
            return Err(Error::InvalidArgument(format!(
                "need 2 <= bands < bins, got {num_bands} bands for {num_bins} bins"
            )));
        }
        let last_bin = (num_bins - 1) as f64;
        let nyquist = sample_rate as f64 / 2.0;
        let bin_hz = nyquist / last_bin;
        let top = erb_rate(nyquist);

        let mut centers = Vec::with_capacity(num_bands);
        centers.push(0.0f64);
        for i in 1..num_bands - 1 {
            let ideal = erb_rate_to_hz(top * i as f64 / (num_bands - 1) as f64) / bin_hz;
            centers.push(ideal.max(centers[i - 1] + 1.0));
        }
        if centers[num_bands - 2] + 1.0 > last_bin {
            return Err(Error::InvalidArgument(format!(
                "{num_bands} bands do not fit in {num_bins} bins"
            )));
        }
        centers.push(last_bin);

        let mut matrix = vec![0.0; num_bands * num_bins];
        let mut supports = Vec::with_capacity(num_bands);
        for (b, row) in matrix.chunks_exact_mut(num_bins).enumerate() {
            let c = centers[b];
            let left = (b > 0).then(|| centers[b - 1]);
            let right = (b + 1 < num_bands).then(|| centers[b + 1]);
            for (k, w) in row.iter_mut().enumerate() {
                let k = k as f64;
                *w = if k <= c {
                    match left {
                        Some(l) if k > l => (k - l) / (c - l),
                        None if k == c => 1.0,
                        _ => 0.0,
                    }
                } else {
                    match right {
                        Some(r) if k < r => (r - k) / (r - c),
                        _ => 0.0,
                    }
                };
            }
            let sum: f64 = row.iter().sum();
            debug_assert!(sum > 0.0, "band {b} is empty");
            row.iter_mut().for_each(|w| *w /= sum);
            let lo = row.iter().position(|&w| w > 0.0).unwrap_or(0);
            let hi = row.iter().rposition(|&w| w > 0.0).unwrap_or(0);
            supports.push((lo, hi));
        }

        Ok(Self {
            matrix,
            num_bands,
            num_bins,
            band_centers: centers.iter().map(|c| c * bin_hz).collect(),
            supports,
        })
    }

    pub fn num_bands(&self) -> usize {
        self.num_bands
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    /// Centre frequency of each band in Hz.
    pub fn band_centers(&self) -> &[f64] {
        &self.band_centers
    }

    pub fn row(&self, band: usize) -> &[f64] {
        &self.matrix[band * self.num_bins..(band + 1) * self.num_bins]
    }

    /// Inclusive bin range with non-zero weight for `band`.
    pub fn support(&self, band: usize) -> (usize, usize) {
        self.supports[band]
    }

    /// Dense matrix-vector product for one frame.
    pub fn apply_frame(&self, magnitude: &[f64], bands: &mut [f64]) -> Result<()> {
        check_len("erb input", self.num_bins, magnitude.len())?;
        check_len("erb output", self.num_bands, bands.len())?;
        for (out, row) in bands.iter_mut().zip(self.matrix.chunks_exact(self.num_bins)) {
            *out = row.iter().zip(magnitude).map(|(w, x)| w * x).sum();
        }
        Ok(())
    }

    /// Writes the bank as plain text: one band per line, whitespace-separated
    /// weights, preceded by `#` comment lines with the band centres.
    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# erb filter bank: {} bands x {} bins", self.num_bands, self.num_bins)?;
        write!(w, "# centers_hz")?;
        for c in &self.band_centers {
            write!(w, " {c:.3}")?;
        }
        writeln!(w)?;
        for row in self.matrix.chunks_exact(self.num_bins) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.9e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Per-frame ERB band energies, `T x bands`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErbBands(pub RealFrames);

impl std::ops::Deref for ErbBands {
    type Target = RealFrames;
    fn deref(&self) -> &RealFrames {
        &self.0
    }
}

pub fn erb_analyze(mag: &MagnitudeSpectrogram, bank: &ErbFilterBank) -> Result<ErbBands> {
    check_len("erb analyze bins", bank.num_bins, mag.num_bins())?;
    let mut data = vec![0.0; mag.num_frames() * bank.num_bands];
    for (frame, out) in mag.frames().zip(data.chunks_exact_mut(bank.num_bands)) {
        bank.apply_frame(frame, out)?;
    }
    Ok(ErbBands(RealFrames::new(data, bank.num_bands)?))
}
