use crate::dsp::wrap_phase;
use crate::error::{Error, Result};

/// Extends the trusted narrow-band phase (bins `0..=base_bins`) over the
/// whole spectrum by repeated mirror-and-negate:
/// `out[k] = -out[2*m*B + 1 - k]` for `k` in `(m*B, (m+1)*B]`, i.e. each
/// segment is the negated mirror image of the one below it, reflected about
/// the half-bin boundary so DC never takes part.
///
/// Bins `0..=base_bins` are returned untouched; every extended value is
/// wrapped to `(-pi, pi]`.
pub fn flip_phase(phase: &[f64], base_bins: usize) -> Result<Vec<f64>> {
    let mut out = phase.to_vec();
    flip_phase_in_place(&mut out, base_bins)?;
    Ok(out)
}

pub fn flip_phase_in_place(phase: &mut [f64], base_bins: usize) -> Result<()> {
    let len = phase.len();
    if base_bins == 0 || len <= base_bins || !(len - 1).is_multiple_of(base_bins) {
        return Err(Error::InvalidArgument(format!(
            "base band of {base_bins} bins must divide the {} bins above DC",
            len.saturating_sub(1)
        )));
    }
    let segments = (len - 1) / base_bins;
    for m in 1..segments {
        let mirror = 2 * m * base_bins + 1;
        for k in m * base_bins + 1..=(m + 1) * base_bins {
            phase[k] = wrap_phase(-phase[mirror - k]);
        }
    }
    Ok(())
}
