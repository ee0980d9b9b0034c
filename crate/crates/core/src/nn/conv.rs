use super::{check_groups, check_weights};
use crate::error::{check_len, Result};

/// Causal grouped temporal convolution:
/// `y[t] = b + sum_{lag} W[lag] x[t - lag]`.
///
/// Weights are stored lag-major as `[out][lag][in / groups]`, lag 0 being the
/// current frame. Frames before the start of a stream are zero.
#[derive(Clone, Debug)]
pub struct ConvLayer {
    in_channels: usize,
    out_channels: usize,
    groups: usize,
    kernel: usize,
    weight: Vec<f64>,
    bias: Vec<f64>,
}

impl ConvLayer {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        groups: usize,
        kernel: usize,
        weight: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        check_groups("conv", &[in_channels, out_channels], groups)?;
        if kernel == 0 {
            return Err(crate::Error::InvalidConfig("conv kernel must be >= 1".into()));
        }
        check_weights("conv weight", out_channels * kernel * (in_channels / groups), &weight)?;
        check_weights("conv bias", out_channels, &bias)?;
        Ok(Self {
            in_channels,
            out_channels,
            groups,
            kernel,
            weight,
            bias,
        })
    }

    pub fn zeros(in_channels: usize, out_channels: usize, groups: usize, kernel: usize) -> Result<Self> {
        let n = out_channels * kernel * (in_channels / groups.max(1));
        Self::new(in_channels, out_channels, groups, kernel, vec![0.0; n], vec![0.0; out_channels])
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn macs(&self) -> usize {
        self.out_channels * (self.in_channels / self.groups) * self.kernel
    }

    pub fn new_state(&self) -> ConvState {
        ConvState {
            in_channels: self.in_channels,
            history: vec![0.0; (self.kernel - 1) * self.in_channels],
        }
    }

    pub fn step(&self, state: &mut ConvState, input: &[f64], output: &mut [f64]) -> Result<()> {
        let cin = self.in_channels;
        check_len("conv input", cin, input.len())?;
        check_len("conv output", self.out_channels, output.len())?;
        check_len("conv state", (self.kernel - 1) * cin, state.history.len())?;
        let in_g = cin / self.groups;
        let out_g = self.out_channels / self.groups;
        let taps = self.kernel * in_g;
        for (o, y) in output.iter_mut().enumerate() {
            let g = o / out_g;
            let w = &self.weight[o * taps..(o + 1) * taps];
            let mut acc = self.bias[o];
            acc += dot(&w[..in_g], &input[g * in_g..(g + 1) * in_g]);
            for lag in 1..self.kernel {
                let past = &state.history[(lag - 1) * cin..lag * cin];
                acc += dot(&w[lag * in_g..(lag + 1) * in_g], &past[g * in_g..(g + 1) * in_g]);
            }
            *y = acc;
        }
        if self.kernel > 1 {
            state.history.copy_within(..(self.kernel - 2) * cin, cin);
            state.history[..cin].copy_from_slice(input);
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The past `kernel - 1` input frames of one [`ConvLayer`], newest first.
#[derive(Clone, Debug)]
pub struct ConvState {
    in_channels: usize,
    history: Vec<f64>,
}

impl ConvState {
    pub fn reset(&mut self) {
        self.history.fill(0.0);
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_layer_outputs_zero() {
        let layer = ConvLayer::zeros(4, 6, 2, 3).unwrap();
        let mut st = layer.new_state();
        let mut out = vec![1.0; 6];
        layer.step(&mut st, &[1.0, -2.0, 3.0, 4.0], &mut out).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_tap_passes_through() {
        let layer = ConvLayer::new(1, 1, 1, 3, vec![1.0, 0.0, 0.0], vec![0.0]).unwrap();
        let mut st = layer.new_state();
        for x in [0.5, -1.0, 2.0, 7.0] {
            let mut y = [0.0];
            layer.step(&mut st, &[x], &mut y).unwrap();
            assert_eq!(y[0], x);
        }
    }

    #[test]
    fn delay_taps_read_history() {
        let layer = ConvLayer::new(1, 1, 1, 3, vec![0.0, 0.0, 1.0], vec![0.0]).unwrap();
        let mut st = layer.new_state();
        let ys: Vec<f64> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&x| {
                let mut y = [0.0];
                layer.step(&mut st, &[x], &mut y).unwrap();
                y[0]
            })
            .collect();
        assert_eq!(ys, [0.0, 0.0, 1.0, 2.0]);
        st.reset();
        let mut y = [0.0];
        layer.step(&mut st, &[5.0], &mut y).unwrap();
        assert_eq!(y[0], 0.0);
    }

    #[test]
    fn shape_errors() {
        assert!(ConvLayer::zeros(3, 4, 2, 3).is_err());
        assert!(ConvLayer::new(2, 2, 1, 3, vec![0.0; 5], vec![0.0; 2]).is_err());
        let layer = ConvLayer::zeros(2, 2, 1, 3).unwrap();
        let mut st = layer.new_state();
        assert!(layer.step(&mut st, &[0.0; 3], &mut [0.0; 2]).is_err());
        let other = ConvLayer::zeros(4, 2, 1, 3).unwrap();
        assert!(layer.step(&mut other.new_state(), &[0.0; 2], &mut [0.0; 2]).is_err());
    }
}
