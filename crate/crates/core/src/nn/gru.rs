use super::conv::dot;
use super::{check_groups, check_weights, sigmoid};
use crate::error::{check_len, Result};

/// Grouped GRU: channels are split into independent groups, each with its own
/// GRU cell, and the group outputs are concatenated.
///
/// Per group, with gates in the order update `z`, reset `r`, candidate `n`:
///
/// ```text
/// z  = sigmoid(Wz x + Uz h + bz)
/// r  = sigmoid(Wr x + Ur h + br)
/// n  = tanh(Wn x + Un (r * h) + bn)
/// h' = (1 - z) * h + z * n
/// ```
///
/// Layout: `w_ih` is `[groups][3][hidden/g][input/g]`, `w_hh` is
/// `[groups][3][hidden/g][hidden/g]`, `bias` is `[groups][3][hidden/g]`.
#[derive(Clone, Debug)]
pub struct GroupedGru {
    groups: usize,
    input_size: usize,
    hidden_size: usize,
    w_ih: Vec<f64>,
    w_hh: Vec<f64>,
    bias: Vec<f64>,
}

impl GroupedGru {
    pub fn new(
        groups: usize,
        input_size: usize,
        hidden_size: usize,
        w_ih: Vec<f64>,
        w_hh: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        check_groups("gru", &[input_size, hidden_size], groups)?;
        let (ig, hg) = (input_size / groups, hidden_size / groups);
        check_weights("gru w_ih", groups * 3 * hg * ig, &w_ih)?;
        check_weights("gru w_hh", groups * 3 * hg * hg, &w_hh)?;
        check_weights("gru bias", groups * 3 * hg, &bias)?;
        Ok(Self {
            groups,
            input_size,
            hidden_size,
            w_ih,
            w_hh,
            bias,
        })
    }

    pub fn zeros(groups: usize, input_size: usize, hidden_size: usize) -> Result<Self> {
        let g = groups.max(1);
        let (ig, hg) = (input_size / g, hidden_size / g);
        Self::new(
            groups,
            input_size,
            hidden_size,
            vec![0.0; g * 3 * hg * ig],
            vec![0.0; g * 3 * hg * hg],
            vec![0.0; g * 3 * hg],
        )
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    pub fn macs(&self) -> usize {
        let (ig, hg) = (self.input_size / self.groups, self.hidden_size / self.groups);
        self.groups * 3 * (ig * hg + hg * hg)
    }

    pub fn new_state(&self) -> GruState {
        GruState {
            hidden: vec![0.0; self.hidden_size],
            gates: vec![0.0; 3 * self.hidden_size / self.groups],
        }
    }

    /// Advances the hidden state by one frame; `output` receives the new state.
    pub fn step(&self, state: &mut GruState, input: &[f64], output: &mut [f64]) -> Result<()> {
        check_len("gru input", self.input_size, input.len())?;
        check_len("gru output", self.hidden_size, output.len())?;
        check_len("gru state", self.hidden_size, state.hidden.len())?;
        let (ig, hg) = (self.input_size / self.groups, self.hidden_size / self.groups);
        for g in 0..self.groups {
            let x = &input[g * ig..(g + 1) * ig];
            let h = &state.hidden[g * hg..(g + 1) * hg];
            let wi = &self.w_ih[g * 3 * hg * ig..(g + 1) * 3 * hg * ig];
            let wh = &self.w_hh[g * 3 * hg * hg..(g + 1) * 3 * hg * hg];
            let b = &self.bias[g * 3 * hg..(g + 1) * 3 * hg];
            let (zr, cand) = state.gates.split_at_mut(2 * hg);
            // update and reset gates
            for j in 0..2 * hg {
                let pre = b[j] + dot(&wi[j * ig..(j + 1) * ig], x) + dot(&wh[j * hg..(j + 1) * hg], h);
                zr[j] = sigmoid(pre);
            }
            // candidate, reset applied to the previous state before Un
            for j in 0..hg {
                let row = 2 * hg + j;
                let mut pre = b[row] + dot(&wi[row * ig..(row + 1) * ig], x);
                let un = &wh[row * hg..(row + 1) * hg];
                for i in 0..hg {
                    pre += un[i] * (zr[hg + i] * h[i]);
                }
                cand[j] = pre.tanh();
            }
            for j in 0..hg {
                let z = zr[j];
                output[g * hg + j] = (1.0 - z) * h[j] + z * cand[j];
            }
        }
        state.hidden.copy_from_slice(output);
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GruState {
    hidden: Vec<f64>,
    gates: Vec<f64>,
}

impl GruState {
    pub fn reset(&mut self) {
        self.hidden.fill(0.0);
    }

    pub fn hidden(&self) -> &[f64] {
        &self.hidden
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_keep_zero_state() {
        let gru = GroupedGru::zeros(4, 16, 16).unwrap();
        let mut st = gru.new_state();
        let mut out = vec![1.0; 16];
        for _ in 0..3 {
            gru.step(&mut st, &[0.7; 16], &mut out).unwrap();
            assert!(out.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn single_unit_by_hand() {
        // 1 input, 1 hidden: w_ih = [wz, wr, wn], w_hh = [uz, ur, un], bias = [bz, br, bn]
        let gru = GroupedGru::new(1, 1, 1, vec![0.5, -0.3, 0.8], vec![0.2, 0.4, -0.6], vec![0.1, 0.0, -0.2]).unwrap();
        let mut st = gru.new_state();
        let mut h = 0.0f64;
        for x in [1.0, -0.5, 0.25] {
            let z = sigmoid(0.5 * x + 0.2 * h + 0.1);
            let r = sigmoid(-0.3 * x + 0.4 * h);
            let n = (0.8 * x - 0.6 * (r * h) - 0.2).tanh();
            h = (1.0 - z) * h + z * n;
            let mut out = [0.0];
            gru.step(&mut st, &[x], &mut out).unwrap();
            assert!((out[0] - h).abs() < 1e-15);
        }
    }

    #[test]
    fn shape_errors() {
        assert!(GroupedGru::zeros(3, 16, 16).is_err());
        let gru = GroupedGru::zeros(2, 4, 4).unwrap();
        let mut st = gru.new_state();
        assert!(gru.step(&mut st, &[0.0; 3], &mut [0.0; 4]).is_err());
    }
}
