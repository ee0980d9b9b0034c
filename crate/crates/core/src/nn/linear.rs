use super::check_weights;
use super::conv::dot;
use crate::error::{check_len, Result};

/// Fully connected layer, weight `[out][in]`.
#[derive(Clone, Debug)]
pub struct Linear {
    in_features: usize,
    out_features: usize,
    weight: Vec<f64>,
    bias: Vec<f64>,
}

impl Linear {
    pub fn new(in_features: usize, out_features: usize, weight: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        check_weights("linear weight", in_features * out_features, &weight)?;
        check_weights("linear bias", out_features, &bias)?;
        Ok(Self {
            in_features,
            out_features,
            weight,
            bias,
        })
    }

    pub fn in_features(&self) -> usize {
        self.in_features
    }

    pub fn out_features(&self) -> usize {
        self.out_features
    }

    pub fn macs(&self) -> usize {
        self.in_features * self.out_features
    }

    pub fn forward(&self, input: &[f64], output: &mut [f64]) -> Result<()> {
        check_len("linear input", self.in_features, input.len())?;
        check_len("linear output", self.out_features, output.len())?;
        for ((y, row), b) in output
            .iter_mut()
            .zip(self.weight.chunks_exact(self.in_features))
            .zip(&self.bias)
        {
            *y = b + dot(row, input);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_zero() {
        let eye = Linear::new(3, 3, vec![1., 0., 0., 0., 1., 0., 0., 0., 1.], vec![0.0; 3]).unwrap();
        let mut y = [0.0; 3];
        eye.forward(&[1.5, -2.0, 3.0], &mut y).unwrap();
        assert_eq!(y, [1.5, -2.0, 3.0]);
        let zero = Linear::new(3, 3, vec![0.0; 9], vec![0.1, 0.2, 0.3]).unwrap();
        zero.forward(&[1.5, -2.0, 3.0], &mut y).unwrap();
        assert_eq!(y, [0.1, 0.2, 0.3]);
    }

    #[test]
    fn three_by_three_by_hand() {
        let fc = Linear::new(3, 3, vec![1., 2., 3., 0., -1., 4., 2., 2., -2.], vec![0.5, 0.0, -1.0]).unwrap();
        let mut y = [0.0; 3];
        fc.forward(&[1.0, 2.0, 3.0], &mut y).unwrap();
        // rows: 1+4+9+0.5, 0-2+12, 2+4-6-1
        assert_eq!(y, [14.5, 10.0, -1.0]);
        assert!(fc.forward(&[1.0, 2.0], &mut y).is_err());
    }
}
