use crate::error::{check_len, Result};

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Parametric ReLU with one learned slope per channel.
#[derive(Clone, Debug)]
pub struct Prelu {
    slopes: Vec<f64>,
}

impl Prelu {
    pub fn new(slopes: Vec<f64>) -> Self {
        Self { slopes }
    }

    pub fn channels(&self) -> usize {
        self.slopes.len()
    }

    pub fn apply(&self, x: &mut [f64]) -> Result<()> {
        check_len("prelu", self.slopes.len(), x.len())?;
        for (v, a) in x.iter_mut().zip(&self.slopes) {
            if *v < 0.0 {
                *v *= a;
            }
        }
        Ok(())
    }
}
