use std::collections::BTreeMap;

use super::config::ModelConfig;
use crate::error::{Error, Result, WeightsError};

/// Dense f32 tensor as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(Error::shape("tensor data", n, data.len()));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self {
            dims,
            data: vec![0.0; n],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub(crate) fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&v| f64::from(v)).collect()
    }
}

/// Named tensors covering every layer of a [`ModelConfig`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelWeights {
    tensors: BTreeMap<String, Tensor>,
}

impl ModelWeights {
    pub fn new() -> Self {
        Self::default()
    }

    /// All-zero weights for `config`.
    pub fn zeros(config: &ModelConfig) -> Self {
        let mut w = Self::new();
        for spec in config.tensor_specs() {
            w.insert(spec.name, Tensor::zeros(spec.dims));
        }
        w
    }

    /// Inserts a tensor, returning the previous one under the same name.
    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) -> Option<Tensor> {
        self.tensors.insert(name.into(), tensor)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.tensors.get_mut(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn param_count(&self) -> usize {
        self.tensors.values().map(Tensor::len).sum()
    }

    /// Restricts the map to the tensors `config` uses (e.g. a full file run as lite).
    pub fn subset_for(&self, config: &ModelConfig) -> std::result::Result<Self, WeightsError> {
        let mut out = Self::new();
        for spec in config.tensor_specs() {
            let t = self
                .get(&spec.name)
                .ok_or_else(|| WeightsError::MissingTensor(spec.name.clone()))?;
            out.insert(spec.name, t.clone());
        }
        Ok(out)
    }

    /// Checks that exactly the tensors required by `config` are present, with
    /// matching shapes and finite values.
    pub fn validate(&self, config: &ModelConfig) -> std::result::Result<(), WeightsError> {
        let specs = config.tensor_specs();
        for spec in &specs {
            let t = self
                .get(&spec.name)
                .ok_or_else(|| WeightsError::MissingTensor(spec.name.clone()))?;
            if t.dims != spec.dims {
                return Err(WeightsError::ShapeMismatch {
                    name: spec.name.clone(),
                    expected: spec.dims.clone(),
                    found: t.dims.clone(),
                });
            }
            if let Some(index) = t.data.iter().position(|v| !v.is_finite()) {
                return Err(WeightsError::NonFinite {
                    name: spec.name.clone(),
                    index,
                });
            }
        }
        if self.len() != specs.len() {
            let extra = self
                .tensors
                .keys()
                .find(|k| !specs.iter().any(|s| &s.name == *k))
                .cloned()
                .unwrap_or_default();
            return Err(WeightsError::UnexpectedTensor(extra));
        }
        Ok(())
    }
}
