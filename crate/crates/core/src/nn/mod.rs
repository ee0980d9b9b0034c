//! Frame-synchronous neural kernels with explicit streaming state.
//!
//! Every kernel processes one frame per call. Temporal context lives in a
//! separate state object owned by the caller, so one set of weights can
//! serve any number of concurrent streams.

mod activation;
mod conv;
mod gru;
mod linear;

pub use activation::{sigmoid, Prelu};
pub use conv::{ConvLayer, ConvState};
pub use gru::{GroupedGru, GruState};
pub use linear::Linear;

use crate::error::{Error, Result};

pub(crate) fn check_weights(context: &'static str, expected: usize, data: &[f64]) -> Result<()> {
    if data.len() != expected {
        return Err(Error::shape(context, expected, data.len()));
    }
    Ok(())
}

pub(crate) fn check_groups(context: &str, channels: &[usize], groups: usize) -> Result<()> {
    if groups == 0 || channels.iter().any(|&c| c == 0 || c % groups != 0) {
        return Err(Error::InvalidConfig(format!(
            "{context}: channels {channels:?} not divisible into {groups} groups"
        )));
    }
    Ok(())
}
