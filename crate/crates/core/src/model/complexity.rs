use super::config::ModelConfig;

/// Analytical size and cost of a configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Complexity {
    pub params: usize,
    pub macs_per_frame: usize,
    pub macs_per_second: f64,
}

/// Counts learned parameters and per-frame multiply-accumulates.
///
/// The ERB projection is fixed (no parameters) but is counted as a dense
/// `bands x bins` product. Element-wise work (activations, gates' sigmoids,
/// residual adds) is not counted.
pub fn count_complexity(config: &ModelConfig) -> Complexity {
    let layers = config.layers();
    let params = layers.iter().flat_map(|l| l.tensors()).map(|t| t.numel()).sum();
    let macs_per_frame = config.erb_bands * config.bins + layers.iter().map(|l| l.macs()).sum::<usize>();
    Complexity {
        params,
        macs_per_frame,
        macs_per_second: macs_per_frame as f64 * config.frame_rate(),
    }
}
