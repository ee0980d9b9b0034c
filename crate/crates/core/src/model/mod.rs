//! The dual-stream network: magnitude inpainting, band-guided masking, phase
//! refinement with interaction gates, and the frame-level assembly.

mod complexity;
mod config;
mod graph;
mod layers;
mod mi;
mod pr;
mod weights;

pub use complexity::{count_complexity, Complexity};
pub use config::{LayerSpec, ModelConfig, TensorSpec, Variant};
pub use graph::{BaeModel, BaeState};
pub use layers::{BandGuidedMask, ConvBlock, Interaction};
pub use mi::{MiNet, MiOutput, MiState};
pub use pr::{PrNet, PrState};
pub use weights::{ModelWeights, Tensor};
