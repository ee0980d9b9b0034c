//! ERB-band rearrangement and the mirrored high-band phase.

mod erb;
mod phase;

pub use erb::{erb_analyze, erb_rate, erb_rate_to_hz, ErbBands, ErbFilterBank};
pub use phase::{flip_phase, flip_phase_in_place};
