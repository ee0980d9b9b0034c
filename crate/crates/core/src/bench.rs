//! Real-time factor measurement.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::Engine;
use crate::error::Result;
use crate::model::count_complexity;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub params: usize,
    pub macs_per_second: f64,
    pub audio_seconds: f64,
    pub elapsed_seconds: f64,
    /// Processing time over audio duration.
    pub rtf: f64,
}

/// Streams `seconds` of seeded uniform noise through a fresh
/// [`StreamProcessor`](crate::StreamProcessor) on the calling thread, one hop
/// at a time, and times it.
pub fn run_bench(engine: &Engine, seconds: f64, seed: u64) -> Result<BenchReport> {
    let config = engine.model().config();
    let sr = config.sample_rate as f64;
    let len = (seconds * sr).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input: Vec<f64> = (0..len).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let mut stream = engine.stream()?;
    let hop = config.hop();
    let mut out = vec![0.0; hop];

    let start = Instant::now();
    for block in input.chunks(hop) {
        stream.process_into(block, &mut out[..block.len()])?;
    }
    let elapsed = start.elapsed().as_secs_f64();

    let c = count_complexity(config);
    let audio = len as f64 / sr;
    Ok(BenchReport {
        params: c.params,
        macs_per_second: c.macs_per_second,
        audio_seconds: audio,
        elapsed_seconds: elapsed,
        rtf: if audio > 0.0 { elapsed / audio } else { 0.0 },
    })
}
