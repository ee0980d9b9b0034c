//! Streaming memory stays flat regardless of input length.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};

use baenet::weights_io::generate_test_weights;
use baenet::{Engine, ModelConfig, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Counting;

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let now = LIVE.fetch_add(layout.size(), Ordering::SeqCst) + layout.size();
            PEAK.fetch_max(now, Ordering::SeqCst);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        LIVE.fetch_sub(layout.size(), Ordering::SeqCst);
    }
}

#[global_allocator]
static GLOBAL: Counting = Counting;

/// Peak live heap above the level at the start of streaming, in bytes.
fn stream_peak(engine: &Engine, seconds: usize) -> usize {
    let mut proc = engine.stream().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut block = vec![0.0; 480];
    let mut out = vec![0.0; 480];
    let base = LIVE.load(Ordering::SeqCst);
    PEAK.store(base, Ordering::SeqCst);
    for _ in 0..seconds * 100 {
        block.iter_mut().for_each(|v| *v = rng.gen_range(-0.5..0.5));
        proc.process_into(&block, &mut out).unwrap();
    }
    PEAK.load(Ordering::SeqCst) - base
}

// Single test in this binary so no other thread allocates concurrently.
#[test]
fn stream_memory_is_bounded() {
    for variant in [Variant::Lite, Variant::Full] {
        let cfg = ModelConfig::for_variant(variant);
        let engine = Engine::from_weights(&cfg, &generate_test_weights(&cfg, 0)).unwrap();
        let short = stream_peak(&engine, 5);
        let long = stream_peak(&engine, 60);
        assert!(long <= short + 4096, "{variant}: peak {long} B over 60 s vs {short} B over 5 s");
        assert!(long < 256 * 1024, "{variant}: per-stream working set {long} B");
    }
}
