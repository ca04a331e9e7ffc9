use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::des::{Block, Key56};

use super::{Engine, EngineError, EngineKind, KeyBatch, SCALAR_BATCH};

/// Default seed for benchmark inputs; two runs decrypt identical data.
pub const BENCH_SEED: u64 = 0x0DE5_C4AC;

const BENCH_BATCHES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineStats {
    pub engine: EngineKind,
    pub blocks_processed: u64,
    /// Seconds.
    pub elapsed: f64,
    pub throughput_bits_per_second: f64,
    pub keys_per_second: f64,
}

impl EngineStats {
    pub fn from_counts(engine: EngineKind, blocks_processed: u64, elapsed: f64) -> Self {
        let keys_per_second = blocks_processed as f64 / elapsed;
        EngineStats {
            engine,
            blocks_processed,
            elapsed,
            throughput_bits_per_second: blocks_processed as f64 * 64.0 / elapsed,
            keys_per_second,
        }
    }
}

/// Pseudorandom (ciphertext, key batch) inputs derived from `seed`.
pub fn bench_inputs(seed: u64) -> Vec<(Block, KeyBatch)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..BENCH_BATCHES)
        .map(|_| {
            let c = Block(rng.gen());
            let keys = (0..SCALAR_BATCH)
                .map(|_| Key56::truncating(rng.gen()))
                .collect();
            (c, KeyBatch::new(keys))
        })
        .collect()
}

/// Decrypts batches of pseudorandom inputs until at least `duration`
/// seconds have passed.
pub fn bench(kind: EngineKind, duration: f64) -> Result<EngineStats, EngineError> {
    bench_engine(kind.build().as_ref(), duration, BENCH_SEED)
}

pub fn bench_engine(
    engine: &dyn Engine,
    duration: f64,
    seed: u64,
) -> Result<EngineStats, EngineError> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(EngineError::Duration(duration));
    }
    let inputs = bench_inputs(seed);
    let budget = Duration::from_secs_f64(duration);
    let mut blocks = 0u64;
    let started = Instant::now();
    'outer: loop {
        for (c, batch) in &inputs {
            black_box(engine.decrypt_batch(black_box(*c), batch));
            blocks += batch.len() as u64;
            if started.elapsed() >= budget {
                break 'outer;
            }
        }
    }
    Ok(EngineStats::from_counts(
        engine.kind(),
        blocks,
        started.elapsed().as_secs_f64(),
    ))
}
