//! Interchangeable DES decryption engines.
//!
//! * [`RolledEngine`] runs the reference datapath: one round routine invoked
//!   sixteen times, bit-level table permutations, schedule derived per key.
//! * [`UnrolledEngine`] inlines all sixteen rounds and fuses E, the S-boxes
//!   and P into eight 64-entry lookup tables; IP/FP and the key schedule are
//!   byte-table driven.
//! * [`BitslicedEngine`] evaluates [`WIDTH`] keys at once, one key per bit
//!   lane of a machine word, with S-boxes as boolean circuits.
//!
//! Every engine is bit-identical to [`crate::des::decrypt_block`].

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::Arc;

use crate::des::{Block, Key56};

mod bench;
mod bitsliced;
mod rolled;
mod unrolled;

pub use bench::{bench, bench_engine, bench_inputs, EngineStats, BENCH_SEED};
pub use bitsliced::{slice_keys, transpose64, unslice_keys, BitslicedEngine, WIDTH};
pub use rolled::RolledEngine;
pub use unrolled::UnrolledEngine;

/// Keys per search batch for the scalar engines.
pub const SCALAR_BATCH: usize = 1024;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("unknown engine {0:?} (expected rolled, unrolled or bitsliced)")]
    UnknownKind(String),
    #[error("benchmark duration must be positive, got {0}")]
    Duration(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EngineKind {
    Rolled,
    Unrolled,
    Bitsliced,
}

impl EngineKind {
    pub const ALL: [EngineKind; 3] = [
        EngineKind::Rolled,
        EngineKind::Unrolled,
        EngineKind::Bitsliced,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Rolled => "rolled",
            EngineKind::Unrolled => "unrolled",
            EngineKind::Bitsliced => "bitsliced",
        }
    }

    /// Builds a fresh engine of this kind.
    pub fn build(self) -> Arc<dyn Engine> {
        match self {
            EngineKind::Rolled => Arc::new(RolledEngine),
            EngineKind::Unrolled => Arc::new(UnrolledEngine::new()),
            EngineKind::Bitsliced => Arc::new(BitslicedEngine::new()),
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineKind {
    type Err = EngineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rolled" => Ok(EngineKind::Rolled),
            "unrolled" => Ok(EngineKind::Unrolled),
            "bitsliced" => Ok(EngineKind::Bitsliced),
            _ => Err(EngineError::UnknownKind(s.to_string())),
        }
    }
}

/// An ordered set of keys to try against one ciphertext. Slots past
/// [`KeyBatch::len`] are padding (key 0) and never produce results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyBatch {
    slots: Vec<Key56>,
    live: usize,
}

impl KeyBatch {
    pub fn new(keys: Vec<Key56>) -> Self {
        let live = keys.len();
        KeyBatch { slots: keys, live }
    }

    /// Pads `keys` with key 0 up to a multiple of `width`.
    pub fn padded(keys: &[Key56], width: usize) -> Self {
        assert!(width > 0);
        let mut slots = keys.to_vec();
        let rem = slots.len() % width;
        if rem != 0 || slots.is_empty() {
            slots.resize(slots.len() + width - rem, Key56::ZERO);
        }
        KeyBatch {
            slots,
            live: keys.len(),
        }
    }

    /// The live (non-padding) keys.
    pub fn keys(&self) -> &[Key56] {
        &self.slots[..self.live]
    }

    pub fn slots(&self) -> &[Key56] {
        &self.slots
    }

    pub fn is_padding(&self, slot: usize) -> bool {
        slot >= self.live
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }
}

/// A DES decryption engine. Implementations hold only immutable tables, so
/// one value can be shared across threads.
pub trait Engine: Send + Sync {
    fn kind(&self) -> EngineKind;

    /// Keys handled per search batch; also bounds cancellation latency.
    fn batch_size(&self) -> usize {
        SCALAR_BATCH
    }

    fn decrypt(&self, c: Block, k: Key56) -> Block;

    /// Decrypts `c` under every live key of `batch`, in order.
    fn decrypt_batch(&self, c: Block, batch: &KeyBatch) -> Vec<Block> {
        batch.keys().iter().map(|&k| self.decrypt(c, k)).collect()
    }

    /// Appends, in ascending order, every key value in `keys` (all `< 2^56`)
    /// under which `ciphertext` decrypts to `plaintext`.
    fn scan(&self, plaintext: Block, ciphertext: Block, keys: Range<u64>, hits: &mut Vec<Key56>) {
        for k in keys {
            let k = Key56::truncating(k);
            if self.decrypt(ciphertext, k) == plaintext {
                hits.push(k);
            }
        }
    }
}

/// One-shot decryption with a freshly built engine.
pub fn engine_decrypt(kind: EngineKind, c: Block, k: Key56) -> Block {
    kind.build().decrypt(c, k)
}

pub fn engine_decrypt_batch(kind: EngineKind, c: Block, batch: &KeyBatch) -> Vec<Block> {
    kind.build().decrypt_batch(c, batch)
}
