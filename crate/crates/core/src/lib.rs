//! DES known-plaintext key search.
//!
//! * [`des`]: bit-exact single-block DES with an observable key schedule.
//! * [`engines`]: rolled, unrolled and bitsliced decryption engines plus a
//!   throughput benchmark.
//! * [`keysearch`]: partitioned, resumable multi-threaded exhaustive search.
//! * [`archsim`]: analytical keys/s and search-time model for search hardware.

pub mod archsim;
pub mod des;
pub mod engines;
pub mod keysearch;

pub use des::{decrypt_block, encrypt_block, Block, Key56, Key64};
pub use engines::{Engine, EngineKind};
pub use keysearch::{
    crack, crack_with, KeyRange, PlainCipherPair, SearchConfig, SearchReport, StopMode,
};
