use crate::des::{self, Block, Key56};

use super::{Engine, EngineKind};

/// The reference datapath: derive the schedule, reverse it, and loop the
/// single round routine sixteen times.
#[derive(Debug, Clone, Copy, Default)]
pub struct RolledEngine;

impl Engine for RolledEngine {
    fn kind(&self) -> EngineKind {
        EngineKind::Rolled
    }

    fn decrypt(&self, c: Block, k: Key56) -> Block {
        des::decrypt_block(c, k)
    }
}
