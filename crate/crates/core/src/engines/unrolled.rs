use std::ops::Range;

use crate::des::{self, tables, Block, Key56, PermutationTable};

use super::{Engine, EngineKind};

const MASK28: u32 = (1 << 28) - 1;

/// Byte-indexed lookup for a bit-selection over a `BYTES * 8`-bit input.
/// Since a selection only moves bits, the image of a word is the OR of the
/// images of its bytes.
struct ByteLut<const BYTES: usize> {
    table: Box<[[u64; 256]; BYTES]>,
}

impl<const BYTES: usize> ByteLut<BYTES> {
    fn build(select: impl Fn(u64) -> u64) -> Self {
        let mut table = Box::new([[0u64; 256]; BYTES]);
        for (byte, row) in table.iter_mut().enumerate() {
            let shift = 8 * (BYTES - 1 - byte);
            for (value, slot) in row.iter_mut().enumerate() {
                *slot = select((value as u64) << shift);
            }
        }
        ByteLut { table }
    }

    #[inline(always)]
    fn apply(&self, x: u64) -> u64 {
        let mut out = 0;
        for byte in 0..BYTES {
            let shift = 8 * (BYTES - 1 - byte);
            out |= self.table[byte][((x >> shift) & 0xff) as usize];
        }
        out
    }
}

/// Sixteen inlined rounds over fused E/S/P tables ("SP tables").
pub struct UnrolledEngine {
    sp: [[u32; 64]; 8],
    ip: ByteLut<8>,
    fp: ByteLut<8>,
    pc1: ByteLut<7>,
    pc2: ByteLut<7>,
}

impl Default for UnrolledEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl UnrolledEngine {
    pub fn new() -> Self {
        let mut sp = [[0u32; 64]; 8];
        for (s, table) in sp.iter_mut().enumerate() {
            for (x, slot) in table.iter_mut().enumerate() {
                let nibble = u64::from(des::sbox_lookup(s, x as u8)) << (28 - 4 * s);
                *slot = des::apply_permutation(PermutationTable::P, nibble, 32) as u32;
            }
        }
        UnrolledEngine {
            sp,
            ip: ByteLut::build(|x| des::apply_permutation(PermutationTable::IP, x, 64)),
            fp: ByteLut::build(|x| des::apply_permutation(PermutationTable::FP, x, 64)),
            // PC1 never reads parity bits, so packing + PC1 is a plain selection
            pc1: ByteLut::build(|x| {
                let k64 = des::key56_to_key64(Key56::truncating(x));
                des::apply_permutation(PermutationTable::PC1, k64.0, 64)
            }),
            pc2: ByteLut::build(|x| des::apply_permutation(PermutationTable::PC2, x, 56)),
        }
    }

    #[inline(always)]
    fn f(&self, r: u32, k: u64) -> u32 {
        let sp = &self.sp;
        let idx =
            |rot: u32, shift: u32| ((u64::from(r.rotate_right(rot)) ^ (k >> shift)) & 63) as usize;
        sp[0][idx(27, 42)]
            ^ sp[1][idx(23, 36)]
            ^ sp[2][idx(19, 30)]
            ^ sp[3][idx(15, 24)]
            ^ sp[4][idx(11, 18)]
            ^ sp[5][idx(7, 12)]
            ^ sp[6][idx(3, 6)]
            ^ sp[7][idx(31, 0)]
    }

    #[inline(always)]
    fn subkeys(&self, k: Key56) -> [u64; 16] {
        let cd = self.pc1.apply(k.value());
        let mut c = (cd >> 28) as u32;
        let mut d = cd as u32 & MASK28;
        let mut ks = [0u64; 16];
        for (slot, &amount) in ks.iter_mut().zip(tables::ROTATIONS.iter()) {
            let amount = u32::from(amount);
            c = ((c << amount) | (c >> (28 - amount))) & MASK28;
            d = ((d << amount) | (d >> (28 - amount))) & MASK28;
            *slot = self.pc2.apply((u64::from(c) << 28) | u64::from(d));
        }
        ks
    }

    /// Sixteen rounds with the subkeys applied last to first. Takes the IP
    /// output and returns the pre-FP word R16 || L16.
    #[inline(always)]
    fn decrypt_rounds(&self, permuted: u64, ks: &[u64; 16]) -> u64 {
        let mut l = (permuted >> 32) as u32;
        let mut r = permuted as u32;
        macro_rules! pair {
            ($a:expr, $b:expr) => {
                l ^= self.f(r, ks[$a]);
                r ^= self.f(l, ks[$b]);
            };
        }
        pair!(15, 14);
        pair!(13, 12);
        pair!(11, 10);
        pair!(9, 8);
        pair!(7, 6);
        pair!(5, 4);
        pair!(3, 2);
        pair!(1, 0);
        (u64::from(r) << 32) | u64::from(l)
    }
}

impl Engine for UnrolledEngine {
    fn kind(&self) -> EngineKind {
        EngineKind::Unrolled
    }

    fn decrypt(&self, c: Block, k: Key56) -> Block {
        let ks = self.subkeys(k);
        Block(self.fp.apply(self.decrypt_rounds(self.ip.apply(c.0), &ks)))
    }

    fn scan(&self, plaintext: Block, ciphertext: Block, keys: Range<u64>, hits: &mut Vec<Key56>) {
        // FP(x) == p  <=>  x == IP(p), so neither permutation runs per key
        let start = self.ip.apply(ciphertext.0);
        let target = self.ip.apply(plaintext.0);
        for k in keys {
            let k = Key56::truncating(k);
            if self.decrypt_rounds(start, &self.subkeys(k)) == target {
                hits.push(k);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_permutations_match_reference() {
        let engine = UnrolledEngine::new();
        for x in [
            0u64,
            1,
            0x0123_4567_89AB_CDEF,
            u64::MAX,
            0x8000_0000_0000_0001,
        ] {
            assert_eq!(engine.ip.apply(x), des::initial_permutation(Block(x)).0);
            assert_eq!(engine.fp.apply(x), des::final_permutation(Block(x)).0);
        }
    }

    #[test]
    fn fast_schedule_matches_reference() {
        let engine = UnrolledEngine::new();
        for raw in [
            0u64,
            1,
            0x00FF_FF00_0000_0000,
            (1 << 56) - 1,
            0x0012_3456_789A_BCDE,
        ] {
            let k = Key56::truncating(raw);
            let reference = des::key_schedule(k.to_key64());
            let fast = engine.subkeys(k);
            for (a, b) in reference.subkeys().iter().zip(fast.iter()) {
                assert_eq!(a.value(), *b);
            }
        }
    }

    #[test]
    fn sp_table_matches_round_function() {
        let engine = UnrolledEngine::new();
        for (r, k) in [
            (0xF0AA_F0AAu32, 0x1B02_EFFC_7072u64),
            (0, 0),
            (u32::MAX, 0xFFFF_FFFF_FFFF),
        ] {
            let expected = des::round_function_f(des::HalfBlock(r), des::SubKey::new(k)).0;
            assert_eq!(engine.f(r, k), expected);
        }
    }
}
