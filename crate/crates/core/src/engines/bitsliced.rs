//! Bitsliced DES: bit lane `i` of every word belongs to key `i`, so one pass
//! over the cipher tries [`WIDTH`] keys.
//!
//! Plane layout follows FIPS numbering: plane `j` of a data block holds bit
//! `j + 1` (MSB first). Key planes are indexed by machine bit of the
//! [`Key56`] value, so subkey bits are just references to key planes and the
//! key schedule costs nothing per key.

use std::ops::Range;

use crate::des::{tables, Block, Key56};

use super::{Engine, EngineKind, KeyBatch};

mod circuits {
    include!(concat!(env!("OUT_DIR"), "/sbox_circuits.rs"));
}

/// Keys per bitsliced pass (bits in a `u64`).
pub const WIDTH: usize = 64;

type HalfPlanes = [u64; 32];

const fn zero_based<const N: usize>(table: &[u8; N]) -> [usize; N] {
    let mut out = [0usize; N];
    let mut i = 0;
    while i < N {
        out[i] = table[i] as usize - 1;
        i += 1;
    }
    out
}

const E_SRC: [usize; 48] = zero_based(&tables::E);
const FP_SRC: [usize; 64] = zero_based(&tables::FP);

/// Destination of each S-box output bit after P.
const P_DEST: [usize; 32] = {
    let mut out = [0usize; 32];
    let mut j = 0;
    while j < 32 {
        out[tables::P[j] as usize - 1] = j;
        j += 1;
    }
    out
};

/// Lane patterns for the low six key bits when lane `i` holds `base + i`.
const LANE_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

#[inline(always)]
fn broadcast(bit: u64) -> u64 {
    0u64.wrapping_sub(bit & 1)
}

/// In-place 64x64 bit-matrix transpose: afterwards bit `j` of `rows[i]` is
/// what bit `i` of `rows[j]` was.
pub fn transpose64(rows: &mut [u64; 64]) {
    let mut width = 32;
    let mut mask = 0x0000_0000_FFFF_FFFFu64;
    while width != 0 {
        let mut k = 0;
        while k < 64 {
            let t = ((rows[k] >> width) ^ rows[k + width]) & mask;
            rows[k] ^= t << width;
            rows[k + width] ^= t;
            k = (k + width + 1) & !width;
        }
        width >>= 1;
        mask ^= mask << width;
    }
}

/// Transposes up to [`WIDTH`] keys into 56 bit planes.
pub fn slice_keys(keys: &[Key56]) -> [u64; 56] {
    assert!(keys.len() <= WIDTH);
    let mut rows = [0u64; 64];
    for (row, key) in rows.iter_mut().zip(keys) {
        *row = key.value();
    }
    transpose64(&mut rows);
    rows[..56].try_into().unwrap()
}

/// Inverse of [`slice_keys`] for the first `lanes` lanes.
pub fn unslice_keys(planes: &[u64; 56], lanes: usize) -> Vec<Key56> {
    assert!(lanes <= WIDTH);
    let mut rows = [0u64; 64];
    rows[..56].copy_from_slice(planes);
    transpose64(&mut rows);
    rows[..lanes]
        .iter()
        .map(|&v| Key56::truncating(v))
        .collect()
}

fn consecutive_key_planes(base: u64) -> [u64; 56] {
    debug_assert_eq!(base % WIDTH as u64, 0);
    let mut planes = [0u64; 56];
    planes[..6].copy_from_slice(&LANE_PATTERNS);
    for (bit, plane) in planes.iter_mut().enumerate().skip(6) {
        *plane = broadcast(base >> bit);
    }
    planes
}

fn block_planes(block: u64) -> [u64; 64] {
    std::array::from_fn(|j| broadcast(block >> (63 - j)))
}

pub struct BitslicedEngine {
    /// `key_bits[i][j]`: key plane feeding bit `j` (MSB first) of K_{i+1}.
    key_bits: [[u8; 48]; 16],
    ip_lut: [u64; 64],
}

impl Default for BitslicedEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl BitslicedEngine {
    pub fn new() -> Self {
        // C||D register contents as Key56 bit indices
        let mut cd: [u8; 56] = std::array::from_fn(|pos| {
            let src = usize::from(tables::PC1[pos]) - 1;
            let (byte, offset) = (src / 8, src % 8);
            assert!(offset < 7, "PC1 selects a parity bit");
            (55 - (7 * byte + offset)) as u8
        });
        let mut key_bits = [[0u8; 48]; 16];
        for (round, &amount) in tables::ROTATIONS.iter().enumerate() {
            cd[..28].rotate_left(usize::from(amount));
            cd[28..].rotate_left(usize::from(amount));
            for (j, &src) in tables::PC2.iter().enumerate() {
                key_bits[round][j] = cd[usize::from(src) - 1];
            }
        }
        let ip_lut = std::array::from_fn(|j| 1u64 << (64 - u32::from(tables::IP[j])));
        BitslicedEngine { key_bits, ip_lut }
    }

    fn ip(&self, x: u64) -> u64 {
        self.ip_lut
            .iter()
            .fold(0u64, |acc, &mask| (acc << 1) | u64::from(x & mask != 0))
    }

    /// `l ^= P(S(E(r) ^ K))` for the subkey whose bit sources are `kb`.
    #[inline(always)]
    fn round(l: &mut HalfPlanes, r: &HalfPlanes, keys: &[u64; 56], kb: &[u8; 48]) {
        macro_rules! sbox {
            ($s:expr, $circuit:path) => {{
                let b = 6 * $s;
                let x = |m: usize| r[E_SRC[b + m]] ^ keys[kb[b + m] as usize];
                let out = $circuit(x(0), x(1), x(2), x(3), x(4), x(5));
                l[P_DEST[4 * $s]] ^= out[0];
                l[P_DEST[4 * $s + 1]] ^= out[1];
                l[P_DEST[4 * $s + 2]] ^= out[2];
                l[P_DEST[4 * $s + 3]] ^= out[3];
            }};
        }
        sbox!(0, circuits::s1);
        sbox!(1, circuits::s2);
        sbox!(2, circuits::s3);
        sbox!(3, circuits::s4);
        sbox!(4, circuits::s5);
        sbox!(5, circuits::s6);
        sbox!(6, circuits::s7);
        sbox!(7, circuits::s8);
    }

    /// Sixteen decryption rounds over the IP output; returns (R16, L16).
    fn decrypt_rounds(&self, permuted: &[u64; 64], keys: &[u64; 56]) -> (HalfPlanes, HalfPlanes) {
        let mut l: HalfPlanes = permuted[..32].try_into().unwrap();
        let mut r: HalfPlanes = permuted[32..].try_into().unwrap();
        for pair in (0..8).rev() {
            Self::round(&mut l, &r, keys, &self.key_bits[2 * pair + 1]);
            Self::round(&mut r, &l, keys, &self.key_bits[2 * pair]);
        }
        (r, l)
    }

    fn decrypt_word(&self, c: Block, keys: &[Key56]) -> Vec<Block> {
        let planes = slice_keys(keys);
        let (r, l) = self.decrypt_rounds(&block_planes(self.ip(c.0)), &planes);
        let pre: [u64; 64] = std::array::from_fn(|j| if j < 32 { r[j] } else { l[j - 32] });
        // row 63 - j holds output bit j so that the transpose yields
        // MSB-first blocks
        let mut rows = [0u64; 64];
        for (j, &src) in FP_SRC.iter().enumerate() {
            rows[63 - j] = pre[src];
        }
        transpose64(&mut rows);
        rows[..keys.len()].iter().map(|&v| Block(v)).collect()
    }
}

impl Engine for BitslicedEngine {
    fn kind(&self) -> EngineKind {
        EngineKind::Bitsliced
    }

    fn batch_size(&self) -> usize {
        WIDTH
    }

    fn decrypt(&self, c: Block, k: Key56) -> Block {
        self.decrypt_word(c, &[k])[0]
    }

    fn decrypt_batch(&self, c: Block, batch: &KeyBatch) -> Vec<Block> {
        batch
            .keys()
            .chunks(WIDTH)
            .flat_map(|chunk| self.decrypt_word(c, chunk))
            .collect()
    }

    fn scan(&self, plaintext: Block, ciphertext: Block, keys: Range<u64>, hits: &mut Vec<Key56>) {
        if keys.is_empty() {
            return;
        }
        let start = block_planes(self.ip(ciphertext.0));
        // FP(x) == p  <=>  x == IP(p)
        let target = block_planes(self.ip(plaintext.0));
        let width = WIDTH as u64;
        let mut base = keys.start - keys.start % width;
        while base < keys.end {
            let lo = keys.start.saturating_sub(base);
            let hi = (keys.end - base).min(width);
            let valid = if hi - lo == width {
                u64::MAX
            } else {
                ((1u64 << (hi - lo)) - 1) << lo
            };
            let (r, l) = self.decrypt_rounds(&start, &consecutive_key_planes(base));
            let mut equal = valid;
            for (j, plane) in r.iter().chain(l.iter()).enumerate() {
                equal &= !(plane ^ target[j]);
            }
            while equal != 0 {
                let lane = u64::from(equal.trailing_zeros());
                hits.push(Key56::truncating(base + lane));
                equal &= equal - 1;
            }
            base += width;
        }
    }
}
