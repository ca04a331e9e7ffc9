//! Bit-exact DES (FIPS 46).
//!
//! Bit numbering follows the standard: bit 1 of a `w`-bit word is its most
//! significant bit. [`apply_permutation`] is the only place where that
//! numbering is translated to machine bit positions (`w - n`), so every table
//! in [`tables`] can be used exactly as printed.

use std::fmt;
use std::ops::Not;
use std::str::FromStr;

pub mod tables;

const MASK28: u32 = (1 << 28) - 1;
const MASK48: u64 = (1 << 48) - 1;
const MASK56: u64 = (1 << 56) - 1;

/// Error returned when hex text does not describe a block or key.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("expected {expected} hex digits, got {found}")]
    Length { expected: usize, found: usize },
    #[error("invalid hex digit in {0:?}")]
    Digit(String),
    #[error("key value {0:#x} does not fit in 56 bits")]
    KeyRange(u64),
}

fn parse_hex_exact(text: &str, digits: usize) -> Result<u64, ParseError> {
    let text = text.trim();
    if text.len() != digits {
        return Err(ParseError::Length {
            expected: digits,
            found: text.len(),
        });
    }
    if !text.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(ParseError::Digit(text.to_string()));
    }
    u64::from_str_radix(text, 16).map_err(|_| ParseError::Digit(text.to_string()))
}

/// A 64-bit data block (plaintext or ciphertext).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Block(pub u64);

impl Block {
    pub fn from_hex(text: &str) -> Result<Self, ParseError> {
        parse_hex_exact(text, 16).map(Block)
    }

    /// Splits into the (left, right) halves, left being the high word.
    pub fn halves(self) -> (HalfBlock, HalfBlock) {
        (HalfBlock((self.0 >> 32) as u32), HalfBlock(self.0 as u32))
    }

    pub fn from_halves(left: HalfBlock, right: HalfBlock) -> Self {
        Block((u64::from(left.0) << 32) | u64::from(right.0))
    }
}

impl Not for Block {
    type Output = Block;
    fn not(self) -> Block {
        Block(!self.0)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl FromStr for Block {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Block::from_hex(s)
    }
}

/// One 32-bit Feistel half (L_i or R_i).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HalfBlock(pub u32);

/// A key in the 56-bit search space. Always `< 2^56`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Key56(u64);

impl Key56 {
    pub const ZERO: Key56 = Key56(0);
    pub const MAX: Key56 = Key56(MASK56);
    /// Number of distinct keys, 2^56.
    pub const SPACE: u64 = 1 << 56;

    pub fn new(value: u64) -> Result<Self, ParseError> {
        if value > MASK56 {
            Err(ParseError::KeyRange(value))
        } else {
            Ok(Key56(value))
        }
    }

    /// Keeps only the low 56 bits of `value`.
    pub const fn truncating(value: u64) -> Self {
        Key56(value & MASK56)
    }

    pub const fn value(self) -> u64 {
        self.0
    }

    pub fn from_hex(text: &str) -> Result<Self, ParseError> {
        parse_hex_exact(text, 14).map(Key56)
    }

    pub fn to_key64(self) -> Key64 {
        key56_to_key64(self)
    }
}

impl Not for Key56 {
    type Output = Key56;
    fn not(self) -> Key56 {
        Key56(!self.0 & MASK56)
    }
}

impl fmt::Display for Key56 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:014x}", self.0)
    }
}

impl FromStr for Key56 {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Key56::from_hex(s)
    }
}

/// A key in the 64-bit form consumed by PC1; the low bit of every byte is a
/// parity bit that the cipher ignores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Key64(pub u64);

impl Key64 {
    pub fn from_hex(text: &str) -> Result<Self, ParseError> {
        parse_hex_exact(text, 16).map(Key64)
    }

    /// True when every byte has an odd number of set bits.
    pub fn has_odd_parity(self) -> bool {
        self.0.to_be_bytes().iter().all(|b| b.count_ones() % 2 == 1)
    }

    pub fn to_key56(self) -> Key56 {
        key64_to_key56(self)
    }
}

impl fmt::Display for Key64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// The 28-bit C and D registers of the key schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct KeyHalves {
    pub c: u32,
    pub d: u32,
}

impl KeyHalves {
    fn rotate_left(self, amount: u32) -> Self {
        let rot = |x: u32| ((x << amount) | (x >> (28 - amount))) & MASK28;
        KeyHalves {
            c: rot(self.c),
            d: rot(self.d),
        }
    }

    fn joined(self) -> u64 {
        (u64::from(self.c) << 28) | u64::from(self.d)
    }
}

/// A 48-bit round key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SubKey(u64);

impl SubKey {
    pub fn new(value: u64) -> Self {
        assert!(value <= MASK48, "subkey wider than 48 bits: {value:#x}");
        SubKey(value)
    }

    pub const fn value(self) -> u64 {
        self.0
    }
}

/// Sixteen round keys in application order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeySchedule {
    subkeys: [SubKey; 16],
}

impl KeySchedule {
    pub fn from_subkeys(subkeys: [SubKey; 16]) -> Self {
        KeySchedule { subkeys }
    }

    pub fn subkeys(&self) -> &[SubKey; 16] {
        &self.subkeys
    }

    /// Round key K_i for `round` in `1..=16`.
    pub fn round(&self, round: usize) -> SubKey {
        self.subkeys[round - 1]
    }

    pub fn reversed(&self) -> KeySchedule {
        reverse_schedule(self)
    }
}

/// A FIPS permutation/selection table: 1-based source positions, MSB first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationTable(&'static [u8]);

impl PermutationTable {
    pub const IP: PermutationTable = PermutationTable(&tables::IP);
    pub const FP: PermutationTable = PermutationTable(&tables::FP);
    pub const E: PermutationTable = PermutationTable(&tables::E);
    pub const P: PermutationTable = PermutationTable(&tables::P);
    pub const PC1: PermutationTable = PermutationTable(&tables::PC1);
    pub const PC2: PermutationTable = PermutationTable(&tables::PC2);

    pub const fn new(entries: &'static [u8]) -> Self {
        PermutationTable(entries)
    }

    pub fn entries(&self) -> &'static [u8] {
        self.0
    }

    /// Output width in bits.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Builds a word whose bit `j` (1-based from the MSB of a `table.len()`-bit
/// word) is bit `table[j]` of `input`, itself numbered 1-based from the MSB of
/// an `input_width`-bit word.
///
/// Panics if a table entry falls outside `1..=input_width`; tables are
/// compile-time constants, so that is a programming error.
pub fn apply_permutation(table: PermutationTable, input: u64, input_width: u32) -> u64 {
    assert!(input_width <= 64 && table.len() <= 64);
    debug_assert!(input_width == 64 || input >> input_width == 0);
    table.entries().iter().fold(0u64, |acc, &src| {
        let src = u32::from(src);
        assert!(
            (1..=input_width).contains(&src),
            "table entry {src} outside 1..={input_width}"
        );
        (acc << 1) | ((input >> (input_width - src)) & 1)
    })
}

pub fn initial_permutation(block: Block) -> Block {
    Block(apply_permutation(PermutationTable::IP, block.0, 64))
}

pub fn final_permutation(block: Block) -> Block {
    Block(apply_permutation(PermutationTable::FP, block.0, 64))
}

/// E expansion of a half block to 48 bits.
pub fn expand(r: HalfBlock) -> u64 {
    apply_permutation(PermutationTable::E, u64::from(r.0), 32)
}

/// Looks up a single 6-bit group in S-box `index` (0-based: 0 is S1).
pub fn sbox_lookup(index: usize, six_bits: u8) -> u8 {
    let row = ((six_bits >> 4) & 0b10) | (six_bits & 1);
    let col = (six_bits >> 1) & 0xf;
    tables::SBOXES[index][usize::from(row)][usize::from(col)]
}

/// Runs the eight S-boxes over a 48-bit word.
pub fn sbox_substitute(x: u64) -> HalfBlock {
    debug_assert!(x <= MASK48);
    let out = (0..8).fold(0u32, |acc, i| {
        let group = ((x >> (42 - 6 * i)) & 0x3f) as u8;
        (acc << 4) | u32::from(sbox_lookup(i, group))
    });
    HalfBlock(out)
}

/// The DES round function f(R, K).
pub fn round_function_f(r: HalfBlock, k: SubKey) -> HalfBlock {
    let mixed = expand(r) ^ k.0;
    let substituted = sbox_substitute(mixed);
    HalfBlock(apply_permutation(PermutationTable::P, u64::from(substituted.0), 32) as u32)
}

fn odd_parity_byte(seven_bits: u8) -> u8 {
    let b = seven_bits << 1;
    b | u8::from(b.count_ones().is_multiple_of(2))
}

/// Spreads 56 key bits over eight bytes (seven data bits each, high end
/// first) and sets each byte's low bit for odd parity.
pub fn key56_to_key64(k: Key56) -> Key64 {
    let bytes: [u8; 8] = std::array::from_fn(|i| {
        let seven = ((k.0 >> (49 - 7 * i)) & 0x7f) as u8;
        odd_parity_byte(seven)
    });
    Key64(u64::from_be_bytes(bytes))
}

/// Drops the parity bit of every byte. Parity is not checked.
pub fn key64_to_key56(k: Key64) -> Key56 {
    let value =
        k.0.to_be_bytes()
            .iter()
            .fold(0u64, |acc, &b| (acc << 7) | u64::from(b >> 1));
    Key56(value)
}

/// PC1 split into the C and D registers.
pub fn permuted_choice_1(k: Key64) -> KeyHalves {
    let cd = apply_permutation(PermutationTable::PC1, k.0, 64);
    KeyHalves {
        c: (cd >> 28) as u32,
        d: (cd as u32) & MASK28,
    }
}

pub fn permuted_choice_2(halves: KeyHalves) -> SubKey {
    SubKey(apply_permutation(
        PermutationTable::PC2,
        halves.joined(),
        56,
    ))
}

/// Derives the schedule along with C_i/D_i for i = 0..=16.
pub fn key_schedule_trace(k: Key64) -> (KeySchedule, [KeyHalves; 17]) {
    let mut halves = [KeyHalves::default(); 17];
    halves[0] = permuted_choice_1(k);
    let mut subkeys = [SubKey::default(); 16];
    for (round, &amount) in tables::ROTATIONS.iter().enumerate() {
        halves[round + 1] = halves[round].rotate_left(u32::from(amount));
        subkeys[round] = permuted_choice_2(halves[round + 1]);
    }
    (KeySchedule { subkeys }, halves)
}

pub fn key_schedule(k: Key64) -> KeySchedule {
    key_schedule_trace(k).0
}

/// Subkey i of the result is subkey 17 - i of the input.
pub fn reverse_schedule(s: &KeySchedule) -> KeySchedule {
    let mut subkeys = s.subkeys;
    subkeys.reverse();
    KeySchedule { subkeys }
}

/// Per-round Feistel state: entry 0 is (L0, R0) right after IP, entry i is
/// (L_i, R_i) after round i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTrace {
    pub rounds: [(HalfBlock, HalfBlock); 17],
    pub output: Block,
}

/// Runs the full datapath (IP, sixteen rounds, swap, FP) with the given
/// subkey order, recording every intermediate half.
pub fn trace_block(input: Block, schedule: &KeySchedule) -> RoundTrace {
    let mut rounds = [(HalfBlock(0), HalfBlock(0)); 17];
    let (mut left, mut right) = initial_permutation(input).halves();
    rounds[0] = (left, right);
    for (i, &k) in schedule.subkeys.iter().enumerate() {
        let next_right = HalfBlock(left.0 ^ round_function_f(right, k).0);
        left = right;
        right = next_right;
        rounds[i + 1] = (left, right);
    }
    let output = final_permutation(Block::from_halves(right, left));
    RoundTrace { rounds, output }
}

pub fn crypt_block(input: Block, schedule: &KeySchedule) -> Block {
    let (mut left, mut right) = initial_permutation(input).halves();
    for &k in &schedule.subkeys {
        let next_right = HalfBlock(left.0 ^ round_function_f(right, k).0);
        left = right;
        right = next_right;
    }
    final_permutation(Block::from_halves(right, left))
}

pub fn encrypt_block(p: Block, k: Key56) -> Block {
    crypt_block(p, &key_schedule(key56_to_key64(k)))
}

pub fn decrypt_block(c: Block, k: Key56) -> Block {
    crypt_block(c, &reverse_schedule(&key_schedule(key56_to_key64(k))))
}

/// Encryption under a 64-bit key; parity bits are ignored.
pub fn encrypt_block64(p: Block, k: Key64) -> Block {
    crypt_block(p, &key_schedule(k))
}

pub fn decrypt_block64(c: Block, k: Key64) -> Block {
    crypt_block(c, &reverse_schedule(&key_schedule(k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLASSIC_KEY: Key64 = Key64(0x1334_5779_9BBC_DFF1);
    const CLASSIC_PLAIN: Block = Block(0x0123_4567_89AB_CDEF);

    #[test]
    fn initial_permutation_of_classic_plaintext() {
        let permuted = initial_permutation(CLASSIC_PLAIN);
        assert_eq!(permuted, Block(0xCC00_CCFF_F0AA_F0AA));
        assert_eq!(
            permuted.halves(),
            (HalfBlock(0xCC00_CCFF), HalfBlock(0xF0AA_F0AA))
        );
    }

    #[test]
    fn identity_table() {
        static IDENT: [u8; 64] = {
            let mut t = [0u8; 64];
            let mut i = 0;
            while i < 64 {
                t[i] = i as u8 + 1;
                i += 1;
            }
            t
        };
        let table = PermutationTable::new(&IDENT);
        for x in [0, 1, u64::MAX, 0x0123_4567_89AB_CDEF] {
            assert_eq!(apply_permutation(table, x, 64), x);
        }
    }

    #[test]
    #[should_panic(expected = "outside")]
    fn out_of_range_entry_panics() {
        apply_permutation(PermutationTable::IP, 0xff, 32);
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(expand(HalfBlock(0xF0AA_F0AA)), 0x7A15_557A_1555);
        assert_eq!(expand(HalfBlock(0)), 0);
        assert_eq!(expand(HalfBlock(u32::MAX)), MASK48);
    }

    #[test]
    fn sbox_examples() {
        assert_eq!(sbox_lookup(0, 0b011011), 0b0101);
        let corners = (0..8).fold(0u32, |acc, i| {
            (acc << 4) | u32::from(tables::SBOXES[i][0][0])
        });
        assert_eq!(sbox_substitute(0), HalfBlock(corners));
        assert_eq!(corners, 0xEFA7_2C4D);
    }

    #[test]
    fn round_function_examples() {
        let r = HalfBlock(0xF0AA_F0AA);
        assert_eq!(
            round_function_f(r, SubKey::new(0x1B02_EFFC_7072)),
            HalfBlock(0x234A_A9BB)
        );
        let cancel = SubKey::new(expand(r));
        let expected = apply_permutation(PermutationTable::P, u64::from(sbox_substitute(0).0), 32);
        assert_eq!(round_function_f(r, cancel).0 as u64, expected);
    }

    #[test]
    fn key_packing() {
        assert_eq!(key56_to_key64(Key56::ZERO), Key64(0x0101_0101_0101_0101));
        let star = key64_to_key56(CLASSIC_KEY);
        assert!(CLASSIC_KEY.has_odd_parity());
        assert_eq!(key56_to_key64(star), CLASSIC_KEY);
        // parity bits are ignored on the way down
        assert_eq!(
            key64_to_key56(Key64(CLASSIC_KEY.0 ^ 0x0101_0101_0101_0101)),
            star
        );
        assert!(!Key64(0).has_odd_parity());
    }

    #[test]
    fn classic_schedule() {
        let (schedule, halves) = key_schedule_trace(CLASSIC_KEY);
        assert_eq!(schedule.round(1), SubKey::new(0x1B02_EFFC_7072));
        assert_eq!(
            halves[0],
            KeyHalves {
                c: 0xF0C_CAAF,
                d: 0x556_678F
            }
        );
        assert_eq!(halves[16], halves[0]);
        assert_eq!(schedule.reversed().round(16), SubKey::new(0x1B02_EFFC_7072));
    }

    #[test]
    fn zero_key_schedule_is_all_zero() {
        let schedule = key_schedule(Key64(0));
        assert!(schedule.subkeys().iter().all(|k| k.value() == 0));
        assert_eq!(reverse_schedule(&schedule), schedule);
    }

    #[test]
    fn classic_vector() {
        let star = key64_to_key56(CLASSIC_KEY);
        assert_eq!(
            encrypt_block(CLASSIC_PLAIN, star),
            Block(0x85E8_1354_0F0A_B405)
        );
        assert_eq!(
            decrypt_block(Block(0x85E8_1354_0F0A_B405), star),
            CLASSIC_PLAIN
        );
        assert_eq!(
            encrypt_block64(CLASSIC_PLAIN, CLASSIC_KEY),
            Block(0x85E8_1354_0F0A_B405)
        );
    }

    #[test]
    fn trace_matches_crypt() {
        let schedule = key_schedule(CLASSIC_KEY);
        let trace = trace_block(CLASSIC_PLAIN, &schedule);
        assert_eq!(trace.output, crypt_block(CLASSIC_PLAIN, &schedule));
        assert_eq!(
            trace.rounds[0],
            (HalfBlock(0xCC00_CCFF), HalfBlock(0xF0AA_F0AA))
        );
        // L1 = R0, R1 = L0 ^ f(R0, K1)
        assert_eq!(
            trace.rounds[1],
            (HalfBlock(0xF0AA_F0AA), HalfBlock(0xCC00_CCFF ^ 0x234A_A9BB))
        );
    }

    #[test]
    fn hex_conventions() {
        assert_eq!(
            Block::from_hex("85E813540f0ab405").unwrap().to_string(),
            "85e813540f0ab405"
        );
        assert_eq!(
            Key56::from_hex("F0000000000011").unwrap().to_string(),
            "f0000000000011"
        );
        assert_eq!(
            Key56::from_hex("0000000000001"),
            Err(ParseError::Length {
                expected: 14,
                found: 13
            })
        );
        assert!(matches!(
            Block::from_hex("0123456789abcdeg"),
            Err(ParseError::Digit(_))
        ));
        assert!(matches!(
            Block::from_hex("+123456789abcdef"),
            Err(ParseError::Digit(_))
        ));
        assert!(Key56::new(1 << 56).is_err());
        assert_eq!(Key64::from_hex("133457799bbcdff1").unwrap(), CLASSIC_KEY);
    }
}
