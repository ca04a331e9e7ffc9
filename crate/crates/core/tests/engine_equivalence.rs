use descrack::des::{self, Block, Key56};
use descrack::engines::{self, EngineKind, KeyBatch, WIDTH};
use proptest::prelude::*;

fn key56() -> impl Strategy<Value = Key56> {
    (0u64..Key56::SPACE).prop_map(Key56::truncating)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn all_engines_agree(c: u64, k in key56()) {
        let expected = des::decrypt_block(Block(c), k);
        for kind in EngineKind::ALL {
            prop_assert_eq!(engines::engine_decrypt(kind, Block(c), k), expected);
        }
    }

    #[test]
    fn batch_equals_scalar_map(c: u64, keys in prop::collection::vec(key56(), 0..200)) {
        let expected: Vec<Block> = keys.iter().map(|&k| des::decrypt_block(Block(c), k)).collect();
        let batch = KeyBatch::new(keys);
        for kind in EngineKind::ALL {
            prop_assert_eq!(engines::engine_decrypt_batch(kind, Block(c), &batch), expected.clone());
        }
    }

    #[test]
    fn slicing_round_trips(keys in prop::collection::vec(key56(), 0..=WIDTH)) {
        let planes = engines::slice_keys(&keys);
        prop_assert_eq!(engines::unslice_keys(&planes, keys.len()), keys);
    }

    #[test]
    fn scan_agrees_with_reference(p: u64, start in 0u64..Key56::SPACE - 4096, len in 0u64..300, offset in 0u64..300) {
        // plant the key inside or just outside the window
        let key = Key56::truncating(start + offset);
        let c = des::encrypt_block(Block(p), key);
        let window = start..start + len;
        let expected: Vec<Key56> = if window.contains(&key.value()) { vec![key] } else { vec![] };
        for kind in [EngineKind::Unrolled, EngineKind::Bitsliced] {
            let mut hits = Vec::new();
            kind.build().scan(Block(p), c, window.clone(), &mut hits);
            prop_assert_eq!(&hits, &expected);
        }
    }
}

#[test]
fn many_random_inputs_agree() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xE9);
    let engines: Vec<_> = EngineKind::ALL.iter().map(|k| k.build()).collect();
    for _ in 0..10_000 {
        let c = Block(rng.gen());
        let k = Key56::truncating(rng.gen());
        let expected = engines[0].decrypt(c, k);
        for e in &engines[1..] {
            assert_eq!(e.decrypt(c, k), expected, "{} c={c} k={k}", e.kind());
        }
    }
}
