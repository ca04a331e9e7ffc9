use descrack::archsim::{expected_search_time, keys_per_second, HardwareModel};
use proptest::prelude::*;

fn model() -> impl Strategy<Value = HardwareModel> {
    (
        1u32..200,
        1u32..1024,
        1e6f64..1e9,
        1u32..32,
        1u32..64,
        40u32..80,
    )
        .prop_map(
            |(
                fpga_count,
                instances_per_fpga,
                clock_hz,
                cycles_per_key,
                cycles_per_block,
                keyspace_bits,
            )| HardwareModel {
                fpga_count,
                instances_per_fpga,
                clock_hz,
                cycles_per_key,
                cycles_per_block,
                keyspace_bits,
            },
        )
}

fn expected(m: &HardwareModel) -> f64 {
    expected_search_time(m, 0.5).unwrap().expected_seconds
}

proptest! {
    #[test]
    fn n_fold_speedup(m in model(), factor in 1u32..64) {
        let mut scaled = m;
        scaled.instances_per_fpga *= factor;
        let ratio = expected(&m) / expected(&scaled);
        prop_assert!((ratio - f64::from(factor)).abs() <= 1e-12 * f64::from(factor));
    }

    #[test]
    fn monotone_in_every_parameter(m in model()) {
        let base = expected(&m);
        let mut faster = m;
        faster.clock_hz *= 1.01;
        prop_assert!(expected(&faster) < base);
        let mut wider = m;
        wider.instances_per_fpga += 1;
        prop_assert!(expected(&wider) < base);
        let mut slower = m;
        slower.cycles_per_key += 1;
        prop_assert!(expected(&slower) > base);
        let mut bigger = m;
        bigger.keyspace_bits += 1;
        prop_assert!(expected(&bigger) > base);
    }

    #[test]
    fn dimensionally_consistent(m in model(), fraction in 0.001f64..=1.0) {
        let est = expected_search_time(&m, fraction).unwrap();
        let keyspace = 2f64.powi(m.keyspace_bits as i32);
        prop_assert!(((keys_per_second(&m) * est.worst_case_seconds - keyspace) / keyspace).abs() < 1e-12);
        prop_assert!((est.expected_seconds - est.worst_case_seconds * fraction).abs() <= 1e-12 * est.expected_seconds);
        prop_assert!((est.expected_days - est.expected_seconds / 86_400.0).abs() <= 1e-12 * est.expected_days);
    }
}
