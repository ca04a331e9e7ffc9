//! Analytical throughput and search-time model for key-search hardware.
//!
//! A machine is `fpga_count` devices, each holding `instances_per_fpga`
//! independent search engines clocked at `clock_hz`. An engine accepts a new
//! key every `cycles_per_key` cycles (1 when fully pipelined) and has a block
//! latency of `cycles_per_block` cycles, which sets its datapath throughput.

use thiserror::Error;

/// Cycles per block that reproduce the published rolled/unrolled datapath
/// throughputs from their clock frequencies.
pub const CALIBRATED_CYCLES_PER_BLOCK: u32 = 18;

pub const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("clock frequency must be positive and finite, got {0} Hz")]
    Clock(f64),
    #[error("keyspace of {0} bits is outside 1..=128")]
    Keyspace(u32),
    #[error("search fraction must lie in (0, 1], got {0}")]
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardwareModel {
    pub fpga_count: u32,
    pub instances_per_fpga: u32,
    pub clock_hz: f64,
    pub cycles_per_key: u32,
    pub cycles_per_block: u32,
    pub keyspace_bits: u32,
}

impl HardwareModel {
    /// A validated model with one cycle per key, the calibrated block
    /// latency and a 56-bit keyspace.
    pub fn new(
        fpga_count: u32,
        instances_per_fpga: u32,
        clock_hz: f64,
    ) -> Result<Self, ModelError> {
        let model = HardwareModel {
            fpga_count,
            instances_per_fpga,
            clock_hz,
            cycles_per_key: 1,
            cycles_per_block: CALIBRATED_CYCLES_PER_BLOCK,
            keyspace_bits: 56,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (value, name) in [
            (self.fpga_count, "fpga_count"),
            (self.instances_per_fpga, "instances_per_fpga"),
            (self.cycles_per_key, "cycles_per_key"),
            (self.cycles_per_block, "cycles_per_block"),
        ] {
            if value == 0 {
                return Err(ModelError::ZeroCount(name));
            }
        }
        if !(self.clock_hz > 0.0 && self.clock_hz.is_finite()) {
            return Err(ModelError::Clock(self.clock_hz));
        }
        if !(1..=128).contains(&self.keyspace_bits) {
            return Err(ModelError::Keyspace(self.keyspace_bits));
        }
        Ok(())
    }

    /// Total engines across all devices.
    pub fn instances(&self) -> u64 {
        u64::from(self.fpga_count) * u64::from(self.instances_per_fpga)
    }

    /// 2^keyspace_bits as a float (exact for every allowed width).
    pub fn keyspace(&self) -> f64 {
        2f64.powi(self.keyspace_bits as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub keys_per_second: f64,
    pub expected_seconds: f64,
    pub expected_days: f64,
    pub worst_case_seconds: f64,
}

impl CostEstimate {
    pub fn worst_case_days(&self) -> f64 {
        self.worst_case_seconds / SECONDS_PER_DAY
    }
}

/// Keys tested per second by the whole machine.
pub fn keys_per_second(m: &HardwareModel) -> f64 {
    m.instances() as f64 * m.clock_hz / f64::from(m.cycles_per_key)
}

/// Time to search `fraction` of the keyspace (0.5 is the average case).
pub fn expected_search_time(m: &HardwareModel, fraction: f64) -> Result<CostEstimate, ModelError> {
    m.validate()?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(ModelError::Fraction(fraction));
    }
    let rate = keys_per_second(m);
    let worst_case_seconds = m.keyspace() / rate;
    let expected_seconds = worst_case_seconds * fraction;
    Ok(CostEstimate {
        keys_per_second: rate,
        expected_seconds,
        expected_days: expected_seconds / SECONDS_PER_DAY,
        worst_case_seconds,
    })
}

/// Datapath throughput in bits per second for one 64-bit block every
/// `cycles_per_block` cycles.
pub fn throughput_bits(clock_hz: f64, cycles_per_block: u32) -> Result<f64, ModelError> {
    if cycles_per_block == 0 {
        return Err(ModelError::ZeroCount("cycles_per_block"));
    }
    if !(clock_hz > 0.0 && clock_hz.is_finite()) {
        return Err(ModelError::Clock(clock_hz));
    }
    Ok(clock_hz * 64.0 / f64::from(cycles_per_block))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn single_chip() -> HardwareModel {
        HardwareModel::new(1, 256, 323.515e6).unwrap()
    }

    fn fpga_cluster() -> HardwareModel {
        HardwareModel::new(120, 4, 100e6).unwrap()
    }

    #[test]
    fn key_rates() {
        assert!(rel(keys_per_second(&single_chip()), 8.2822e10) < 1e-4);
        assert_eq!(keys_per_second(&fpga_cluster()), 4.8e10);
        let mut doubled = single_chip();
        doubled.instances_per_fpga *= 2;
        assert_eq!(
            keys_per_second(&doubled),
            2.0 * keys_per_second(&single_chip())
        );
    }

    #[test]
    fn search_times() {
        let est = expected_search_time(&single_chip(), 0.5).unwrap();
        assert!(
            rel(est.expected_seconds, 4.350e5) < 1e-3,
            "{}",
            est.expected_seconds
        );
        assert!(
            (est.expected_days - 5.04).abs() < 0.01,
            "{}",
            est.expected_days
        );

        let est = expected_search_time(&fpga_cluster(), 0.5).unwrap();
        assert!(
            rel(est.expected_seconds, 7.506e5) < 1e-3,
            "{}",
            est.expected_seconds
        );
        assert!(
            (est.expected_days - 8.69).abs() < 0.01,
            "{}",
            est.expected_days
        );

        let full = expected_search_time(&fpga_cluster(), 1.0).unwrap();
        assert_eq!(full.expected_seconds, 2.0 * est.expected_seconds);
        assert_eq!(full.worst_case_seconds, full.expected_seconds);
    }

    #[test]
    fn fraction_bounds() {
        for bad in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                expected_search_time(&single_chip(), bad),
                Err(ModelError::Fraction(_))
            ));
        }
    }

    #[test]
    fn throughput_calibration() {
        let rolled = throughput_bits(230.063e6, 18).unwrap();
        assert!(rel(rolled, 0.8180e9) < 1e-4);
        assert!(rel(rolled, 0.817e9) < 0.002);
        let unrolled = throughput_bits(245.874e6, 18).unwrap();
        assert!(rel(unrolled, 0.8742e9) < 1e-4);
        assert_eq!(throughput_bits(1.5e6, 1).unwrap(), 64.0 * 1.5e6);
        assert!(throughput_bits(1e6, 0).is_err());
    }

    #[test]
    fn model_validation() {
        assert_eq!(
            HardwareModel::new(0, 1, 1.0),
            Err(ModelError::ZeroCount("fpga_count"))
        );
        assert_eq!(
            HardwareModel::new(1, 0, 1.0),
            Err(ModelError::ZeroCount("instances_per_fpga"))
        );
        assert!(matches!(
            HardwareModel::new(1, 1, 0.0),
            Err(ModelError::Clock(_))
        ));
        let mut m = single_chip();
        m.keyspace_bits = 0;
        assert!(expected_search_time(&m, 0.5).is_err());
        m.keyspace_bits = 56;
        m.cycles_per_key = 0;
        assert!(expected_search_time(&m, 0.5).is_err());
    }
}
