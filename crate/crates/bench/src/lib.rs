//! Fixtures shared by the benchmarks.

use holdscan::{generate_mock_waveform, MockConfig, Waveform};

/// A seeded synthetic recording of the given length in seconds.
pub fn fixture(duration_s: f64) -> Waveform {
    let config = MockConfig {
        duration_s,
        ..MockConfig::with_seed(42)
    };
    generate_mock_waveform(&config).expect("valid fixture config").0
}
