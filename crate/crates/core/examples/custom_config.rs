//! Load a system configuration from TOML, override a few fields and
//! run the built-in consistency checks on it.

use ristensor::bench::selftest;
use ristensor::scenario::SystemConfig;

const TOML: &str = r#"
carrier_hz = 28e9
bandwidth_hz = 122.88e6
subcarriers = 256
pilot_subcarriers = 12
subcarrier_spacing_hz = 480e3
bs_antennas = 8
ms_antennas = 8
bs_rf_chains = 4
ms_rf_chains = 4
ris_elements = 24
ris_radius_wavelengths = 1.5
streams = 2
paths = 2
slots = 6
half_slots = 6
noma_symbols = 7
velocity_kmh = 60.0
power_fractions = [0.7, 0.3]
"#;

fn main() -> ristensor::Result<()> {
    let cfg = SystemConfig::from_toml_str(TOML)?;
    println!("tensor shape {:?}, max Doppler {:.1} Hz", cfg.tensor_shape(), cfg.max_doppler_hz());
    for c in selftest(&cfg) {
        println!("{} {:<30} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(())
}
