use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use crate::decomp::AdmmParams;
use crate::error::{Error, Result};
use crate::extract::SearchGrid;

/// Open interval in degrees, stored as `[low, high]` in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(from = "[f64; 2]")]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl From<[f64; 2]> for Interval {
    fn from([low, high]: [f64; 2]) -> Self {
        Interval { low, high }
    }
}

impl Interval {
    pub const fn deg(low: f64, high: f64) -> Self {
        Interval { low, high }
    }

    pub fn radians(&self) -> (f64, f64) {
        (self.low.to_radians(), self.high.to_radians())
    }

    pub fn contains_rad(&self, x: f64) -> bool {
        let (lo, hi) = self.radians();
        x > lo && x < hi
    }
}

/// Sampling intervals for every angle of a realization, in degrees.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AngleRanges {
    /// φ_BR, BS angle of departure.
    pub bs_departure: Interval,
    /// θ_BR, RIS angle of arrival.
    pub ris_arrival: Interval,
    /// θ_RM, MS angle of arrival.
    pub ms_arrival: Interval,
    /// φ_RM, RIS angle of departure.
    pub ris_departure: Interval,
    /// θ_v, arrival angle relative to the direction of motion.
    pub motion: Interval,
}

impl Default for AngleRanges {
    fn default() -> Self {
        AngleRanges {
            bs_departure: Interval::deg(0.0, 90.0),
            ris_arrival: Interval::deg(-180.0, -90.0),
            ms_arrival: Interval::deg(0.0, 180.0),
            ris_departure: Interval::deg(-90.0, 0.0),
            motion: Interval::deg(0.0, 180.0),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Circularly symmetric white Gaussian noise before combining.
    #[default]
    Awgn,
    /// Observations equal the noiseless tensor regardless of SNR.
    Noiseless,
}

/// Every constant of the simulated link.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub subcarriers: usize,
    pub pilot_subcarriers: usize,
    pub subcarrier_spacing_hz: f64,
    pub bs_antennas: usize,
    pub ms_antennas: usize,
    pub bs_rf_chains: usize,
    pub ms_rf_chains: usize,
    pub ris_elements: usize,
    pub ris_radius_wavelengths: f64,
    pub streams: usize,
    pub paths: usize,
    /// Aggregated slots per subframe.
    pub slots: usize,
    /// Half-slots per aggregated slot.
    pub half_slots: usize,
    /// NOMA symbols per half-slot.
    pub noma_symbols: usize,
    pub velocity_kmh: f64,
    #[serde(default = "default_light_speed")]
    pub light_speed: f64,
    #[serde(default = "default_power")]
    pub total_power: f64,
    pub power_fractions: Vec<f64>,
    #[serde(default)]
    pub noise: NoiseModel,
    /// Minimum pairwise Doppler separation enforced when sampling paths.
    #[serde(default = "default_doppler_gap")]
    pub doppler_gap_hz: f64,
    /// Delays are drawn on `[0, delay_span · N / f_s)`.
    #[serde(default = "default_delay_span")]
    pub delay_span: f64,
    #[serde(default)]
    pub angles: AngleRanges,
    #[serde(default)]
    pub search: SearchGrid,
    #[serde(default)]
    pub admm: AdmmParams,
}

fn default_light_speed() -> f64 {
    299_792_458.0
}
fn default_power() -> f64 {
    1.0
}
fn default_doppler_gap() -> f64 {
    1.0
}
fn default_delay_span() -> f64 {
    0.8
}

impl SystemConfig {
    /// Small configuration that exercises every part of the model.
    pub fn desk() -> Self {
        SystemConfig {
            carrier_hz: 30e9,
            bandwidth_hz: 122.88e6,
            subcarriers: 256,
            pilot_subcarriers: 16,
            subcarrier_spacing_hz: 480e3,
            bs_antennas: 8,
            ms_antennas: 8,
            bs_rf_chains: 4,
            ms_rf_chains: 4,
            ris_elements: 32,
            ris_radius_wavelengths: 2.0,
            streams: 2,
            paths: 2,
            slots: 8,
            half_slots: 8,
            noma_symbols: 7,
            velocity_kmh: 80.0,
            light_speed: default_light_speed(),
            total_power: 1.0,
            power_fractions: vec![0.8, 0.2],
            noise: NoiseModel::Awgn,
            doppler_gap_hz: default_doppler_gap(),
            delay_span: default_delay_span(),
            angles: AngleRanges::default(),
            search: SearchGrid::default(),
            admm: AdmmParams::default(),
        }
    }

    /// Full-size configuration: 32-antenna arrays, 256-element RIS, four paths.
    pub fn full() -> Self {
        SystemConfig {
            bs_antennas: 32,
            ms_antennas: 32,
            bs_rf_chains: 8,
            ms_rf_chains: 8,
            ris_elements: 256,
            ris_radius_wavelengths: 20.0,
            pilot_subcarriers: 32,
            paths: 4,
            streams: 4,
            ..Self::desk()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SystemConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let counts = [
            ("subcarriers", self.subcarriers),
            ("pilot_subcarriers", self.pilot_subcarriers),
            ("bs_antennas", self.bs_antennas),
            ("ms_antennas", self.ms_antennas),
            ("bs_rf_chains", self.bs_rf_chains),
            ("ms_rf_chains", self.ms_rf_chains),
            ("ris_elements", self.ris_elements),
            ("streams", self.streams),
            ("paths", self.paths),
            ("slots", self.slots),
            ("half_slots", self.half_slots),
            ("noma_symbols", self.noma_symbols),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, c)| *c == 0) {
            return bad(format!("{name} must be at least 1"));
        }
        let positive = [
            ("carrier_hz", self.carrier_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("subcarrier_spacing_hz", self.subcarrier_spacing_hz),
            ("ris_radius_wavelengths", self.ris_radius_wavelengths),
            ("light_speed", self.light_speed),
            ("total_power", self.total_power),
            ("delay_span", self.delay_span),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return bad(format!("{name} must be positive and finite, got {v}"));
        }
        if !(self.velocity_kmh.is_finite() && self.velocity_kmh >= 0.0) {
            return bad(format!("velocity_kmh must be nonnegative, got {}", self.velocity_kmh));
        }
        if self.pilot_subcarriers > self.subcarriers {
            return bad("pilot_subcarriers exceeds subcarriers".into());
        }
        if self.streams > self.bs_rf_chains.min(self.ms_rf_chains) {
            return bad("streams exceeds the RF chain count".into());
        }
        if self.bs_rf_chains > self.bs_antennas || self.ms_rf_chains > self.ms_antennas {
            return bad("more RF chains than antennas".into());
        }
        if self.streams * self.noma_symbols > self.bs_antennas * self.ms_antennas {
            return bad("pilot block wider than the spatial dimension".into());
        }
        if self.delay_span > 1.0 {
            return bad("delay_span must not exceed 1".into());
        }
        let p = &self.power_fractions;
        if p.is_empty() || p.iter().any(|&x| !(x > 0.0)) {
            return bad("power_fractions must be positive".into());
        }
        if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("power_fractions must sum to 1".into());
        }
        if p.windows(2).any(|w| w[0] <= w[1]) {
            return bad("power_fractions must be strictly decreasing".into());
        }
        let fmax = self.max_doppler_hz();
        if fmax >= self.doppler_nyquist_hz() {
            return bad(format!(
                "max Doppler {fmax:.1} Hz is not below the identifiable bound {:.1} Hz",
                self.doppler_nyquist_hz()
            ));
        }
        if self.doppler_gap_hz < 0.0 {
            return bad("doppler_gap_hz must be nonnegative".into());
        }
        if self.paths > 1 && self.doppler_gap_hz * (self.paths - 1) as f64 >= 2.0 * fmax {
            return bad("doppler_gap_hz too large for the Doppler spread".into());
        }
        for (name, iv) in [
            ("bs_departure", self.angles.bs_departure),
            ("ris_arrival", self.angles.ris_arrival),
            ("ms_arrival", self.angles.ms_arrival),
            ("ris_departure", self.angles.ris_departure),
            ("motion", self.angles.motion),
        ] {
            if !(iv.low < iv.high) {
                return bad(format!("angle interval {name} is empty"));
            }
        }
        self.search.validate()?;
        self.admm.validate()?;
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        self.light_speed / self.carrier_hz
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength()
    }

    pub fn ris_radius_m(&self) -> f64 {
        self.ris_radius_wavelengths * self.wavelength()
    }

    pub fn velocity_mps(&self) -> f64 {
        self.velocity_kmh / 3.6
    }

    pub fn symbol_period(&self) -> f64 {
        1.0 / self.subcarrier_spacing_hz
    }

    /// `T_s · N_b · N_st`, the time step between aggregated slots.
    pub fn slot_period(&self) -> f64 {
        self.symbol_period() * (self.noma_symbols * self.half_slots) as f64
    }

    pub fn max_doppler_hz(&self) -> f64 {
        self.carrier_hz * self.velocity_mps() / self.light_speed
    }

    /// Dopplers strictly inside `±1 / (2 · slot_period)` map to distinct phases.
    pub fn doppler_nyquist_hz(&self) -> f64 {
        0.5 / self.slot_period()
    }

    /// Length of the unambiguous delay window `N / f_s`.
    pub fn delay_window(&self) -> f64 {
        self.subcarriers as f64 / self.bandwidth_hz
    }

    /// Rows of the first tensor mode, `N_s · N_b`.
    pub fn pilot_len(&self) -> usize {
        self.streams * self.noma_symbols
    }

    /// Shape of the observation tensor `N_s N_b × N_st × K × M`.
    pub fn tensor_shape(&self) -> [usize; 4] {
        [self.pilot_len(), self.half_slots, self.pilot_subcarriers, self.slots]
    }

    pub fn with_velocity_kmh(mut self, v: f64) -> Self {
        self.velocity_kmh = v;
        self
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::desk()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        SystemConfig::desk().validate().unwrap();
        SystemConfig::full().validate().unwrap();
    }

    #[test]
    fn slot_arithmetic() {
        let c = SystemConfig::desk();
        assert!((c.slot_period() - 116.666_666_666e-6).abs() < 1e-12);
        assert!((c.doppler_nyquist_hz() - 4285.714_285_714).abs() < 1e-6);
        assert!((c.max_doppler_hz() - 2223.760_634_654_347).abs() < 1e-9);
        assert_eq!(c.tensor_shape(), [14, 8, 16, 8]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let text = include_str!("../../configs/desk.toml");
        let cfg = SystemConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg, SystemConfig::desk());
        assert!(SystemConfig::from_toml_str(&format!("{text}\nbogus = 1\n")).is_err());
        let mut c = SystemConfig::desk();
        c.power_fractions = vec![0.2, 0.8];
        assert!(c.validate().is_err());
        let mut c = SystemConfig::desk();
        c.pilot_subcarriers = 300;
        assert!(c.validate().is_err());
        let mut c = SystemConfig::desk();
        c.velocity_kmh = 500.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn full_config_file_matches_preset() {
        let cfg = SystemConfig::from_toml_str(include_str!("../../configs/full.toml")).unwrap();
        assert_eq!(cfg, SystemConfig::full());
    }
}
