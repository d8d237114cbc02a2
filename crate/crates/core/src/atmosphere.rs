//! US Standard Atmosphere 1976, lower 86 km.
//!
//! Temperature is piecewise linear in geopotential altitude over seven
//! layers. Layer base temperatures and pressures are chained from the
//! sea-level values when the model is built, so the only hard-coded data are
//! the layer breakpoints and lapse rates.

use crate::error::{Error, Result};

/// Standard gravity used by the layer definitions (m/s²).
pub const G0: f64 = 9.80665;
/// Universal gas constant as defined by the 1976 standard (J/(mol·K)).
pub const R_STAR: f64 = 8.31432;
/// Mean molar mass of sea-level air (kg/mol).
pub const M_AIR: f64 = 0.0289644;
/// Effective earth radius for the geopotential conversion (m).
pub const EARTH_RADIUS: f64 = 6_356_766.0;

pub const SEA_LEVEL_TEMPERATURE: f64 = 288.15;
pub const SEA_LEVEL_PRESSURE: f64 = 101_325.0;

/// Highest geometric altitude covered by the model (m).
pub const MAX_GEOMETRIC_ALTITUDE: f64 = 86_000.0;

/// (base geopotential altitude m, lapse rate K/m)
const LAYER_BREAKPOINTS: [(f64, f64); 7] = [
    (0.0, -0.0065),
    (11_000.0, 0.0),
    (20_000.0, 0.001),
    (32_000.0, 0.0028),
    (47_000.0, 0.0),
    (51_000.0, -0.0028),
    (71_000.0, -0.002),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphereSample {
    /// K
    pub temperature: f64,
    /// Pa
    pub pressure: f64,
    /// kg/m³
    pub density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub base_altitude: f64,
    pub base_temperature: f64,
    pub lapse_rate: f64,
    pub base_pressure: f64,
}

impl Layer {
    fn temperature_at(&self, geopotential: f64) -> f64 {
        self.base_temperature + self.lapse_rate * (geopotential - self.base_altitude)
    }

    fn pressure_at(&self, geopotential: f64) -> f64 {
        let dh = geopotential - self.base_altitude;
        if self.lapse_rate == 0.0 {
            self.base_pressure * (-G0 * M_AIR * dh / (R_STAR * self.base_temperature)).exp()
        } else {
            let t = self.temperature_at(geopotential);
            self.base_pressure
                * (self.base_temperature / t).powf(G0 * M_AIR / (R_STAR * self.lapse_rate))
        }
    }
}

/// Immutable layer table; cheap to clone and safe to share between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct AtmosphereModel {
    layers: [Layer; 7],
}

impl Default for AtmosphereModel {
    fn default() -> Self {
        Self::new()
    }
}

impl AtmosphereModel {
    pub fn new() -> Self {
        let mut layers = [Layer {
            base_altitude: 0.0,
            base_temperature: SEA_LEVEL_TEMPERATURE,
            lapse_rate: LAYER_BREAKPOINTS[0].1,
            base_pressure: SEA_LEVEL_PRESSURE,
        }; 7];
        for i in 1..layers.len() {
            let prev = layers[i - 1];
            let (base, lapse) = LAYER_BREAKPOINTS[i];
            layers[i] = Layer {
                base_altitude: base,
                base_temperature: prev.temperature_at(base),
                lapse_rate: lapse,
                base_pressure: prev.pressure_at(base),
            };
        }
        AtmosphereModel { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Samples the atmosphere at a geometric altitude in metres.
    pub fn sample(&self, altitude: f64) -> Result<AtmosphereSample> {
        let geopotential = geometric_to_geopotential(altitude)?;
        Ok(self.sample_at_geopotential(geopotential))
    }

    /// Samples the atmosphere at a geopotential altitude in metres.
    pub fn sample_geopotential(&self, geopotential: f64) -> Result<AtmosphereSample> {
        let max = geometric_to_geopotential(MAX_GEOMETRIC_ALTITUDE)?;
        if !(0.0..=max).contains(&geopotential) {
            return Err(Error::AltitudeOutOfRange {
                altitude: geopotential,
                min: 0.0,
                max,
            });
        }
        Ok(self.sample_at_geopotential(geopotential))
    }

    fn sample_at_geopotential(&self, geopotential: f64) -> AtmosphereSample {
        let layer = self
            .layers
            .iter()
            .rev()
            .find(|l| geopotential >= l.base_altitude)
            .unwrap_or(&self.layers[0]);
        let temperature = layer.temperature_at(geopotential);
        let pressure = layer.pressure_at(geopotential);
        AtmosphereSample {
            temperature,
            pressure,
            density: pressure * M_AIR / (R_STAR * temperature),
        }
    }
}

pub fn geometric_to_geopotential(altitude: f64) -> Result<f64> {
    if !(0.0..=MAX_GEOMETRIC_ALTITUDE).contains(&altitude) {
        return Err(Error::AltitudeOutOfRange {
            altitude,
            min: 0.0,
            max: MAX_GEOMETRIC_ALTITUDE,
        });
    }
    Ok(EARTH_RADIUS * altitude / (EARTH_RADIUS + altitude))
}

/// Inverse of [`geometric_to_geopotential`]; no range check.
pub fn geopotential_to_geometric(geopotential: f64) -> f64 {
    EARTH_RADIUS * geopotential / (EARTH_RADIUS - geopotential)
}
