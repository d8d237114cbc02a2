//! Envelope geometry and the vertical force balance.
//!
//! The envelope is a sphere at ambient pressure and temperature, so its
//! volume follows the ideal gas law. Drag always opposes the ascent rate.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrate::StateVector;

pub const HELIUM_MOLAR_MASS: f64 = 0.004;
pub const DEFAULT_DRAG_COEFFICIENT: f64 = 0.2;
pub const DEFAULT_GRAVITY: f64 = 9.81;
pub const DEFAULT_GAS_CONSTANT: f64 = 8.31432;

/// Drag coefficients outside this range are rejected as configuration errors.
pub const DRAG_COEFFICIENT_LIMITS: (f64, f64) = (0.05, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalloonParams {
    pub m_envelope: f64,
    pub m_payload: f64,
    pub molar_mass_helium: f64,
    pub c_drag: f64,
    pub g: f64,
    pub gas_constant: f64,
}

impl Default for BalloonParams {
    fn default() -> Self {
        BalloonParams {
            m_envelope: 1.5,
            m_payload: 2.0,
            molar_mass_helium: HELIUM_MOLAR_MASS,
            c_drag: DEFAULT_DRAG_COEFFICIENT,
            g: DEFAULT_GRAVITY,
            gas_constant: DEFAULT_GAS_CONSTANT,
        }
    }
}

impl BalloonParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("m_envelope", self.m_envelope >= 0.0),
            ("m_payload", self.m_payload >= 0.0),
            ("molar_mass_helium", self.molar_mass_helium > 0.0),
            ("g", self.g > 0.0),
            ("gas_constant", self.gas_constant > 0.0),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::Config(format!(
                    "balloon parameter {name} out of range"
                )));
            }
        }
        let (lo, hi) = DRAG_COEFFICIENT_LIMITS;
        if !(lo..=hi).contains(&self.c_drag) {
            return Err(Error::Config(format!(
                "drag coefficient {} outside [{lo}, {hi}] (sphere flow gives 0.2 to 0.25)",
                self.c_drag
            )));
        }
        Ok(())
    }

    /// Mass of everything except helium and sand.
    pub fn structural_mass(&self) -> f64 {
        self.m_envelope + self.m_payload
    }
}

/// Consumable state: helium moles in the envelope and sand on board.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassState {
    pub n_helium: f64,
    pub m_sand: f64,
}

impl MassState {
    pub fn validate(&self) -> Result<()> {
        if self.n_helium >= 0.0 && self.m_sand >= 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "negative resources: n_helium = {}, m_sand = {}",
                self.n_helium, self.m_sand
            )))
        }
    }
}

pub fn total_mass(params: &BalloonParams, state: &MassState) -> f64 {
    params.m_envelope + params.m_payload + state.n_helium * params.molar_mass_helium + state.m_sand
}

pub fn envelope_volume(
    n_helium: f64,
    temperature: f64,
    pressure: f64,
    gas_constant: f64,
) -> Result<f64> {
    if !(temperature > 0.0 && pressure > 0.0) {
        return Err(Error::Domain(format!(
            "envelope volume needs positive temperature and pressure, got T = {temperature}, P = {pressure}"
        )));
    }
    if n_helium < 0.0 {
        return Err(Error::Domain(format!("negative helium amount {n_helium}")));
    }
    Ok(n_helium * gas_constant * temperature / pressure)
}

/// Cross-section of a sphere of the given volume.
pub fn cross_section_area(volume: f64) -> Result<f64> {
    if !(volume >= 0.0) {
        return Err(Error::Domain(format!("negative envelope volume {volume}")));
    }
    Ok(PI * (3.0 * volume / (4.0 * PI)).powf(2.0 / 3.0))
}

pub fn buoyancy_force(density: f64, volume: f64, g: f64) -> f64 {
    density * volume * g
}

/// Signed drag, opposing `rate`.
pub fn drag_force(density: f64, rate: f64, c_drag: f64, area: f64) -> f64 {
    -0.5 * density * rate * rate.abs() * c_drag * area
}

/// Closed-form ascent rate with zero net acceleration.
pub fn steady_ascent_rate(
    density: f64,
    volume: f64,
    mass: f64,
    c_drag: f64,
    area: f64,
    g: f64,
) -> Result<f64> {
    let net = buoyancy_force(density, volume, g) - mass * g;
    if net == 0.0 {
        return Ok(0.0);
    }
    let drag_scale = 0.5 * density * c_drag * area;
    if drag_scale <= 0.0 {
        return Err(Error::Singularity { net_force: net });
    }
    let direction = if net < 0.0 { -1.0 } else { 1.0 };
    Ok(direction * (net.abs() / drag_scale).sqrt())
}

/// Second derivative of altitude for the full (non steady-state) model.
pub fn vertical_acceleration(
    state: StateVector,
    density: f64,
    volume: f64,
    mass: f64,
    c_drag: f64,
    area: f64,
    g: f64,
) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(Error::Domain(format!(
            "total mass must be positive, got {mass}"
        )));
    }
    let force = buoyancy_force(density, volume, g) + drag_force(density, state.rate, c_drag, area)
        - mass * g;
    Ok(force / mass)
}
