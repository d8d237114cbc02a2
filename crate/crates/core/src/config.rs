//! Environment configuration and its flat key-value file format.
//!
//! The file is TOML restricted to scalar values. Keys may be written dotted
//! (`initial.altitude = 6000`) or grouped under tables (`[initial]`); both
//! flatten to the same dotted key. `schema = 1` is required and unknown keys
//! are errors. See [`EnvConfig::KEYS`] for the full list.

use std::path::{Path, PathBuf};

use crate::control::ControlConfig;
use crate::dynamics::BalloonParams;
use crate::error::{Error, Result};
use crate::integrate::Scheme;
use crate::wind::SynthSpec;

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Steady-state ascent rate, no vertical acceleration.
    #[default]
    Kinematic,
    /// Full second-order vertical dynamics.
    Dynamic,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Kinematic => "kinematic",
            Mode::Dynamic => "dynamic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConditions {
    pub x: f64,
    pub y: f64,
    pub altitude: f64,
    pub ascent_rate: f64,
    /// Steady rate the helium fill is solved for when `n_helium` is unset.
    pub target_rate: f64,
    pub n_helium: Option<f64>,
    pub m_sand: f64,
    /// Half-width of the uniform random offset added to x and y at reset.
    pub position_jitter: f64,
}

impl Default for InitialConditions {
    fn default() -> Self {
        InitialConditions {
            x: 0.0,
            y: 0.0,
            altitude: 5000.0,
            ascent_rate: 0.0,
            target_rate: 0.0,
            n_helium: None,
            m_sand: 1.0,
            position_jitter: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub position_scale: f64,
    pub rate_scale: f64,
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization {
            position_scale: 200_000.0,
            rate_scale: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    /// Reward just outside the station radius.
    pub scale: f64,
    /// Distance over which the outside reward halves; defaults to the station radius.
    pub halflife: Option<f64>,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            scale: 0.4,
            halflife: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum WindSource {
    /// Zero wind everywhere.
    #[default]
    Calm,
    File(PathBuf),
    Synth(SynthSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub seed: u64,
    pub mode: Mode,
    pub scheme: Scheme,
    pub dt_control: f64,
    pub integrator_dt: f64,
    pub max_steps: u32,
    pub target: (f64, f64),
    pub station_radius: f64,
    pub altitude_bounds: (f64, f64),
    /// Consecutive saturated steps with no sand left before the flight is
    /// declared uncontrollable.
    pub uncontrollable_steps: u32,
    pub initial: InitialConditions,
    pub normalization: Normalization,
    pub reward: RewardParams,
    pub balloon: BalloonParams,
    pub control: ControlConfig,
    pub wind: WindSource,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            seed: 0,
            mode: Mode::Kinematic,
            scheme: Scheme::Rk4,
            dt_control: 60.0,
            integrator_dt: 0.5,
            max_steps: 1440,
            target: (0.0, 0.0),
            station_radius: 50_000.0,
            altitude_bounds: (2000.0, 30_000.0),
            uncontrollable_steps: 10,
            initial: InitialConditions::default(),
            normalization: Normalization::default(),
            reward: RewardParams::default(),
            balloon: BalloonParams::default(),
            control: ControlConfig::default(),
            wind: WindSource::Calm,
        }
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

impl EnvConfig {
    pub const KEYS: &'static [&'static str] = &[
        "schema",
        "seed",
        "mode",
        "integrator",
        "dt_control",
        "integrator_dt",
        "max_steps",
        "target.x",
        "target.y",
        "station_radius",
        "altitude.min",
        "altitude.max",
        "uncontrollable_steps",
        "initial.x",
        "initial.y",
        "initial.altitude",
        "initial.ascent_rate",
        "initial.target_rate",
        "initial.n_helium",
        "initial.m_sand",
        "initial.position_jitter",
        "obs.position_scale",
        "obs.rate_scale",
        "reward.scale",
        "reward.halflife",
        "balloon.m_envelope",
        "balloon.m_payload",
        "balloon.molar_mass_helium",
        "balloon.c_drag",
        "balloon.g",
        "balloon.gas_constant",
        "control.v_up",
        "control.v_down",
        "control.float_band",
        "control.max_vent_rate",
        "control.max_ballast_rate",
        "wind.file",
        "wind.synth",
    ];

    pub fn validate(&self) -> Result<()> {
        positive("station_radius", self.station_radius)?;
        positive("dt_control", self.dt_control)?;
        positive("integrator_dt", self.integrator_dt)?;
        positive("obs.position_scale", self.normalization.position_scale)?;
        positive("obs.rate_scale", self.normalization.rate_scale)?;
        positive("reward.scale", self.reward.scale)?;
        if self.reward.scale > 1.0 {
            return Err(Error::Config(format!(
                "reward.scale must be at most 1, got {}",
                self.reward.scale
            )));
        }
        if let Some(h) = self.reward.halflife {
            positive("reward.halflife", h)?;
        }
        if self.max_steps < 1 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        let (lo, hi) = self.altitude_bounds;
        let h0 = self.initial.altitude;
        if !(lo < h0 && h0 < hi) {
            return Err(Error::Config(format!(
                "initial altitude {h0} must lie strictly inside altitude bounds ({lo}, {hi})"
            )));
        }
        if !(lo >= 0.0 && hi <= crate::atmosphere::MAX_GEOMETRIC_ALTITUDE) {
            return Err(Error::Config(format!(
                "altitude bounds ({lo}, {hi}) must lie within the atmosphere model [0, 86000]"
            )));
        }
        if !(self.initial.m_sand >= 0.0) {
            return Err(Error::Config("initial.m_sand must be non-negative".into()));
        }
        if let Some(n) = self.initial.n_helium {
            if !(n >= 0.0) {
                return Err(Error::Config(
                    "initial.n_helium must be non-negative".into(),
                ));
            }
        }
        if !(self.initial.position_jitter >= 0.0) {
            return Err(Error::Config(
                "initial.position_jitter must be non-negative".into(),
            ));
        }
        let finite = [
            self.target.0,
            self.target.1,
            self.initial.x,
            self.initial.y,
            self.initial.ascent_rate,
            self.initial.target_rate,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("positions and rates must be finite".into()));
        }
        self.balloon.validate()?;
        self.control.validate()
    }

    /// Reads a config file. A relative `wind.file` resolves against the
    /// config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::parse(&text)?;
        if let WindSource::File(ref mut wind) = config.wind {
            if wind.is_relative() {
                if let Some(dir) = path.parent() {
                    *wind = dir.join(&*wind);
                }
            }
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            Error::Config(format!("config is not valid TOML: {e}"))
        })?;
        let mut flat = Vec::new();
        flatten("", &table, &mut flat)?;
        match flat.iter().find(|(k, _)| k == "schema") {
            Some((_, toml::Value::Integer(SCHEMA_VERSION))) => {}
            Some((_, v)) => {
                return Err(Error::Config(format!(
                    "unsupported schema {v}, expected {SCHEMA_VERSION}"
                )))
            }
            None => {
                return Err(Error::Config(format!(
                    "config must declare schema = {SCHEMA_VERSION}"
                )))
            }
        }
        let mut config = EnvConfig::default();
        for (key, value) in &flat {
            config.set(key, value)?;
        }
        config.validate()?;
        Ok(config)
    }

    fn set(&mut self, key: &str, value: &toml::Value) -> Result<()> {
        let num = || -> Result<f64> {
            match value {
                toml::Value::Float(f) => Ok(*f),
                toml::Value::Integer(i) => Ok(*i as f64),
                other => Err(Error::Config(format!(
                    "{key} must be a number, got {other}"
                ))),
            }
        };
        let int = || -> Result<u64> {
            match value {
                toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
                other => Err(Error::Config(format!(
                    "{key} must be a non-negative integer, got {other}"
                ))),
            }
        };
        let string = || -> Result<&str> {
            value
                .as_str()
                .ok_or_else(|| Error::Config(format!("{key} must be a string, got {value}")))
        };
        match key {
            "schema" => {}
            "seed" => self.seed = int()?,
            "mode" => {
                self.mode = match string()? {
                    "kinematic" => Mode::Kinematic,
                    "dynamic" => Mode::Dynamic,
                    other => {
                        return Err(Error::Config(format!(
                            "mode must be kinematic or dynamic, got {other:?}"
                        )))
                    }
                }
            }
            "integrator" => {
                self.scheme = match string()? {
                    "rk4" => Scheme::Rk4,
                    "euler" => Scheme::Euler,
                    other => {
                        return Err(Error::Config(format!(
                            "integrator must be rk4 or euler, got {other:?}"
                        )))
                    }
                }
            }
            "dt_control" => self.dt_control = num()?,
            "integrator_dt" => self.integrator_dt = num()?,
            "max_steps" => {
                self.max_steps = u32::try_from(int()?)
                    .map_err(|_| Error::Config("max_steps too large".into()))?
            }
            "target.x" => self.target.0 = num()?,
            "target.y" => self.target.1 = num()?,
            "station_radius" => self.station_radius = num()?,
            "altitude.min" => self.altitude_bounds.0 = num()?,
            "altitude.max" => self.altitude_bounds.1 = num()?,
            "uncontrollable_steps" => {
                self.uncontrollable_steps = u32::try_from(int()?)
                    .map_err(|_| Error::Config("uncontrollable_steps too large".into()))?
            }
            "initial.x" => self.initial.x = num()?,
            "initial.y" => self.initial.y = num()?,
            "initial.altitude" => self.initial.altitude = num()?,
            "initial.ascent_rate" => self.initial.ascent_rate = num()?,
            "initial.target_rate" => self.initial.target_rate = num()?,
            "initial.n_helium" => self.initial.n_helium = Some(num()?),
            "initial.m_sand" => self.initial.m_sand = num()?,
            "initial.position_jitter" => self.initial.position_jitter = num()?,
            "obs.position_scale" => self.normalization.position_scale = num()?,
            "obs.rate_scale" => self.normalization.rate_scale = num()?,
            "reward.scale" => self.reward.scale = num()?,
            "reward.halflife" => self.reward.halflife = Some(num()?),
            "balloon.m_envelope" => self.balloon.m_envelope = num()?,
            "balloon.m_payload" => self.balloon.m_payload = num()?,
            "balloon.molar_mass_helium" => self.balloon.molar_mass_helium = num()?,
            "balloon.c_drag" => self.balloon.c_drag = num()?,
            "balloon.g" => self.balloon.g = num()?,
            "balloon.gas_constant" => self.balloon.gas_constant = num()?,
            "control.v_up" => self.control.v_up = num()?,
            "control.v_down" => self.control.v_down = num()?,
            "control.float_band" => self.control.float_band = num()?,
            "control.max_vent_rate" => self.control.max_vent_rate = num()?,
            "control.max_ballast_rate" => self.control.max_ballast_rate = num()?,
            "wind.file" => self.set_wind(WindSource::File(PathBuf::from(string()?)))?,
            "wind.synth" => self.set_wind(WindSource::Synth(string()?.parse()?))?,
            _ => return Err(Error::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    fn set_wind(&mut self, source: WindSource) -> Result<()> {
        if self.wind != WindSource::Calm {
            return Err(Error::Config(
                "set at most one of wind.file and wind.synth".into(),
            ));
        }
        self.wind = source;
        Ok(())
    }

    /// Renders the configuration in the file format, one key per line.
    /// Synthetic wind specs are written by the caller that owns the string.
    pub fn to_config_string(&self) -> String {
        let mut out = format!("schema = {SCHEMA_VERSION}\n");
        let mut put = |key: &str, value: String| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        let f = |v: f64| format!("{v:?}");
        put("seed", self.seed.to_string());
        put("mode", format!("{:?}", self.mode.as_str()));
        put(
            "integrator",
            format!(
                "{:?}",
                if self.scheme == Scheme::Rk4 {
                    "rk4"
                } else {
                    "euler"
                }
            ),
        );
        put("dt_control", f(self.dt_control));
        put("integrator_dt", f(self.integrator_dt));
        put("max_steps", self.max_steps.to_string());
        put("target.x", f(self.target.0));
        put("target.y", f(self.target.1));
        put("station_radius", f(self.station_radius));
        put("altitude.min", f(self.altitude_bounds.0));
        put("altitude.max", f(self.altitude_bounds.1));
        put(
            "uncontrollable_steps",
            self.uncontrollable_steps.to_string(),
        );
        put("initial.x", f(self.initial.x));
        put("initial.y", f(self.initial.y));
        put("initial.altitude", f(self.initial.altitude));
        put("initial.ascent_rate", f(self.initial.ascent_rate));
        put("initial.target_rate", f(self.initial.target_rate));
        if let Some(n) = self.initial.n_helium {
            put("initial.n_helium", f(n));
        }
        put("initial.m_sand", f(self.initial.m_sand));
        put("initial.position_jitter", f(self.initial.position_jitter));
        put("obs.position_scale", f(self.normalization.position_scale));
        put("obs.rate_scale", f(self.normalization.rate_scale));
        put("reward.scale", f(self.reward.scale));
        if let Some(h) = self.reward.halflife {
            put("reward.halflife", f(h));
        }
        put("balloon.m_envelope", f(self.balloon.m_envelope));
        put("balloon.m_payload", f(self.balloon.m_payload));
        put(
            "balloon.molar_mass_helium",
            f(self.balloon.molar_mass_helium),
        );
        put("balloon.c_drag", f(self.balloon.c_drag));
        put("balloon.g", f(self.balloon.g));
        put("balloon.gas_constant", f(self.balloon.gas_constant));
        put("control.v_up", f(self.control.v_up));
        put("control.v_down", f(self.control.v_down));
        put("control.float_band", f(self.control.float_band));
        put("control.max_vent_rate", f(self.control.max_vent_rate));
        put("control.max_ballast_rate", f(self.control.max_ballast_rate));
        if let WindSource::File(p) = &self.wind {
            put("wind.file", format!("{:?}", p.display().to_string()));
        }
        out
    }

    pub fn reward_halflife(&self) -> f64 {
        self.reward.halflife.unwrap_or(self.station_radius)
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) -> Result<()> {
    for (key, value) in table {
        let full = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match value {
            toml::Value::Table(inner) => flatten(&full, inner, out)?,
            toml::Value::Array(_) | toml::Value::Datetime(_) => {
                return Err(Error::Config(format!("{full} must be a scalar value")))
            }
            scalar => out.push((full, scalar.clone())),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        EnvConfig::default().validate().unwrap();
        assert_eq!(
            EnvConfig::parse("schema = 1").unwrap(),
            EnvConfig::default()
        );
    }

    #[test]
    fn dotted_and_grouped_keys_agree() {
        let a = EnvConfig::parse("schema = 1\ninitial.altitude = 6000\ncontrol.v_up = 3").unwrap();
        let b = EnvConfig::parse("schema = 1\n[initial]\naltitude = 6000.0\n[control]\nv_up = 3")
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.initial.altitude, 6000.0);
        assert_eq!(a.control.v_up, 3.0);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = EnvConfig::parse("schema = 1\nballoon.colour = 3").unwrap_err();
        assert!(err.to_string().contains("balloon.colour"), "{err}");
    }

    #[test]
    fn schema_is_required() {
        assert!(EnvConfig::parse("seed = 1").is_err());
        assert!(EnvConfig::parse("schema = 2").is_err());
    }

    #[test]
    fn invariants_checked() {
        assert!(EnvConfig::parse("schema = 1\nstation_radius = 0").is_err());
        assert!(EnvConfig::parse("schema = 1\ninitial.altitude = 1000").is_err());
        assert!(EnvConfig::parse("schema = 1\nmax_steps = 0").is_err());
        assert!(EnvConfig::parse("schema = 1\nballoon.c_drag = 3").is_err());
        assert!(
            EnvConfig::parse("schema = 1\nwind.file = \"a\"\nwind.synth = \"constant::0\"")
                .is_err()
        );
        assert!(EnvConfig::parse("schema = 1\nmode = \"warp\"").is_err());
    }

    #[test]
    fn every_key_round_trips() {
        let mut config = EnvConfig {
            seed: 7,
            mode: Mode::Dynamic,
            scheme: Scheme::Euler,
            wind: WindSource::File("winds/a.csv".into()),
            ..EnvConfig::default()
        };
        config.initial.n_helium = Some(150.0);
        config.reward.halflife = Some(12_345.5);
        config.control.float_band = 0.3;
        let text = config.to_config_string();
        let written: Vec<&str> = text
            .lines()
            .map(|l| l.split(" = ").next().unwrap())
            .collect();
        for key in EnvConfig::KEYS {
            assert!(
                written.contains(key) || *key == "wind.synth",
                "{key} not written"
            );
        }
        assert_eq!(EnvConfig::parse(&text).unwrap(), config);
    }
}
