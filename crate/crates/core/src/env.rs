//! Seeded reset/step environment.
//!
//! One step runs, in order: the controller against the atmosphere at the
//! current altitude, the vertical update (closed-form steady rate in
//! kinematic mode, RK4 substeps in dynamic mode), horizontal advection with
//! the wind at the new altitude, then reward and termination.
//!
//! Observation channels, each clipped to [-1, 1]:
//!
//! | index | channel |
//! |-------|---------|
//! | 0 | (x − target.x) / position_scale |
//! | 1 | (y − target.y) / position_scale |
//! | 2 | (h − h_mid) / h_half_range over the altitude bounds |
//! | 3 | ascent rate / rate_scale |
//! | 4 | sand / initial sand |
//! | 5 | helium / initial helium |
//!
//! The reward is 1 inside the station radius and
//! `scale · 2^(−(d − radius)/halflife)` outside it.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atmosphere::AtmosphereModel;
use crate::config::{EnvConfig, Mode, WindSource};
use crate::control::{self, Command, ControlOutcome, MassDelta};
use crate::dynamics::{self, MassState};
use crate::error::{Error, Result};
use crate::integrate::{self, StateVector};
use crate::wind::{self, WindField, WindVector};

pub const OBSERVATION_LEN: usize = 6;
pub const ACTION_COUNT: usize = 3;

pub type Observation = [f64; OBSERVATION_LEN];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationCause {
    AltitudeBounds,
    LeftWindDomain,
    Uncontrollable,
}

impl TerminationCause {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationCause::AltitudeBounds => "altitude_bounds",
            TerminationCause::LeftWindDomain => "left_wind_domain",
            TerminationCause::Uncontrollable => "uncontrollable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub x: f64,
    pub y: f64,
    pub vertical: StateVector,
    pub mass: MassState,
    pub step: u32,
    /// Simulated seconds since reset.
    pub time: f64,
    /// Consecutive saturated steps with no sand left.
    pub empty_streak: u32,
    pub rng: ChaCha8Rng,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub altitude: f64,
    pub ascent_rate: f64,
    pub n_helium: f64,
    pub m_sand: f64,
    pub delta: MassDelta,
    pub saturated: bool,
    pub rate_limited: bool,
    pub infeasible: bool,
    pub wind: WindVector,
    pub distance: f64,
    /// Observation before clipping.
    pub raw_observation: Observation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub cause: Option<TerminationCause>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    NeedsReset,
    Running,
    Finished,
}

/// Single-threaded environment instance. The wind field may be shared.
#[derive(Debug, Clone)]
pub struct Env {
    config: EnvConfig,
    atmosphere: AtmosphereModel,
    wind: Arc<WindField>,
    state: EnvState,
    initial_mass: MassState,
    phase: Phase,
}

/// Builds the wind field a config asks for.
pub fn load_wind(source: &WindSource) -> Result<WindField> {
    match source {
        WindSource::Calm => wind::synthesize(
            &wind::WindSynth::Constant(WindVector::default()),
            &wind::SynthGrid::default(),
            0,
        ),
        WindSource::File(path) => wind::load_windfield(path),
        WindSource::Synth(spec) => spec.build(),
    }
}

pub fn distance_to_target(config: &EnvConfig, x: f64, y: f64) -> f64 {
    (x - config.target.0).hypot(y - config.target.1)
}

pub fn reward(config: &EnvConfig, distance: f64) -> f64 {
    if distance <= config.station_radius {
        1.0
    } else {
        config.reward.scale
            * (-(distance - config.station_radius) / config.reward_halflife()).exp2()
    }
}

fn normalized(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        0.0
    }
}

/// Unclipped observation.
pub fn raw_observation(config: &EnvConfig, state: &EnvState, initial: &MassState) -> Observation {
    let (lo, hi) = config.altitude_bounds;
    let scale = config.normalization.position_scale;
    [
        (state.x - config.target.0) / scale,
        (state.y - config.target.1) / scale,
        (state.vertical.altitude - 0.5 * (lo + hi)) / (0.5 * (hi - lo)),
        state.vertical.rate / config.normalization.rate_scale,
        normalized(state.mass.m_sand, initial.m_sand),
        normalized(state.mass.n_helium, initial.n_helium),
    ]
}

pub fn observe(config: &EnvConfig, state: &EnvState, initial: &MassState) -> Observation {
    raw_observation(config, state, initial).map(|v| v.clamp(-1.0, 1.0))
}

impl Env {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let wind = Arc::new(load_wind(&config.wind)?);
        Self::with_wind(config, wind)
    }

    /// Uses an already loaded wind field instead of `config.wind`.
    pub fn with_wind(config: EnvConfig, wind: Arc<WindField>) -> Result<Self> {
        config.validate()?;
        let placeholder = EnvState {
            x: config.initial.x,
            y: config.initial.y,
            vertical: StateVector::new(config.initial.altitude, config.initial.ascent_rate),
            mass: MassState {
                n_helium: 0.0,
                m_sand: 0.0,
            },
            step: 0,
            time: 0.0,
            empty_streak: 0,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        };
        Ok(Env {
            config,
            atmosphere: AtmosphereModel::new(),
            wind,
            state: placeholder,
            initial_mass: MassState {
                n_helium: 0.0,
                m_sand: 0.0,
            },
            phase: Phase::NeedsReset,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn initial_mass(&self) -> &MassState {
        &self.initial_mass
    }

    pub fn wind(&self) -> &Arc<WindField> {
        &self.wind
    }

    pub fn is_finished(&self) -> bool {
        self.phase == Phase::Finished
    }

    /// Starts a new episode. `seed` overrides the config seed.
    pub fn reset(&mut self, seed: Option<u64>) -> Result<Observation> {
        let cfg = &self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(cfg.seed));
        let jitter = cfg.initial.position_jitter;
        let (dx, dy) = if jitter > 0.0 {
            (
                rng.gen_range(-jitter..=jitter),
                rng.gen_range(-jitter..=jitter),
            )
        } else {
            (0.0, 0.0)
        };
        let atm = self.atmosphere.sample(cfg.initial.altitude)?;
        let m_sand = cfg.initial.m_sand;
        let n_helium = match cfg.initial.n_helium {
            Some(n) => n,
            None => {
                control::required_moles_for_rate(
                    &cfg.balloon,
                    cfg.balloon.structural_mass() + m_sand,
                    &atm,
                    cfg.initial.target_rate,
                )
                .map_err(|e| {
                    Error::Config(format!("cannot fill envelope for initial.target_rate: {e}"))
                })?
                .n_helium
            }
        };
        let mass = MassState { n_helium, m_sand };
        mass.validate()?;
        self.initial_mass = mass;
        self.state = EnvState {
            x: cfg.initial.x + dx,
            y: cfg.initial.y + dy,
            vertical: StateVector::new(cfg.initial.altitude, cfg.initial.ascent_rate),
            mass,
            step: 0,
            time: 0.0,
            empty_streak: 0,
            rng,
        };
        self.phase = Phase::Running;
        Ok(self.observation())
    }

    pub fn observation(&self) -> Observation {
        observe(&self.config, &self.state, &self.initial_mass)
    }

    pub fn step(&mut self, action: Command) -> Result<StepResult> {
        match self.phase {
            Phase::NeedsReset => return Err(Error::Protocol("step called before reset".into())),
            Phase::Finished => {
                return Err(Error::Protocol(
                    "step called on a finished episode; reset first".into(),
                ))
            }
            Phase::Running => {}
        }
        let cfg = &self.config;
        let dt = cfg.dt_control;
        let mut state = self.state.clone();

        let atm = self.atmosphere.sample(state.vertical.altitude)?;
        let outcome: ControlOutcome = control::apply_command(
            &state.mass,
            action,
            &atm,
            state.vertical.rate,
            &cfg.balloon,
            &cfg.control,
            dt,
        )?;
        state.mass = outcome.delta.apply(&state.mass);

        state.vertical = match cfg.mode {
            Mode::Kinematic => {
                let rate = control::steady_rate(&cfg.balloon, &state.mass, &atm)?;
                StateVector::new(state.vertical.altitude + rate * dt, rate)
            }
            Mode::Dynamic => {
                let params = cfg.balloon;
                let mass = state.mass;
                let atmosphere = &self.atmosphere;
                let rhs = move |_t: f64, y: StateVector| -> Result<StateVector> {
                    let s = atmosphere.sample(y.altitude)?;
                    let volume = dynamics::envelope_volume(
                        mass.n_helium,
                        s.temperature,
                        s.pressure,
                        params.gas_constant,
                    )?;
                    let area = dynamics::cross_section_area(volume)?;
                    let total = dynamics::total_mass(&params, &mass);
                    let acc = dynamics::vertical_acceleration(
                        y,
                        s.density,
                        volume,
                        total,
                        params.c_drag,
                        area,
                        params.g,
                    )?;
                    Ok(StateVector::new(y.rate, acc))
                };
                integrate::integrate_to(
                    &rhs,
                    state.vertical,
                    state.time,
                    state.time + dt,
                    cfg.integrator_dt,
                    cfg.scheme,
                )?
            }
        };

        let mut cause = None;
        let (lo, hi) = cfg.altitude_bounds;
        let altitude = state.vertical.altitude;
        let mut wind_here = WindVector::default();
        if !(lo..=hi).contains(&altitude) {
            cause = Some(TerminationCause::AltitudeBounds);
        } else {
            match self
                .wind
                .wind_at(state.x, state.y, altitude, Some(state.time))
            {
                Ok(w) => {
                    wind_here = w;
                    (state.x, state.y) = wind::advect(state.x, state.y, w, dt);
                }
                Err(Error::OutOfWindDomain { .. }) => {
                    cause = Some(TerminationCause::LeftWindDomain)
                }
                Err(e) => return Err(e),
            }
        }
        state.time += dt;
        state.step += 1;

        if outcome.saturated && state.mass.m_sand <= 0.0 {
            state.empty_streak += 1;
        } else {
            state.empty_streak = 0;
        }
        if cause.is_none() && state.empty_streak >= cfg.uncontrollable_steps {
            cause = Some(TerminationCause::Uncontrollable);
        }
        let terminated = cause.is_some();
        let truncated = !terminated && state.step >= cfg.max_steps;

        let distance = distance_to_target(cfg, state.x, state.y);
        let raw = raw_observation(cfg, &state, &self.initial_mass);
        let result = StepResult {
            observation: raw.map(|v| v.clamp(-1.0, 1.0)),
            reward: reward(cfg, distance),
            terminated,
            truncated,
            cause,
            diagnostics: Diagnostics {
                time: state.time,
                x: state.x,
                y: state.y,
                altitude: state.vertical.altitude,
                ascent_rate: state.vertical.rate,
                n_helium: state.mass.n_helium,
                m_sand: state.mass.m_sand,
                delta: outcome.delta,
                saturated: outcome.saturated,
                rate_limited: outcome.rate_limited,
                infeasible: outcome.infeasible,
                wind: wind_here,
                distance,
                raw_observation: raw,
            },
        };
        self.state = state;
        if terminated || truncated {
            self.phase = Phase::Finished;
        }
        Ok(result)
    }
}
