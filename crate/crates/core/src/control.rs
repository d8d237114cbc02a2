//! Altitude control: turns a discrete command into a helium vent or a sand
//! drop by inverting the steady-state ascent equation.
//!
//! Sand only changes the total mass, so the sand inversion is closed form.
//! Helium changes both mass and envelope volume; with `V = nRT/P` the force
//! balance is linear in `n` except through the cross-section, which is solved
//! by fixed-point iteration with the area frozen at the previous iterate.

use crate::atmosphere::AtmosphereSample;
use crate::dynamics::{self, BalloonParams, MassState};
use crate::error::{Error, Result};

pub const MOLE_TOLERANCE: f64 = 1e-9;
pub const MAX_MOLE_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    /// Vent helium.
    Down,
    /// Hold the ascent rate near zero.
    Float,
    /// Drop sand.
    Up,
}

impl Command {
    pub const ALL: [Command; 3] = [Command::Down, Command::Float, Command::Up];

    /// External action encoding: 0 = Down, 1 = Float, 2 = Up.
    pub fn index(self) -> u8 {
        match self {
            Command::Down => 0,
            Command::Float => 1,
            Command::Up => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Command> {
        Command::ALL.get(i as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::Down => "down",
            Command::Float => "float",
            Command::Up => "up",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(i) = s.parse::<u8>() {
            return Command::from_index(i)
                .ok_or_else(|| Error::Config(format!("action index {i} not in 0..=2")));
        }
        match s.to_ascii_lowercase().as_str() {
            "down" => Ok(Command::Down),
            "float" => Ok(Command::Float),
            "up" => Ok(Command::Up),
            _ => Err(Error::Config(format!("unknown command {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlConfig {
    /// Target rate for Up (m/s, > 0).
    pub v_up: f64,
    /// Target rate for Down (m/s, < 0).
    pub v_down: f64,
    /// Float acts only when |rate| exceeds this (m/s).
    pub float_band: f64,
    /// mol/s
    pub max_vent_rate: f64,
    /// kg/s
    pub max_ballast_rate: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig {
            v_up: 2.0,
            v_down: -2.0,
            float_band: 0.2,
            max_vent_rate: 0.05,
            max_ballast_rate: 0.01,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        let ordered =
            self.v_up > self.float_band && self.float_band >= 0.0 && -self.float_band > self.v_down;
        if !ordered {
            return Err(Error::Config(format!(
                "control rates must satisfy v_up > float_band >= 0 > -float_band > v_down (got {}, {}, {})",
                self.v_up, self.float_band, self.v_down
            )));
        }
        if !(self.max_vent_rate > 0.0 && self.max_ballast_rate > 0.0) {
            return Err(Error::Config("control rate limits must be positive".into()));
        }
        Ok(())
    }
}

/// Change applied to the consumables by one command. Both fields are
/// non-positive and at most one is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MassDelta {
    pub d_n_helium: f64,
    pub d_m_sand: f64,
}

impl MassDelta {
    pub fn apply(&self, state: &MassState) -> MassState {
        MassState {
            n_helium: (state.n_helium + self.d_n_helium).max(0.0),
            m_sand: (state.m_sand + self.d_m_sand).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlOutcome {
    pub delta: MassDelta,
    /// The resource the command needed was empty or ran out.
    pub saturated: bool,
    /// The per-step rate limit capped the delta.
    pub rate_limited: bool,
    /// No non-negative helium amount reaches the target rate.
    pub infeasible: bool,
}

/// Total mass that gives a steady ascent rate of `rate` at fixed volume.
pub fn required_mass_for_rate(
    density: f64,
    volume: f64,
    rate: f64,
    c_drag: f64,
    area: f64,
    g: f64,
) -> f64 {
    (density * volume * g - 0.5 * density * rate * rate.abs() * c_drag * area) / g
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoleSolution {
    pub n_helium: f64,
    pub iterations: usize,
}

/// Helium amount that gives a steady ascent rate of `rate`, given the mass of
/// everything else (`m_fixed`) and the ambient atmosphere.
pub fn required_moles_for_rate(
    params: &BalloonParams,
    m_fixed: f64,
    atmosphere: &AtmosphereSample,
    rate: f64,
) -> Result<MoleSolution> {
    let AtmosphereSample {
        temperature,
        pressure,
        density,
    } = *atmosphere;
    let g = params.g;
    // Volume per mole and net lift per mole of helium.
    let molar_volume = params.gas_constant * temperature / pressure;
    let lift_per_mole = g * (density * molar_volume - params.molar_mass_helium);
    if !(lift_per_mole > 0.0) {
        return Err(Error::Infeasible(format!(
            "displaced air per mole ({} kg) does not exceed helium molar mass",
            density * molar_volume
        )));
    }
    if !(m_fixed >= 0.0) {
        return Err(Error::Domain(format!(
            "fixed mass must be non-negative, got {m_fixed}"
        )));
    }
    let drag_per_area = 0.5 * density * rate * rate.abs() * params.c_drag;
    let solve = |n: f64| -> Result<f64> {
        let area = dynamics::cross_section_area(n * molar_volume)?;
        Ok((m_fixed * g + drag_per_area * area) / lift_per_mole)
    };
    let mut n = m_fixed * g / lift_per_mole;
    for iteration in 1..=MAX_MOLE_ITERATIONS {
        let next = solve(n)?;
        if next < 0.0 {
            return Err(Error::Infeasible(format!(
                "no non-negative helium amount gives {rate} m/s"
            )));
        }
        let change = (next - n).abs();
        n = next;
        if change <= MOLE_TOLERANCE {
            return Ok(MoleSolution {
                n_helium: n,
                iterations: iteration,
            });
        }
    }
    let residual = (solve(n)? - n).abs();
    Err(Error::NoConvergence {
        iterations: MAX_MOLE_ITERATIONS,
        residual,
    })
}

/// Steady ascent rate for the given consumables at an atmosphere sample.
pub fn steady_rate(
    params: &BalloonParams,
    state: &MassState,
    atmosphere: &AtmosphereSample,
) -> Result<f64> {
    let volume = dynamics::envelope_volume(
        state.n_helium,
        atmosphere.temperature,
        atmosphere.pressure,
        params.gas_constant,
    )?;
    let area = dynamics::cross_section_area(volume)?;
    dynamics::steady_ascent_rate(
        atmosphere.density,
        volume,
        dynamics::total_mass(params, state),
        params.c_drag,
        area,
        params.g,
    )
}

fn drop_sand(state: &MassState, wanted: f64, limit: f64) -> ControlOutcome {
    let wanted = wanted.max(0.0);
    let amount = wanted.min(limit).min(state.m_sand);
    ControlOutcome {
        delta: MassDelta {
            d_n_helium: 0.0,
            d_m_sand: -amount,
        },
        saturated: state.m_sand <= 0.0 || wanted > state.m_sand,
        rate_limited: wanted > limit,
        infeasible: false,
    }
}

fn vent_helium(
    state: &MassState,
    target: Result<MoleSolution>,
    limit: f64,
) -> Result<ControlOutcome> {
    let (wanted, infeasible) = match target {
        Ok(solution) => ((state.n_helium - solution.n_helium).max(0.0), false),
        // Any amount short of emptying the envelope is still too much lift.
        Err(Error::Infeasible(_)) => (state.n_helium, true),
        Err(e) => return Err(e),
    };
    let amount = wanted.min(limit).min(state.n_helium);
    Ok(ControlOutcome {
        delta: MassDelta {
            d_n_helium: -amount,
            d_m_sand: 0.0,
        },
        saturated: state.n_helium <= 0.0 || wanted > state.n_helium,
        rate_limited: wanted > limit,
        infeasible,
    })
}

/// Mass change for one control interval of length `dt`.
///
/// Up drops sand toward `v_up`, Down vents toward `v_down`. Float vents when
/// rising faster than the dead-band and drops sand when sinking faster than
/// it, both toward zero rate. Resource exhaustion saturates, it never errors.
pub fn apply_command(
    state: &MassState,
    command: Command,
    atmosphere: &AtmosphereSample,
    current_rate: f64,
    params: &BalloonParams,
    config: &ControlConfig,
    dt: f64,
) -> Result<ControlOutcome> {
    let volume = dynamics::envelope_volume(
        state.n_helium,
        atmosphere.temperature,
        atmosphere.pressure,
        params.gas_constant,
    )?;
    let area = dynamics::cross_section_area(volume)?;
    let mass = dynamics::total_mass(params, state);
    let m_fixed = params.structural_mass() + state.m_sand;
    let sand_limit = config.max_ballast_rate * dt;
    let vent_limit = config.max_vent_rate * dt;
    let sand_toward = |rate: f64| {
        let target = required_mass_for_rate(
            atmosphere.density,
            volume,
            rate,
            params.c_drag,
            area,
            params.g,
        );
        drop_sand(state, mass - target, sand_limit)
    };
    let vent_toward = |rate: f64| {
        vent_helium(
            state,
            required_moles_for_rate(params, m_fixed, atmosphere, rate),
            vent_limit,
        )
    };
    match command {
        Command::Up => Ok(sand_toward(config.v_up)),
        Command::Down => vent_toward(config.v_down),
        Command::Float if current_rate > config.float_band => vent_toward(0.0),
        Command::Float if current_rate < -config.float_band => Ok(sand_toward(0.0)),
        Command::Float => Ok(ControlOutcome::default()),
    }
}
