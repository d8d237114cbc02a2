//! Scripted policies for driving episodes from the command line.
//!
//! Spec strings:
//!
//! * `constant:<up|down|float|0|1|2>`
//! * `altitude-hold:<target_m>[:<hysteresis_m>]` (hysteresis defaults to 250 m)
//! * `random[:<seed>]` (uniform over the three commands; the episode seed is used when omitted)
//! * `replay:<path>`, a file of one action per line or a trajectory CSV with an `action` column

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::Command;
use crate::env::EnvState;
use crate::error::{Error, Result};

pub const DEFAULT_HYSTERESIS: f64 = 250.0;

#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Constant(Command),
    AltitudeHold { target: f64, hysteresis: f64 },
    Random { seed: Option<u64> },
    Replay(PathBuf),
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let num = |v: &str, what: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("policy {kind}: bad {what} {v:?}")))
        };
        match kind {
            "constant" => Ok(PolicySpec::Constant(rest.parse()?)),
            "altitude-hold" => {
                let (target, hysteresis) = match rest.split_once(':') {
                    Some((t, h)) => (num(t, "target")?, num(h, "hysteresis")?),
                    None => (num(rest, "target")?, DEFAULT_HYSTERESIS),
                };
                if !(hysteresis > 0.0) {
                    return Err(Error::Config(format!("altitude-hold hysteresis must be positive, got {hysteresis}")));
                }
                Ok(PolicySpec::AltitudeHold { target, hysteresis })
            }
            "random" if rest.is_empty() => Ok(PolicySpec::Random { seed: None }),
            "random" => Ok(PolicySpec::Random {
                seed: Some(
                    rest.parse()
                        .map_err(|_| Error::Config(format!("random policy seed must be an integer, got {rest:?}")))?,
                ),
            }),
            "replay" if !rest.is_empty() => Ok(PolicySpec::Replay(PathBuf::from(rest))),
            _ => Err(Error::Config(format!(
                "unknown policy {s:?}; expected constant:<cmd>, altitude-hold:<m>[:<m>], random[:<seed>] or replay:<path>"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Policy {
    Constant(Command),
    AltitudeHold { target: f64, hysteresis: f64 },
    Random(Box<ChaCha8Rng>),
    Replay { actions: Vec<Command>, next: usize },
}

impl Policy {
    /// Instantiates a policy for one episode.
    pub fn build(spec: &PolicySpec, episode_seed: u64) -> Result<Self> {
        Ok(match spec {
            PolicySpec::Constant(c) => Policy::Constant(*c),
            PolicySpec::AltitudeHold { target, hysteresis } => Policy::AltitudeHold {
                target: *target,
                hysteresis: *hysteresis,
            },
            PolicySpec::Random { seed } => Policy::Random(Box::new(ChaCha8Rng::seed_from_u64(
                seed.unwrap_or(episode_seed),
            ))),
            PolicySpec::Replay(path) => Policy::Replay {
                actions: load_actions(path)?,
                next: 0,
            },
        })
    }

    pub fn act(&mut self, state: &EnvState) -> Result<Command> {
        match self {
            Policy::Constant(c) => Ok(*c),
            Policy::AltitudeHold { target, hysteresis } => {
                let h = state.vertical.altitude;
                Ok(if h < *target - *hysteresis {
                    Command::Up
                } else if h > *target + *hysteresis {
                    Command::Down
                } else {
                    Command::Float
                })
            }
            Policy::Random(rng) => Ok(Command::ALL[rng.gen_range(0..Command::ALL.len())]),
            Policy::Replay { actions, next } => {
                let action = actions.get(*next).copied().ok_or_else(|| {
                    Error::Protocol(format!("replay exhausted after {} actions", actions.len()))
                })?;
                *next += 1;
                Ok(action)
            }
        }
    }
}

/// Reads a replay file: either one action per line (`#` comments allowed) or
/// a trajectory CSV whose header contains an `action` column.
pub fn load_actions(path: &Path) -> Result<Vec<Command>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_actions(&text)
}

pub fn parse_actions(text: &str) -> Result<Vec<Command>> {
    let mut lines = text.lines().enumerate().peekable();
    let column = match lines.peek() {
        Some((_, header)) if header.split(',').any(|c| c.trim() == "action") => {
            let col = header.split(',').position(|c| c.trim() == "action");
            lines.next();
            col
        }
        _ => None,
    };
    let mut actions = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = match column {
            Some(c) => line.split(',').nth(c).ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "row has no action column".into(),
            })?,
            None => line,
        };
        let command = field.parse().map_err(|e: Error| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        actions.push(command);
    }
    Ok(actions)
}
