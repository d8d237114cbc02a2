//! Synthetic wind fields for tests, demos and sweeps.
//!
//! Spec strings have the form `kind:params:seed`, where `params` is a
//! comma-separated `key=value` list (possibly empty):
//!
//! ```text
//! constant:u=3,v=0:0
//! layered-shear:bands=0/10000/5/0;10000/20000/-5/0:0
//! sinusoidal:amplitude=8,wavelength=6000,mean_u=0,mean_v=0:7
//! random-columns:speed=10,columns=5:42
//! ```
//!
//! Every kind also accepts the grid keys `extent`, `h_max` and `dh`.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GridSpec, Interpolation, WindField, WindVector};
use crate::error::{Error, Result};

/// Altitude band `[h_min, h_max)` with a constant wind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub h_min: f64,
    pub h_max: f64,
    pub wind: WindVector,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindSynth {
    Constant(WindVector),
    /// Piecewise constant by altitude. Nodes below the first band take its
    /// value, nodes above the last band take the last one.
    LayeredShear(Vec<Band>),
    /// `u = mean_u + amplitude·sin(2πh/λ + φ)`, `v = mean_v + amplitude·cos(2πh/λ + φ)`
    /// with the phase φ drawn from the seed.
    Sinusoidal {
        amplitude: f64,
        wavelength: f64,
        mean: WindVector,
    },
    /// Independent uniform random profiles on a `columns × columns` horizontal grid.
    RandomColumns {
        speed: f64,
        columns: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthGrid {
    /// Half-width of the square horizontal domain centred on the origin (m).
    pub extent: f64,
    pub h_max: f64,
    pub dh: f64,
}

impl Default for SynthGrid {
    fn default() -> Self {
        SynthGrid {
            extent: 2_000_000.0,
            h_max: 32_000.0,
            dh: 500.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub kind: WindSynth,
    pub grid: SynthGrid,
    pub seed: u64,
}

impl SynthSpec {
    pub fn build(&self) -> Result<WindField> {
        synthesize(&self.kind, &self.grid, self.seed)
    }
}

fn validate_bands(bands: &[Band]) -> Result<()> {
    if bands.is_empty() {
        return Err(Error::Config(
            "layered-shear needs at least one band".into(),
        ));
    }
    for band in bands {
        if !(band.h_min < band.h_max) || !band.wind.is_finite() {
            return Err(Error::Config(format!(
                "invalid band [{}, {})",
                band.h_min, band.h_max
            )));
        }
    }
    for pair in bands.windows(2) {
        if pair[1].h_min != pair[0].h_max {
            return Err(Error::Config(format!(
                "bands must be contiguous and sorted: [{}, {}) then [{}, {})",
                pair[0].h_min, pair[0].h_max, pair[1].h_min, pair[1].h_max
            )));
        }
    }
    Ok(())
}

pub fn synthesize(kind: &WindSynth, grid: &SynthGrid, seed: u64) -> Result<WindField> {
    if !(grid.extent > 0.0 && grid.h_max > 0.0 && grid.dh > 0.0) {
        return Err(Error::Config(
            "synthetic grid needs positive extent, h_max and dh".into(),
        ));
    }
    let levels = (grid.h_max / grid.dh).ceil() as usize + 1;
    let columns = match kind {
        WindSynth::RandomColumns { columns, .. } => {
            if *columns < 2 {
                return Err(Error::Config("random-columns needs columns >= 2".into()));
            }
            *columns
        }
        _ => 2,
    };
    let spec = GridSpec {
        origin: [-grid.extent, -grid.extent, 0.0, 0.0],
        spacing: [
            2.0 * grid.extent / (columns - 1) as f64,
            2.0 * grid.extent / (columns - 1) as f64,
            grid.dh,
            1.0,
        ],
        counts: [columns, columns, levels, 1],
        has_time: false,
    };
    let altitude = |ih: usize| ih as f64 * grid.dh;
    let profile: Vec<WindVector> = match kind {
        WindSynth::Constant(w) => vec![*w; levels],
        WindSynth::LayeredShear(bands) => {
            validate_bands(bands)?;
            (0..levels)
                .map(|ih| {
                    let h = altitude(ih);
                    bands
                        .iter()
                        .find(|b| h < b.h_max)
                        .unwrap_or(&bands[bands.len() - 1])
                        .wind
                })
                .collect()
        }
        WindSynth::Sinusoidal {
            amplitude,
            wavelength,
            mean,
        } => {
            if !(*wavelength > 0.0) {
                return Err(Error::Config(
                    "sinusoidal wavelength must be positive".into(),
                ));
            }
            let phase = ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..2.0 * PI);
            (0..levels)
                .map(|ih| {
                    let arg = 2.0 * PI * altitude(ih) / wavelength + phase;
                    WindVector::new(
                        mean.u + amplitude * arg.sin(),
                        mean.v + amplitude * arg.cos(),
                    )
                })
                .collect()
        }
        WindSynth::RandomColumns { speed, .. } => {
            if !(*speed >= 0.0) {
                return Err(Error::Config(
                    "random-columns speed must be non-negative".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = (0..columns * columns * levels)
                .map(|_| {
                    let u = if *speed > 0.0 {
                        rng.gen_range(-speed..=*speed)
                    } else {
                        0.0
                    };
                    let v = if *speed > 0.0 {
                        rng.gen_range(-speed..=*speed)
                    } else {
                        0.0
                    };
                    WindVector::new(u, v)
                })
                .collect();
            return WindField::new(spec, data, Interpolation::Trilinear);
        }
    };
    let data = (0..columns * columns)
        .flat_map(|_| profile.iter().copied())
        .collect();
    WindField::new(spec, data, Interpolation::Trilinear)
}

fn number(key: &str, value: &str) -> Result<f64> {
    value.parse().map_err(|_| {
        Error::Config(format!(
            "wind-synth {key}: expected a number, got {value:?}"
        ))
    })
}

fn parse_bands(value: &str) -> Result<Vec<Band>> {
    value
        .split(';')
        .map(|band| {
            let parts: Vec<&str> = band.split('/').collect();
            if parts.len() != 4 {
                return Err(Error::Config(format!(
                    "band {band:?} must be h_min/h_max/u/v"
                )));
            }
            Ok(Band {
                h_min: number("bands", parts[0])?,
                h_max: number("bands", parts[1])?,
                wind: WindVector::new(number("bands", parts[2])?, number("bands", parts[3])?),
            })
        })
        .collect()
}

impl FromStr for SynthSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.splitn(3, ':');
        let kind = parts.next().unwrap_or_default();
        let params = parts.next().unwrap_or_default();
        let seed = match parts.next() {
            Some(seed) => seed.parse().map_err(|_| {
                Error::Config(format!("wind-synth seed must be an integer, got {seed:?}"))
            })?,
            None => 0,
        };
        let mut grid = SynthGrid::default();
        let mut keys: Vec<(&str, &str)> = Vec::new();
        for item in params.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::Config(format!("wind-synth parameter {item:?} is not key=value"))
            })?;
            match key {
                "extent" => grid.extent = number(key, value)?,
                "h_max" => grid.h_max = number(key, value)?,
                "dh" => grid.dh = number(key, value)?,
                _ => keys.push((key, value)),
            }
        }
        let mut take = |name: &str, default: Option<f64>| -> Result<f64> {
            match keys.iter().position(|(k, _)| *k == name) {
                Some(i) => number(name, keys.remove(i).1),
                None => {
                    default.ok_or_else(|| Error::Config(format!("wind-synth {kind} needs {name}=")))
                }
            }
        };
        let synth = match kind {
            "constant" => WindSynth::Constant(WindVector::new(
                take("u", Some(0.0))?,
                take("v", Some(0.0))?,
            )),
            "sinusoidal" => WindSynth::Sinusoidal {
                amplitude: take("amplitude", Some(10.0))?,
                wavelength: take("wavelength", Some(8000.0))?,
                mean: WindVector::new(take("mean_u", Some(0.0))?, take("mean_v", Some(0.0))?),
            },
            "random-columns" => {
                let speed = take("speed", Some(10.0))?;
                let columns = take("columns", Some(5.0))?;
                if columns.fract() != 0.0 || columns < 2.0 {
                    return Err(Error::Config(format!(
                        "random-columns columns must be an integer >= 2, got {columns}"
                    )));
                }
                WindSynth::RandomColumns {
                    speed,
                    columns: columns as usize,
                }
            }
            "layered-shear" => {
                let i = keys
                    .iter()
                    .position(|(k, _)| *k == "bands")
                    .ok_or_else(|| Error::Config("wind-synth layered-shear needs bands=".into()))?;
                let bands = parse_bands(keys.remove(i).1)?;
                validate_bands(&bands)?;
                WindSynth::LayeredShear(bands)
            }
            other => return Err(Error::Config(format!("unknown wind-synth kind {other:?}"))),
        };
        if let Some((key, _)) = keys.first() {
            return Err(Error::Config(format!(
                "unknown wind-synth parameter {key:?} for {kind}"
            )));
        }
        Ok(SynthSpec {
            kind: synth,
            grid,
            seed,
        })
    }
}
