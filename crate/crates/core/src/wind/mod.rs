//! Gridded horizontal wind and position advection.
//!
//! Components follow the meteorological convention: `u` moves the balloon
//! along x, `v` along y.

mod format;
mod synth;

pub use format::{load_windfield, parse_windfield, write_windfield};
pub use synth::{synthesize, Band, SynthGrid, SynthSpec, WindSynth};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WindVector {
    /// m/s along x
    pub u: f64,
    /// m/s along y
    pub v: f64,
}

impl WindVector {
    pub const fn new(u: f64, v: f64) -> Self {
        WindVector { u, v }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    Nearest,
    #[default]
    Trilinear,
}

impl Interpolation {
    pub fn as_str(self) -> &'static str {
        match self {
            Interpolation::Nearest => "nearest",
            Interpolation::Trilinear => "trilinear",
        }
    }
}

impl std::str::FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Interpolation::Nearest),
            "trilinear" => Ok(Interpolation::Trilinear),
            other => Err(Error::Config(format!(
                "unknown interpolation mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    HoldEdge,
    Error,
}

/// Axis index order used throughout: x, y, altitude, time.
pub const AXIS_NAMES: [&str; 4] = ["x", "y", "h", "t"];

/// Regular grid of wind vectors over (x, y, altitude) and optionally time.
///
/// Without a time axis the time count is 1 and queries ignore `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindField {
    origin: [f64; 4],
    spacing: [f64; 4],
    counts: [usize; 4],
    has_time: bool,
    data: Vec<WindVector>,
    interpolation: Interpolation,
    boundary: [Boundary; 4],
}

/// Grid geometry used to build a [`WindField`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: [f64; 4],
    pub spacing: [f64; 4],
    pub counts: [usize; 4],
    pub has_time: bool,
}

impl WindField {
    /// Builds a field from node values in row-major order (x slowest, time fastest).
    pub fn new(
        grid: GridSpec,
        data: Vec<WindVector>,
        interpolation: Interpolation,
    ) -> Result<Self> {
        let GridSpec {
            origin,
            mut spacing,
            mut counts,
            has_time,
        } = grid;
        if !has_time {
            counts[3] = 1;
            spacing[3] = 1.0;
        }
        for axis in 0..4 {
            if !(spacing[axis] > 0.0 && spacing[axis].is_finite() && origin[axis].is_finite()) {
                return Err(Error::Config(format!(
                    "{} axis needs finite origin and positive spacing",
                    AXIS_NAMES[axis]
                )));
            }
            let min_nodes = if axis < 3 { 2 } else { 1 };
            if counts[axis] < min_nodes {
                return Err(Error::Config(format!(
                    "{} axis needs at least {min_nodes} nodes, got {}",
                    AXIS_NAMES[axis], counts[axis]
                )));
            }
        }
        let expected: usize = counts.iter().product();
        if data.len() != expected {
            return Err(Error::Config(format!(
                "wind grid expects {expected} nodes, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|w| !w.is_finite()) {
            return Err(Error::Config(format!("non-finite wind vector at node {i}")));
        }
        Ok(WindField {
            origin,
            spacing,
            counts,
            has_time,
            data,
            interpolation,
            boundary: [
                Boundary::Error,
                Boundary::Error,
                Boundary::HoldEdge,
                Boundary::HoldEdge,
            ],
        })
    }

    pub fn with_boundary(mut self, horizontal: Boundary, vertical: Boundary) -> Self {
        self.boundary[0] = horizontal;
        self.boundary[1] = horizontal;
        self.boundary[2] = vertical;
        self
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            origin: self.origin,
            spacing: self.spacing,
            counts: self.counts,
            has_time: self.has_time,
        }
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn nodes(&self) -> &[WindVector] {
        &self.data
    }

    fn index(&self, idx: [usize; 4]) -> usize {
        ((idx[0] * self.counts[1] + idx[1]) * self.counts[2] + idx[2]) * self.counts[3] + idx[3]
    }

    pub fn node(&self, ix: usize, iy: usize, ih: usize, it: usize) -> WindVector {
        self.data[self.index([ix, iy, ih, it])]
    }

    /// Coordinate of a node along one axis.
    pub fn node_coordinate(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing[axis]
    }

    /// Fractional grid position along an axis, after applying the boundary rule.
    fn grid_position(&self, axis: usize, value: f64) -> Result<f64> {
        let count = self.counts[axis];
        if count == 1 {
            return Ok(0.0);
        }
        let pos = (value - self.origin[axis]) / self.spacing[axis];
        let top = (count - 1) as f64;
        if (0.0..=top).contains(&pos) {
            return Ok(pos);
        }
        match self.boundary[axis] {
            Boundary::HoldEdge if !pos.is_nan() => Ok(pos.clamp(0.0, top)),
            _ => Err(Error::OutOfWindDomain {
                axis: AXIS_NAMES[axis],
                value,
            }),
        }
    }

    pub fn wind_at(&self, x: f64, y: f64, h: f64, t: Option<f64>) -> Result<WindVector> {
        let coords = [x, y, h, t.unwrap_or(self.origin[3])];
        let mut pos = [0.0; 4];
        for axis in 0..4 {
            pos[axis] = self.grid_position(axis, coords[axis])?;
        }
        match self.interpolation {
            Interpolation::Nearest => {
                let mut idx = [0usize; 4];
                for axis in 0..4 {
                    idx[axis] = (pos[axis].round() as usize).min(self.counts[axis] - 1);
                }
                Ok(self.data[self.index(idx)])
            }
            Interpolation::Trilinear => Ok(self.multilinear(pos)),
        }
    }

    fn multilinear(&self, pos: [f64; 4]) -> WindVector {
        let mut base = [0usize; 4];
        let mut frac = [0.0; 4];
        for axis in 0..4 {
            if self.counts[axis] == 1 {
                continue;
            }
            let i = (pos[axis].floor() as usize).min(self.counts[axis] - 2);
            base[axis] = i;
            frac[axis] = pos[axis] - i as f64;
        }
        let mut out = WindVector::default();
        for corner in 0..16usize {
            let mut weight = 1.0;
            let mut idx = base;
            for axis in 0..4 {
                let upper = corner >> axis & 1 == 1;
                if self.counts[axis] == 1 {
                    if upper {
                        weight = 0.0;
                    }
                    continue;
                }
                if upper {
                    weight *= frac[axis];
                    idx[axis] += 1;
                } else {
                    weight *= 1.0 - frac[axis];
                }
            }
            if weight != 0.0 {
                let w = self.data[self.index(idx)];
                out.u += weight * w.u;
                out.v += weight * w.v;
            }
        }
        out
    }
}

/// Moves a horizontal position with the wind for `dt` seconds.
pub fn advect(x: f64, y: f64, wind: WindVector, dt: f64) -> (f64, f64) {
    (x + wind.u * dt, y + wind.v * dt)
}
