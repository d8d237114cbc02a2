//! Fixed-step explicit integrators for the two-state vertical system
//! `[altitude, ascent rate]`.

use std::ops::{Add, Mul};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector {
    /// m
    pub altitude: f64,
    /// m/s, positive up
    pub rate: f64,
}

impl StateVector {
    pub const fn new(altitude: f64, rate: f64) -> Self {
        StateVector { altitude, rate }
    }

    pub fn is_finite(&self) -> bool {
        self.altitude.is_finite() && self.rate.is_finite()
    }
}

impl Add for StateVector {
    type Output = StateVector;

    fn add(self, rhs: StateVector) -> StateVector {
        StateVector::new(self.altitude + rhs.altitude, self.rate + rhs.rate)
    }
}

impl Mul<StateVector> for f64 {
    type Output = StateVector;

    fn mul(self, rhs: StateVector) -> StateVector {
        StateVector::new(self * rhs.altitude, self * rhs.rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    Euler,
    #[default]
    Rk4,
}

/// Right-hand side `dy/dt = f(t, y)`. Must be pure.
pub trait Derivative {
    fn eval(&self, t: f64, y: StateVector) -> Result<StateVector>;
}

impl<F> Derivative for F
where
    F: Fn(f64, StateVector) -> Result<StateVector>,
{
    fn eval(&self, t: f64, y: StateVector) -> Result<StateVector> {
        self(t, y)
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "step size must be positive and finite, got {dt}"
        )))
    }
}

fn finite(t: f64, y: StateVector) -> Result<StateVector> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::IntegrationBlowup { t })
    }
}

pub fn euler_step<F: Derivative + ?Sized>(
    f: &F,
    t: f64,
    y: StateVector,
    dt: f64,
) -> Result<StateVector> {
    check_dt(dt)?;
    let k = finite(t, f.eval(t, y)?)?;
    finite(t + dt, y + dt * k)
}

pub fn rk4_step<F: Derivative + ?Sized>(
    f: &F,
    t: f64,
    y: StateVector,
    dt: f64,
) -> Result<StateVector> {
    check_dt(dt)?;
    let half = 0.5 * dt;
    let k1 = finite(t, f.eval(t, y)?)?;
    let k2 = finite(t + half, f.eval(t + half, y + half * k1)?)?;
    let k3 = finite(t + half, f.eval(t + half, y + half * k2)?)?;
    let k4 = finite(t + dt, f.eval(t + dt, y + dt * k3)?)?;
    finite(t + dt, y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

pub fn step<F: Derivative + ?Sized>(
    scheme: Scheme,
    f: &F,
    t: f64,
    y: StateVector,
    dt: f64,
) -> Result<StateVector> {
    match scheme {
        Scheme::Euler => euler_step(f, t, y, dt),
        Scheme::Rk4 => rk4_step(f, t, y, dt),
    }
}

/// Marches from `t0` to `t1` with a fixed step, shortening the last step so
/// the trajectory ends exactly on `t1`. Both endpoints are included.
pub fn integrate<F: Derivative + ?Sized>(
    f: &F,
    y0: StateVector,
    t0: f64,
    t1: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<Vec<(f64, StateVector)>> {
    check_dt(dt)?;
    if !(t1 > t0) {
        return Err(Error::Domain(format!(
            "integration interval [{t0}, {t1}] is empty"
        )));
    }
    let mut trajectory = vec![(t0, finite(t0, y0)?)];
    let mut t = t0;
    let mut y = y0;
    let mut k: u64 = 0;
    loop {
        k += 1;
        // Times are computed from t0 rather than accumulated.
        let mut next = t0 + k as f64 * dt;
        let last = next >= t1 - 1e-9 * dt;
        if last {
            next = t1;
        }
        y = step(scheme, f, t, y, next - t)?;
        t = next;
        trajectory.push((t, y));
        if last {
            return Ok(trajectory);
        }
    }
}

/// Final state only, without storing the trajectory.
pub fn integrate_to<F: Derivative + ?Sized>(
    f: &F,
    y0: StateVector,
    t0: f64,
    t1: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<StateVector> {
    check_dt(dt)?;
    if !(t1 > t0) {
        return Err(Error::Domain(format!(
            "integration interval [{t0}, {t1}] is empty"
        )));
    }
    let mut t = t0;
    let mut y = finite(t0, y0)?;
    let mut k: u64 = 0;
    loop {
        k += 1;
        let next = t0 + k as f64 * dt;
        if next >= t1 - 1e-9 * dt {
            return step(scheme, f, t, y, t1 - t);
        }
        y = step(scheme, f, t, y, next - t)?;
        t = next;
    }
}
