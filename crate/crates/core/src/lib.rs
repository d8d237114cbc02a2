//! High-altitude balloon flight simulator.
//!
//! The vertical model balances buoyancy, quadratic drag and weight for a
//! spherical envelope whose volume follows the ideal gas law in a US Standard
//! Atmosphere 1976. Horizontal motion is pure advection by a gridded wind
//! field. A vent/ballast controller maps discrete commands onto helium and
//! sand changes, and [`env::Env`] packages everything as a seeded
//! reset/step environment.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atmosphere;
pub mod cli;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod integrate;
pub mod policy;
pub mod trajectory;
pub mod wind;

pub use error::{Error, Result};
