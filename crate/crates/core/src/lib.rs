//! Relativistic (Klein-Gordon) spin-0 particle in a one-dimensional square
//! well: bound states, the multiple scattering expansion of the stationary
//! solutions, wavepacket evolution built from it, and an independent
//! finite-difference solver used as a cross-check.

pub mod boundstates;
pub mod error;
pub mod fdtd;
pub mod kinematics;
pub mod mse;
mod roots;
pub mod snapshot;
pub mod wavepacket;

pub use error::{Error, Result};
pub use kinematics::{ModeSolution, Regime, Region, UnitSystem, WellConfig};
