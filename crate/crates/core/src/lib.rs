//! Desk-scale laboratory for an internally actuated underwater glider.
//!
//! The crate is organized around four capabilities:
//!
//! * [`vehicle`] — six-degree-of-freedom rigid-body dynamics with internal
//!   moving-mass actuation and a quasi-steady hydrodynamic load model.
//! * [`sim`] — fixed-step integration of those dynamics with zero-order-hold
//!   actuators, injectable acceleration disturbance and trajectory capture.
//! * [`sysid`] — extraction of body-frame accelerations from motion-capture
//!   logs and random-walk Metropolis-Hastings estimation of the twelve
//!   hydrodynamic coefficients.
//! * [`control`] — exact input/output linearizations of the pitch and depth
//!   channels, a sliding-mode/backstepping controller built on them, a PID
//!   baseline, and a disturbance-triggered hybrid switch between the two.
//!
//! [`scenarios`] wires these into reproducible experiments (step responses,
//! controller comparison grids, glide maneuvers, synthetic identification
//! corpora) driven by the `glider` command-line tool.
//!
//! Everything downstream of a seed is deterministic: a given configuration
//! and seed reproduce trajectories and estimation chains bit for bit, with or
//! without the `parallel` feature.

pub mod config;
pub mod control;
pub mod error;
pub mod scenarios;
pub mod sim;
pub mod sysid;
pub mod vehicle;

pub use error::{GliderError, Result};
