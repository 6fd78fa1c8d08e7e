//! Geometric phases in the unitary and dissipative Jaynes-Cummings model.
//!
//! The crate covers the closed JC doublet (spectrum, Berry phase, exact
//! propagation and the kinematic geometric phase), the three-level master
//! equation with photon leakage and incoherent pumping, the mixed-state
//! geometric phase of its trajectories, Bloch-sphere geometry, and the
//! config-driven harness that writes the CSV tables behind every figure.

pub mod bloch;
pub mod config;
pub mod csv;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod lindblad;
pub mod mixed;
pub mod model;
pub mod phase;
pub mod unitary;

pub use error::{Error, Result};
