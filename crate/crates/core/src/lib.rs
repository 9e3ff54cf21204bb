//! Expected escape times from the unit ball.
//!
//! The crate evaluates the mean time a unit-speed path needs to leave the
//! unit ball when started from a uniform point, checks numerically that the
//! straight line is optimal, and verifies the planar Kneser–Poulsen
//! inequalities that optimality rests on.

pub mod error;
pub mod geom;
pub mod kp;
pub mod optimize;
pub mod rng;

pub use error::{Error, Result};
pub mod cli;
pub mod closedform;
pub mod escape;
pub mod paths;
pub mod quadrature;
