//! Secrecy-energy-efficiency optimization for a UAV jammer carrying a
//! rotatable (movable) antenna array.

pub mod angles;
pub mod ao;
pub mod ascent;
pub mod baselines;
pub mod beam;
pub mod channel;
pub mod energy;
pub mod error;
pub mod fractional;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod scenario;
pub mod trajectory;

pub use channel::BoundMode;
pub use error::{Error, Result};
pub use metrics::{see_objective, Problem, SEEReport, SolutionState};
pub use scenario::Scenario;
