//! Provably safe motion planning for axis-decoupled double integrators on a
//! box grid: workspace abstraction, motion primitives, maneuver and product
//! automata, worst-case planning and closed-loop simulation.

pub mod bench;
pub mod cli;
pub mod error;
pub mod maneuver;
pub mod pipeline;
pub mod planner;
pub mod primitives;
pub mod product;
pub mod render;
pub mod runtime;
pub mod scenario;
pub mod workspace;

pub use error::{Error, Result};
