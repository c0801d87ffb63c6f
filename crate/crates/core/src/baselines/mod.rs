//! Classical pulse optimizers sharing the dynamics stack: gradient
//! ascent on finite-difference gradients, and a binary genetic search
//! over bang-bang sequences.

mod ga;
mod gd;
mod objective;

pub use ga::{ga_optimize, GaConfig, GaOutcome};
pub use gd::{fd_gradient, gd_optimize, GdConfig, GdOutcome};
pub use objective::PulseObjective;
